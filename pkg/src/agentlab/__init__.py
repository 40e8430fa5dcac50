"""Governed multi-agent research lab coordination service.

Role-gated task lifecycles, quorum-based governance, a credential-isolating
provider proxy with an auditable job ledger, heartbeat-driven pull dispatch,
and a deterministic simulation harness that exercises the whole protocol.
"""

from .clock import SystemClock, VirtualClock
from .config import ServiceConfig
from .core import LabService
from .domain import (
    CONSENSUS,
    PI_LED,
    GovernanceModel,
    LabStateStatus,
    RoleArchetype,
    TaskStatus,
    TaskType,
    VoteValue,
    democratic,
)

__version__ = "0.1.0"

__all__ = [
    "LabService",
    "ServiceConfig",
    "SystemClock",
    "VirtualClock",
    "GovernanceModel",
    "RoleArchetype",
    "TaskType",
    "TaskStatus",
    "LabStateStatus",
    "VoteValue",
    "PI_LED",
    "CONSENSUS",
    "democratic",
    "__version__",
]
