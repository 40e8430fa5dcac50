from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentlab.domain import (
    CONSENSUS,
    PI_LED,
    GovernanceKind,
    GovernanceModel,
    LabStateStatus,
    RoleArchetype,
    VoteValue,
    democratic,
)
from agentlab.errors import (
    AlreadyMember,
    IllegalStateTransition,
    InvalidRequest,
    NotPI,
    UnknownAgent,
)
from agentlab.governance import GovernanceOutcome, evaluate_vote, quorum_threshold

from conftest import make_service, make_world


# ---------------------------------------------------------------------------
# the quorum engine against a brute-force oracle
#
# The oracle restates the voting rule directly from its prose definition
# using rational comparisons, never the max/ceil formulation the engine uses.


def oracle(approvals: int, rejections: int, n: int, governance: GovernanceModel) -> str:
    if governance.kind is GovernanceKind.CONSENSUS:
        if rejections > 0:
            return "rejected"
        if approvals >= 2 and approvals >= n:
            return "accepted"
        return "pending"
    substantive = approvals + rejections
    if substantive < 2:
        return "pending"
    fraction = (
        Fraction(1, 2) if governance.kind is GovernanceKind.PI_LED else governance.quorum_fraction
    )
    if Fraction(substantive) < fraction * n:
        return "pending"
    if approvals > rejections:
        return "accepted"
    if rejections > approvals:
        return "rejected"
    return "pending"


def ballots_for(approvals: int, rejections: int, abstentions: int) -> dict:
    ballots = {}
    index = 0
    for value, count in (
        (VoteValue.APPROVE, approvals),
        (VoteValue.REJECT, rejections),
        (VoteValue.ABSTAIN, abstentions),
    ):
        for _ in range(count):
            ballots[f"agent-{index}"] = value
            index += 1
    return ballots


ALL_MODELS = [
    PI_LED,
    CONSENSUS,
    democratic("1/3"),
    democratic("1/2"),
    democratic("2/3"),
    democratic("3/4"),
    democratic("1"),
]


@pytest.mark.parametrize("governance", ALL_MODELS, ids=lambda g: str(g.to_dict()))
def test_engine_agrees_with_oracle_for_all_small_ballot_multisets(governance):
    checked = 0
    for n in range(8):
        for approvals in range(8):
            for rejections in range(8 - approvals):
                for abstentions in range(8 - approvals - rejections):
                    expected = oracle(approvals, rejections, n, governance)
                    outcome = evaluate_vote(
                        ballots_for(approvals, rejections, abstentions), n, governance
                    )
                    assert outcome.value == expected, (
                        governance.to_dict(),
                        n,
                        approvals,
                        rejections,
                        abstentions,
                    )
                    checked += 1
    assert checked == 8 * 120


def test_quorum_threshold_uses_exact_rationals():
    # ceil(2/3 * 4) = 3, not the 2.67 a float floor would give
    assert quorum_threshold(democratic("2/3"), 4) == 3
    assert quorum_threshold(democratic("2/3"), 3) == 2
    assert quorum_threshold(PI_LED, 0) == 2
    assert quorum_threshold(PI_LED, 4) == 2
    assert quorum_threshold(PI_LED, 5) == 3
    # 1/10 of 30 is exactly 3; a float 0.1*30 = 3.0000000000000004 would ceil to 4
    assert quorum_threshold(democratic(Fraction(1, 10)), 30) == 3


def test_spec_quorum_examples():
    assert (
        evaluate_vote(ballots_for(2, 1, 0), 4, PI_LED) is GovernanceOutcome.ACCEPTED
    )
    assert evaluate_vote(ballots_for(1, 0, 0), 2, PI_LED) is GovernanceOutcome.PENDING
    assert evaluate_vote(ballots_for(1, 1, 0), 2, PI_LED) is GovernanceOutcome.PENDING


@st.composite
def ballot_maps(draw):
    agents = [f"agent-{i}" for i in range(7)]
    return draw(
        st.dictionaries(
            st.sampled_from(agents), st.sampled_from(list(VoteValue)), max_size=7
        )
    )


@settings(max_examples=300, deadline=None)
@given(
    ballots=ballot_maps(),
    n=st.integers(min_value=0, max_value=7),
    governance=st.sampled_from(ALL_MODELS),
)
def test_abstentions_never_change_the_outcome(ballots, n, governance):
    base = evaluate_vote(ballots, n, governance)
    extended = dict(ballots)
    extended["extra-abstainer"] = VoteValue.ABSTAIN
    assert evaluate_vote(extended, n, governance) == base


@settings(max_examples=300, deadline=None)
@given(
    ballots=ballot_maps(),
    n=st.integers(min_value=0, max_value=7),
    governance=st.sampled_from(ALL_MODELS),
)
def test_extra_approval_never_unaccepts(ballots, n, governance):
    if evaluate_vote(ballots, n, governance) is GovernanceOutcome.ACCEPTED:
        extended = dict(ballots)
        extended["extra-approver"] = VoteValue.APPROVE
        assert evaluate_vote(extended, n, governance) is GovernanceOutcome.ACCEPTED


@settings(max_examples=300, deadline=None)
@given(
    ballots=ballot_maps(),
    n=st.integers(min_value=0, max_value=7),
    governance=st.sampled_from(ALL_MODELS),
)
def test_extra_rejection_never_unrejects(ballots, n, governance):
    if evaluate_vote(ballots, n, governance) is GovernanceOutcome.REJECTED:
        extended = dict(ballots)
        extended["extra-rejector"] = VoteValue.REJECT
        assert evaluate_vote(extended, n, governance) is GovernanceOutcome.REJECTED


# ---------------------------------------------------------------------------
# labs, membership, states


def test_create_lab_makes_pi_sole_member(world):
    assert world.lab.pi_agent_id == world.pi.agent_id
    assert world.lab.member_roles[world.pi.agent_id] is RoleArchetype.PRINCIPAL_INVESTIGATOR


def test_create_lab_unknown_pi():
    svc, _ = make_service()
    _, token = svc.register_agent("someone")
    actor = svc.authenticate(token)
    with pytest.raises(UnknownAgent):
        svc.create_lab(actor, "lab", "agent-999", PI_LED)


def test_add_member_permission_and_idempotence(world):
    svc = world.svc
    with pytest.raises(NotPI):
        svc.add_member(
            world.scout.principal, world.lab.lab_id, world.outsider.agent_id, RoleArchetype.SCOUT
        )
    with pytest.raises(AlreadyMember):
        svc.add_member(
            world.pi.principal, world.lab.lab_id, world.scout.agent_id, RoleArchetype.SCOUT
        )
    with pytest.raises(InvalidRequest):
        svc.add_member(
            world.pi.principal,
            world.lab.lab_id,
            world.outsider.agent_id,
            RoleArchetype.PRINCIPAL_INVESTIGATOR,
        )


def test_state_versions_increase_gapless(world):
    svc = world.svc
    second = svc.create_state(world.pi.principal, world.lab.lab_id, "v2", "h", [])
    third = svc.create_state(world.pi.principal, world.lab.lab_id, "v3", "h", [])
    assert (world.state.version, second.version, third.version) == (1, 2, 3)


def test_only_pi_creates_states(world):
    with pytest.raises(NotPI):
        world.svc.create_state(world.critic.principal, world.lab.lab_id, "x", "h", [])


def test_activate_pivots_previous_state(world):
    svc = world.svc
    second = svc.create_state(world.pi.principal, world.lab.lab_id, "v2", "h", [])
    svc.activate_state(world.pi.principal, second.state_id)
    assert svc.store.lab_state(world.state.state_id).status is LabStateStatus.PIVOTED
    assert svc.store.lab_state(second.state_id).status is LabStateStatus.ACTIVE
    active = [
        s
        for s in svc.store.lab_states.values()
        if s.lab_id == world.lab.lab_id and s.status is LabStateStatus.ACTIVE
    ]
    assert len(active) == 1


def test_activate_first_state_concludes_nothing():
    world = make_world()
    svc = world.svc
    concluded = [e for e in svc.store.events if e.kind == "state_concluded"]
    assert concluded == []


def test_activate_requires_draft(world):
    svc = world.svc
    second = svc.create_state(world.pi.principal, world.lab.lab_id, "v2", "h", [])
    svc.activate_state(world.pi.principal, second.state_id)
    svc.conclude_state(world.pi.principal, second.state_id, LabStateStatus.PROVEN)
    with pytest.raises(IllegalStateTransition):
        world.svc.activate_state(world.pi.principal, second.state_id)


def test_conclude_requires_active(world):
    svc = world.svc
    draft = svc.create_state(world.pi.principal, world.lab.lab_id, "v2", "h", [])
    with pytest.raises(IllegalStateTransition):
        svc.conclude_state(world.pi.principal, draft.state_id, LabStateStatus.PROVEN)
    with pytest.raises(NotPI):
        svc.conclude_state(world.analyst.principal, world.state.state_id, LabStateStatus.PROVEN)
    svc.conclude_state(world.pi.principal, world.state.state_id, LabStateStatus.PROVEN)
    assert svc.store.lab_state(world.state.state_id).status is LabStateStatus.PROVEN


def test_conclude_rejects_non_conclusions(world):
    with pytest.raises(InvalidRequest):
        world.svc.conclude_state(
            world.pi.principal, world.state.state_id, LabStateStatus.DRAFT
        )
