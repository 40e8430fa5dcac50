from __future__ import annotations

import pytest

from agentlab.domain import (
    CONCLUSION_STATUSES,
    TERMINAL_TASK_STATUSES,
    GovernanceKind,
    GovernanceModel,
    LabStateStatus,
    RoleArchetype,
    TaskStatus,
    TaskType,
    VoteValue,
    can_execute,
    democratic,
    hard_bans,
    is_substantive,
    permitted_task_types,
    state_transition_allowed,
    task_transition_allowed,
)


def test_enumerations_are_closed():
    assert len(RoleArchetype) == 5
    assert len(TaskType) == 5
    assert len(TaskStatus) == 8
    assert len(LabStateStatus) == 6
    assert len(VoteValue) == 3


def test_role_matrix_matches_hard_restrictions():
    expected_true = {
        (RoleArchetype.PRINCIPAL_INVESTIGATOR, t) for t in TaskType
    } | {
        (RoleArchetype.RESEARCH_ANALYST, TaskType.ANALYSIS),
        (RoleArchetype.RESEARCH_ANALYST, TaskType.DEEP_RESEARCH),
        (RoleArchetype.SCOUT, TaskType.LITERATURE_REVIEW),
        (RoleArchetype.CRITIC, TaskType.CRITIQUE),
        (RoleArchetype.SYNTHESIZER, TaskType.SYNTHESIS),
    }
    for role in RoleArchetype:
        for task_type in TaskType:
            assert can_execute(role, task_type) == ((role, task_type) in expected_true)


def test_role_matrix_true_cell_count():
    # 5 for the PI, 2 for the analyst, 1 each for scout/critic/synthesizer.
    true_cells = sum(
        1 for role in RoleArchetype for t in TaskType if can_execute(role, t)
    )
    assert true_cells == 10
    per_role = {
        role: sum(1 for t in TaskType if can_execute(role, t)) for role in RoleArchetype
    }
    assert per_role == {
        RoleArchetype.PRINCIPAL_INVESTIGATOR: 5,
        RoleArchetype.RESEARCH_ANALYST: 2,
        RoleArchetype.SCOUT: 1,
        RoleArchetype.CRITIC: 1,
        RoleArchetype.SYNTHESIZER: 1,
    }


def test_permitted_and_bans_partition_all_types():
    for role in RoleArchetype:
        permitted = set(permitted_task_types(role))
        banned = set(hard_bans(role))
        assert permitted | banned == set(TaskType)
        assert not permitted & banned


def test_scout_examples():
    assert can_execute(RoleArchetype.SCOUT, TaskType.LITERATURE_REVIEW) is True
    assert can_execute(RoleArchetype.SCOUT, TaskType.ANALYSIS) is False
    assert can_execute(RoleArchetype.PRINCIPAL_INVESTIGATOR, TaskType.SYNTHESIS) is True


TASK_EDGES = {
    (TaskStatus.PROPOSED, TaskStatus.IN_PROGRESS),
    (TaskStatus.PROPOSED, TaskStatus.SUPERSEDED),
    (TaskStatus.IN_PROGRESS, TaskStatus.COMPLETED),
    (TaskStatus.IN_PROGRESS, TaskStatus.SUPERSEDED),
    (TaskStatus.COMPLETED, TaskStatus.CRITIQUE_PERIOD),
    (TaskStatus.COMPLETED, TaskStatus.VOTING),
    (TaskStatus.COMPLETED, TaskStatus.SUPERSEDED),
    (TaskStatus.CRITIQUE_PERIOD, TaskStatus.COMPLETED),
    (TaskStatus.CRITIQUE_PERIOD, TaskStatus.REJECTED),
    (TaskStatus.CRITIQUE_PERIOD, TaskStatus.SUPERSEDED),
    (TaskStatus.VOTING, TaskStatus.ACCEPTED),
    (TaskStatus.VOTING, TaskStatus.REJECTED),
    (TaskStatus.VOTING, TaskStatus.COMPLETED),
    (TaskStatus.VOTING, TaskStatus.SUPERSEDED),
}


def test_task_transition_table_exhaustive():
    for source in TaskStatus:
        for target in TaskStatus:
            assert task_transition_allowed(source, target) == (
                (source, target) in TASK_EDGES
            ), (source, target)


def test_task_transitions_irreflexive_and_terminal():
    for status in TaskStatus:
        assert not task_transition_allowed(status, status)
    for terminal in TERMINAL_TASK_STATUSES:
        for target in TaskStatus:
            assert not task_transition_allowed(terminal, target)


STATE_EDGES = {(LabStateStatus.DRAFT, LabStateStatus.ACTIVE)} | {
    (LabStateStatus.ACTIVE, c) for c in CONCLUSION_STATUSES
}


def test_state_transition_table_exhaustive():
    for source in LabStateStatus:
        for target in LabStateStatus:
            assert state_transition_allowed(source, target) == (
                (source, target) in STATE_EDGES
            ), (source, target)


def test_state_conclusions_are_terminal():
    assert CONCLUSION_STATUSES == {
        LabStateStatus.PROVEN,
        LabStateStatus.DISPROVEN,
        LabStateStatus.PIVOTED,
        LabStateStatus.INCONCLUSIVE,
    }
    for conclusion in CONCLUSION_STATUSES:
        for target in LabStateStatus:
            assert not state_transition_allowed(conclusion, target)


def test_rules_are_pure():
    for _ in range(3):
        assert can_execute(RoleArchetype.SCOUT, TaskType.LITERATURE_REVIEW)
        assert task_transition_allowed(TaskStatus.PROPOSED, TaskStatus.IN_PROGRESS)
        assert state_transition_allowed(LabStateStatus.DRAFT, LabStateStatus.ACTIVE)


def test_substantive_votes_exclude_abstentions():
    assert is_substantive(VoteValue.APPROVE)
    assert is_substantive(VoteValue.REJECT)
    assert not is_substantive(VoteValue.ABSTAIN)


def test_governance_model_validation():
    democratic("2/3")  # valid
    with pytest.raises(ValueError):
        GovernanceModel(GovernanceKind.DEMOCRATIC)
    with pytest.raises(ValueError):
        democratic("0")
    with pytest.raises(ValueError):
        democratic("5/4")
    with pytest.raises(ValueError):
        GovernanceModel(GovernanceKind.PI_LED, quorum_fraction=democratic("1/2").quorum_fraction)


def test_governance_model_round_trip():
    model = democratic("2/3")
    assert GovernanceModel.from_dict(model.to_dict()) == model
