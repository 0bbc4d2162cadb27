import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from leakage_lab.codes import SUPPORTED, build_code
from leakage_lab.pauli_frame import EventKind
from leakage_lab.schedules import (
    ROLLING_ASSIGNMENT, ROTATED_ORDER, build_schedule, dump_schedule, search_rolling_assignments,
    validate_correctness, validate_goodness, verify_correctness_exact,
)

PAIRS = sorted((f.value, g.value) for f, g in SUPPORTED)
LRUS = ["None", "SwapLR", "SyndromeLR", "IntLR", "GateLR"]
# Z plaquettes coupled in the reverse of their usual order: the shared
# qubits of neighbouring X and Z plaquettes are then visited inconsistently.
BROKEN_ROTATED_ORDER = {"X": ROTATED_ORDER["X"], "Z": tuple(reversed(ROTATED_ORDER["Z"]))}


@pytest.mark.parametrize("family,geometry", PAIRS)
@pytest.mark.parametrize("lru", LRUS)
def test_all_serial_schedules_correct_by_both_routes(family, geometry, lru):
    layout = build_code(family, geometry, 3)
    sched = build_schedule(layout, lru)
    assert validate_correctness(sched, layout)
    assert verify_correctness_exact(sched, layout, trials=2)


@pytest.mark.parametrize("geometry", ["Standard", "Rotated"])
@pytest.mark.parametrize("lru", ["None", "SyndromeLR"])
def test_rolling_schedule_correct_and_good(geometry, lru):
    layout = build_code("SubsystemSurface", geometry, 5)
    sched = build_schedule(layout, lru, "ParallelRolling")
    assert validate_correctness(sched, layout)
    assert verify_correctness_exact(sched, layout, cycles=8, trials=2)
    assert validate_goodness(sched, layout)
    assert sched.meta["period"] == 4


def test_cat2_schedule_correct():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    sched = build_schedule(layout, "Cat2")
    assert validate_correctness(sched, layout)
    assert verify_correctness_exact(sched, layout)


@pytest.mark.parametrize("geometry", ["Standard", "Rotated", "Periodic"])
def test_swap_lr_subsystem_schedule_is_good(geometry):
    layout = build_code("SubsystemSurface", geometry, 5)
    v = validate_goodness(build_schedule(layout, "SwapLR"), layout)
    assert v.passed, v.witness


def test_violating_schedule_fails_with_witness_on_both_routes():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    sched = build_schedule(layout, orders=BROKEN_ROTATED_ORDER)
    structural = validate_correctness(sched, layout)
    exact = verify_correctness_exact(sched, layout)
    assert not structural and structural.witness is not None
    assert not exact and exact.witness is not None
    a, b = structural.witness
    shared = set(layout.checks[a].support) & set(layout.checks[b].support)
    assert {layout.checks[a].kind, layout.checks[b].kind} == {"X", "Z"} and shared


@pytest.mark.parametrize("perm", list(itertools.permutations(range(4))))
def test_structural_and_exact_routes_agree(perm):
    layout = build_code("SubspaceSurface", "Rotated", 3)
    orders = {"X": ROTATED_ORDER["X"], "Z": tuple(ROTATED_ORDER["Z"][i] for i in perm)}
    try:
        sched = build_schedule(layout, orders=orders)
    except RuntimeError:  # two gates on one qubit in the same step
        return
    if validate_correctness(sched, layout):
        assert verify_correctness_exact(sched, layout, trials=2)
    else:
        assert not verify_correctness_exact(sched, layout, trials=2)


def test_rolling_validator_rejects_same_step_measurement():
    layout = build_code("SubsystemSurface", "Standard", 5)
    bad = dict(ROLLING_ASSIGNMENT)
    bad[("X", 0, 1)], bad[("Z", 0, 1)] = (bad[("Z", 0, 1)][0], bad[("X", 0, 1)][1]), \
        (bad[("X", 0, 1)][0], bad[("Z", 0, 1)][1])
    v = validate_correctness(build_schedule(layout, style="ParallelRolling", rolling_assignment=bad), layout)
    assert not v and v.witness is not None


def test_rolling_search_recovers_a_valid_assignment():
    layout = build_code("SubsystemSurface", "Standard", 5)
    found = search_rolling_assignments(layout, cells=2, limit=1)
    assert found
    sched = build_schedule(layout, style="ParallelRolling", rolling_assignment=found[0])
    assert validate_correctness(sched, layout) and validate_goodness(sched, layout)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(PAIRS), st.sampled_from(LRUS))
def test_each_check_measured_once_and_roles_used_once_per_step(pair, lru):
    layout = build_code(*pair, 3)
    sched = build_schedule(layout, lru)
    meas = [e.tag for e in sched.events() if e.kind in (EventKind.MEAS_X, EventKind.MEAS_Z)]
    assert sorted(meas) == list(range(layout.n_checks))
    for step in sched.steps:
        roles = [q for e in step for q in e.qubits]
        assert len(roles) == len(set(roles))


def test_lru_counts():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    none = build_schedule(layout, "None")
    syn = build_schedule(layout, "SyndromeLR")
    swap = build_schedule(layout, "SwapLR")
    assert none.count("LruSwap") == 0
    assert syn.count("LruSwap") == layout.n_data
    assert swap.count("SwapRelabel") == layout.n_checks
    assert swap.count("LruSwap") == layout.n_data - len(swap.meta["swapped_data"])


def test_invalid_combinations():
    with pytest.raises(ValueError):
        build_schedule(build_code("SubsystemSurface", "Rotated", 3), "Cat2")
    with pytest.raises(ValueError):
        build_schedule(build_code("SubspaceSurface", "Rotated", 3), style="ParallelRolling")
    with pytest.raises(ValueError):
        build_schedule(build_code("SubsystemSurface", "Rotated", 3), "SwapLR", "ParallelRolling")
    with pytest.raises(ValueError):
        build_schedule(build_code("SubspaceSurface", "Rotated", 3), "Bogus")


def test_schedule_json():
    layout = build_code("SubsystemSurface", "Rotated", 3)
    sched = build_schedule(layout, "SwapLR")
    data = json.loads(dump_schedule(sched))
    assert data["lru"] == "SwapLR" and len(data["steps"]) == sched.n_steps
    assert sum(len(s) for s in data["steps"]) == sum(len(s) for s in sched.steps)
