import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leakage_lab.codes import (
    SUPPORTED, PauliSupport, brute_force_distance, build_code, check_algebra, dump_layout, layout_to_json,
    min_logical_weight, min_weight_logical,
)

PAIRS = sorted((f.value, g.value) for f, g in SUPPORTED)


@pytest.mark.parametrize("family,geometry", PAIRS)
@pytest.mark.parametrize("d", [3, 5, 7])
def test_algebra_invariants(family, geometry, d):
    report = check_algebra(build_code(family, geometry, d))
    assert report.passed, report.results


@pytest.mark.parametrize("d", [3, 5, 7])
def test_qubit_counts_from_closed_forms(d):
    # independent of the library's own parameter table
    assert build_code("SubspaceSurface", "Standard", d).n_data == 2 * d * d - 2 * d + 1
    assert build_code("SubspaceSurface", "Rotated", d).n_data == d * d
    assert build_code("SubsystemSurface", "Standard", d).n_data == 3 * d * d - 2 * d
    assert 2 * build_code("SubsystemSurface", "Rotated", d).n_data == 3 * d * d - 2 * d + 1
    bs = build_code("BaconShor", "Standard", d)
    assert bs.n_data == d * d and len(bs.stabilizers) == 2 * (d - 1)
    for fam, geo in PAIRS:
        assert build_code(fam, geo, d).k == (2 if geo == "Periodic" else 1)


@pytest.mark.parametrize("family,geometry", PAIRS)
def test_brute_force_distance_d3(family, geometry):
    assert brute_force_distance(build_code(family, geometry, 3), 4) == 3


@pytest.mark.parametrize("family,geometry", PAIRS)
@pytest.mark.parametrize("d", [3, 5])
def test_graph_search_distance(family, geometry, d):
    layout = build_code(family, geometry, d)
    assert min_logical_weight(layout, cap=d) == d
    assert min_logical_weight(layout, cap=d - 1) == "exceeds cap"


def test_graph_search_agrees_with_brute_force_at_d5():
    layout = build_code("SubspaceSurface", "Rotated", 5)
    assert brute_force_distance(layout, 5) == min_logical_weight(layout, 5) == 5


@pytest.mark.parametrize("family,geometry", PAIRS)
def test_min_weight_logical_is_a_logical(family, geometry):
    layout = build_code(family, geometry, 5)
    for kind, other in (("X", "Z"), ("Z", "X")):
        w, sup = min_weight_logical(layout, kind)
        op = PauliSupport.of(kind, sup)
        assert len(sup) == w
        assert all(op.commutes(s.pauli) for s in layout.stabilizers)
        bare = layout.logical_z if kind == "X" else layout.logical_x
        assert any(not op.commutes(PauliSupport.of(other, b)) for b in bare)


def test_broken_layout_reports_witness():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    x_log = layout.logical_x[0]
    bad = replace(layout, logical_z=(frozenset(x_log) ^ {next(iter(x_log))},))
    report = check_algebra(bad)
    assert not report.passed
    failing = [k for k, (ok, w) in report.results.items() if not ok]
    assert failing and all(report.results[k][1] is not None for k in failing if k != "logical_pairing")


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(PAIRS), st.data())
def test_products_of_stabilizers_commute_with_checks(pair, data):
    layout = build_code(*pair, 3)
    chosen = data.draw(st.lists(st.integers(0, len(layout.stabilizers) - 1), min_size=1, max_size=4))
    prod = PauliSupport()
    for i in chosen:
        prod = prod * layout.stabilizers[i].pauli
    assert all(prod.commutes(c.pauli) for c in layout.checks)


def test_pauli_support_algebra():
    a = PauliSupport.of("X", {0, 1})
    b = PauliSupport.of("Z", {1, 2})
    assert not a.commutes(b)
    assert a.commutes(PauliSupport.of("Z", {0, 1}))
    assert (a * a).is_identity()
    assert not a.is_identity()
    assert (a * b).weight == 3


@pytest.mark.parametrize("args", [("SubspaceSurface", "Rotated", 4), ("SubspaceSurface", "Rotated", 1),
                                  ("BaconShor", "Rotated", 3), ("Nope", "Rotated", 3)])
def test_invalid_codes_rejected(args):
    with pytest.raises(ValueError):
        build_code(*args)


def test_layout_json_roundtrip():
    layout = build_code("SubsystemSurface", "Rotated", 3)
    data = json.loads(dump_layout(layout))
    assert data == json.loads(json.dumps(layout_to_json(layout)))
    assert data["n_data"] == 11
    assert len(data["ancilla_qubits"]) == layout.n_checks
    idx = {q["index"] for q in data["data_qubits"]} | {q["index"] for q in data["ancilla_qubits"]}
    assert idx == set(range(layout.n_data + layout.n_checks))
    for st_, ref in zip(data["stabilizers"], layout.stabilizers):
        acc = np.zeros(layout.n_data, dtype=int)
        for c in st_["checks"]:
            acc[data["checks"][c]["support"]] ^= 1
        assert set(np.flatnonzero(acc)) == set(ref.support)
