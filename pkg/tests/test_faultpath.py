import itertools
import json

import numpy as np
import pytest

from leakage_lab.circuit import KLEAK, Injections, compile_circuit, execute
from leakage_lab.codes import build_code
from leakage_lab.decoder_graph import fault_catalog, graph_from_catalog
from leakage_lab.faultpath import (
    certify_effective_distance, dump_witness, enumerate_leakage_error_set, reduce_modulo_gauge, replay_witness,
)
from leakage_lab.pauli_frame import Frame, NoiseParams, unpack
from leakage_lab.schedules import build_schedule

CYCLES = 2


def _gauge_group(layout, kind):
    gens = layout.check_matrix(kind)
    bits = np.array(list(itertools.product((0, 1), repeat=gens.shape[0])), dtype=np.uint8)
    return (bits @ gens) % 2


class Cosets:
    """Canonical coset keys and exact minimum weights by enumerating the whole gauge group."""

    def __init__(self, layout):
        self.n = layout.n_data
        self.group = {k: _gauge_group(layout, k) for k in "XZ"}

    def _vec(self, sup):
        v = np.zeros(self.n, dtype=np.uint8)
        v[list(sup)] = 1
        return v

    def key(self, kind, sup):
        return min(bytes(r) for r in np.packbits(self._vec(sup) ^ self.group[kind], axis=1))

    def min_weight(self, kind, sup):
        return int((self._vec(sup) ^ self.group[kind]).sum(axis=1).min())


@pytest.fixture(scope="module")
def rotated_subsystem():
    layout = build_code("SubsystemSurface", "Rotated", 3)
    sched = build_schedule(layout, "None")
    return layout, sched, compile_circuit(layout, sched, CYCLES), Cosets(layout)


def _triangles(layout, circ):
    """(check, prep op, physical qubit) for every weight-3 check in the first cycle."""
    out = []
    for c, chk in enumerate(layout.checks):
        if len(chk.support) == 3:
            q = layout.n_data + c
            op = next(i for i, o in enumerate(circ.ops) if o.kind == "prep" and q in o.a)
            out.append((chk, op, q))
    return out


def _explicit_residuals(circ, leak_model, op, q):
    """Run every subset of the leak's kicks explicitly and collect the final data errors."""
    noise = NoiseParams(leak_model=leak_model)
    leak = Injections([op], [KLEAK], [q], [0])
    _, kicks = execute(circ, Frame.new(circ.n_phys, 1), noise, None, leak, trace=True)
    out = []
    for bits in itertools.product((0, 1), repeat=len(kicks)):
        sel = np.flatnonzero(bits)
        extra = Injections(kicks.op[sel], kicks.kind[sel], kicks.target[sel], np.zeros(sel.size, int))
        fr = Frame.new(circ.n_phys, 1)
        execute(circ, fr, noise, None, Injections.concat([leak, extra]))
        x = np.flatnonzero(unpack(fr.x[circ.data_end], 1)[:, 0])
        z = np.flatnonzero(unpack(fr.z[circ.data_end], 1)[:, 0])
        out.append((frozenset(x.tolist()), frozenset(z.tolist())))
    return out


@pytest.mark.parametrize("leak_model", ["DP", "MS"])
def test_residual_classes_match_explicit_enumeration(rotated_subsystem, leak_model):
    layout, sched, circ, cos = rotated_subsystem
    for chk, op, q in _triangles(layout, circ)[:4]:
        got = enumerate_leakage_error_set(layout, sched, leak_model, (op, q), cycles=CYCLES)
        want = {(cos.key("X", x), cos.key("Z", z)) for x, z in _explicit_residuals(circ, leak_model, op, q)}
        got_keys = {(cos.key("X", r.x_support), cos.key("Z", r.z_support)) for r in got}
        assert got_keys == want and len(got) == len(want)


def test_ms_leak_on_triangle_leaves_weight_one_same_type_errors(rotated_subsystem):
    layout, sched, circ, cos = rotated_subsystem
    for chk, op, q in _triangles(layout, circ):
        for r in enumerate_leakage_error_set(layout, sched, "MS", (op, q), cycles=CYCLES):
            same = r.x_support if chk.kind == "X" else r.z_support
            assert len(same) <= 1 and cos.min_weight(chk.kind, same) <= 1


def test_dp_leak_on_triangle_adds_two_correlated_classes(rotated_subsystem):
    layout, sched, circ, cos = rotated_subsystem
    for chk, op, q in _triangles(layout, circ):
        opp = "Z" if chk.kind == "X" else "X"
        heavy = set()
        for r in enumerate_leakage_error_set(layout, sched, "DP", (op, q), cycles=CYCLES):
            sup = r.z_support if opp == "Z" else r.x_support
            if cos.min_weight(opp, sup) >= 2:
                heavy.add(cos.key(opp, sup))
        assert len(heavy) == 2, chk


def test_leak_after_last_interaction_is_harmless(rotated_subsystem):
    layout, sched, circ, cos = rotated_subsystem
    for chk, op, q in _triangles(layout, circ)[:4]:
        last = max(i for i, o in enumerate(circ.ops[:circ.cycle_end[0]])
                   if o.kind == "cnot" and (q in o.a or q in o.b))
        for r in enumerate_leakage_error_set(layout, sched, "DP", (last, q), cycles=CYCLES):
            assert len(r.x_support) + len(r.z_support) == 0


def test_greedy_reduction_stays_in_class(rotated_subsystem):
    layout, _, _, cos = rotated_subsystem
    rng = np.random.default_rng(4)
    for _ in range(50):
        kind = "XZ"[int(rng.integers(2))]
        v = (rng.random(layout.n_data) < 0.3).astype(np.uint8)
        red = reduce_modulo_gauge(layout, kind, v)
        assert red.sum() <= v.sum()
        assert cos.key(kind, np.flatnonzero(red)) == cos.key(kind, np.flatnonzero(v))


CERTIFY_CASES = [
    ("SubspaceSurface", "Rotated", "DP", 1),
    ("SubsystemSurface", "Standard", "DP", None),
    ("SubspaceSurface", "Standard", "MS", None),
]


@pytest.mark.parametrize("family,geometry,leak_model,expected", CERTIFY_CASES)
def test_single_fault_certification(family, geometry, leak_model, expected):
    layout = build_code(family, geometry, 3)
    sched = build_schedule(layout, "SyndromeLR")
    rep = certify_effective_distance(layout, sched, leak_model, k_max=1)
    assert rep.min_failing_faults == expected and not rep.sampled
    assert rep.robust == (expected is None)
    if expected is not None:
        assert replay_witness(layout, sched, leak_model, rep.witness)
        assert rep.witness.predicted != rep.witness.actual
        data = json.loads(dump_witness(rep))
        assert data["min_failing_faults"] == 1 and len(data["witness"]["faults"]) == 1


def test_gate_lr_fails_at_two_pauli_faults():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    sched = build_schedule(layout, "GateLR")
    rep = certify_effective_distance(layout, sched, "DP", k_max=2, pair_stages=("pauli_pairs",))
    assert rep.min_failing_faults == 2 and rep.sampled  # leak pair stages skipped on purpose
    assert replay_witness(layout, sched, "DP", rep.witness)
    assert all(not f.is_leak for f in rep.witness.faults)


def test_witness_breaks_when_kicks_are_dropped():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    sched = build_schedule(layout, "SwapLR")
    rep = certify_effective_distance(layout, sched, "DP", k_max=1)
    w = rep.witness
    assert rep.min_failing_faults == 1 and replay_witness(layout, sched, "DP", w)
    assert w.faults[0].is_leak and w.kicks
    w.kicks = ()
    # the adversary's choice matters: the bare leak alone is decoded correctly
    assert not replay_witness(layout, sched, "DP", w)


def test_leak_edges_cover_two_event_patterns():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    cat = fault_catalog(layout, build_schedule(layout, "SwapLR"), "MS", cycles=CYCLES)
    noise = NoiseParams.from_total(1e-3, leak_model="MS")
    for et in ("X", "Z"):
        g = graph_from_catalog(cat, noise, et)
        keys = {(e.u, e.v) for e in g.edges}
        assert set(cat.leak_patterns[et]) <= keys


def test_certify_rejects_bad_arguments():
    layout = build_code("SubspaceSurface", "Rotated", 3)
    sched = build_schedule(layout)
    for kw in (dict(k_max=0), dict(k_max=3), dict(pair_stages=("triples",))):
        with pytest.raises(ValueError):
            certify_effective_distance(layout, sched, "DP", **kw)
