"""Exhaustive small fault-set enumeration with adversarial leakage branching.

A fault scenario is a set of Pauli faults and leak events.  It is first run
once in deterministic mode with tracing on, which lists every random kick
the leaked qubits could cause (partner Paulis, flipped leaked
measurements, relaxation of data still leaked at the end).  Each kick is
then run on its own.  Because everything downstream of the kicks is linear
over GF(2), the reachable outcomes form the affine span ``base + span(kicks)``.
The adversary may pick any point of that span, so a scenario fails if any
point decodes to a logical error.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._gf2 import RowSpace
from .circuit import KLEAK, KREC, KX, KZ, Injections, detection_events, execute
from .codes import CodeLayout, PauliSupport
from .decoder_graph import TYPES, Fault, LeakLocation, fault_catalog, graph_from_catalog, run_deterministic
from .matching import Decoder
from .pauli_frame import Frame, LeakModel, NoiseParams, unpack
from .schedules import Schedule

MAX_SPAN_RANK = 16
PAIR_STAGES = ("pauli_pairs", "leak_pauli", "leak_pairs")
_KIND_NAMES = {KX: "X", KZ: "Z", KREC: "flip"}


@dataclass(frozen=True)
class FaultLocation:
    """One enumerable fault: a Pauli outcome (``fault``) or a leak of ``qubit`` after ``op``."""

    op: int
    label: str
    fault: Fault | None = None
    qubit: int = -1

    @property
    def is_leak(self) -> bool:
        return self.fault is None

    def to_json(self) -> dict:
        if self.is_leak:
            return {"op": self.op, "leak": self.qubit, "label": self.label}
        f = self.fault
        return {"op": f.op, "kind": _KIND_NAMES[f.kind], "targets": list(f.targets), "label": f.label}


@dataclass
class Witness:
    """A failing fault set with the kicks chosen by the adversary."""

    faults: tuple
    kicks: tuple  # (op, kind, target) triples
    predicted: dict
    actual: dict

    def to_json(self) -> dict:
        return {"faults": [f.to_json() for f in self.faults],
                "kicks": [{"op": o, "kind": _KIND_NAMES[k], "target": t} for o, k, t in self.kicks],
                "predicted": self.predicted, "actual": self.actual}


@dataclass
class EffectiveDistanceReport:
    """Smallest failing fault count found up to ``k_max`` (None if none)."""

    min_failing_faults: int | None
    k_max: int
    witness: Witness | None
    robust: bool
    sampled: bool = False
    mode: str = "adversarial"
    counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"min_failing_faults": self.min_failing_faults, "k_max": self.k_max,
                "robust": self.robust, "sampled": self.sampled, "mode": self.mode,
                "counts": self.counts,
                "witness": self.witness.to_json() if self.witness else None}


# ---------------------------------------------------------------------------
# scenario evaluation


@dataclass
class _Context:
    layout: CodeLayout
    catalog: object
    decoders: dict
    widths: dict  # error type -> number of detectors
    k: int

    @property
    def circuit(self):
        return self.catalog.circuit

    @property
    def leak_model(self):
        return self.catalog.leak_model

    @property
    def width(self) -> int:
        return sum(self.widths.values()) + 2 * self.k


def _context(layout, schedule, leak_model, cycles, noise) -> _Context:
    catalog = fault_catalog(layout, schedule, leak_model, cycles)
    noise = noise or NoiseParams.from_total(1e-3, leak_model=leak_model)
    decs = {et: Decoder(graph_from_catalog(catalog, noise, et)) for et in TYPES}
    widths = {et: decs[et].graph.boundary for et in TYPES}
    return _Context(layout, catalog, decs, widths, layout.k)


def _vectors(ctx: _Context, syn) -> np.ndarray:
    """(shots, width): detectors X | detectors Z | observables X | observables Z."""
    dx, ox = syn.dense("X")
    dz, oz = syn.dense("Z")
    return np.concatenate([dx, dz, ox, oz], axis=1).astype(np.uint8)


def _fails(ctx: _Context, vecs: np.ndarray) -> np.ndarray:
    """Which outcome vectors the decoder gets wrong."""
    nx_, nz = ctx.widths["X"], ctx.widths["Z"]
    k = ctx.k
    bad = np.zeros(vecs.shape[0], dtype=bool)
    off = nx_ + nz
    for et, lo, w, obs_lo in (("X", 0, nx_, off), ("Z", nx_, nz, off + k)):
        pred = ctx.decoders[et].decode_batch(vecs[:, lo:lo + w])
        bad |= (pred != vecs[:, obs_lo:obs_lo + k]).any(axis=1)
    return bad


def _scenario_injections(scenarios) -> Injections:
    op, kind, target, shot = [], [], [], []
    for s, sc in enumerate(scenarios):
        for loc in sc:
            if loc.is_leak:
                op.append(loc.op)
                kind.append(KLEAK)
                target.append(loc.qubit)
                shot.append(s)
            else:
                for t in loc.fault.targets:
                    op.append(loc.fault.op)
                    kind.append(loc.fault.kind)
                    target.append(t)
                    shot.append(s)
    return Injections(op, kind, target, shot)


def _spans(ctx: _Context, scenarios):
    """Per scenario: (base vector, kick vectors, kick triples)."""
    n = len(scenarios)
    base_inj = _scenario_injections(scenarios)
    syn, kicks = run_deterministic(ctx.circuit, base_inj, n, ctx.leak_model, trace=True)
    base = _vectors(ctx, syn)
    order = np.argsort(kicks.shot, kind="stable")
    k_op, k_kind, k_tg, k_shot = kicks.op[order], kicks.kind[order], kicks.target[order], kicks.shot[order]
    first = np.concatenate([[0], np.cumsum(np.bincount(k_shot, minlength=n))])
    kvec = np.zeros((k_shot.size, ctx.width), dtype=np.uint8)
    if k_shot.size:
        # one shot per kick: its scenario's faults plus that kick alone
        by_shot = [[] for _ in range(n)]
        for i, s in enumerate(base_inj.shot.tolist()):
            by_shot[s].append(i)
        rep = [i for s in k_shot.tolist() for i in by_shot[s]]
        rep_shot = [j for j, s in enumerate(k_shot.tolist()) for _ in by_shot[s]]
        rep = np.asarray(rep, dtype=np.int64)
        inj = Injections.concat([
            Injections(base_inj.op[rep], base_inj.kind[rep], base_inj.target[rep], rep_shot),
            Injections(k_op, k_kind, k_tg, np.arange(k_shot.size)),
        ])
        ksyn = run_deterministic(ctx.circuit, inj, k_shot.size, ctx.leak_model)
        kvec = _vectors(ctx, ksyn) ^ base[k_shot]
    out = []
    for s in range(n):
        sel = slice(first[s], first[s + 1])
        triples = list(zip(k_op[sel].tolist(), k_kind[sel].tolist(), k_tg[sel].tolist()))
        out.append((base[s], kvec[sel], triples))
    return out


def _span_points(base: np.ndarray, kicks: np.ndarray, rng=None, max_rank: int = MAX_SPAN_RANK):
    """All points of ``base + span(kicks)`` with the kick subset reaching each.

    Returns (points, combos, exhaustive) where ``combos[i]`` lists kick
    indices.  Above ``max_rank`` a random sample of 2**max_rank points is
    returned instead.
    """
    if kicks.shape[0] == 0:
        return base[None], [()], True
    # basis of the span expressed through original kick indices
    basis, basis_combo = [], []
    red = np.zeros((0, kicks.shape[1]), dtype=np.uint8)
    for i, v in enumerate(kicks):
        if not RowSpace(red, kicks.shape[1]).reduce(v).any():
            continue
        red = np.vstack([red, v])
        basis.append(v)
        basis_combo.append(i)
    r = len(basis)
    exhaustive = r <= max_rank
    if exhaustive:
        coeffs = np.array(list(itertools.product((0, 1), repeat=r)), dtype=np.uint8).reshape(2**r, r)
    else:
        rng = rng or np.random.default_rng(0)
        coeffs = rng.integers(0, 2, size=(2**max_rank, r), dtype=np.uint8)
    B = np.array(basis, dtype=np.uint8).reshape(r, kicks.shape[1])
    points = (coeffs.astype(np.int64) @ B.astype(np.int64) % 2).astype(np.uint8) ^ base
    combos = [tuple(basis_combo[j] for j in np.flatnonzero(c)) for c in coeffs]
    return points, combos, exhaustive


# ---------------------------------------------------------------------------
# locations


def fault_locations(ctx: _Context) -> tuple:
    pauli = [FaultLocation(f.op, f.label, fault=f) for f in ctx.catalog.faults]
    leaks = [FaultLocation(l.op, l.label, qubit=l.qubit) for l in ctx.catalog.leaks]
    return pauli, leaks


def _pauli_vectors(ctx: _Context, pauli) -> np.ndarray:
    eff = ctx.catalog.effects
    nx_, nz = ctx.widths["X"], ctx.widths["Z"]
    k = ctx.k
    vec = np.zeros((len(pauli), ctx.width), dtype=np.uint8)
    for i in range(len(pauli)):
        ex, ez = eff["X"][i], eff["Z"][i]
        vec[i, list(ex.detectors)] = 1
        vec[i, [nx_ + d for d in ez.detectors]] = 1
        vec[i, nx_ + nz:nx_ + nz + k] = ex.observables
        vec[i, nx_ + nz + k:] = ez.observables
    return vec


def _unique_rows(vec: np.ndarray):
    """Distinct rows and, for each, the index of its first occurrence."""
    if vec.shape[0] == 0:
        return vec, np.empty(0, dtype=np.int64)
    _, first = np.unique(vec, axis=0, return_index=True)
    first = np.sort(first)
    return vec[first], first


# ---------------------------------------------------------------------------
# public API


def certify_effective_distance(layout: CodeLayout, schedule: Schedule, leak_model, k_max: int = 1,
                               cycles: int | None = None, noise: NoiseParams | None = None,
                               budget: int = 20_000_000, seed: int = 0,
                               pair_stages=PAIR_STAGES) -> EffectiveDistanceReport:
    """Smallest number of faults (leaks branched adversarially) that defeats the decoder.

    Fault sets are tried by increasing size; within size two, Pauli pairs
    come first, then leak plus Pauli, then leak pairs.  ``budget`` caps the
    number of decoded outcomes per size; beyond it the fault sets of that
    size are sampled and the report is flagged ``sampled``.  ``pair_stages``
    selects which size-two families are searched; leaving one out also
    flags the report as ``sampled``.
    """
    unknown = set(pair_stages) - set(PAIR_STAGES)
    if unknown:
        raise ValueError(f"unknown pair stages: {sorted(unknown)}")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if k_max > 2:
        raise ValueError("exhaustive enumeration is implemented for k_max <= 2")
    ctx = _context(layout, schedule, LeakModel(leak_model), cycles, noise)
    rng = np.random.default_rng(seed)
    pauli, leaks = fault_locations(ctx)
    pvec = _pauli_vectors(ctx, pauli)
    uniq, uniq_idx = _unique_rows(pvec)
    counts: dict = {}
    sampled = False
    leak_spans = _spans(ctx, [[l] for l in leaks]) if leaks else []
    leak_points = []
    for base, kv, triples in leak_spans:
        pts, combos, exhaustive = _span_points(base, kv, rng)
        sampled |= not exhaustive
        upts, ui = _unique_rows(pts)
        leak_points.append((upts, [combos[i] for i in ui], triples))

    def witness_from(locs, kick_triples, vec):
        nx_, nz, k = ctx.widths["X"], ctx.widths["Z"], ctx.k
        actual = {"X": vec[nx_ + nz:nx_ + nz + k].tolist(), "Z": vec[nx_ + nz + k:].tolist()}
        predicted = {et: ctx.decoders[et].decode_batch(
            vec[None, (0 if et == "X" else nx_):(nx_ if et == "X" else nx_ + nz)])[0].tolist() for et in TYPES}
        return Witness(tuple(locs), tuple(kick_triples), predicted, actual)

    def finish(size, wit):
        full = math.ceil(layout.distance / 2)
        found = size if size is not None else k_max + 1
        return EffectiveDistanceReport(size, k_max, wit, robust=found >= min(full, k_max + 1),
                                       sampled=sampled, counts=counts)

    # size one
    bad = _fails(ctx, uniq)
    counts["pauli"] = int(uniq.shape[0])
    if bad.any():
        i = int(uniq_idx[np.argmax(bad)])
        return finish(1, witness_from([pauli[i]], [], pvec[i]))
    counts["leak"] = 0
    for j, (pts, combos, triples) in enumerate(leak_points):
        counts["leak"] += pts.shape[0]
        bad = _fails(ctx, pts)
        if bad.any():
            c = combos[int(np.argmax(bad))]
            return finish(1, witness_from([leaks[j]], [triples[t] for t in c], pts[int(np.argmax(bad))]))
    if k_max < 2:
        return finish(None, None)

    # size two: Pauli pairs
    sampled |= set(pair_stages) != set(PAIR_STAGES)
    m = uniq.shape[0]
    ii, jj = np.triu_indices(m, k=1)
    if "pauli_pairs" not in pair_stages:
        ii = jj = ii[:0]
    if ii.size > budget:
        sel = rng.choice(ii.size, budget, replace=False)
        ii, jj, sampled = ii[sel], jj[sel], True
    counts["pauli_pairs"] = int(ii.size)
    for lo in range(0, ii.size, 200_000):
        a, b = ii[lo:lo + 200_000], jj[lo:lo + 200_000]
        bad = _fails(ctx, uniq[a] ^ uniq[b])
        if bad.any():
            t = int(np.argmax(bad))
            pa, pb = int(uniq_idx[a[t]]), int(uniq_idx[b[t]])
            return finish(2, witness_from([pauli[pa], pauli[pb]], [], pvec[pa] ^ pvec[pb]))
    # leak plus Pauli
    counts["leak_pauli"] = 0
    if "leak_pauli" not in pair_stages:
        leak_points_p = []
    else:
        leak_points_p = leak_points
    per_leak_budget = max(1, budget // max(1, len(leak_points)))
    for j, (pts, combos, triples) in enumerate(leak_points_p):
        pairs_i, pairs_p = np.meshgrid(np.arange(pts.shape[0]), np.arange(m), indexing="ij")
        pairs_i, pairs_p = pairs_i.ravel(), pairs_p.ravel()
        if pairs_i.size > per_leak_budget:
            sel = rng.choice(pairs_i.size, per_leak_budget, replace=False)
            pairs_i, pairs_p, sampled = pairs_i[sel], pairs_p[sel], True
        counts["leak_pauli"] += int(pairs_i.size)
        bad = _fails(ctx, pts[pairs_i] ^ uniq[pairs_p])
        if bad.any():
            t = int(np.argmax(bad))
            p = int(uniq_idx[pairs_p[t]])
            c = combos[pairs_i[t]]
            return finish(2, witness_from([leaks[j], pauli[p]], [triples[x] for x in c],
                                          pts[pairs_i[t]] ^ pvec[p]))
    if "leak_pairs" not in pair_stages:
        return finish(None, None)
    # leak pairs, simulated jointly since two leaks interact
    counts["leak_pairs"] = 0
    pairs = list(itertools.combinations(range(len(leaks)), 2))
    if len(pairs) * 4 > budget:
        keep = rng.choice(len(pairs), max(1, budget // 4), replace=False)
        pairs, sampled = [pairs[i] for i in sorted(keep)], True
    for lo in range(0, len(pairs), 2000):
        chunk = pairs[lo:lo + 2000]
        spans = _spans(ctx, [[leaks[a], leaks[b]] for a, b in chunk])
        for (a, b), (base, kv, triples) in zip(chunk, spans):
            pts, combos, exhaustive = _span_points(base, kv, rng)
            sampled |= not exhaustive
            counts["leak_pairs"] += pts.shape[0]
            bad = _fails(ctx, pts)
            if bad.any():
                t = int(np.argmax(bad))
                return finish(2, witness_from([leaks[a], leaks[b]], [triples[x] for x in combos[t]], pts[t]))
    return finish(None, None)


def replay_witness(layout: CodeLayout, schedule: Schedule, leak_model, witness: Witness,
                   cycles: int | None = None, noise: NoiseParams | None = None) -> bool:
    """Run the witness faults and chosen kicks through the noiseless pipeline; True if it fails."""
    ctx = _context(layout, schedule, LeakModel(leak_model), cycles, noise)
    inj = _scenario_injections([witness.faults])
    kicks = Injections([k[0] for k in witness.kicks], [k[1] for k in witness.kicks],
                       [k[2] for k in witness.kicks], [0] * len(witness.kicks))
    frame = Frame.new(ctx.circuit.n_phys, 1)
    records = execute(ctx.circuit, frame, NoiseParams(leak_model=ctx.leak_model), None,
                      Injections.concat([inj, kicks]))
    syn = detection_events(ctx.circuit, records, frame)
    return bool(_fails(ctx, _vectors(ctx, syn))[0])


def dump_witness(report: EffectiveDistanceReport) -> str:
    return json.dumps(report.to_json(), indent=2)


# ---------------------------------------------------------------------------
# residual data errors of one leak


def _gauge_generators(layout: CodeLayout, kind: str) -> np.ndarray:
    return layout.check_matrix(kind)


def reduce_modulo_gauge(layout: CodeLayout, kind: str, vec: np.ndarray) -> np.ndarray:
    """Greedy weight minimisation of a ``kind`` error over the ``kind`` checks."""
    gens = _gauge_generators(layout, kind)
    v = np.array(vec, dtype=np.uint8) & 1
    improved = True
    while improved:
        improved = False
        for g in gens:
            w = v ^ g
            if w.sum() < v.sum():
                v = w
                improved = True
    return v


def _class_key(space: RowSpace, v: np.ndarray) -> bytes:
    return space.reduce(v).tobytes()


def enumerate_leakage_error_set(layout: CodeLayout, schedule: Schedule, leak_model, location,
                                cycles: int | None = None) -> set:
    """Distinct final data errors a single leak can leave, modulo the gauge group.

    ``location`` is a :class:`LeakLocation` or an ``(op, qubit)`` pair.
    Every combination of the leak's kicks is considered (both outcomes of
    each leaked measurement, every partner twirl).  Each result is the
    minimum-weight representative found greedily within its gauge class.
    """
    ctx = _context(layout, schedule, LeakModel(leak_model), cycles, None)
    if isinstance(location, LeakLocation):
        op, q = location.op, location.qubit
    else:
        op, q = location
    loc = FaultLocation(int(op), f"leak q{q}", qubit=int(q))
    n = layout.n_data
    # final data frames of the base run and of each kick, as x | z vectors
    inj = _scenario_injections([[loc]])
    frame = Frame.new(ctx.circuit.n_phys, 1)
    _, kicks = execute(ctx.circuit, frame, NoiseParams(leak_model=ctx.leak_model), None, inj, trace=True)

    def data_of(extra):
        fr = Frame.new(ctx.circuit.n_phys, 1)
        execute(ctx.circuit, fr, NoiseParams(leak_model=ctx.leak_model), None, Injections.concat([inj, extra]))
        dx = unpack(fr.x[ctx.circuit.data_end], 1)[:, 0]
        dz = unpack(fr.z[ctx.circuit.data_end], 1)[:, 0]
        return np.concatenate([dx, dz]).astype(np.uint8)

    base = data_of(None)
    kv = np.array([data_of(Injections([o], [k], [t], [0])) ^ base
                   for o, k, t in zip(kicks.op, kicks.kind, kicks.target)], dtype=np.uint8).reshape(-1, 2 * n)
    points, _, _ = _span_points(base, kv)
    sx = RowSpace(layout.check_matrix("X"), n)
    sz = RowSpace(layout.check_matrix("Z"), n)
    seen = {}
    for v in points:
        x, z = v[:n], v[n:]
        key = (_class_key(sx, x), _class_key(sz, z))
        if key not in seen:
            rx = reduce_modulo_gauge(layout, "X", x)
            rz = reduce_modulo_gauge(layout, "Z", z)
            seen[key] = PauliSupport(frozenset(np.flatnonzero(rx).tolist()), frozenset(np.flatnonzero(rz).tolist()))
    return set(seen.values())
