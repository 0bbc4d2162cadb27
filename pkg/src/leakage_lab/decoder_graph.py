"""Space-time decoder graphs from exhaustive single-fault injection.

For one extraction window (``cycles`` noisy rounds plus a perfect round)
every single fault location is injected once, in deterministic mode, as its
own shot: preparation flips, the X and Z parts of the fifteen two-qubit
Paulis after every CNOT (and after every merged swap gadget, which counts
as two CNOT locations) and measurement flips.  The X part and the Z part of
a fault are decoded separately, so a CNOT fault contributes three X
patterns and three Z patterns, each carrying 4/15 of the location's rate.

Leakage is enumerated the same way.  A qubit is leaked after a location
and left leaked until it is reinitialised (or the window ends).  In
deterministic mode the leaked run is linear in the random kicks it would
cause, so the base run plus one run per kick spans every branch.  Every
detection pattern with at most two events in that affine span becomes a
leakage edge.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._gf2 import RowSpace
from .circuit import (CNOT, KLEAK, KREC, KX, KZ, MEAS, PREP, SWAP, Circuit, Injections,
                      compile_circuit, detection_events, execute, n_detectors, opposite)
from .codes import CodeLayout, PauliSupport, build_code
from .pauli_frame import Frame, LeakModel, NoiseParams, unpack
from .schedules import Schedule, build_schedule

TYPES = ("X", "Z")
_PATTERNS = ((1, 0), (0, 1), (1, 1))
CNOT_PATTERN_SHARE = 4.0 / 15.0
_CHUNK = 8192


@dataclass(frozen=True)
class Fault:
    """One single-fault outcome: Pauli kicks (or a record flip) after an op."""

    op: int
    label: str
    kind: int
    targets: tuple
    factor: float  # rate in units of p_depol


@dataclass
class Effect:
    detectors: tuple
    observables: tuple
    residual: frozenset


@dataclass
class LeakLocation:
    """Leakage of physical qubit ``qubit`` right after op ``op``.

    Per error type the base run and the kick runs are stored restricted to
    the detectors they touch: ``local`` (detector ids), ``base`` (L,),
    ``kicks`` (m, L), with logical flips ``obs_base`` (k,), ``obs_kicks``
    (m, k) and final data errors ``data_base`` (n,), ``data_kicks`` (m, n).
    """

    op: int
    qubit: int
    label: str
    kick_labels: list
    parts: dict = field(default_factory=dict)

    @property
    def n_kicks(self) -> int:
        return len(self.kick_labels)


@dataclass
class FaultCatalog:
    circuit: Circuit
    leak_model: LeakModel
    faults: list
    effects: dict  # error type -> list[Effect], parallel to faults
    leaks: list
    leak_patterns: dict  # error type -> {(u, v): {observable tuple: rate in units of p_leak}}


# ---------------------------------------------------------------------------
# fault enumeration


def pauli_faults(circ: Circuit) -> list:
    out = []
    for i, op in enumerate(circ.ops):
        if op.kind == PREP:
            k = KX if op.basis == "Z" else KZ
            for q in op.a:
                out.append(Fault(i, f"prep{op.basis} flip q{q}", k, (int(q),), 1.0))
        elif op.kind in (CNOT, SWAP):
            share = CNOT_PATTERN_SHARE * (2 if op.kind == SWAP else 1)
            for a, b in zip(op.a, op.b):
                for k, name in ((KX, "X"), (KZ, "Z")):
                    for pa, pb in _PATTERNS:
                        tg = tuple(int(q) for q, on in ((a, pa), (b, pb)) if on)
                        out.append(Fault(i, f"{op.kind} {name}{pa}{pb} q{a},q{b}", k, tg, share))
        elif op.kind == MEAS:
            for r in op.records:
                out.append(Fault(i, f"meas flip r{r}", KREC, (int(r),), 1.0))
    return out


def leak_locations(circ: Circuit) -> list:
    out = []
    for i, op in enumerate(circ.ops):
        if op.kind == PREP:
            qs = op.a
        elif op.kind in (CNOT, SWAP):
            qs = np.concatenate([op.a, op.b])
        else:
            continue
        for q in qs:
            out.append(LeakLocation(i, int(q), f"{op.kind} leak q{q}", []))
    return out


def fault_injections(faults, shot_of=None) -> Injections:
    op, kind, target, shot = [], [], [], []
    for s, f in enumerate(faults):
        for t in f.targets:
            op.append(f.op)
            kind.append(f.kind)
            target.append(t)
            shot.append(s if shot_of is None else shot_of[s])
    return Injections(op, kind, target, shot)


def run_deterministic(circ: Circuit, injections: Injections, shots: int, leak_model, trace: bool = False):
    frame = Frame.new(circ.n_phys, shots)
    out = execute(circ, frame, NoiseParams(leak_model=leak_model), None, injections, trace=trace)
    if trace:
        records, kicks = out
        return detection_events(circ, records, frame), kicks
    return detection_events(circ, out, frame)


def _dense(syn, et):
    dets, obs = syn.dense(et)
    data = unpack(syn.data[et], syn.shots).T
    return dets, obs, data


def _pauli_effects(circ: Circuit, faults: list, leak_model) -> dict:
    effects = {et: [] for et in TYPES}
    for start in range(0, len(faults), _CHUNK):
        chunk = faults[start:start + _CHUNK]
        syn = run_deterministic(circ, fault_injections(chunk), len(chunk), leak_model)
        for et in TYPES:
            dets, obs, data = _dense(syn, et)
            for s in range(len(chunk)):
                effects[et].append(Effect(tuple(np.flatnonzero(dets[s]).tolist()),
                                          tuple(obs[s].astype(int).tolist()),
                                          frozenset(np.flatnonzero(data[s]).tolist())))
    return effects


_KICK_NAMES = {KX: "X", KZ: "Z", KREC: "flip"}


def _leak_effects(circ: Circuit, locs: list, leak_model) -> None:
    per_chunk = max(1, _CHUNK // 16)
    empty = np.empty(0, dtype=np.int64)
    for start in range(0, len(locs), per_chunk):
        chunk = locs[start:start + per_chunk]
        n = len(chunk)
        base = Injections([l.op for l in chunk], [KLEAK] * n, [l.qubit for l in chunk], range(n))
        _, kicks = run_deterministic(circ, base, n, leak_model, trace=True)
        if len(kicks):
            order = np.argsort(kicks.shot, kind="stable")
            k_op, k_kind, k_tg, k_shot = (kicks.op[order], kicks.kind[order],
                                         kicks.target[order], kicks.shot[order])
        else:
            k_op = k_kind = k_tg = k_shot = empty
        counts = np.bincount(k_shot, minlength=n)
        offsets = np.concatenate([[0], np.cumsum(1 + counts)])
        first = np.concatenate([[0], np.cumsum(counts)])
        rank = np.arange(k_shot.size) - first[k_shot]
        # shot offsets[j] is the bare leak of location j; kick t adds one shot after it
        grp = np.repeat(np.arange(n), 1 + counts)
        total = int(offsets[-1])
        inj = Injections.concat([
            Injections(base.op[grp], base.kind[grp], base.target[grp], np.arange(total)),
            Injections(k_op, k_kind, k_tg, offsets[k_shot] + 1 + rank),
        ])
        syn = run_deterministic(circ, inj, total, leak_model)
        for j, loc in enumerate(chunk):
            ids = range(first[j], first[j + 1])
            loc.kick_labels = [f"{_KICK_NAMES[int(k_kind[t])]}@{int(k_op[t])}:{int(k_tg[t])}" for t in ids]
        for et in TYPES:
            dets, obs, data = _dense(syn, et)
            for j, loc in enumerate(chunk):
                lo, sel = offsets[j], slice(offsets[j] + 1, offsets[j + 1])
                b, kd = dets[lo], dets[sel] ^ dets[lo]
                local = np.flatnonzero(b | kd.any(axis=0))
                loc.parts[et] = dict(
                    local=local,
                    base=b[local].astype(np.uint8),
                    kicks=kd[:, local].astype(np.uint8),
                    obs_base=obs[lo].astype(np.uint8),
                    obs_kicks=(obs[sel] ^ obs[lo]).astype(np.uint8),
                    data_base=data[lo].astype(np.uint8),
                    data_kicks=(data[sel] ^ data[lo]).astype(np.uint8),
                )


def achievable_patterns(part: dict, max_events: int = 2) -> dict:
    """{detector tuple: {observable tuple: probability}} over patterns with <= max_events events.

    The kicks are independent fair coins, so the outcome is uniform over the
    affine span and each reachable pattern has probability 2**-rank.
    """
    local, base, kicks = part["local"], part["base"], part["kicks"]
    k = part["obs_base"].size
    L = local.size
    width = L + k
    span = RowSpace(np.concatenate([kicks, part["obs_kicks"]], axis=1) if kicks.size else
                    np.zeros((0, width), dtype=np.uint8), width)
    offset = np.concatenate([base, part["obs_base"]])
    cands = []
    for w in range(1, max_events + 1):
        cands.extend(itertools.combinations(range(L), w))
    if not cands:
        return {}
    obs_opts = list(itertools.product((0, 1), repeat=k))
    rows = np.zeros((len(cands) * len(obs_opts), width), dtype=np.uint8)
    r = 0
    for c in cands:
        for o in obs_opts:
            rows[r, list(c)] = 1
            rows[r, L:] = o
            r += 1
    hit = ~span.reduce_rows(rows ^ offset).any(axis=1)
    share = 2.0 ** -len(span.piv)
    out: dict = {}
    for idx in np.flatnonzero(hit):
        c = cands[idx // len(obs_opts)]
        o = obs_opts[idx % len(obs_opts)]
        out.setdefault(tuple(int(local[i]) for i in c), {})[tuple(o)] = share
    return out


@lru_cache(maxsize=32)
def _catalog_cached(key) -> FaultCatalog:
    family, geometry, d, lru, style, leak_model, cycles = key
    layout = build_code(family, geometry, d)
    schedule = build_schedule(layout, lru, style)
    return _build_catalog(layout, schedule, LeakModel(leak_model), cycles)


def fault_catalog(layout: CodeLayout, schedule: Schedule, leak_model, cycles: int | None = None) -> FaultCatalog:
    """Catalog of single-fault effects for a window of ``cycles`` rounds (default d)."""
    cycles = layout.distance if cycles is None else cycles
    key = (layout.family.value, layout.geometry.value, layout.distance, schedule.lru.value,
           schedule.style.value, LeakModel(leak_model).value, cycles)
    if schedule == build_schedule(layout, schedule.lru, schedule.style):
        return _catalog_cached(key)
    return _build_catalog(layout, schedule, LeakModel(leak_model), cycles)


def _build_catalog(layout, schedule, leak_model, cycles) -> FaultCatalog:
    circ = compile_circuit(layout, schedule, cycles)
    faults = pauli_faults(circ)
    effects = _pauli_effects(circ, faults, leak_model)
    leaks = leak_locations(circ)
    _leak_effects(circ, leaks, leak_model)
    patterns = {et: {} for et in TYPES}
    boundary = {et: n_detectors(layout, cycles, et) for et in TYPES}
    for loc in leaks:
        for et in TYPES:
            for dets, by_obs in achievable_patterns(loc.parts[et]).items():
                key = (dets[0], dets[1] if len(dets) == 2 else boundary[et])
                slot = patterns[et].setdefault(key, {})
                for obs, share in by_obs.items():
                    slot[obs] = slot.get(obs, 0.0) + share
    return FaultCatalog(circ, leak_model, faults, effects, leaks, patterns)


# ---------------------------------------------------------------------------
# the graph


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    probability: float
    weight: float
    observables: tuple
    correction: PauliSupport
    leakage: bool = False


@dataclass
class DecoderGraph:
    error_type: str
    n_stab: int
    slice_count: int
    edges: list
    n_observables: int
    metadata: dict = field(default_factory=dict)

    @property
    def boundary(self) -> int:
        return self.n_stab * self.slice_count

    @property
    def n_vertices(self) -> int:
        return self.boundary + 1

    def vertex(self, stab: int, t: int) -> int:
        return t * self.n_stab + stab

    def vertex_label(self, v: int):
        return "boundary" if v == self.boundary else (v % self.n_stab, v // self.n_stab)

    def to_pymatching(self):
        import pymatching

        m = pymatching.Matching()
        touched = set()
        for e in self.edges:
            ids = {i for i, b in enumerate(e.observables) if b}
            if e.v == self.boundary:
                m.add_boundary_edge(e.u, fault_ids=ids, weight=e.weight, error_probability=e.probability)
            else:
                m.add_edge(e.u, e.v, fault_ids=ids, weight=e.weight, error_probability=e.probability)
            touched.update((e.u, e.v))
        far = 10.0 * max((e.weight for e in self.edges), default=1.0) + 100.0
        for v in range(self.boundary):
            if v not in touched:  # isolated detector: only reachable through its own boundary edge
                m.add_boundary_edge(v, weight=far)
        return m

    def to_json(self) -> dict:
        return {
            "error_type": self.error_type,
            "n_stab": self.n_stab,
            "slice_count": self.slice_count,
            "boundary": self.boundary,
            "n_observables": self.n_observables,
            "metadata": self.metadata,
            "edges": [{"u": e.u, "v": e.v, "p": e.probability, "weight": e.weight,
                       "observables": list(e.observables), "leakage": e.leakage,
                       "correction": sorted(e.correction.x_support | e.correction.z_support)}
                      for e in self.edges],
        }


def _support(error_type: str, qubits) -> PauliSupport:
    return PauliSupport.of(error_type, qubits)


def graph_from_catalog(catalog: FaultCatalog, noise: NoiseParams, error_type: str,
                       leak_edges: bool = True) -> DecoderGraph:
    if error_type not in TYPES:
        raise ValueError("error_type must be 'X' or 'Z'")
    if noise.p_depol <= 0 and noise.p_leak <= 0:
        raise ValueError("edge weights need a nonzero error rate")
    circ = catalog.circuit
    layout = circ.layout
    n_stab = len(layout.stabilizers_of(opposite(error_type)))
    slices = circ.cycles + 1
    boundary = n_stab * slices
    acc: dict = {}
    dropped = 0
    for f, eff in zip(catalog.faults, catalog.effects[error_type]):
        dets = eff.detectors
        if not dets or noise.p_depol <= 0:
            continue
        if len(dets) > 2:
            dropped += 1
            continue
        key = (dets[0], dets[1] if len(dets) == 2 else boundary)
        slot = acc.setdefault(key, {})
        pauli, leak, corr = slot.get(eff.observables, (0.0, 0.0, eff.residual))
        slot[eff.observables] = (pauli + f.factor * noise.p_depol, leak, corr)
    n_leak = 0
    if leak_edges and noise.p_leak > 0:
        for key, by_obs in catalog.leak_patterns[error_type].items():
            slot = acc.setdefault(key, {})
            if not slot:
                n_leak += 1
            for obs, share in by_obs.items():
                pauli, leak, corr = slot.get(obs, (0.0, 0.0, frozenset()))
                slot[obs] = (pauli, leak + share * noise.p_leak, corr)
    edges = {}
    for key, by_obs in acc.items():
        # conflicting observables: keep the dominant class, charge the total rate
        obs, (_, _, corr) = max(by_obs.items(), key=lambda kv: (kv[1][0] + kv[1][1], tuple(-b for b in kv[0])))
        pauli = sum(v[0] for v in by_obs.values())
        leak = sum(v[1] for v in by_obs.values())
        edges[key] = [pauli + leak, obs, corr, leak > pauli]
    out = []
    for (u, v), (p, obs, corr, leak) in sorted(edges.items()):
        p = min(p, 0.999)
        out.append(Edge(u, v, p, -math.log(p), obs, _support(error_type, corr), leak))
    meta = {"hyperedges_dropped": dropped, "leak_edges_added": n_leak,
            "leak_edge_rule": "p_leak x 2^-rank per reachable pattern, summed over leak locations",
            "cycles": circ.cycles}
    return DecoderGraph(error_type, n_stab, slices, out, layout.k, meta)


def build_decoder_graph(layout: CodeLayout, schedule: Schedule, noise: NoiseParams, error_type: str,
                        cycles: int | None = None) -> DecoderGraph:
    """Decoder graph for ``error_type`` errors over ``cycles`` noisy rounds (default d)."""
    catalog = fault_catalog(layout, schedule, noise.leak_model, cycles)
    return graph_from_catalog(catalog, noise, error_type)


def syndrome_to_defects(record, graph: DecoderGraph, layout: CodeLayout) -> list:
    """Defect vertices from per-slice check outcomes.

    ``record`` has shape (slice_count, n_checks): the measured outcome of
    every check of the layout in each noisy round followed by the perfect
    round.  Stabilizer values are products of their checks' outcomes.
    """
    rec = np.asarray(record, dtype=np.uint8) & 1
    if rec.ndim != 2 or rec.shape[0] != graph.slice_count or rec.shape[1] != layout.n_checks:
        raise ValueError(f"record must have shape ({graph.slice_count}, {layout.n_checks}), got {rec.shape}")
    idx = layout.stabilizers_of(opposite(graph.error_type))
    vals = np.stack([rec[:, list(layout.stabilizers[s].checks)].sum(axis=1) % 2 for s in idx], axis=1)
    diff = vals.copy()
    diff[1:] ^= vals[:-1]
    t, s = np.nonzero(diff)
    return sorted((t * graph.n_stab + s).tolist())


def dump_graph(graph: DecoderGraph) -> str:
    return json.dumps(graph.to_json(), indent=1)
