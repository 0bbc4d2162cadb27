"""Compile role-level schedules into physical circuits and run them on a frame.

A schedule speaks about roles (data, ancilla, cat partner).  Compiling ``d``
cycles tracks which physical qubit holds each role:

* a ``SwapRelabel`` exchanges the two roles' physical qubits;
* an ``LruSwap`` on role ``r`` moves ``r`` onto a dedicated spare qubit
  (prepare the spare in |0>, CNOT role->spare, CNOT spare->role) and the
  vacated qubit becomes the spare for next time.

The compiled circuit is a flat list of vectorised layers.  :func:`execute`
runs it for a batch of shots, either stochastically or in deterministic
mode (``rng=None``) with explicitly injected faults; in deterministic mode
it can also report every place where a leaked qubit would have randomised
something (``trace=True``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CodeLayout
from .pauli_frame import (EventKind, Frame, LeakModel, NoiseParams, WORD, _xor_bits,
                          cnot_layer, measure_layer, pack, prep_layer, random_words,
                          swap_relabel_layer, unpack)
from .schedules import Schedule

PREP, CNOT, SWAP, MEAS = "prep", "cnot", "swap", "meas"

# kick / injection kinds
KX, KZ, KREC, KLEAK = 0, 1, 2, 3


@dataclass(frozen=True)
class Op:
    kind: str
    a: np.ndarray
    b: np.ndarray | None = None
    basis: str = "Z"
    records: np.ndarray | None = None
    cycle: int = 0


@dataclass
class Circuit:
    layout: CodeLayout
    schedule: Schedule
    cycles: int
    n_phys: int
    ops: list
    cycle_end: list
    rec_check: np.ndarray
    rec_cycle: np.ndarray
    data_start: np.ndarray
    data_end: np.ndarray
    lifetime: np.ndarray = field(default=None)

    @property
    def n_records(self) -> int:
        return len(self.rec_check)


def compile_circuit(layout: CodeLayout, schedule: Schedule, cycles: int) -> Circuit:
    if cycles < 1:
        raise ValueError("need at least one cycle")
    n_roles = schedule.n_roles
    where = list(range(n_roles))
    spare: dict = {}
    n_phys = n_roles
    ops: list = []
    cycle_end = []
    rec_check, rec_cycle = [], []
    since_reset = np.full(n_roles, -1, dtype=np.int64)  # -1: never reinitialised
    snapshot = None

    def grow(k):
        nonlocal since_reset
        since_reset = np.concatenate([since_reset, np.full(k, -1, dtype=np.int64)])

    def tick(qs, amount=1):
        for q in qs:
            if since_reset[q] >= 0:
                since_reset[q] += amount

    for cyc in range(cycles):
        if cyc == 2:
            snapshot = [int(since_reset[where[q]]) for q in range(layout.n_data)]
        for step in schedule.steps:
            groups: dict = {}
            lru_roles = []
            swaps = []
            for ev in step:
                if ev.kind is EventKind.LRU_SWAP:
                    lru_roles.append(ev.qubits[0])
                    continue
                if ev.kind is EventKind.SWAP_RELABEL:
                    swaps.append(ev.qubits)
                    continue
                groups.setdefault(ev.kind, []).append(ev)
            for kind, basis in ((EventKind.PREP_Z, "Z"), (EventKind.PREP_X, "X")):
                if kind in groups:
                    qs = np.array([where[e.qubits[0]] for e in groups[kind]])
                    ops.append(Op(PREP, qs, basis=basis, cycle=cyc))
                    since_reset[qs] = 1
            if EventKind.CNOT in groups:
                evs = groups[EventKind.CNOT]
                a = np.array([where[e.qubits[0]] for e in evs])
                b = np.array([where[e.qubits[1]] for e in evs])
                ops.append(Op(CNOT, a, b, cycle=cyc))
                tick(a)
                tick(b)
            if swaps:
                a = np.array([where[r] for r, _ in swaps])
                b = np.array([where[r] for _, r in swaps])
                ops.append(Op(SWAP, a, b, cycle=cyc))
                tick(a, 2)
                tick(b, 2)
                for ra, rb in swaps:
                    where[ra], where[rb] = where[rb], where[ra]
            for kind, basis in ((EventKind.MEAS_Z, "Z"), (EventKind.MEAS_X, "X")):
                if kind in groups:
                    evs = groups[kind]
                    qs = np.array([where[e.qubits[0]] for e in evs])
                    rid = np.arange(len(rec_check), len(rec_check) + len(evs))
                    rec_check.extend(e.tag for e in evs)
                    rec_cycle.extend([cyc] * len(evs))
                    ops.append(Op(MEAS, qs, basis=basis, records=rid, cycle=cyc))
            if lru_roles:
                for r in lru_roles:
                    if r not in spare:
                        spare[r] = n_phys
                        n_phys += 1
                        grow(1)
                p = np.array([where[r] for r in lru_roles])
                s = np.array([spare[r] for r in lru_roles])
                ops.append(Op(PREP, s, basis="Z", cycle=cyc))
                since_reset[s] = 1
                ops.append(Op(CNOT, p, s, cycle=cyc))
                ops.append(Op(CNOT, s, p, cycle=cyc))
                tick(p, 2)
                tick(s, 2)
                for r in lru_roles:
                    where[r], spare[r] = spare[r], where[r]
        cycle_end.append(len(ops))

    if cycles < 3:
        lifetime = compile_circuit(layout, schedule, 3).lifetime
    else:
        lifetime = np.array([np.inf if v < 0 else float(v) for v in snapshot])
    return Circuit(layout, schedule, cycles, n_phys, ops, cycle_end,
                   np.array(rec_check, dtype=np.int64), np.array(rec_cycle, dtype=np.int64),
                   np.arange(layout.n_data), np.array(where[:layout.n_data]), lifetime)


def leading_leak_probability(circ: Circuit, noise: NoiseParams) -> np.ndarray:
    """Probability that each data qubit is already leaked when the window opens.

    A qubit that is reinitialised every cycle has seen ``lifetime`` leakage
    locations since its last reset; one that is never reset sits at the
    stationary leak fraction of the leak/relax chain.
    """
    pl, pr = noise.p_leak, noise.p_relax
    stationary = pl / (pl + pr) if pl + pr > 0 else 0.0
    finite = np.where(np.isinf(circ.lifetime), 0.0, circ.lifetime)
    return np.where(np.isinf(circ.lifetime), stationary, np.minimum(1.0, finite * pl))


# ---------------------------------------------------------------------------
# execution


class Injections:
    """Faults to apply after given ops: parallel arrays (op, kind, target, shot).

    ``op == -1`` means before the first op.
    """

    def __init__(self, op=(), kind=(), target=(), shot=()):
        self.op = np.asarray(op, dtype=np.int64)
        self.kind = np.asarray(kind, dtype=np.int64)
        self.target = np.asarray(target, dtype=np.int64)
        self.shot = np.asarray(shot, dtype=np.int64)

    @classmethod
    def concat(cls, parts) -> "Injections":
        parts = [p for p in parts if p is not None and p.op.size]
        if not parts:
            return cls()
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("op", "kind", "target", "shot")))

    def __len__(self):
        return int(self.op.size)

    def grouped(self) -> dict:
        if not self.op.size:
            return {}
        order = np.argsort(self.op, kind="stable")
        ops = self.op[order]
        cuts = np.flatnonzero(np.diff(ops)) + 1
        out = {}
        for idx in np.split(order, cuts):
            out[int(self.op[idx[0]])] = (self.kind[idx], self.target[idx], self.shot[idx])
        return out


def _apply(frame: Frame, records: np.ndarray, group) -> None:
    kind, target, shot = group
    for k, arr in ((KX, frame.x), (KZ, frame.z), (KREC, records)):
        sel = kind == k
        if sel.any():
            _xor_bits(arr, target[sel], shot[sel])
    sel = kind == KLEAK
    if sel.any():
        t, s = target[sel], shot[sel]
        np.bitwise_or.at(frame.leaked, (t, s >> 6), np.left_shift(np.uint64(1), (s & 63).astype(np.uint64)))


def mask_positions(mask: np.ndarray):
    """(row, shot) index arrays of the set bits of a packed (rows, words) mask."""
    r, w = np.nonzero(mask)
    if r.size == 0:
        return r, r
    bits = np.unpackbits(mask[r, w].view(np.uint8).reshape(-1, 8), axis=1, bitorder="little")
    rr, bb = np.nonzero(bits)
    return r[rr], w[rr] * WORD + bb


class _Trace:
    def __init__(self):
        self.parts = []

    def add(self, op, kind, target, shot):
        if shot.size:
            self.parts.append(Injections(np.full(shot.size, op), np.full(shot.size, kind), target, shot))

    def result(self) -> Injections:
        return Injections.concat(self.parts)


def execute(circ: Circuit, frame: Frame, noise: NoiseParams, rng, injections: Injections | None = None,
            trace: bool = False, stop: int | None = None):
    """Run the circuit on ``frame``; return packed measurement flips (records, words).

    With ``trace`` (deterministic mode only) also return, as an
    :class:`Injections`, every random kick a leaked qubit would cause:
    partner Paulis at gates, flips of leaked measurements, and the
    relaxation of data still leaked when the window closes.
    """
    if trace and rng is not None:
        raise ValueError("tracing is only meaningful in deterministic mode")
    records = np.zeros((circ.n_records, frame.n_words), dtype=np.uint64)
    groups = injections.grouped() if injections is not None else {}
    tr = _Trace() if trace else None
    if -1 in groups:
        _apply(frame, records, groups[-1])
    ms = noise.leak_model is LeakModel.MS
    n_ops = len(circ.ops) if stop is None else stop
    for i in range(n_ops):
        op = circ.ops[i]
        if op.kind == PREP:
            prep_layer(frame, op.a, op.basis, noise, rng)
        elif op.kind == CNOT:
            if tr is not None:
                _trace_pair(tr, i, frame, op.a, op.b, ms_model=ms)
            cnot_layer(frame, op.a, op.b, noise, rng)
        elif op.kind == SWAP:
            if tr is not None:
                _trace_pair(tr, i, frame, op.a, op.b, ms_model=False)
            swap_relabel_layer(frame, op.a, op.b, noise, rng, merge_cnot=True)
        else:
            out = measure_layer(frame, op.a, op.basis, noise, rng)
            records[op.records] = out
            if tr is not None:
                rows, shots = mask_positions(frame.leaked[op.a])
                tr.add(i, KREC, op.records[rows], shots)
        if i in groups:
            _apply(frame, records, groups[i])
    if tr is None:
        return records
    rows, shots = mask_positions(frame.leaked[circ.data_end])
    last = n_ops - 1
    tr.add(last, KX, circ.data_end[rows], shots)
    tr.add(last, KZ, circ.data_end[rows], shots)
    return records, tr.result()


def _trace_pair(tr: _Trace, i: int, frame: Frame, a: np.ndarray, b: np.ndarray, ms_model: bool) -> None:
    la, lb = frame.leaked[a], frame.leaked[b]
    rows, shots = mask_positions(la & ~lb)  # a leaked, b sealed: b is kicked
    if rows.size:
        tr.add(i, KX, b[rows], shots)
        if not ms_model:
            tr.add(i, KZ, b[rows], shots)
    rows, shots = mask_positions(lb & ~la)
    if rows.size:
        tr.add(i, KZ, a[rows], shots)
        if not ms_model:
            tr.add(i, KX, a[rows], shots)


# ---------------------------------------------------------------------------
# syndromes and detection events


def opposite(kind: str) -> str:
    return "Z" if kind == "X" else "X"


def check_outcomes(circ: Circuit, records: np.ndarray) -> np.ndarray:
    """(cycles, n_checks, words): XOR of each check's records per cycle."""
    out = np.zeros((circ.cycles, circ.layout.n_checks, records.shape[1]), dtype=np.uint64)
    np.bitwise_xor.at(out, (circ.rec_cycle, circ.rec_check), records)
    return out


def stabilizer_values(layout: CodeLayout, outcomes: np.ndarray, kind: str) -> np.ndarray:
    """(cycles, n_stab_of_kind, words): gauge/check products per stabilizer."""
    idx = layout.stabilizers_of(kind)
    out = np.zeros((outcomes.shape[0], len(idx), outcomes.shape[2]), dtype=np.uint64)
    for j, s in enumerate(idx):
        out[:, j] = np.bitwise_xor.reduce(outcomes[:, list(layout.stabilizers[s].checks)], axis=1)
    return out


def perfect_round(layout: CodeLayout, data_x: np.ndarray, data_z: np.ndarray, kind: str) -> np.ndarray:
    """(n_stab_of_kind, words): noiseless syndrome of the data frame."""
    bits = data_z if kind == "X" else data_x
    idx = layout.stabilizers_of(kind)
    out = np.zeros((len(idx), bits.shape[1]), dtype=np.uint64)
    for j, s in enumerate(idx):
        out[j] = np.bitwise_xor.reduce(bits[sorted(layout.stabilizers[s].support)], axis=0)
    return out


def logical_flips(layout: CodeLayout, data_x: np.ndarray, data_z: np.ndarray, error_type: str) -> np.ndarray:
    """(k, words): whether the residual of ``error_type`` flips each logical qubit."""
    bits, logicals = (data_x, layout.logical_z) if error_type == "X" else (data_z, layout.logical_x)
    return np.stack([np.bitwise_xor.reduce(bits[sorted(l)], axis=0) for l in logicals])


@dataclass
class Syndrome:
    """Packed detection events and logical flips for both error types."""

    detectors: dict  # error type -> (n_slices * n_stab, words)
    observables: dict  # error type -> (k, words)
    shots: int
    data: dict = field(default_factory=dict)  # error type -> final data frame bits (n_data, words)

    def dense(self, error_type: str):
        return (unpack(self.detectors[error_type], self.shots).T,
                unpack(self.observables[error_type], self.shots).T)


def detection_events(circ: Circuit, records: np.ndarray, frame: Frame, relax_rng=None) -> Syndrome:
    """Detection events over ``cycles + 1`` slices; the last compares with a perfect round.

    Data qubits still leaked at the end relax to a maximally mixed state
    first (random flips when ``relax_rng`` is given, otherwise untouched).
    """
    layout = circ.layout
    dx = frame.x[circ.data_end].copy()
    dz = frame.z[circ.data_end].copy()
    if relax_rng is not None:
        lk = frame.leaked[circ.data_end]
        if lk.any():
            dx ^= lk & random_words(relax_rng, lk.shape)
            dz ^= lk & random_words(relax_rng, lk.shape)
    outcomes = check_outcomes(circ, records)
    dets, obs = {}, {}
    for et in ("X", "Z"):
        kind = opposite(et)
        vals = stabilizer_values(layout, outcomes, kind)
        final = perfect_round(layout, dx, dz, kind)
        full = np.concatenate([vals, final[None]], axis=0)
        ev = full.copy()
        ev[1:] ^= full[:-1]
        dets[et] = ev.reshape(-1, ev.shape[2])
        obs[et] = logical_flips(layout, dx, dz, et)
    return Syndrome(dets, obs, frame.shots, {"X": dx, "Z": dz})


def n_detectors(layout: CodeLayout, cycles: int, error_type: str) -> int:
    return (cycles + 1) * len(layout.stabilizers_of(opposite(error_type)))


def sample(circ: Circuit, noise: NoiseParams, shots: int, rng: np.random.Generator) -> Syndrome:
    """Stochastic shots of the full protocol: leading leakage, noisy cycles, perfect round."""
    frame = Frame.new(circ.n_phys, shots)
    p0 = leading_leak_probability(circ, noise)
    for q, p in zip(circ.data_start, p0):
        if p > 0:
            frame.leaked[q] |= pack(rng.random(shots) < p)[0]
    records = execute(circ, frame, noise, rng)
    return detection_events(circ, records, frame, relax_rng=rng)
