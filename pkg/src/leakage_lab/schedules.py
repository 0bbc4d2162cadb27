"""Syndrome-extraction schedules and their correctness / goodness checks.

A schedule describes one extraction cycle in terms of *roles*: data roles
``0 .. n_data-1``, one ancilla role per check (``n_data + check``) and, for
two-qubit cat extraction, a second ancilla role per weight-4 check.  Role
to physical-qubit bookkeeping (swaps move roles around, LRUs move them onto
spare qubits) is done when a schedule is compiled into a circuit.

X-type checks use their ancilla as CNOT control (prepared and measured in
the X basis); Z-type checks use it as target.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codes import CodeLayout, Family, Geometry
from .pauli_frame import EventKind, GateEvent


class LRU(str, Enum):
    NONE = "None"
    SWAP = "SwapLR"
    SYNDROME = "SyndromeLR"
    INT = "IntLR"
    GATE = "GateLR"
    CAT2 = "Cat2"


class Style(str, Enum):
    SERIAL = "SerialXZ"
    ROLLING = "ParallelRolling"


@dataclass(frozen=True)
class CheckTiming:
    """Where one check's couplings sit in the cycle.

    ``gates`` holds (step, data role, slot) triples in coupling order; the
    slot is the position in the check's full (untruncated) gate order.
    """

    check: int
    kind: str
    gates: tuple
    prep_step: int
    meas_step: int
    swapped: bool
    n_slots: int


@dataclass(frozen=True)
class Schedule:
    steps: tuple
    lru: LRU
    style: Style
    n_data: int
    n_checks: int
    n_roles: int
    timings: tuple
    rounds: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def ancilla_role(self, check: int) -> int:
        return self.n_data + check

    def events(self):
        for step in self.steps:
            yield from step

    def count(self, kind) -> int:
        kind = EventKind(kind)
        return sum(e.kind is kind for e in self.events())


@dataclass(frozen=True)
class Validation:
    passed: bool
    witness: tuple | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


# ---------------------------------------------------------------------------
# coupling orders

# Rotated subspace: plaquette corners as (row, col) offsets from the ancilla.
_NW, _NE, _SW, _SE = (-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)
ROTATED_ORDER = {"X": (_NW, _NE, _SW, _SE), "Z": (_NW, _SW, _NE, _SE)}
# Standard / periodic subspace: neighbours of the ancilla.
_N, _W, _E, _S = (-1, 0), (0, -1), (0, 1), (1, 0)
STANDARD_ORDER = {"X": (_N, _W, _E, _S), "Z": (_N, _E, _W, _S)}

# Subsystem surface code: a triangle lives in the 2x2 block with origin (a, b);
# its flavour is (type, a mod 2) and corners are offsets (0|1, 0|1) in the block.
SUBSYSTEM_CORNERS = {
    ("X", 0): ((0, 0), (0, 1), (1, 0)),
    ("X", 1): ((0, 1), (1, 0), (1, 1)),
    ("Z", 0): ((0, 0), (0, 1), (1, 1)),
    ("Z", 1): ((0, 0), (1, 0), (1, 1)),
}
SUBSYSTEM_ORDER = {
    ("X", 0): ((0, 0), (0, 1), (1, 0)),
    ("X", 1): ((0, 1), (1, 1), (1, 0)),
    ("Z", 0): ((0, 0), (1, 1), (0, 1)),
    ("Z", 1): ((1, 0), (1, 1), (0, 0)),
}
# Under swap-LR the triangles of this flavour keep their ancilla.
SUBSYSTEM_NO_SWAP = ("Z", 1)
# Data qubits on sites of this parity class may see the one tolerated
# long-range X pattern under swap-LR.
SUBSYSTEM_BENIGN_CLASS = (0, 1)

# Rolling (fully parallel) schedule: class -> (measurement step, slot permutation
# of SUBSYSTEM_CORNERS).  Classes are (type, a mod 2, (a // 2) mod 2).
ROLLING_PERIOD = 4
ROLLING_ASSIGNMENT = {
    ("X", 0, 0): (0, (0, 1, 2)),
    ("X", 0, 1): (1, (0, 1, 2)),
    ("X", 1, 0): (1, (0, 2, 1)),
    ("X", 1, 1): (0, (1, 2, 0)),
    ("Z", 0, 0): (2, (0, 1, 2)),
    ("Z", 0, 1): (3, (1, 0, 2)),
    ("Z", 1, 0): (3, (0, 1, 2)),
    ("Z", 1, 1): (2, (1, 2, 0)),
}


def _wrap_offset(delta, wrap):
    if wrap is None:
        return delta
    half = wrap / 2
    return tuple(((x + half) % wrap) - half for x in delta)


def _offset(layout: CodeLayout, check: int, q: int):
    c = layout.checks[check].coord
    p = layout.data_coords[q]
    return _wrap_offset((p[0] - c[0], p[1] - c[1]), layout.meta.get("wrap"))


def subsystem_flavor(layout: CodeLayout, check: int) -> tuple:
    a, _ = layout.meta["block_origins"][check]
    return (layout.checks[check].kind, a % 2)


def subsystem_corner(layout: CodeLayout, check: int, q: int) -> tuple:
    a, b = layout.meta["block_origins"][check]
    u, v = layout.meta["sites"][q]
    wrap = layout.meta.get("wrap")
    du, dv = u - a, v - b
    if wrap:
        du, dv = du % wrap, dv % wrap
    return (du, dv)


def site_class(layout: CodeLayout, q: int) -> tuple:
    u, v = layout.meta["sites"][q]
    return (u % 2, v % 2)


def _slots_by_order(layout: CodeLayout, check: int, order, key) -> list:
    """[(slot, data)] for the present corners of ``check`` following ``order``."""
    by_key = {key(layout, check, q): q for q in layout.checks[check].support}
    out = [(slot, by_key[k]) for slot, k in enumerate(order) if k in by_key]
    if len(out) != len(by_key):
        raise RuntimeError(f"check {check}: order does not cover its support")
    return out


def coupling_slots(layout: CodeLayout, orders=None) -> list:
    """For every check, the (slot, data) couplings in gate order and the slot count."""
    fam, geo = layout.family, layout.geometry
    out = []
    for i, ch in enumerate(layout.checks):
        if fam is Family.SUBSPACE:
            table = orders or (ROTATED_ORDER if geo is Geometry.ROTATED else STANDARD_ORDER)
            order = table[ch.kind]
            out.append((_slots_by_order(layout, i, order, lambda L, c, q: _offset(L, c, q)), len(order)))
        elif fam is Family.SUBSYSTEM:
            table = orders or SUBSYSTEM_ORDER
            order = table[subsystem_flavor(layout, i)]
            out.append((_slots_by_order(layout, i, order, subsystem_corner), 3))
        else:  # Bacon-Shor gauges: left then right (X), top then bottom (Z)
            sup = sorted(ch.support, key=lambda q: layout.data_coords[q])
            out.append((list(enumerate(sup)), 2))
    return out


# ---------------------------------------------------------------------------
# assembly


class _Builder:
    """Collects role events at (possibly fractional) times, then renumbers."""

    def __init__(self, layout: CodeLayout, n_extra_roles: int = 0):
        self.layout = layout
        self.n_data = layout.n_data
        self.n_roles = layout.n_data + layout.n_checks + n_extra_roles
        self.events: dict = defaultdict(list)

    def add(self, t, kind, qubits, tag=-1):
        self.events[t].append((EventKind(kind), tuple(int(q) for q in qubits), tag))

    def cnot_steps(self):
        return sorted(t for t, evs in self.events.items()
                      if any(k in (EventKind.CNOT, EventKind.SWAP_RELABEL) for k, _, _ in evs))

    def finish(self):
        times = sorted(self.events)
        renumber = {t: i for i, t in enumerate(times)}
        steps = []
        for t in times:
            evs = self.events[t]
            used = Counter(q for _, qs, _ in evs for q in qs)
            clash = [q for q, c in used.items() if c > 1]
            if clash:
                raise RuntimeError(f"roles {clash} used twice at time {t}")
            steps.append(tuple(GateEvent(k, qs, renumber[t], tag) for k, qs, tag in evs))
        return tuple(steps), renumber


def _prep_kind(kind):
    return EventKind.PREP_X if kind == "X" else EventKind.PREP_Z


def _meas_kind(kind):
    return EventKind.MEAS_X if kind == "X" else EventKind.MEAS_Z


def _cnot_operands(kind, anc, data):
    return (anc, data) if kind == "X" else (data, anc)


def _phase_layout(layout: CodeLayout):
    """Step offsets: (prep time, first CNOT time per type, measurement time per type)."""
    fam = layout.family
    if fam is Family.SUBSPACE:
        return {"X": 1, "Z": 1}, {"X": 5, "Z": 5}
    if fam is Family.SUBSYSTEM:
        return {"X": 1, "Z": 4}, {"X": 4, "Z": 7}
    return {"X": 1, "Z": 3}, {"X": 3, "Z": 5}


def build_schedule(layout: CodeLayout, lru="None", style="SerialXZ", orders=None,
                   rolling_assignment=None) -> Schedule:
    """One extraction cycle for ``layout`` under the given LRU strategy and style."""
    lru, style = LRU(lru), Style(style)
    fam = layout.family
    if lru is LRU.CAT2 and not (fam is Family.SUBSPACE and layout.geometry is Geometry.ROTATED):
        raise ValueError("Cat2 extraction is only defined for the rotated subspace code")
    if style is Style.ROLLING:
        if fam is not Family.SUBSYSTEM:
            raise ValueError("ParallelRolling is only defined for subsystem surface codes")
        if lru not in (LRU.NONE, LRU.SYNDROME):
            raise ValueError("ParallelRolling supports only lru None or SyndromeLR")
        return _rolling_schedule(layout, lru, rolling_assignment or ROLLING_ASSIGNMENT)
    if lru is LRU.CAT2:
        return _cat2_schedule(layout)
    return _serial_schedule(layout, lru, orders)


def _serial_schedule(layout: CodeLayout, lru: LRU, orders=None) -> Schedule:
    b = _Builder(layout)
    first, meas = _phase_layout(layout)
    slots = coupling_slots(layout, orders)
    n = layout.n_data
    timings = []
    swapped_data = set()
    for i, ch in enumerate(layout.checks):
        anc = n + i
        couplings, n_slots = slots[i]
        swaps = lru is LRU.SWAP
        if swaps and layout.family is Family.SUBSYSTEM and subsystem_flavor(layout, i) == SUBSYSTEM_NO_SWAP:
            swaps = False
        b.add(0, _prep_kind(ch.kind), [anc])
        gates = []
        for j, (slot, q) in enumerate(couplings):
            t = first[ch.kind] + slot
            kind = EventKind.SWAP_RELABEL if (swaps and j == len(couplings) - 1) else EventKind.CNOT
            b.add(t, kind, _cnot_operands(ch.kind, anc, q))
            gates.append((t, q, slot))
        if swaps:
            swapped_data.add(couplings[-1][1])
        b.add(meas[ch.kind], _meas_kind(ch.kind), [anc], tag=i)
        timings.append((i, ch.kind, gates, 0, meas[ch.kind], swaps, n_slots))
    last = max(meas.values())
    if lru is LRU.SWAP:
        for q in range(n):
            if q not in swapped_data:
                b.add(last + 1, EventKind.LRU_SWAP, [q])
    if lru in (LRU.SYNDROME, LRU.INT):
        for q in range(n):
            b.add(last + 1, EventKind.LRU_SWAP, [q])
    if lru is LRU.INT:
        _insert_int_lr(b, layout, timings)
    if lru is LRU.GATE:
        for t in b.cnot_steps():
            for _, qs, _ in list(b.events[t]):
                for q in qs:
                    b.add(t + 0.5, EventKind.LRU_SWAP, [q])
    return _finalize(b, layout, lru, Style.SERIAL, timings,
                     {"swapped_data": sorted(swapped_data)})


def _insert_int_lr(b: _Builder, layout: CodeLayout, timings) -> None:
    """LRU after each check's second coupling: ancillas (and, for subspace codes, their data)."""
    for i, kind, gates, _, _, _, _ in timings:
        if len(gates) < 2:
            continue
        t, q, _ = gates[1]
        b.add(t + 0.5, EventKind.LRU_SWAP, [layout.n_data + i])
        if layout.family is Family.SUBSPACE:
            b.add(t + 0.5, EventKind.LRU_SWAP, [q])


def _finalize(b: _Builder, layout, lru, style, timings, meta) -> Schedule:
    steps, renumber = b.finish()
    ts = []
    for i, kind, gates, prep, meas, swapped, n_slots in timings:
        ts.append(CheckTiming(i, kind, tuple((renumber[t], q, s) for t, q, s in gates),
                              renumber[prep], renumber[meas], swapped, n_slots))
    return Schedule(steps, lru, style, layout.n_data, layout.n_checks, b.n_roles, tuple(ts), 1, meta)


def _cat2_schedule(layout: CodeLayout) -> Schedule:
    """Unverified two-qubit cat extraction on weight-4 plaquettes, combined with swap-LR."""
    n, m = layout.n_data, layout.n_checks
    big = [i for i, ch in enumerate(layout.checks) if len(ch.support) == 4]
    partner = {i: n + m + k for k, i in enumerate(big)}
    b = _Builder(layout, len(big))
    slots = coupling_slots(layout)
    timings = []
    swapped_data = set()
    for i, ch in enumerate(layout.checks):
        anc = n + i
        couplings, n_slots = slots[i]
        if i in partner:
            halves = [(anc, couplings[:2]), (partner[i], couplings[2:])]
            b.add(0, EventKind.PREP_X, [anc])
            b.add(0, EventKind.PREP_Z, [partner[i]])
            b.add(1, EventKind.CNOT, [anc, partner[i]])
        else:
            halves = [(anc, couplings)]
            b.add(0, _prep_kind(ch.kind), [anc])
        gates = []
        for a, part in halves:
            for j, (slot, q) in enumerate(part):
                t = 2 + slot
                kind = EventKind.SWAP_RELABEL if j == len(part) - 1 else EventKind.CNOT
                b.add(t, kind, _cnot_operands(ch.kind, a, q))
                gates.append((t, q, slot))
            swapped_data.add(part[-1][1])
            b.add(6, _meas_kind(ch.kind), [a], tag=i)
        timings.append((i, ch.kind, gates, 0, 6, True, n_slots))
    for q in range(n):
        if q not in swapped_data:
            b.add(7, EventKind.LRU_SWAP, [q])
    return _finalize(b, layout, LRU.CAT2, Style.SERIAL, timings,
                     {"swapped_data": sorted(swapped_data), "cat_partner": partner})


def rolling_class(layout: CodeLayout, check: int) -> tuple:
    a, _ = layout.meta["block_origins"][check]
    return subsystem_flavor(layout, check) + ((a // 2) % 2,)


def _rolling_slots(layout: CodeLayout, check: int, perm) -> list:
    corners = SUBSYSTEM_CORNERS[subsystem_flavor(layout, check)]
    return _slots_by_order(layout, check, [corners[k] for k in perm], subsystem_corner)


def _rolling_schedule(layout: CodeLayout, lru: LRU, assignment) -> Schedule:
    """Fully parallel period-4 extraction.

    Each period step s is split into three sub-steps: CNOTs, then the
    measurements of checks measured at s, then their re-preparation.  A
    check measured at step m couples at steps m+1, m+2, m+3 (mod 4).
    """
    P = ROLLING_PERIOD
    wrap = layout.meta.get("wrap")
    if wrap and (wrap // 2) % 2:
        raise ValueError("the rolling pattern repeats every two cells; "
                         f"a periodic lattice with {wrap // 2} cells per side cannot carry it")
    b = _Builder(layout)
    n = layout.n_data
    timings = []
    for i, ch in enumerate(layout.checks):
        m, perm = assignment[rolling_class(layout, i)]
        anc = n + i
        gates = []
        for slot, q in _rolling_slots(layout, i, perm):
            t = 3 * ((m + 1 + slot) % P)
            b.add(t, EventKind.CNOT, _cnot_operands(ch.kind, anc, q))
            gates.append((t, q, slot))
        b.add(3 * m + 1, _meas_kind(ch.kind), [anc], tag=i)
        b.add(3 * m + 2, _prep_kind(ch.kind), [anc])
        timings.append((i, ch.kind, gates, 3 * m + 2, 3 * m + 1, False, 3))
    if lru is LRU.SYNDROME:
        for q in range(n):
            b.add(3 * P, EventKind.LRU_SWAP, [q])
    sched = _finalize(b, layout, lru, Style.ROLLING, timings, {"period": P})
    meas_step = {i: assignment[rolling_class(layout, i)][0] for i in range(layout.n_checks)}
    sched.meta["measure_phase"] = meas_step
    return sched


# ---------------------------------------------------------------------------
# correctness


def _overlapping_pairs(layout: CodeLayout):
    sup = [set(c.support) for c in layout.checks]
    for a in layout.checks_of("X"):
        for b in layout.checks_of("Z"):
            shared = sup[a] & sup[b]
            if shared:
                yield a, b, shared


def validate_correctness(schedule: Schedule, layout: CodeLayout) -> Validation:
    """Structural correctness of the extraction order.

    Commuting X/Z checks that share qubits must couple to the shared qubits
    in a consistent order.  Anticommuting gauge pairs must be separated
    (every gate of one before every gate of the other) under SerialXZ, and
    must meet one of the three rolling-schedule conditions otherwise; a
    rolling schedule must also measure the two halves of every stabilizer
    without an anticommuting measurement in between.
    """
    timing = {t.check: t for t in schedule.timings}
    rolling = schedule.style is Style.ROLLING
    for a, b, shared in _overlapping_pairs(layout):
        ta, tb = timing[a], timing[b]
        if rolling:
            ok, why = _rolling_pair_ok(schedule, ta, tb)
        elif len(shared) % 2 == 0 and not layout.is_subsystem:
            ga = {q: t for t, q, _ in ta.gates if q in shared}
            gb = {q: t for t, q, _ in tb.gates if q in shared}
            signs = {ga[q] < gb[q] for q in shared}
            ok, why = len(signs) == 1, "inconsistent order on shared qubits"
        else:
            a_before = max(t for t, _, _ in ta.gates) < min(t for t, _, _ in tb.gates)
            b_before = max(t for t, _, _ in tb.gates) < min(t for t, _, _ in ta.gates)
            ok, why = a_before or b_before, "gates of anticommuting gauges interleave"
        if not ok:
            return Validation(False, (a, b), {"reason": why, "shared": sorted(shared)})
    if rolling:
        phase = schedule.meta["measure_phase"].__getitem__
        anti = _anticommuting(layout)
        for s, stab in enumerate(layout.stabilizers):
            if _stabilizer_pairing(stab.checks, phase, anti) is None:
                return Validation(False, tuple(stab.checks),
                                  {"reason": "stabilizer halves separated by an anticommuting measurement",
                                   "stabilizer": s})
    return Validation(True)


def _anticommuting(layout: CodeLayout) -> dict:
    """check -> set of checks it anticommutes with."""
    out = defaultdict(set)
    for a, b, shared in _overlapping_pairs(layout):
        if len(shared) % 2:
            out[a].add(b)
            out[b].add(a)
    return out


def _stabilizer_pairing(checks, phase, anti):
    """Period offsets that combine the two halves of a stabilizer, or None.

    The halves A and B measured at phases mA and mB can be multiplied when no
    check measured strictly between them anticommutes with one of the two
    halves (that half then keeps its value across the gap).  Returns the
    offset (0 or 1 periods) of B relative to A, or None when neither the
    forward nor the backward gap is clean.
    """
    if len(checks) == 1:
        return (0,)
    a, b = checks
    ma, mb = phase(a), phase(b)
    if ma == mb:
        return (0, 0)
    P = ROLLING_PERIOD

    def clean(first, second, lo, hi):
        between = lambda c: 0 < (phase(c) - lo) % P < (hi - lo) % P
        return (not any(between(c) for c in anti[first])
                or not any(between(c) for c in anti[second]))

    if clean(a, b, ma, mb):  # A then B later in the same period window
        return (0, 0 if mb > ma else 1)
    if clean(b, a, mb, ma):  # B then A
        return (0, 0 if ma > mb else -1)
    return None


def _rolling_pair_ok(schedule: Schedule, ta: CheckTiming, tb: CheckTiming):
    phase = schedule.meta["measure_phase"]
    delta = (phase[tb.check] - phase[ta.check]) % ROLLING_PERIOD
    if delta == 2:
        return True, ""
    if delta == 0:
        return False, "measured in the same step"
    first, last = (ta, tb) if delta == 1 else (tb, ta)
    last_gate = max(first.gates, key=lambda g: g[2])[1]
    first_gate = min(last.gates, key=lambda g: g[2])[1]
    if last_gate == first_gate:
        return False, f"last gate of check {first.check} and first gate of check {last.check} share qubit {last_gate}"
    return True, ""


def _check_outcomes_exact(schedule: Schedule, layout: CodeLayout, cycles: int, rng) -> np.ndarray:
    """Run the noiseless schedule on an exact tableau; return (cycles, n_checks) outcomes."""
    from ._tableau import Tableau

    # Role -> tableau qubit; LRUs are noiseless identity here and swaps move roles.
    n_roles = schedule.n_roles
    tab = Tableau(n_roles, rng)
    where = list(range(n_roles))
    for q in range(layout.n_data):  # random product input state on the data
        if rng.integers(2):
            tab.h(q)
    out = np.zeros((cycles, layout.n_checks), dtype=np.int64)
    seen = np.zeros((cycles, layout.n_checks), dtype=np.int64)
    for c in range(cycles):
        for step in schedule.steps:
            for ev in step:
                qs = [where[r] for r in ev.qubits]
                k = ev.kind
                if k is EventKind.PREP_Z:
                    tab.reset_z(qs[0])
                elif k is EventKind.PREP_X:
                    tab.reset_x(qs[0])
                elif k is EventKind.CNOT:
                    tab.cnot(*qs)
                elif k is EventKind.SWAP_RELABEL:
                    # CNOT then a physical SWAP; the roles follow their states
                    a, b = qs
                    tab.cnot(a, b)
                    tab.cnot(a, b)
                    tab.cnot(b, a)
                    tab.cnot(a, b)
                    ra, rb = ev.qubits
                    where[ra], where[rb] = where[rb], where[ra]
                elif k in (EventKind.MEAS_Z, EventKind.MEAS_X):
                    bit = tab.measure_z(qs[0]) if k is EventKind.MEAS_Z else tab.measure_x(qs[0])
                    out[c, ev.tag] ^= bit
                    seen[c, ev.tag] += 1
    return out


def verify_correctness_exact(schedule: Schedule, layout: CodeLayout, cycles: int = 6,
                             trials: int = 3, seed: int = 0, warmup: int = 2) -> Validation:
    """Independent route: exact state simulation of repeated noiseless cycles.

    Every stabilizer (product of its checks' outcomes) must repeat its value
    from one cycle to the next once the warm-up cycles are over.  Rolling
    schedules may pair a check with the neighbouring period of its partner,
    so each stabilizer is accepted if some fixed period offset works.
    """
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        out = _check_outcomes_exact(schedule, layout, cycles, rng)
        for s, stab in enumerate(layout.stabilizers):
            ok_any = False
            for offsets in _offset_choices(len(stab.checks), schedule.style is Style.ROLLING):
                vals = []
                for c in range(warmup, cycles - 1):
                    v = 0
                    for chk, o in zip(stab.checks, offsets):
                        v ^= int(out[c + o, chk])
                    vals.append(v)
                if len(set(vals)) <= 1:
                    ok_any = True
                    break
            if not ok_any:
                return Validation(False, (s,), {"reason": "stabilizer value not repeatable"})
    return Validation(True)


def _offset_choices(k: int, rolling: bool):
    if not rolling:
        return [(0,) * k]
    return [(0,) + rest for rest in itertools.product((-1, 0, 1), repeat=k - 1)]


# ---------------------------------------------------------------------------
# goodness


def _dangerous(timing: CheckTiming) -> set:
    """Data roles at which a data leakage spreads a same-type error beyond its triangle class.

    A leaked data qubit kicks the ancilla; the kick reaches the gates after
    it.  It is harmful when exactly one gate follows and at least one
    precedes (the error is then not equivalent to a single-qubit error up
    to the gauge).  Under swap-LR a leaked ancilla is also handed to the
    data qubit of its last gate.
    """
    gates = sorted(timing.gates, key=lambda g: g[2])
    out = set()
    for j, (_, q, _) in enumerate(gates):
        if j >= 1 and len(gates) - j - 1 == 1:
            out.add(q)
    if timing.swapped:
        out.add(gates[-1][1])
    return out


def validate_goodness(schedule: Schedule, layout: CodeLayout) -> Validation:
    """Data-leakage goodness for subsystem surface code schedules.

    No data qubit may be a dangerous interaction point of two checks of the
    same type.  Swap-LR schedules tolerate the designated X-type pattern on
    the benign site class; those hits are listed in ``details['benign']``.
    """
    if layout.family is not Family.SUBSYSTEM:
        return Validation(True, details={"note": "weight-2 or subspace checks: condition vacuous"})
    hits = defaultdict(list)
    for t in schedule.timings:
        for q in _dangerous(t):
            hits[(q, t.kind)].append(t.check)
    benign = []
    for (q, kind), checks in sorted(hits.items()):
        if len(checks) < 2:
            continue
        allowed = (schedule.lru is LRU.SWAP and kind == "X"
                   and site_class(layout, q) == SUBSYSTEM_BENIGN_CLASS)
        if allowed:
            benign.append((q, tuple(checks)))
            continue
        return Validation(False, (q, kind, tuple(checks)), {"benign": benign})
    return Validation(True, details={"benign": benign})


# ---------------------------------------------------------------------------
# rolling schedule search


def search_rolling_assignments(layout: CodeLayout, cells: int = 2, limit: int = 1) -> list:
    """Backtracking search for period-4 schedules that are collision free, good
    and satisfy the rolling correctness conditions.

    ``cells=1`` looks for schedules invariant under single-cell translations,
    ``cells=2`` allows the two cells along the first lattice axis to differ.
    """
    def cls(c):
        key = subsystem_flavor(layout, c)
        if cells == 2:
            key = key + ((layout.meta["block_origins"][c][0] // 2) % 2,)
        return key

    classes = sorted({cls(c) for c in range(layout.n_checks)})
    members = defaultdict(list)
    for c in range(layout.n_checks):
        members[cls(c)].append(c)
    options = [(m, p) for m in range(ROLLING_PERIOD) for p in itertools.permutations(range(3))]
    pairs = [(a, b) for a, b, _ in _overlapping_pairs(layout)]
    anti = _anticommuting(layout)
    found = []

    def gates_of(c, opt):
        m, perm = opt
        return [((m + 1 + slot) % ROLLING_PERIOD, q, slot) for slot, q in _rolling_slots(layout, c, perm)]

    def ok(assign):
        used = set()
        second = Counter()
        for cl, opt in assign.items():
            for c in members[cl]:
                for t, q, slot in gates_of(c, opt):
                    if (t, q) in used:
                        return False
                    used.add((t, q))
                    g = sorted(gates_of(c, opt), key=lambda x: x[2])
                    j = [x[1] for x in g].index(q)
                    if j >= 1 and len(g) - j - 1 == 1:
                        second[(q, layout.checks[c].kind)] += 1
        if any(v > 1 for v in second.values()):
            return False
        for a, b in pairs:
            if cls(a) not in assign or cls(b) not in assign:
                continue
            (ma, pa), (mb, pb) = assign[cls(a)], assign[cls(b)]
            delta = (mb - ma) % ROLLING_PERIOD
            if delta == 2:
                continue
            if delta == 0:
                return False
            ga, gb = gates_of(a, (ma, pa)), gates_of(b, (mb, pb))
            first, last = (ga, gb) if delta == 1 else (gb, ga)
            if max(first, key=lambda g: g[2])[1] == min(last, key=lambda g: g[2])[1]:
                return False
        return True

    def rec(i, assign):
        if len(found) >= limit:
            return
        if i == len(classes):
            phase = lambda c: assign[cls(c)][0]
            if all(_stabilizer_pairing(st.checks, phase, anti) for st in layout.stabilizers):
                found.append(dict(assign))
            return
        for opt in options:
            assign[classes[i]] = opt
            if ok(assign):
                rec(i + 1, assign)
            del assign[classes[i]]

    rec(0, {})
    return found


# ---------------------------------------------------------------------------
# serialization


def schedule_to_json(schedule: Schedule) -> dict:
    return {
        "lru": schedule.lru.value,
        "style": schedule.style.value,
        "rounds": schedule.rounds,
        "n_data": schedule.n_data,
        "n_checks": schedule.n_checks,
        "n_roles": schedule.n_roles,
        "steps": [[{"kind": e.kind.value, "qubits": list(e.qubits), "tag": e.tag} for e in step]
                  for step in schedule.steps],
    }


def dump_schedule(schedule: Schedule) -> str:
    return json.dumps(schedule_to_json(schedule), indent=1)
