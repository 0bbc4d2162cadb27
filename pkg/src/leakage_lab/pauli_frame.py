"""Pauli frame with leakage, batched over shots.

The frame stores, for every physical qubit, three bit rows packed into
``uint64`` words along the shot axis: the X and Z components of the
accumulated Pauli error and a leaked flag.  Gate primitives act on whole
layers (arrays of qubits with no repeats), so one call advances every shot.

Passing ``rng=None`` switches a primitive into deterministic mode: no
faults are sampled, leaked partners receive no random kick and a leaked
qubit reads 0.  Fault enumeration uses this mode and injects outcomes
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

WORD = 64


class LeakModel(str, Enum):
    DP = "DP"
    MS = "MS"


@dataclass(frozen=True)
class NoiseParams:
    """Per-location error rates and the leaked-gate interaction model."""

    p_leak: float = 0.0
    p_depol: float = 0.0
    p_relax: float | None = None
    leak_model: LeakModel = LeakModel.DP
    correlated_leakage: bool = False

    def __post_init__(self):
        object.__setattr__(self, "leak_model", LeakModel(self.leak_model))
        if self.p_relax is None:
            object.__setattr__(self, "p_relax", self.p_leak)
        for name in ("p_leak", "p_depol", "p_relax"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def p(self) -> float:
        return self.p_leak + self.p_depol

    @property
    def leak_to_depol_ratio(self) -> float:
        return self.p_leak / self.p_depol if self.p_depol else float("inf")

    @classmethod
    def from_total(cls, p: float, ratio: float = 1.0, leak_model="DP", p_relax=None,
                   correlated_leakage: bool = False) -> "NoiseParams":
        """Split p into p_leak = ratio * p_depol with p_leak + p_depol = p."""
        p_depol = p / (1.0 + ratio)
        p_leak = p - p_depol
        return cls(p_leak, p_depol, p_relax, leak_model, correlated_leakage)

    def scaled(self, **changes) -> "NoiseParams":
        vals = dict(p_leak=self.p_leak, p_depol=self.p_depol, p_relax=self.p_relax,
                    leak_model=self.leak_model, correlated_leakage=self.correlated_leakage)
        vals.update(changes)
        return NoiseParams(**vals)


class EventKind(str, Enum):
    PREP_Z = "PrepZ"
    PREP_X = "PrepX"
    CNOT = "CNOT"
    MEAS_Z = "MeasZ"
    MEAS_X = "MeasX"
    SWAP_RELABEL = "SwapRelabel"
    LRU_SWAP = "LruSwap"


_TWO_QUBIT = {EventKind.CNOT, EventKind.SWAP_RELABEL}


@dataclass(frozen=True)
class GateEvent:
    """One gate in a schedule.

    ``qubits`` are role indices (data, ancilla or auxiliary roles).  ``tag``
    carries bookkeeping: the measured check for measurements, or the
    auxiliary role used by an LRU swap.
    """

    kind: EventKind
    qubits: tuple
    timestep: int
    tag: int = -1

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        n = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.qubits) != n:
            raise ValueError(f"{self.kind.value} takes {n} qubit(s), got {self.qubits}")
        if n == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("two-qubit gate needs distinct operands")


@dataclass
class Frame:
    x: np.ndarray
    z: np.ndarray
    leaked: np.ndarray
    lifetime: np.ndarray
    shots: int = 1
    counters: dict = field(default_factory=dict)

    @classmethod
    def new(cls, n_qubits: int, shots: int = 1) -> "Frame":
        w = (shots + WORD - 1) // WORD
        zeros = lambda: np.zeros((n_qubits, w), dtype=np.uint64)
        return cls(zeros(), zeros(), zeros(), np.zeros(n_qubits, dtype=np.int64), shots)

    @property
    def n_qubits(self) -> int:
        return self.x.shape[0]

    @property
    def n_words(self) -> int:
        return self.x.shape[1]

    def copy(self) -> "Frame":
        return Frame(self.x.copy(), self.z.copy(), self.leaked.copy(), self.lifetime.copy(), self.shots)

    def bits(self, arr: np.ndarray) -> np.ndarray:
        """Unpack a (rows, words) packed array into (rows, shots) booleans."""
        return unpack(arr, self.shots)

    def check_index(self, q) -> None:
        q = np.asarray(q)
        if q.size and (q.min() < 0 or q.max() >= self.n_qubits):
            raise IndexError(f"qubit index out of range for {self.n_qubits} qubits")


def unpack(arr: np.ndarray, shots: int) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    b = np.unpackbits(arr.view(np.uint8), axis=-1, bitorder="little")
    return b[..., :shots].astype(bool)


def pack(bits: np.ndarray) -> np.ndarray:
    bits = np.atleast_2d(np.asarray(bits, dtype=bool))
    shots = bits.shape[1]
    w = (shots + WORD - 1) // WORD
    padded = np.zeros((bits.shape[0], w * WORD), dtype=bool)
    padded[:, :shots] = bits
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


# ---------------------------------------------------------------------------
# sampling helpers


def bernoulli_positions(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Sorted indices in [0, total) each included independently with probability p.

    Uses geometric gaps so the cost scales with the number of hits.
    """
    if p <= 0.0 or total <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    if p > 0.02:
        return np.flatnonzero(rng.random(total) < p)
    out = []
    pos = -1
    while True:
        expect = (total - pos) * p
        n = int(expect + 6.0 * np.sqrt(expect) + 16)
        gaps = rng.geometric(p, size=n)
        steps = pos + np.cumsum(gaps)
        out.append(steps[steps < total])
        if steps[-1] >= total:
            break
        pos = int(steps[-1])
    return np.concatenate(out)


def _positions_to_mask(pos: np.ndarray, rows: int, shots: int, words: int) -> np.ndarray:
    mask = np.zeros((rows, words), dtype=np.uint64)
    if pos.size:
        r, s = np.divmod(pos, shots)
        np.bitwise_or.at(mask, (r, s >> 6), np.left_shift(np.uint64(1), (s & 63).astype(np.uint64)))
    return mask


def bernoulli_mask(rng, rows: int, shots: int, words: int, p: float) -> np.ndarray:
    return _positions_to_mask(bernoulli_positions(rng, rows * shots, p), rows, shots, words)


def random_words(rng: np.random.Generator, shape) -> np.ndarray:
    n = int(np.prod(shape))
    return np.frombuffer(rng.bytes(8 * n), dtype=np.uint64).reshape(shape).copy()


def _xor_bits(arr: np.ndarray, qubits: np.ndarray, shots_idx: np.ndarray) -> None:
    if qubits.size:
        np.bitwise_xor.at(arr, (qubits, shots_idx >> 6),
                          np.left_shift(np.uint64(1), (shots_idx & 63).astype(np.uint64)))


def _get_bits(arr: np.ndarray, qubits: np.ndarray, shots_idx: np.ndarray) -> np.ndarray:
    w = arr[qubits, shots_idx >> 6]
    return ((w >> (shots_idx & 63).astype(np.uint64)) & np.uint64(1)).astype(bool)


# ---------------------------------------------------------------------------
# layer primitives


def _as_idx(q) -> np.ndarray:
    return np.atleast_1d(np.asarray(q, dtype=np.int64))


def relax_or_leak_layer(frame: Frame, qubits, noise: NoiseParams, rng, prior=None) -> None:
    """Leakage / relaxation location on each qubit.

    Sealed qubits leak with probability p_leak; qubits that were leaked
    (``prior`` mask, default: the current flags) relax with probability
    p_relax into a maximally mixed computational state.
    """
    q = _as_idx(qubits)
    if rng is None or q.size == 0:
        return
    rows, shots, words = q.size, frame.shots, frame.n_words
    before = frame.leaked[q] if prior is None else prior
    if noise.p_relax > 0 and before.any():
        relax = bernoulli_mask(rng, rows, shots, words, noise.p_relax) & before
        if relax.any():
            frame.leaked[q] &= ~relax
            frame.x[q] ^= relax & random_words(rng, relax.shape)
            frame.z[q] ^= relax & random_words(rng, relax.shape)
    if noise.p_leak > 0:
        leak = bernoulli_mask(rng, rows, shots, words, noise.p_leak) & ~before
        frame.leaked[q] |= leak


def prep_layer(frame: Frame, qubits, basis: str, noise: NoiseParams, rng) -> None:
    q = _as_idx(qubits)
    frame.check_index(q)
    frame.x[q] = 0
    frame.z[q] = 0
    frame.leaked[q] = 0
    frame.lifetime[q] = 0
    if rng is None or q.size == 0:
        return
    flips = bernoulli_mask(rng, q.size, frame.shots, frame.n_words, noise.p_depol)
    if basis == "Z":
        frame.x[q] ^= flips
    else:
        frame.z[q] ^= flips
    if noise.p_leak > 0:
        frame.leaked[q] |= bernoulli_mask(rng, q.size, frame.shots, frame.n_words, noise.p_leak)


def _depolarize_pairs(frame: Frame, a: np.ndarray, b: np.ndarray, p: float, rng, sealed: np.ndarray) -> int:
    """With probability p apply one of the 15 non-identity two-qubit Paulis (sealed pairs only)."""
    if p <= 0:
        return 0
    pos = bernoulli_positions(rng, a.size * frame.shots, p)
    if pos.size == 0:
        return 0
    r, s = np.divmod(pos, frame.shots)
    keep = _get_bits(sealed, r, s)
    r, s = r[keep], s[keep]
    pauli = rng.integers(1, 16, size=r.size)
    for bit, arr, qs in ((0, frame.x, a), (1, frame.z, a), (2, frame.x, b), (3, frame.z, b)):
        sel = ((pauli >> bit) & 1).astype(bool)
        _xor_bits(arr, qs[r[sel]], s[sel])
    return int(r.size)


def _two_qubit_location(frame: Frame, a: np.ndarray, b: np.ndarray, noise: NoiseParams, rng) -> None:
    """Depolarizing fault, then leakage, then relaxation, at one two-qubit location."""
    sealed = ~(frame.leaked[a] | frame.leaked[b])
    n = _depolarize_pairs(frame, a, b, noise.p_depol, rng, sealed)
    frame.counters["depol_faults"] = frame.counters.get("depol_faults", 0) + n
    frame.lifetime[a] += 1
    frame.lifetime[b] += 1
    prior_a, prior_b = frame.leaked[a].copy(), frame.leaked[b].copy()
    if noise.correlated_leakage:
        if noise.p_leak > 0:
            both = bernoulli_mask(rng, a.size, frame.shots, frame.n_words, noise.p_leak)
            frame.leaked[a] |= both & ~prior_a
            frame.leaked[b] |= both & ~prior_b
        relax_only = noise.scaled(p_leak=0.0)
        relax_or_leak_layer(frame, a, relax_only, rng, prior_a)
        relax_or_leak_layer(frame, b, relax_only, rng, prior_b)
    else:
        relax_or_leak_layer(frame, a, noise, rng, prior_a)
        relax_or_leak_layer(frame, b, noise, rng, prior_b)


def cnot_layer(frame: Frame, controls, targets, noise: NoiseParams, rng) -> None:
    c, t = _as_idx(controls), _as_idx(targets)
    if np.any(c == t):
        raise ValueError("CNOT needs distinct operands")
    frame.check_index(c)
    frame.check_index(t)
    lc, lt = frame.leaked[c], frame.leaked[t]
    both = ~(lc | lt)
    frame.x[t] ^= frame.x[c] & both
    frame.z[c] ^= frame.z[t] & both
    if rng is None:
        return
    only_c = lc & ~lt
    only_t = lt & ~lc
    if only_c.any() or only_t.any():
        shape = only_c.shape
        if noise.leak_model is LeakModel.DP:
            frame.x[t] ^= only_c & random_words(rng, shape)
            frame.z[t] ^= only_c & random_words(rng, shape)
            frame.x[c] ^= only_t & random_words(rng, shape)
            frame.z[c] ^= only_t & random_words(rng, shape)
        else:
            frame.x[t] ^= only_c & random_words(rng, shape)
            frame.z[c] ^= only_t & random_words(rng, shape)
    _two_qubit_location(frame, c, t, noise, rng)


def swap_relabel_layer(frame: Frame, a, b, noise: NoiseParams, rng, merge_cnot: bool = False) -> None:
    """Exchange the states of qubits a and b; the roles swap with them.

    With ``merge_cnot`` the gadget is the final syndrome CNOT (a controls b)
    fused with the SWAP.  Physically it is the two CNOTs (b -> a, a -> b),
    so noise is charged as two CNOT locations.  A leaked operand blocks the
    state transfer and its leaked flag stays on its physical qubit, which
    now plays the other role; the sealed partner is fully depolarized (the
    two constituent CNOTs twirl it in both X and Z under either model).
    """
    a, b = _as_idx(a), _as_idx(b)
    if np.any(a == b):
        raise ValueError("swap needs distinct operands")
    frame.check_index(a)
    frame.check_index(b)
    la, lb = frame.leaked[a], frame.leaked[b]
    both = ~(la | lb)
    if merge_cnot:
        frame.x[b] ^= frame.x[a] & both
        frame.z[a] ^= frame.z[b] & both
    for arr in (frame.x, frame.z):
        diff = (arr[a] ^ arr[b]) & both
        arr[a] ^= diff
        arr[b] ^= diff
    if rng is None:
        return
    only_a = la & ~lb
    only_b = lb & ~la
    if only_a.any() or only_b.any():
        shape = only_a.shape
        frame.x[b] ^= only_a & random_words(rng, shape)
        frame.z[b] ^= only_a & random_words(rng, shape)
        frame.x[a] ^= only_b & random_words(rng, shape)
        frame.z[a] ^= only_b & random_words(rng, shape)
    _two_qubit_location(frame, b, a, noise, rng)
    _two_qubit_location(frame, a, b, noise, rng)


def measure_layer(frame: Frame, qubits, basis: str, noise: NoiseParams, rng) -> np.ndarray:
    """Packed outcome flips (rows = qubits).  Leaked qubits read 1 (stochastic mode)."""
    q = _as_idx(qubits)
    frame.check_index(q)
    out = (frame.x[q] if basis == "Z" else frame.z[q]).copy()
    leaked = frame.leaked[q]
    if rng is None:
        return out & ~leaked
    out ^= bernoulli_mask(rng, q.size, frame.shots, frame.n_words, noise.p_depol)
    return (out & ~leaked) | leaked


# ---------------------------------------------------------------------------
# single-qubit convenience API


def apply_prep(frame: Frame, q: int, basis: str, noise: NoiseParams, rng) -> None:
    prep_layer(frame, [q], basis, noise, rng)


def apply_cnot(frame: Frame, control: int, target: int, noise: NoiseParams, rng) -> None:
    if control == target:
        raise ValueError("CNOT needs distinct operands")
    cnot_layer(frame, [control], [target], noise, rng)


def apply_measure(frame: Frame, q: int, basis: str, noise: NoiseParams, rng) -> np.ndarray:
    """Outcome bits, one per shot."""
    return unpack(measure_layer(frame, [q], basis, noise, rng), frame.shots)[0]


def apply_relax_or_leak(frame: Frame, q: int, noise: NoiseParams, rng) -> None:
    frame.check_index([q])
    relax_or_leak_layer(frame, [q], noise, rng)


def apply_swap_relabel(frame: Frame, a: int, b: int, noise: NoiseParams, rng, merge_cnot: bool = False) -> None:
    if a == b:
        raise ValueError("swap needs distinct operands")
    swap_relabel_layer(frame, [a], [b], noise, rng, merge_cnot)
