"""Code layouts: subspace surface, subsystem surface and Bacon-Shor codes.

Every layout lists its data qubits with coordinates, the *checks* that are
measured by one ancilla each, and the stabilizer generators.  For subspace
codes each check is a stabilizer.  For subsystem codes (subsystem surface,
Bacon-Shor) the checks are gauge operators and each stabilizer records the
checks whose product it is.

Coordinates are (row, col) with row increasing to the south.  Standard
geometries use a grid where data and ancillas interleave; rotated geometries
use the usual 45-degree rotated grid.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable

import numpy as np

from ._gf2 import RowSpace, nullspace, rank


class Family(str, Enum):
    SUBSPACE = "SubspaceSurface"
    SUBSYSTEM = "SubsystemSurface"
    BACON_SHOR = "BaconShor"


class Geometry(str, Enum):
    STANDARD = "Standard"
    ROTATED = "Rotated"
    PERIODIC = "Periodic"


SUPPORTED = {
    (Family.SUBSPACE, Geometry.STANDARD),
    (Family.SUBSPACE, Geometry.ROTATED),
    (Family.SUBSPACE, Geometry.PERIODIC),
    (Family.SUBSYSTEM, Geometry.STANDARD),
    (Family.SUBSYSTEM, Geometry.ROTATED),
    (Family.SUBSYSTEM, Geometry.PERIODIC),
    (Family.BACON_SHOR, Geometry.STANDARD),
}


@dataclass(frozen=True)
class PauliSupport:
    """A Pauli operator on data qubits given by its X and Z supports."""

    x_support: frozenset = frozenset()
    z_support: frozenset = frozenset()

    @classmethod
    def of(cls, kind: str, support: Iterable[int]) -> "PauliSupport":
        s = frozenset(support)
        return cls(x_support=s) if kind == "X" else cls(z_support=s)

    def commutes(self, other: "PauliSupport") -> bool:
        n = len(self.x_support & other.z_support) + len(self.z_support & other.x_support)
        return n % 2 == 0

    def __mul__(self, other: "PauliSupport") -> "PauliSupport":
        return PauliSupport(self.x_support ^ other.x_support, self.z_support ^ other.z_support)

    @property
    def weight(self) -> int:
        return len(self.x_support | self.z_support)

    def is_identity(self) -> bool:
        return not self.x_support and not self.z_support


@dataclass(frozen=True)
class Check:
    """An operator measured by a single ancilla."""

    kind: str
    support: tuple
    coord: tuple
    stabilizer: int = -1

    @property
    def pauli(self) -> PauliSupport:
        return PauliSupport.of(self.kind, self.support)


@dataclass(frozen=True)
class Stabilizer:
    kind: str
    support: frozenset
    checks: tuple

    @property
    def pauli(self) -> PauliSupport:
        return PauliSupport.of(self.kind, self.support)


@dataclass(frozen=True)
class CodeLayout:
    family: Family
    geometry: Geometry
    distance: int
    data_coords: tuple
    checks: tuple
    stabilizers: tuple
    logical_x: tuple  # bare logical X supports, one per logical qubit
    logical_z: tuple
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_data(self) -> int:
        return len(self.data_coords)

    @property
    def n_checks(self) -> int:
        return len(self.checks)

    @property
    def k(self) -> int:
        return len(self.logical_x)

    @property
    def is_subsystem(self) -> bool:
        return self.family in (Family.SUBSYSTEM, Family.BACON_SHOR)

    @property
    def gauges(self) -> tuple:
        """Checks that are gauge operators (empty for subspace codes)."""
        return self.checks if self.is_subsystem else ()

    @property
    def ancilla_coords(self) -> tuple:
        return tuple(c.coord for c in self.checks)

    def checks_of(self, kind: str) -> list[int]:
        return [i for i, c in enumerate(self.checks) if c.kind == kind]

    def stabilizers_of(self, kind: str) -> list[int]:
        return [i for i, s in enumerate(self.stabilizers) if s.kind == kind]

    def check_matrix(self, kind: str) -> np.ndarray:
        idx = self.checks_of(kind)
        m = np.zeros((len(idx), self.n_data), dtype=np.uint8)
        for r, i in enumerate(idx):
            m[r, list(self.checks[i].support)] = 1
        return m

    def stabilizer_matrix(self, kind: str) -> np.ndarray:
        idx = self.stabilizers_of(kind)
        m = np.zeros((len(idx), self.n_data), dtype=np.uint8)
        for r, i in enumerate(idx):
            m[r, list(self.stabilizers[i].support)] = 1
        return m

    def gauge_dof(self) -> int:
        return _gauge_dof(self.n_data, [c.pauli for c in self.checks])


# ---------------------------------------------------------------------------
# construction helpers


def _index(coords: Iterable[tuple]) -> dict:
    ordered = sorted(set(coords))
    return {c: i for i, c in enumerate(ordered)}


def _symplectic(n: int, ops: list[PauliSupport]) -> np.ndarray:
    m = np.zeros((len(ops), 2 * n), dtype=np.uint8)
    for r, op in enumerate(ops):
        m[r, list(op.x_support)] = 1
        m[r, [n + q for q in op.z_support]] = 1
    return m


def _gauge_dof(n: int, ops: list[PauliSupport]) -> int:
    if not ops:
        return 0
    comm = np.array([[0 if a.commutes(b) else 1 for b in ops] for a in ops], dtype=np.uint8)
    return rank(comm) // 2


def _bare_logicals(n: int, checks: list[Check], stabs: list[Stabilizer]) -> tuple[list, list]:
    """Bare logical operators: commute with every check, outside the stabilizer group.

    Returns paired lists (X supports, Z supports) with symplectic pairing
    X_i Z_j anticommuting iff i == j.
    """

    def mat(items, kind):
        rows = [it.support for it in items if it.kind == kind]
        m = np.zeros((len(rows), n), dtype=np.uint8)
        for r, s in enumerate(rows):
            m[r, list(s)] = 1
        return m

    cand = {}
    for kind, other in (("X", "Z"), ("Z", "X")):
        ker = nullspace(mat(checks, other)) if any(c.kind == other for c in checks) else np.eye(n, dtype=np.uint8)
        reps = []
        span = RowSpace(mat(stabs, kind), n)
        for v in ker:
            red = span.reduce(v)
            if red.any():
                reps.append(v.copy())
                span = RowSpace(np.vstack([span.red, red]) if span.red.size else red[None, :], n)
        cand[kind] = reps

    xs, zs = list(cand["X"]), list(cand["Z"])
    # symplectic Gram-Schmidt on the (X-type, Z-type) pairing
    out_x, out_z = [], []
    while xs:
        x = xs.pop(0)
        j = next((j for j, z in enumerate(zs) if int(x @ z) % 2), None)
        if j is None:
            continue
        z = zs.pop(j)
        xs = [v ^ x if int(v @ z) % 2 else v for v in xs]
        zs = [w ^ z if int(x @ w) % 2 else w for w in zs]
        out_x.append(x)
        out_z.append(z)
    # greedy weight reduction by stabilizers (keeps bareness and pairing)
    for kind, ops in (("X", out_x), ("Z", out_z)):
        smat = mat(stabs, kind)
        for i, v in enumerate(ops):
            improved = True
            while improved:
                improved = False
                for row in smat:
                    w = v ^ row
                    if w.sum() < v.sum():
                        v, improved = w, True
            ops[i] = v
    return ([frozenset(np.nonzero(v)[0].tolist()) for v in out_x],
            [frozenset(np.nonzero(v)[0].tolist()) for v in out_z])


def _assemble(family, geometry, d, data_idx, raw_checks, groups, meta=None) -> CodeLayout:
    """raw_checks: list of (kind, support coords, ancilla coord); groups: list of check-index lists."""
    checks_tmp = []
    for kind, sup, coord in raw_checks:
        checks_tmp.append((kind, tuple(sorted(data_idx[c] for c in sup)), coord))
    stabs = []
    owner = {}
    for g in groups:
        kind = checks_tmp[g[0]][0]
        s = frozenset()
        for i in g:
            s = s ^ frozenset(checks_tmp[i][1])
            owner[i] = len(stabs)
        stabs.append(Stabilizer(kind, s, tuple(g)))
    checks = tuple(Check(k, sup, coord, owner.get(i, -1)) for i, (k, sup, coord) in enumerate(checks_tmp))
    n = len(data_idx)
    coords = tuple(sorted(data_idx, key=data_idx.get))
    lx, lz = _bare_logicals(n, list(checks), stabs)
    return CodeLayout(family, geometry, d, coords, checks, tuple(stabs), tuple(lx), tuple(lz), meta or {})


def _subspace_standard(d: int) -> CodeLayout:
    size = 2 * d - 1
    data = [(i, j) for i in range(size) for j in range(size) if (i + j) % 2 == 0]
    idx = _index(data)
    raw = []
    for i in range(size):
        for j in range(size):
            if (i + j) % 2 == 0:
                continue
            kind = "X" if i % 2 == 0 else "Z"
            nb = [(i - 1, j), (i, j - 1), (i, j + 1), (i + 1, j)]
            raw.append((kind, [c for c in nb if c in idx], (i, j)))
    return _assemble(Family.SUBSPACE, Geometry.STANDARD, d, idx, raw, [[i] for i in range(len(raw))])


def _subspace_rotated(d: int) -> CodeLayout:
    data = [(r, c) for r in range(d) for c in range(d)]
    idx = _index(data)
    raw = []
    for r in range(-1, d):
        for c in range(-1, d):
            kind = "X" if (r + c) % 2 == 0 else "Z"
            corners = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
            sup = [q for q in corners if q in idx]
            if len(sup) < 2:
                continue
            if len(sup) == 2:
                horizontal_edge = r in (-1, d - 1)
                if (kind == "X") != horizontal_edge:
                    continue
            raw.append((kind, sup, (r + 0.5, c + 0.5)))
    return _assemble(Family.SUBSPACE, Geometry.ROTATED, d, idx, raw, [[i] for i in range(len(raw))])


def _subspace_periodic(d: int) -> CodeLayout:
    size = 2 * d
    data = [(i, j) for i in range(size) for j in range(size) if (i + j) % 2 == 0]
    idx = _index(data)
    raw = []
    for i in range(size):
        for j in range(size):
            if (i + j) % 2 == 0:
                continue
            kind = "X" if i % 2 == 0 else "Z"
            nb = [((i - 1) % size, j), (i, (j - 1) % size), (i, (j + 1) % size), ((i + 1) % size, j)]
            raw.append((kind, nb, (i, j)))
    return _assemble(Family.SUBSPACE, Geometry.PERIODIC, d, idx, raw, [[i] for i in range(len(raw))],
                     {"wrap": size})


def _removed(site) -> bool:
    return site[0] % 2 == 1 and site[1] % 2 == 1


def _block_pieces(sites: set, block_origins, wrap: int | None = None):
    """Triangular (or truncated) gauge pieces of each 2x2 block.

    Yields (kind, support sites, removed corner, block origin).  Blocks whose
    origin (a, b) has a + b even are X-type.
    """
    for a, b in block_origins:
        corners = [(a, b), (a, b + 1), (a + 1, b), (a + 1, b + 1)]
        if wrap:
            corners = [(u % wrap, v % wrap) for u, v in corners]
        removed = next(c for c in corners if _removed(c))
        sup = [c for c in corners if c in sites and not _removed(c)]
        kind = "X" if (a + b) % 2 == 0 else "Z"
        yield kind, sup, removed, (a, b)


def _subsystem_from_pieces(family, geometry, d, sites, pieces, coord_fn, meta=None) -> CodeLayout:
    idx = _index(s for s in sites if not _removed(s))
    raw = []
    groups: dict = defaultdict(list)
    for kind, sup, removed, origin in pieces:
        groups[(removed, kind)].append(len(raw))
        raw.append((kind, sup, coord_fn(origin)))
    order = sorted(groups, key=lambda key: (key[1], key[0]))
    meta = dict(meta or {})
    # lattice frame used by the schedule builder: block origin of every check
    # and the (unrotated) site of every data qubit
    meta["block_origins"] = tuple(p[3] for p in pieces)
    meta["sites"] = tuple(sorted(idx, key=idx.get))
    return _assemble(family, geometry, d, idx, raw, [groups[k] for k in order], meta)


def _subsystem_standard(d: int) -> CodeLayout:
    top = 2 * d - 2
    sites = {(u, v) for u in range(top + 1) for v in range(top + 1)}
    pieces = []
    origins = [(a, b) for a in range(-1, top + 1) for b in range(-1, top + 1)]
    for kind, sup, removed, origin in _block_pieces(sites, origins):
        a, b = origin
        if len(sup) == 3:
            pieces.append((kind, sup, removed, origin))
        elif len(sup) == 2:
            # weight-2 boundary operators: X on the north/south sides, Z on west/east
            if kind == "X" and a in (-1, top) and 0 <= b < top:
                pieces.append((kind, sup, removed, origin))
            elif kind == "Z" and b in (-1, top) and 0 <= a < top:
                pieces.append((kind, sup, removed, origin))
    return _subsystem_from_pieces(Family.SUBSYSTEM, Geometry.STANDARD, d, sites, pieces,
                                  lambda o: (o[0] + 0.5, o[1] + 0.5))


def _subsystem_rotated(d: int) -> CodeLayout:
    # Diamond of the standard lattice; rotated into (row, col) = (u + v - 1, u - v - 1).
    rho = d - 1
    lo, hi = 1 - rho, 1 + rho
    span = range(-2 * d, 2 * d + 2)
    sites = {(u, v) for u in span for v in span if lo <= u + v <= hi and lo <= u - v <= hi}
    origins = [(a, b) for a in span for b in span]
    pieces = [p for p in _block_pieces(sites, origins) if len(p[1]) >= 2]

    def rot(s):
        return (s[0] + s[1] - 1, s[0] - s[1] - 1)

    layout = _subsystem_from_pieces(Family.SUBSYSTEM, Geometry.ROTATED, d, sites, pieces,
                                    lambda o: rot((o[0] + 0.5, o[1] + 0.5)))
    coords = tuple(rot(c) for c in layout.data_coords)
    return CodeLayout(layout.family, layout.geometry, d, coords, layout.checks, layout.stabilizers,
                      layout.logical_x, layout.logical_z, layout.meta)


def _subsystem_periodic(d: int) -> CodeLayout:
    size = 2 * d
    sites = {(u, v) for u in range(size) for v in range(size)}
    origins = [(a, b) for a in range(size) for b in range(size)]
    pieces = list(_block_pieces(sites, origins, wrap=size))
    return _subsystem_from_pieces(Family.SUBSYSTEM, Geometry.PERIODIC, d, sites, pieces,
                                  lambda o: (o[0] + 0.5, o[1] + 0.5), {"wrap": size})


def _bacon_shor(d: int) -> CodeLayout:
    data = [(i, j) for i in range(d) for j in range(d)]
    idx = _index(data)
    raw = []
    groups = []
    for k in range(d - 1):  # X stabilizer on columns k, k+1
        g = []
        for i in range(d):
            g.append(len(raw))
            raw.append(("X", [(i, k), (i, k + 1)], (i, k + 0.5)))
        groups.append(g)
    for k in range(d - 1):  # Z stabilizer on rows k, k+1
        g = []
        for j in range(d):
            g.append(len(raw))
            raw.append(("Z", [(k, j), (k + 1, j)], (k + 0.5, j)))
        groups.append(g)
    return _assemble(Family.BACON_SHOR, Geometry.STANDARD, d, idx, raw, groups)


_BUILDERS = {
    (Family.SUBSPACE, Geometry.STANDARD): _subspace_standard,
    (Family.SUBSPACE, Geometry.ROTATED): _subspace_rotated,
    (Family.SUBSPACE, Geometry.PERIODIC): _subspace_periodic,
    (Family.SUBSYSTEM, Geometry.STANDARD): _subsystem_standard,
    (Family.SUBSYSTEM, Geometry.ROTATED): _subsystem_rotated,
    (Family.SUBSYSTEM, Geometry.PERIODIC): _subsystem_periodic,
    (Family.BACON_SHOR, Geometry.STANDARD): _bacon_shor,
}

_CACHE: dict = {}


def build_code(family, geometry, d: int) -> CodeLayout:
    """Build the layout for a (family, geometry) pair at odd distance d >= 3."""
    family, geometry = Family(family), Geometry(geometry)
    if (family, geometry) not in SUPPORTED:
        raise ValueError(f"unsupported code: {family.value}/{geometry.value}")
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d!r}")
    key = (family, geometry, int(d))
    if key not in _CACHE:
        _CACHE[key] = _BUILDERS[(family, geometry)](int(d))
    return _CACHE[key]


def expected_parameters(family, geometry, d: int) -> tuple[int, int, int]:
    """Closed-form (n, k, gauge degrees of freedom) for each family."""
    family, geometry = Family(family), Geometry(geometry)
    table = {
        (Family.SUBSPACE, Geometry.STANDARD): (2 * d * d - 2 * d + 1, 1, 0),
        (Family.SUBSPACE, Geometry.ROTATED): (d * d, 1, 0),
        (Family.SUBSPACE, Geometry.PERIODIC): (2 * d * d, 2, 0),
        (Family.SUBSYSTEM, Geometry.STANDARD): (3 * d * d - 2 * d, 1, (d - 1) ** 2),
        (Family.SUBSYSTEM, Geometry.ROTATED): ((3 * d * d - 2 * d + 1) // 2, 1, (d - 1) ** 2 // 2),
        (Family.SUBSYSTEM, Geometry.PERIODIC): (3 * d * d, 2, d * d),
        (Family.BACON_SHOR, Geometry.STANDARD): (d * d, 1, (d - 1) ** 2),
    }
    return table[(family, geometry)]


# ---------------------------------------------------------------------------
# verification


@dataclass
class AlgebraReport:
    results: dict  # name -> (passed, witness or None)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.results.values())


def check_algebra(layout: CodeLayout) -> AlgebraReport:
    """Check parameters, commutation relations and gauge products of a layout."""
    res: dict = {}
    n = layout.n_data
    stabs = [s.pauli for s in layout.stabilizers]
    gauges = [c.pauli for c in layout.checks]
    lx = [PauliSupport(x_support=s) for s in layout.logical_x]
    lz = [PauliSupport(z_support=s) for s in layout.logical_z]

    witness = None
    for i, s in enumerate(stabs):
        for j, t in enumerate(stabs[i + 1:], i + 1):
            if not s.commutes(t):
                witness = ("stabilizer", i, "stabilizer", j)
                break
        if witness:
            break
    if witness is None:
        for i, s in enumerate(stabs):
            for j, g in enumerate(gauges):
                if not s.commutes(g):
                    witness = ("stabilizer", i, "check", j)
                    break
            if witness:
                break
    if witness is None:
        for i, s in enumerate(stabs):
            for j, op in enumerate(lx + lz):
                if not s.commutes(op):
                    witness = ("stabilizer", i, "logical", j)
                    break
            if witness:
                break
    res["stabilizer_commutation"] = (witness is None, witness)

    witness = None
    for i, a in enumerate(lx):
        for j, b in enumerate(lz):
            if a.commutes(b) == (i == j):
                witness = ("logical_x", i, "logical_z", j)
    for i, a in enumerate(lx):
        for j, b in enumerate(lx):
            if not a.commutes(b) or not lz[i].commutes(lz[j]):
                witness = ("logical", i, "logical", j)
    res["logical_pairing"] = (witness is None and len(lx) == len(lz) > 0, witness)

    witness = None
    for i, st in enumerate(layout.stabilizers):
        acc = frozenset()
        for c in st.checks:
            if layout.checks[c].kind != st.kind:
                witness = ("stabilizer", i)
            acc = acc ^ frozenset(layout.checks[c].support)
        if acc != st.support:
            witness = ("stabilizer", i)
        if witness:
            break
    res["gauge_product"] = (witness is None, witness)

    n_exp, k_exp, r_exp = expected_parameters(layout.family, layout.geometry, layout.distance)
    r = _gauge_dof(n, gauges)
    s_rank = rank(_symplectic(n, stabs))
    k = n - r - s_rank
    params = {"n": n, "k": k, "gauge_dof": r, "logicals": len(lx)}
    ok = (n, k, r, len(lx)) == (n_exp, k_exp, r_exp, k_exp)
    if layout.family is Family.BACON_SHOR:
        ok = ok and len(stabs) == 2 * (layout.distance - 1)
    res["parameters"] = (ok, None if ok else params)
    return AlgebraReport(res)


def _opposite_graph(layout: CodeLayout, kind: str):
    """Edges of the syndrome graph seen by errors of ``kind``.

    Vertices are opposite-type stabilizers plus a boundary vertex (index -1);
    each data qubit is an edge.  Requires every qubit to lie in at most two
    opposite-type stabilizers, which holds for all families here.
    """
    other = "Z" if kind == "X" else "X"
    member = defaultdict(list)
    for si in layout.stabilizers_of(other):
        for q in layout.stabilizers[si].support:
            member[q].append(si)
    edges = []
    for q in range(layout.n_data):
        m = member.get(q, [])
        if len(m) > 2:
            raise ValueError("qubit in more than two stabilizers; graph search unsupported")
        m = m + [-1] * (2 - len(m))
        edges.append((m[0], m[1]))
    return edges


def min_weight_logical(layout: CodeLayout, kind: str = "X") -> tuple[int, frozenset]:
    """Minimum-weight (dressed) logical operator of the given Pauli type.

    Such an operator commutes with every opposite-type stabilizer and flips
    at least one bare logical of the opposite type.  The search is a
    breadth-first search for the shortest odd cycle in the parity-lifted
    syndrome graph, which is exact when each qubit meets at most two
    opposite-type stabilizers.
    """
    edges = _opposite_graph(layout, kind)
    partners = layout.logical_z if kind == "X" else layout.logical_x
    best = (None, frozenset())
    for bare in partners:
        adj = defaultdict(list)
        for q, (u, v) in enumerate(edges):
            par = 1 if q in bare else 0
            adj[u].append((v, q, par))
            adj[v].append((u, q, par))
        for start in sorted(adj):
            prev = {(start, 0): None}
            dq = deque([(start, 0)])
            found = None
            while dq and found is None:
                node = dq.popleft()
                for v, q, par in adj[node[0]]:
                    nxt = (v, node[1] ^ par)
                    if nxt in prev:
                        continue
                    prev[nxt] = (node, q)
                    if nxt == (start, 1):
                        found = nxt
                        break
                    dq.append(nxt)
            if found is None:
                continue
            sup: set = set()
            node = found
            while prev[node] is not None:
                node, q = prev[node]
                sup ^= {q}
            w = len(sup)
            if best[0] is None or w < best[0]:
                best = (w, frozenset(sup))
    if best[0] is None:
        raise ValueError("no logical operator found")
    return best


def min_logical_weight(layout: CodeLayout, cap: int):
    """Code distance if it does not exceed ``cap``, else the string ``"exceeds cap"``."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    w = min(min_weight_logical(layout, "X")[0], min_weight_logical(layout, "Z")[0])
    return w if w <= cap else "exceeds cap"


def brute_force_distance(layout: CodeLayout, max_weight: int):
    """Exhaustive search for the lightest nontrivial dressed logical (small codes only).

    A single-type operator is a nontrivial logical when it commutes with every
    opposite-type stabilizer but is not generated by same-type checks.
    """
    n = layout.n_data
    best = None
    for kind, other in (("X", "Z"), ("Z", "X")):
        smat = layout.stabilizer_matrix(other)
        gauge_span = RowSpace(layout.check_matrix(kind), n)
        for w in range(1, max_weight + 1):
            if best is not None and w >= best:
                break
            hit = False
            for sup in combinations(range(n), w):
                if smat[:, list(sup)].sum(axis=1).astype(int).__mod__(2).any():
                    continue
                v = np.zeros(n, dtype=np.uint8)
                v[list(sup)] = 1
                if not gauge_span.contains(v):
                    hit = True
                    break
            if hit:
                best = w if best is None else min(best, w)
                break
    return best


def layout_to_json(layout: CodeLayout) -> dict:
    """JSON-ready description of a layout."""
    return {
        "family": layout.family.value,
        "geometry": layout.geometry.value,
        "distance": layout.distance,
        "n_data": layout.n_data,
        "k": layout.k,
        "gauge_dof": layout.gauge_dof(),
        "data_qubits": [{"index": i, "coord": list(c), "role": "data"} for i, c in enumerate(layout.data_coords)],
        "ancilla_qubits": [
            {"index": layout.n_data + i, "coord": list(c.coord), "role": "ancilla", "type": c.kind}
            for i, c in enumerate(layout.checks)
        ],
        "checks": [
            {"type": c.kind, "support": list(c.support), "stabilizer": c.stabilizer} for c in layout.checks
        ],
        "stabilizers": [
            {"type": s.kind, "support": sorted(s.support), "checks": list(s.checks)} for s in layout.stabilizers
        ],
        "logical_x": [sorted(s) for s in layout.logical_x],
        "logical_z": [sorted(s) for s in layout.logical_z],
    }


def dump_layout(layout: CodeLayout) -> str:
    return json.dumps(layout_to_json(layout), indent=1)
