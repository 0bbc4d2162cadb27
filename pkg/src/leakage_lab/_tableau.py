"""Small exact stabilizer simulator (Aaronson-Gottesman tableau).

Used only as an independent oracle for schedule correctness: it tracks the
full quantum state of a noiseless Clifford circuit, including the random
outcomes of gauge measurements, which a Pauli frame cannot see.
"""

from __future__ import annotations

import numpy as np


class Tableau:
    def __init__(self, n: int, rng: np.random.Generator):
        self.n = n
        self.rng = rng
        # rows 0..n-1 destabilizers, n..2n-1 stabilizers, row 2n scratch
        self.x = np.zeros((2 * n + 1, n), dtype=bool)
        self.z = np.zeros((2 * n + 1, n), dtype=bool)
        self.r = np.zeros(2 * n + 1, dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True

    def h(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()

    def cnot(self, a: int, b: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, b] & ~(self.x[:, b] ^ self.z[:, a])
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def x_gate(self, a: int) -> None:
        self.r ^= self.z[:, a]

    def _rowsum(self, h: int, i: int) -> None:
        x1, z1, x2, z2 = self.x[i], self.z[i], self.x[h], self.z[h]
        # exponent of i contributed by each qubit (the g function)
        g = np.zeros(self.n, dtype=np.int64)
        g += np.where(x1 & z1, z2.astype(np.int64) - x2.astype(np.int64), 0)
        g += np.where(x1 & ~z1, z2.astype(np.int64) * (2 * x2.astype(np.int64) - 1), 0)
        g += np.where(~x1 & z1, x2.astype(np.int64) * (1 - 2 * z2.astype(np.int64)), 0)
        total = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(g.sum())
        self.r[h] = (total % 4) == 2
        self.x[h] ^= x1
        self.z[h] ^= z1

    def measure_z(self, a: int) -> int:
        n = self.n
        hits = np.flatnonzero(self.x[n:2 * n, a])
        if hits.size:
            p = n + hits[0]
            for i in np.flatnonzero(self.x[:2 * n, a]):
                if i != p:
                    self._rowsum(i, p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, a] = True
            out = bool(self.rng.integers(2))
            self.r[p] = out
            return int(out)
        s = 2 * n
        self.x[s] = False
        self.z[s] = False
        self.r[s] = False
        for i in np.flatnonzero(self.x[:n, a]):
            self._rowsum(s, i + n)
        return int(self.r[s])

    def measure_x(self, a: int) -> int:
        self.h(a)
        out = self.measure_z(a)
        self.h(a)
        return out

    def reset_z(self, a: int) -> None:
        if self.measure_z(a):
            self.x_gate(a)

    def reset_x(self, a: int) -> None:
        self.reset_z(a)
        self.h(a)
