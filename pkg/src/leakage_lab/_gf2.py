"""Small dense linear algebra over GF(2) on uint8 numpy arrays."""

from __future__ import annotations

import numpy as np


def row_reduce(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Return the reduced row echelon form of ``mat`` and its pivot columns."""
    m = (np.array(mat, dtype=np.uint8) & 1).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(mat: np.ndarray) -> int:
    if np.size(mat) == 0:
        return 0
    return len(row_reduce(mat)[1])


def nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {x : mat @ x = 0 mod 2}."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8))
    n = mat.shape[1]
    red, piv = row_reduce(mat)
    free = [c for c in range(n) if c not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in zip(red, piv):
            if row[f]:
                basis[i, pc] = 1
    return basis


class RowSpace:
    """Membership tests and reduction against the row space of a matrix."""

    def __init__(self, mat: np.ndarray, n: int):
        mat = np.asarray(mat, dtype=np.uint8).reshape(-1, n)
        self.red, self.piv = row_reduce(mat) if mat.shape[0] else (mat, [])

    def reduce(self, v: np.ndarray) -> np.ndarray:
        v = np.array(v, dtype=np.uint8) & 1
        for row, pc in zip(self.red, self.piv):
            if v[pc]:
                v ^= row
        return v

    def reduce_rows(self, m: np.ndarray) -> np.ndarray:
        """Reduce every row of ``m`` at once."""
        m = np.array(m, dtype=np.uint8) & 1
        for row, pc in zip(self.red, self.piv):
            hit = m[:, pc] == 1
            if hit.any():
                m[hit] ^= row
        return m

    def contains(self, v: np.ndarray) -> bool:
        return not self.reduce(v).any()
