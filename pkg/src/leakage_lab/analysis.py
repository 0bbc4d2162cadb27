"""Fits of logical error curves, threshold crossings and the crossover rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from .codes import Family, Geometry
from .pauli_frame import LeakModel


class FitModel(str, Enum):
    POWER_LAW = "PowerLaw"
    BACON_SHOR_TWO_TERM = "BaconShorTwoTerm"


@dataclass(frozen=True)
class FitResult:
    d_emp: float
    amplitudes: tuple
    chi2: float
    model: FitModel
    n_points: int = 0

    def predict(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.model is FitModel.POWER_LAW:
            return self.amplitudes[0] * p ** self.d_emp
        a, b = self.amplitudes
        return a * p ** self.d_emp + b * p ** (self.d_emp + 1)


@dataclass(frozen=True)
class ThresholdEstimate:
    p_thr: float
    crossings: tuple  # (d1, d2, p_cross)
    uncertainty: float
    p_range: tuple = field(default=(math.nan, math.nan))


class NoCrossingError(ValueError):
    """No pair of curves crosses inside the scanned range; widen the scan."""


def _points(points):
    arr = np.asarray([tuple(pt) for pt in points], dtype=float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError("points must be (p, p_L) or (p, p_L, sigma) tuples")
    if arr.shape[0] < 3:
        raise ValueError("need at least 3 points")
    p, y = arr[:, 0], arr[:, 1]
    sigma = arr[:, 2] if arr.shape[1] == 3 else np.ones_like(p) * np.nan
    if np.any(p <= 0) or np.any(y <= 0):
        raise ValueError("p and p_L must be positive")
    if np.ptp(p) == 0:
        raise ValueError("all points share the same p; the fit is degenerate")
    return p, y, sigma


def _power_law_chi2(k, logp, logy, w):
    # best log-amplitude for a fixed exponent, then the weighted residual
    c = np.sum(w * (logy - k * logp)) / np.sum(w)
    r = logy - c - k * logp
    return float(np.sum(w * r * r)), c


def fit_empirical_distance(points, model=FitModel.POWER_LAW, d_e: int | None = None) -> FitResult:
    """Weighted least-squares fit of ``p_L`` against ``p``.

    ``points`` are (p, p_L) or (p, p_L, sigma).  PowerLaw fits
    ``log p_L = log A + d_emp log p`` with log-space errors sigma / p_L.
    BaconShorTwoTerm fixes the integer ``d_e`` and fits ``A p^d_e + B p^(d_e+1)``.
    Without sigma every point has unit weight (in the fitted space).
    """
    model = FitModel(model)
    p, y, sigma = _points(points)
    if model is FitModel.POWER_LAW:
        s = np.where(np.isnan(sigma), 1.0, sigma / y)
        if np.any(s <= 0):
            raise ValueError("sigma must be positive")
        w = 1.0 / s**2
        logp, logy = np.log(p), np.log(y)
        sw = np.sqrt(w)
        design = np.stack([np.ones_like(logp), logp], axis=1) * sw[:, None]
        (c, k), *_ = np.linalg.lstsq(design, logy * sw, rcond=None)
        chi2, _ = _power_law_chi2(k, logp, logy, w)
        return FitResult(float(k), (float(np.exp(c)),), chi2, model, len(p))
    if d_e is None:
        raise ValueError("BaconShorTwoTerm needs the integer d_e")
    s = np.where(np.isnan(sigma), 1.0, sigma)
    if np.any(s <= 0):
        raise ValueError("sigma must be positive")
    design = np.stack([p**d_e, p ** (d_e + 1)], axis=1) / s[:, None]
    (a, b), *_ = np.linalg.lstsq(design, y / s, rcond=None)
    r = (y - a * p**d_e - b * p ** (d_e + 1)) / s
    return FitResult(float(d_e), (float(a), float(b)), float(np.sum(r * r)), model, len(p))


def power_law_chi2(points, exponent: float) -> float:
    """Chi-squared of the best PowerLaw fit with the exponent held fixed."""
    p, y, sigma = _points(points)
    s = np.where(np.isnan(sigma), 1.0, sigma / y)
    return _power_law_chi2(exponent, np.log(p), np.log(y), 1.0 / s**2)[0]


def sigma_from_interval(ci_low: float, ci_high: float) -> float:
    return (ci_high - ci_low) / 2.0


def points_from_rows(rows) -> list:
    """(p, p_L, sigma) from simulation rows, dropping zero-failure points."""
    return [(r.p, r.p_L, sigma_from_interval(r.ci_low, r.ci_high)) for r in rows if r.failures_any > 0]


# ---------------------------------------------------------------------------
# thresholds


def _crossings(a, b):
    """Crossings in log-log space of two piecewise-linear curves on their overlap."""
    pa, ya = a
    pb, yb = b
    lo, hi = max(pa[0], pb[0]), min(pa[-1], pb[-1])
    if lo >= hi:
        return []
    grid = np.unique(np.concatenate([pa, pb]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    lg = np.log(grid)
    diff = np.interp(lg, np.log(pa), np.log(ya)) - np.interp(lg, np.log(pb), np.log(yb))
    out = []
    for i in range(len(grid) - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0:
            out.append(grid[i])
        elif d0 * d1 < 0:
            t = d0 / (d0 - d1)
            out.append(float(np.exp(lg[i] + t * (lg[i + 1] - lg[i]))))
    if diff[-1] == 0:
        out.append(grid[-1])
    return out


def estimate_threshold(curves: dict) -> ThresholdEstimate:
    """Mean of the pairwise crossings of per-distance curves ``{d: [(p, p_L), ...]}``.

    Curves are interpolated linearly in log-log space.  The uncertainty is
    the standard deviation of the crossings (zero for a single crossing).
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two distances")
    prepared = {}
    for d, pts in curves.items():
        arr = np.asarray([tuple(pt)[:2] for pt in pts], dtype=float)
        if arr.shape[0] < 2:
            raise ValueError(f"curve for d={d} needs at least two points")
        if np.any(arr <= 0):
            raise ValueError("p and p_L must be positive")
        arr = arr[np.argsort(arr[:, 0])]
        prepared[d] = (arr[:, 0], arr[:, 1])
    found = []
    for d1, d2 in combinations(sorted(prepared), 2):
        for x in _crossings(prepared[d1], prepared[d2]):
            found.append((d1, d2, x))
    all_p = np.concatenate([c[0] for c in prepared.values()])
    if not found:
        raise NoCrossingError(
            f"no crossing in [{all_p.min():.3g}, {all_p.max():.3g}]; scan a wider range of p")
    xs = np.array([f[2] for f in found])
    return ThresholdEstimate(float(xs.mean()), tuple(found), float(xs.std()),
                             (float(all_p.min()), float(all_p.max())))


def compute_p_star(p_g: float, p_s: float, gamma_g: float, gamma_s: float) -> float:
    """Crossover rate ``(p_g^gamma_g / p_s^gamma_s)^(1 / (gamma_g - gamma_s))``."""
    if gamma_g == gamma_s:
        raise ValueError("gamma_g and gamma_s must differ")
    for name, v in (("p_g", p_g), ("p_s", p_s)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie in (0, 1)")
    log = (gamma_g * math.log(p_g) - gamma_s * math.log(p_s)) / (gamma_g - gamma_s)
    return math.exp(log)


# ---------------------------------------------------------------------------
# expected fault scaling

# (family, geometry) -> leak models under which the code loses effective distance
_SUSCEPTIBLE = {
    (Family.SUBSPACE, Geometry.ROTATED): {LeakModel.DP, LeakModel.MS},
    (Family.SUBSPACE, Geometry.STANDARD): {LeakModel.DP},
    (Family.SUBSYSTEM, Geometry.ROTATED): {LeakModel.DP},
    (Family.SUBSYSTEM, Geometry.STANDARD): set(),
    (Family.SUBSPACE, Geometry.PERIODIC): {LeakModel.DP},
    (Family.SUBSYSTEM, Geometry.PERIODIC): set(),
}


def leakage_robust(family, geometry, leak_model) -> bool:
    key = (Family(family), Geometry(geometry))
    return LeakModel(leak_model) not in _SUSCEPTIBLE.get(key, set())


def expected_scaling(family, geometry, d: int, leak_model, lru="SwapLR") -> int:
    """Minimum number of faults expected to cause a logical error (d_e).

    A robust code needs ``ceil(d / 2)`` faults.  A susceptible code has its
    effective distance halved to ``ceil(d / 2)``, so it needs half as many.
    Gate-level reduction turns every leak into a depolarizing fault.
    """
    full = math.ceil(d / 2)
    if str(lru) == "GateLR" or leakage_robust(family, geometry, leak_model):
        return full
    return math.ceil(math.ceil(d / 2) / 2)
