"""Empirical measures on the line, distances between them, reference laws.

Three distances are provided: Kolmogorov (sup of CDF differences),
Levy-Prokhorov (bisection on the two-sided CDF sandwich), and a series
metric over a countable family of tent functions, which metrizes weak
convergence and is the default for concentration experiments.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad

MERGE_TOL = 1e-12


def _merge_atoms(positions, weights, tol=MERGE_TOL):
    order = np.argsort(positions, kind="stable")
    p = positions[order]
    w = weights[order]
    if p.size == 0:
        return p, w
    starts = np.concatenate([[0], np.nonzero(np.diff(p) > tol)[0] + 1])
    wsum = np.add.reduceat(w, starts)
    pmean = np.add.reduceat(p * w, starts) / wsum
    return pmean, wsum


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Probability measure with finitely many atoms, positions ascending."""

    positions: np.ndarray
    weights: np.ndarray

    @staticmethod
    def from_atoms(positions, weights=None, merge_tol=MERGE_TOL) -> "EmpiricalMeasure":
        p = np.asarray(positions, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("need a nonempty 1-d array of atom positions")
        if not np.all(np.isfinite(p)):
            raise ValueError("non-finite atom positions")
        if weights is None:
            w = np.full(p.size, 1.0 / p.size)
        else:
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != p.shape:
                raise ValueError("weights shape mismatch")
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError("weights sum to %r, expected 1" % total)
        w = w / total
        p, w = _merge_atoms(p, w, merge_tol)
        m = object.__new__(EmpiricalMeasure)
        object.__setattr__(m, "positions", p)
        object.__setattr__(m, "weights", w)
        return m

    @staticmethod
    def point_mass(a: float) -> "EmpiricalMeasure":
        return EmpiricalMeasure.from_atoms(np.array([float(a)]))

    @property
    def n_atoms(self) -> int:
        return self.positions.size

    def cdf(self, x):
        """Right-continuous CDF, vectorized."""
        idx = np.searchsorted(self.positions, np.asarray(x, dtype=np.float64), "right")
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[idx]

    def cdf_left(self, x):
        """Left limit of the CDF, i.e. P(X < x)."""
        idx = np.searchsorted(self.positions, np.asarray(x, dtype=np.float64), "left")
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[idx]

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(["position", "weight"])
        for p, w in zip(self.positions, self.weights):
            writer.writerow([repr(float(p)), repr(float(w))])

    @staticmethod
    def from_csv(fileobj) -> "EmpiricalMeasure":
        reader = csv.reader(fileobj)
        header = next(reader)
        if [h.strip() for h in header] != ["position", "weight"]:
            raise ValueError("expected header 'position,weight', got %r" % header)
        rows = [(float(a), float(b)) for a, b in reader]
        p = np.array([r[0] for r in rows])
        w = np.array([r[1] for r in rows])
        return EmpiricalMeasure.from_atoms(p, w)


def integrate(mu: EmpiricalMeasure, f: Callable) -> float:
    """Integral of f against mu: sum of weight * f(position)."""
    try:
        vals = np.asarray(f(mu.positions), dtype=np.float64)
        if vals.shape != mu.positions.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(x)) for x in mu.positions])
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand produced non-finite values")
    return float(np.dot(mu.weights, vals))


def kolmogorov(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Exact sup-distance between the two CDFs."""
    grid = np.union1d(mu.positions, nu.positions)
    at = np.abs(mu.cdf(grid) - nu.cdf(grid)).max()
    before = np.abs(mu.cdf_left(grid) - nu.cdf_left(grid)).max()
    return float(max(at, before))


def _lp_feasible(mu, nu, eps):
    # Both sandwich sides are right-continuous step functions of t whose
    # suprema sit at breakpoints: the atoms of one measure, and the atoms
    # of the other shifted by eps. Each CDF argument is formed once (no
    # (x - eps) + eps round trips), which keeps the predicate exactly
    # symmetric in (mu, nu).
    slack = 1e-15
    a, b = mu.positions, nu.positions
    if np.max(mu.cdf(a) - nu.cdf(a + eps)) > eps + slack:
        return False
    if np.max(mu.cdf(b - eps) - nu.cdf(b)) > eps + slack:
        return False
    if np.max(nu.cdf(a - eps) - mu.cdf(a)) > eps + slack:
        return False
    if np.max(nu.cdf(b) - mu.cdf(b + eps)) > eps + slack:
        return False
    return True


def levy_prokhorov(mu: EmpiricalMeasure, nu: EmpiricalMeasure, tol: float) -> float:
    """Levy-Prokhorov distance to absolute accuracy ``tol``, by bisection.

    The candidate epsilon is feasible when
    F_nu(t-eps) - eps <= F_mu(t) <= F_nu(t+eps) + eps for all t; for two
    probability measures eps = 1 is always feasible, so the search
    bracket is [0, 1].
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if _lp_feasible(mu, nu, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _lp_feasible(mu, nu, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _zigzag(m: int) -> int:
    return (m + 1) // 2 if m % 2 else -(m // 2)


def tent_function(k: int):
    """k-th member (k >= 1) of the tent family used by the series metric.

    Tents have dyadic centers p/2^q and half-width 2^-q; levels are
    enumerated diagonally so that every (center, width) combination
    appears once. All members have sup-norm 1 and compact support.
    """
    if k < 1:
        raise ValueError("tent index starts at 1")
    level = 0
    total = 0
    while total + level + 1 < k:
        total += level + 1
        level += 1
    j = k - total - 1  # 0..level
    q = j
    p = _zigzag(level - j)
    center = p / (1 << q)
    inv_width = float(1 << q)

    def tent(x):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=np.float64) - center) * inv_width)

    tent.center = center
    tent.half_width = 1.0 / inv_width
    return tent


class BLSeriesResult(NamedTuple):
    value: float
    tail_bound: float


def bl_series_metric(mu: EmpiricalMeasure, nu: EmpiricalMeasure, K: int = 64) -> BLSeriesResult:
    """Partial sum sum_{k<=K} 2^-k |int f_k dmu - int f_k dnu|.

    The omitted tail is at most 2^(1-K), reported alongside the value.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    value = 0.0
    for k in range(1, K + 1):
        f = tent_function(k)
        diff = abs(float(np.dot(mu.weights, f(mu.positions)))
                   - float(np.dot(nu.weights, f(nu.positions))))
        value += diff * 2.0 ** (-k)
    return BLSeriesResult(value, 2.0 ** (1 - K))


def pooled_mean(measures: Sequence[EmpiricalMeasure]) -> EmpiricalMeasure:
    """Equal-weight mixture of the inputs (Monte Carlo mean measure)."""
    if not measures:
        raise ValueError("pooled_mean of an empty list")
    p = np.concatenate([m.positions for m in measures])
    w = np.concatenate([m.weights for m in measures]) / len(measures)
    return EmpiricalMeasure.from_atoms(p, w)


# -- reference laws ---------------------------------------------------------

SEMICIRCLE = "semicircle"
MARCHENKO_PASTUR = "marchenko_pastur"
MARCHENKO_PASTUR_SINGULAR = "marchenko_pastur_singular"
DIRAC = "dirac"


@dataclass(frozen=True)
class ReferenceLaw:
    """A limit law with an evaluable CDF.

    'semicircle' on [-2, 2]; 'marchenko_pastur' with ratio c > 0 (the
    square case, including the atom at zero when c > 1);
    'marchenko_pastur_singular' is the law of the scaled singular values
    whose squares, times c, follow marchenko_pastur(c); 'dirac' at a.
    """

    kind: str
    c: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in (SEMICIRCLE, MARCHENKO_PASTUR, MARCHENKO_PASTUR_SINGULAR, DIRAC):
            raise ValueError("unknown reference law %r" % self.kind)
        if self.kind in (MARCHENKO_PASTUR, MARCHENKO_PASTUR_SINGULAR) and self.c <= 0:
            raise ValueError("Marchenko-Pastur ratio must be positive")

    def atom_masses(self):
        """(position, mass) pairs of the law's atoms."""
        if self.kind == DIRAC:
            return ((self.a, 1.0),)
        if self.kind in (MARCHENKO_PASTUR, MARCHENKO_PASTUR_SINGULAR) and self.c > 1:
            return ((0.0, 1.0 - 1.0 / self.c),)
        return ()

    def cdf(self, x: float) -> float:
        return reference_cdf(self, x)


def semicircle_cdf(x: float) -> float:
    if x <= -2.0:
        return 0.0
    if x >= 2.0:
        return 1.0
    return 0.5 + x * math.sqrt(4.0 - x * x) / (4.0 * math.pi) + math.asin(0.5 * x) / math.pi


def semicircle_density(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) <= 2.0
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * math.pi)
    return out


def _mp_edges(c):
    s = math.sqrt(c)
    return (1.0 - s) ** 2, (1.0 + s) ** 2


def _mp_density(c, x):
    lo, hi = _mp_edges(c)
    if x <= lo or x >= hi:
        return 0.0
    return math.sqrt((hi - x) * (x - lo)) / (2.0 * math.pi * c * x)


def _mp_cdf(c, x):
    lo, hi = _mp_edges(c)
    atom = max(0.0, 1.0 - 1.0 / c)
    if x < 0.0:
        return 0.0
    if x <= lo:
        return atom
    if x >= hi:
        return 1.0
    val, _ = quad(lambda s: _mp_density(c, s), lo, x, limit=200)
    return min(1.0, atom + val)


def reference_cdf(law: ReferenceLaw, x: float) -> float:
    """Exact CDF of a reference law at x."""
    x = float(x)
    if law.kind == SEMICIRCLE:
        return semicircle_cdf(x)
    if law.kind == DIRAC:
        return 1.0 if x >= law.a else 0.0
    if law.kind == MARCHENKO_PASTUR:
        return _mp_cdf(law.c, x)
    # singular version: value y has c * y^2 distributed per the square law
    if x < 0.0:
        return 0.0
    return _mp_cdf(law.c, law.c * x * x)


def kolmogorov_to_reference(mu: EmpiricalMeasure, law: ReferenceLaw) -> float:
    """Sup-distance between an empirical CDF and a reference CDF."""
    candidates = list(mu.positions) + [pos for pos, _ in law.atom_masses()]
    atom_mass = dict(law.atom_masses())
    best = 0.0
    for t in candidates:
        ref = reference_cdf(law, t)
        ref_left = ref - atom_mass.get(t, 0.0)
        emp = float(mu.cdf(t))
        emp_left = float(mu.cdf_left(t))
        best = max(best, abs(ref - emp), abs(ref_left - emp_left))
    return best
