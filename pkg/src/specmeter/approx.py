"""Constructive Lipschitz approximation and spectral inequality checkers.

A compactly supported 1-Lipschitz function is approximated by a staircase
of signed ramps of rise delta marching across the support; the staircase
splits exactly into convex and concave 1-Lipschitz hinge pieces, at most
2*ceil(2M/delta) of them. The check_* functions evaluate classical matrix
inequalities numerically and return their slack margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import kolmogorov
from .spectra import HermitianMatrix, eigenvalues, esd

# Subgaussian convex concentration constants for a direct sum of blocks
# bounded by rho in Euclidean norm: deviation probability <= C exp(-t^2/c)
# with C = 4 and c = 16 rho^2. Recorded for reporting; nothing asserts them.
CCP_C = 4.0
CCP_C_SCALE = 16.0


def ccp_constants(rho: float):
    """(C, c) of the convex concentration property for block bound rho."""
    return CCP_C, CCP_C_SCALE * rho * rho


@dataclass(frozen=True)
class PiecewiseRamp:
    """sign * clamp(x + offset, 0, delta): one stair step."""

    offset: float
    sign: int
    delta: float

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.sign * np.clip(x + self.offset, 0.0, self.delta)


@dataclass(frozen=True)
class HingePiece:
    """sign * max(x - knot, 0): convex for sign +1, concave for sign -1."""

    knot: float
    sign: int

    @property
    def tag(self) -> str:
        return "convex" if self.sign > 0 else "concave"

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.sign * np.maximum(x - self.knot, 0.0)


@dataclass(frozen=True)
class LipschitzDecomposition:
    """Staircase approximant together with its convex/concave split."""

    ramps: tuple
    pieces: tuple
    delta: float
    M: float

    @property
    def kappa(self) -> int:
        return len(self.pieces)

    def f_delta(self, x):
        x = np.asarray(x, dtype=np.float64)
        total = np.zeros_like(x)
        for ramp in self.ramps:
            total += ramp(x)
        return total

    def sum_pieces(self, x):
        x = np.asarray(x, dtype=np.float64)
        total = np.zeros_like(x)
        for piece in self.pieces:
            total += piece(x)
        return total


def build_f_delta(f: Callable, M: float, delta: float,
                  grid_points: int = 4096) -> LipschitzDecomposition:
    """Staircase approximation of a 1-Lipschitz f supported in [-M, M].

    Ramps of rise delta march from -M; each step goes up when the target
    f(-M + (n+1) delta) is at least the current staircase level, down
    otherwise. Consecutive same-sign ramps merge into single clamps, each
    split as a difference of two hinges, so the piece count kappa stays
    at most 2 * ceil(2M / delta) and sup|f - f_delta| <= delta.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if M <= 0:
        raise ValueError("M must be positive")
    grid = np.linspace(-M - 1.0, M + 1.0, grid_points)
    fg = np.asarray(f(grid), dtype=np.float64)
    if fg.shape != grid.shape:
        fg = np.array([float(f(x)) for x in grid])
    step = grid[1] - grid[0]
    if np.max(np.abs(np.diff(fg))) > step + 1e-9:
        raise ValueError("f violates the 1-Lipschitz bound on the check grid")
    outside = np.abs(grid) > M
    if np.max(np.abs(fg[outside]), initial=0.0) > 1e-9:
        raise ValueError("f does not vanish outside [-M, M]")

    steps = math.ceil(2.0 * M / delta)
    signs = []
    level = 0.0
    for k in range(steps):
        target = float(f(-M + (k + 1) * delta))
        sign = 1 if target >= level else -1
        signs.append(sign)
        level += sign * delta
    ramps = tuple(
        PiecewiseRamp(offset=M - k * delta, sign=s, delta=delta)
        for k, s in enumerate(signs)
    )

    pieces = []
    k = 0
    while k < steps:
        run_start = k
        while k < steps and signs[k] == signs[run_start]:
            k += 1
        s = signs[run_start]
        knot_lo = -M + run_start * delta
        knot_hi = -M + k * delta
        pieces.append(HingePiece(knot=knot_lo, sign=s))
        pieces.append(HingePiece(knot=knot_hi, sign=-s))
    return LipschitzDecomposition(ramps=ramps, pieces=tuple(pieces),
                                  delta=delta, M=M)


# -- inequality margins -------------------------------------------------------


def _same_shape(a: HermitianMatrix, b: HermitianMatrix):
    if a.n != b.n:
        raise ValueError("matrices must have the same size")


def check_hoffman_wielandt(a: HermitianMatrix, b: HermitianMatrix) -> float:
    """||A-B||_HS^2 minus the sorted-pairing eigenvalue mismatch; >= 0."""
    _same_shape(a, b)
    la = eigenvalues(a).values
    lb = eigenvalues(b).values
    hs2 = float(np.sum(np.abs(a.entries - b.entries) ** 2))
    return hs2 - float(np.sum((la - lb) ** 2))


def check_functional_lipschitz(a: HermitianMatrix, b: HermitianMatrix,
                               f: Callable) -> float:
    """Slack of the (1/n)-Lipschitz bound for X -> int f dESD(X/sqrt(n))."""
    _same_shape(a, b)
    n = a.n
    root = math.sqrt(n)
    la = eigenvalues(a).values / root
    lb = eigenvalues(b).values / root
    ia = float(np.mean(np.asarray(f(la), dtype=np.float64)))
    ib = float(np.mean(np.asarray(f(lb), dtype=np.float64)))
    hs = math.sqrt(float(np.sum(np.abs(a.entries - b.entries) ** 2)))
    return hs / n - abs(ia - ib)


def check_klein_convexity(a: HermitianMatrix, b: HermitianMatrix,
                          f: Callable, lam: float) -> float:
    """Convexity slack of X -> int f dESD(X) along one segment; >= 0.

    Unnormalized spectra: the mixture point is lam*A + (1-lam)*B.
    """
    _same_shape(a, b)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    mix = HermitianMatrix(lam * a.entries + (1.0 - lam) * b.entries)

    def mean_f(h):
        vals = eigenvalues(h).values
        return float(np.mean(np.asarray(f(vals), dtype=np.float64)))

    return lam * mean_f(a) + (1.0 - lam) * mean_f(b) - mean_f(mix)


def check_rank_inequality(a: HermitianMatrix, b: HermitianMatrix) -> float:
    """Slack of rank(A-B)/n over the Kolmogorov distance of the ESDs."""
    _same_shape(a, b)
    n = a.n
    diff = HermitianMatrix(a.entries - b.entries)
    hs = diff.hs_norm()
    if hs == 0.0:
        rank = 0
    else:
        vals = np.abs(eigenvalues(diff).values)
        rank = int(np.count_nonzero(vals > 1e-10 * hs))
    dist = kolmogorov(esd(a, 1.0), esd(b, 1.0))
    return rank / n - dist


def check_moment_estimate(x: HermitianMatrix, r: float) -> float:
    """Slack of sum ||row_i||_2^r over sum |lambda_i|^r for 0 < r <= 2."""
    if not 0.0 < r <= 2.0:
        raise ValueError("r must lie in (0, 2]")
    rows = np.sqrt(np.sum(np.abs(x.entries) ** 2, axis=1))
    lhs = float(np.sum(rows ** r))
    lam = eigenvalues(x).values
    rhs = float(np.sum(np.abs(lam) ** r))
    return lhs - rhs
