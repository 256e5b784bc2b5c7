"""Hypotheses on entry distributions as computable statistics.

Lindeberg-type truncated sums, entry truncation, the heavy-tail
normalization b_n = inf{t > b+1 : n l(t) <= t^2} where
l(t) = E[x^2 1{|x| <= t}], and the diagnostic ratios that characterize
laws attracted to the Gaussian with infinite variance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .entries import EntryLaw
from .spectra import HermitianMatrix, RectMatrix


@dataclass(frozen=True)
class LindebergReport:
    """Truncated-sum statistic of one matrix at one threshold."""

    n: int
    threshold: float
    statistic: float
    exceed_count: int


def _entries_of(x):
    if isinstance(x, (HermitianMatrix, RectMatrix)):
        return x.entries
    return np.asarray(x)


def lindeberg_stat(x, M: float) -> LindebergReport:
    """Normalized sum of squared entries above a threshold.

    Square case: (1/n^2) sum |x_ij|^2 1{|x_ij| > M}. Rectangular case:
    (1/(n N)) sum |x_ij|^2 1{|x_ij|^2 > M}, the threshold applying to the
    squared modulus.
    """
    if M < 0:
        raise ValueError("threshold must be nonnegative")
    a = _entries_of(x)
    sq = np.abs(a) ** 2
    if a.shape[0] == a.shape[1]:
        mask = np.abs(a) > M
    else:
        mask = sq > M
    total = float(np.sum(sq * mask))
    norm = a.shape[0] * a.shape[1]
    return LindebergReport(
        n=a.shape[0],
        threshold=float(M),
        statistic=total / norm,
        exceed_count=int(np.count_nonzero(mask)),
    )


def lindeberg_an_stat(x, eps: float, a_n: float):
    """Statistic at threshold eps * a_n plus the exceedance flag.

    Returns (report, flag) where flag is True when the statistic itself
    exceeds eps.
    """
    if eps <= 0 or a_n <= 0:
        raise ValueError("eps and a_n must be positive")
    report = lindeberg_stat(x, eps * a_n)
    return report, report.statistic > eps


def truncate(x, threshold: float):
    """Zero out entries with modulus strictly above the threshold.

    Entries with |x| exactly at the threshold are kept. Hermitian inputs
    stay Hermitian. The removed Hilbert-Schmidt mass over n^2 equals the
    Lindeberg statistic at the same threshold, exactly.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    a = _entries_of(x).copy()
    a[np.abs(a) > threshold] = 0.0
    if isinstance(x, HermitianMatrix):
        return HermitianMatrix(a)
    if isinstance(x, RectMatrix):
        return RectMatrix(a)
    return a


class BnSolution(NamedTuple):
    bn: float
    b: float


def solve_bn(law: EntryLaw, n: int) -> BnSolution:
    """Normalization b_n = inf{t > b+1 : n l(t) <= t^2} for a heavy-tailed law.

    b = inf{t : l(t) > 0}. Requires an infinite-variance law with slowly
    varying l. When the constraint already holds at the boundary, the
    infimum is b+1 itself; otherwise h(t) = n l(t) - t^2 is scanned in
    geometric steps for its first sign change and the root bisected to
    relative accuracy 1e-10.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if law.finite_variance or not law.slowly_varying_l:
        raise ValueError("b_n scaling requires an infinite-variance law with slowly varying l")
    b = law.l_positive_from
    lo = b + 1.0

    def h(t):
        return n * law.truncated_second_moment(t) - t * t

    if h(lo) <= 0.0:
        return BnSolution(lo, b)
    hi = lo * 1.5
    while h(hi) > 0.0:
        lo = hi
        hi *= 1.5
        if hi > 1e300:
            raise RuntimeError("no sign change found while scanning for b_n")
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return BnSolution(hi, b)


@dataclass(frozen=True)
class TailDiagnosticsRow:
    n: int
    b_n: float
    ratio_l: float
    ratio_tail: float
    ratio_mean: float


def heavy_tail_diagnostics(law: EntryLaw, n_list) -> list:
    """Diagnostic ratios along a list of sizes.

    ratio_l = n l(b_n) / b_n^2 (tends to 1), ratio_tail =
    P(|x| > b_n) b_n^2 / l(b_n) and ratio_mean =
    E[|x| 1{|x| > b_n}] b_n / l(b_n) (both tend to 0).
    """
    rows = []
    for n in n_list:
        bn, _ = solve_bn(law, int(n))
        l_bn = law.truncated_second_moment(bn)
        rows.append(TailDiagnosticsRow(
            n=int(n),
            b_n=bn,
            ratio_l=n * l_bn / (bn * bn),
            ratio_tail=law.tail_probability(bn) * bn * bn / l_bn,
            ratio_mean=law.mean_abs_above(bn) * bn / l_bn,
        ))
    return rows


def diagnostics_to_csv(rows, fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["n", "b_n", "ratio_l", "ratio_tail", "ratio_mean"])
    for r in rows:
        writer.writerow([r.n, repr(r.b_n), repr(r.ratio_l),
                         repr(r.ratio_tail), repr(r.ratio_mean)])
