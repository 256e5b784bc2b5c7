"""Monte Carlo experiment runner.

For each size n the runner draws independent matrices on per-cell derived
streams keyed by (n, replica), computes the empirical spectral measure at
the configured scaling, and measures each replica's distance to the
pooled mean of the *other* replicas (leave-one-out, which removes the
bias a replica's own contribution would add). Results are ordered by
(n, replica) so parallel execution cannot change the output.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conditions import solve_bn
from .ensembles import (
    BAND,
    COUNTEREXAMPLE_Z,
    HANKEL,
    REVERSED_CIRCULANT,
    SYMMETRIC_CIRCULANT,
    TOEPLITZ,
    WIGNER,
    EnsembleSpec,
    dependency_d,
    dependency_d_rect,
    sample_matrix,
    sample_rectangular,
)
from .entries import EntryLaw, GAUSSIAN_COMPLEX, GAUSSIAN_REAL, RngStream
from .measures import (
    EmpiricalMeasure,
    ReferenceLaw,
    bl_series_metric,
    kolmogorov,
    kolmogorov_to_reference,
    levy_prokhorov,
    pooled_mean,
)
from .spectra import (
    EigensolverError,
    HermitianMatrix,
    eigenvalues,
    singular_values,
)
from . import approx

KOLMOGOROV = "kolmogorov"
LEVY_PROKHOROV = "lp"
BL_SERIES = "bl"


@dataclass(frozen=True)
class MetricSpec:
    """Which distance the runner reports: 'kolmogorov', 'lp', or 'bl'."""

    kind: str = BL_SERIES
    tol: float = 1e-4
    K: int = 64

    def __post_init__(self):
        if self.kind not in (KOLMOGOROV, LEVY_PROKHOROV, BL_SERIES):
            raise ValueError("unknown metric %r" % self.kind)

    def distance(self, mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
        if self.kind == KOLMOGOROV:
            return kolmogorov(mu, nu)
        if self.kind == LEVY_PROKHOROV:
            return levy_prokhorov(mu, nu, self.tol)
        return bl_series_metric(mu, nu, self.K).value


def parse_metric(text: str) -> MetricSpec:
    head, _, rest = text.strip().lower().partition(":")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError("malformed metric parameter %r" % item)
            key = key.strip()
            if key == "tol":
                kwargs["tol"] = float(value)
            elif key.lower() == "k":
                kwargs["K"] = int(value)
            else:
                raise ValueError("unknown metric parameter %r" % key)
    if head in ("kolmogorov", "ks"):
        return MetricSpec(KOLMOGOROV, **kwargs)
    if head in ("lp", "levy_prokhorov"):
        return MetricSpec(LEVY_PROKHOROV, **kwargs)
    if head in ("bl", "bl_series", "series"):
        return MetricSpec(BL_SERIES, **kwargs)
    raise ValueError("unknown metric %r" % text)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one Monte Carlo run."""

    ensemble: EnsembleSpec
    sizes: tuple
    replicas: int
    metric: MetricSpec = field(default_factory=MetricSpec)
    seed: int = 0
    scale_rule: str | None = None
    reference: ReferenceLaw | None = None
    aspect: float = 2.0  # N = round(aspect * n) for singular runs

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be nonempty and strictly ascending")
        if self.replicas < 2:
            raise ValueError("need at least 2 replicas for leave-one-out pooling")

    @property
    def effective_scale_rule(self) -> str:
        return self.scale_rule if self.scale_rule else self.ensemble.default_scale_rule


@dataclass(frozen=True)
class ResultRow:
    """One replica of one size. wall_ms is measured and therefore not
    deterministic; the CSV writer emits it only when timing is requested."""

    n: int
    d_n: int
    replica: int
    dist: float
    ref_dist: float
    wall_ms: float
    m2_rel_err: float = 0.0
    error: str = ""


def scale_for(config: ExperimentConfig, n: int) -> float:
    rule = config.effective_scale_rule
    if rule == "sqrt_n":
        return math.sqrt(n)
    if rule == "b_n":
        return solve_bn(config.ensemble.entry, n).bn
    if rule == "unit":
        return 1.0
    raise ValueError("unknown scale rule %r" % rule)


def _square_cell(args):
    spec, n, replica, seed, scale = args
    stream = RngStream(seed).child(n).child(replica)
    start = time.perf_counter()
    try:
        h = sample_matrix(spec, n, stream)
        spectrum = eigenvalues(h)
    except EigensolverError as exc:
        return (n, replica, None, (time.perf_counter() - start) * 1e3, 0.0, str(exc))
    wall = (time.perf_counter() - start) * 1e3
    atoms = spectrum.values / scale
    hs2 = float(np.sum(np.abs(h.entries) ** 2))
    lhs = float(np.mean(atoms ** 2))
    rhs = hs2 / (n * scale * scale)
    m2 = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return (n, replica, atoms, wall, m2, "")


def _rect_cell(args):
    spec, n, N, replica, seed, scale = args
    stream = RngStream(seed).child(n).child(replica)
    start = time.perf_counter()
    try:
        x = sample_rectangular(spec, n, N, stream)
        sv = singular_values(x)
    except EigensolverError as exc:
        return (n, replica, None, (time.perf_counter() - start) * 1e3, 0.0, str(exc))
    wall = (time.perf_counter() - start) * 1e3
    atoms = sv / scale
    hs2 = float(np.sum(np.abs(x.entries) ** 2))
    lhs = float(np.mean(atoms ** 2))
    rhs = hs2 / (n * scale * scale)
    m2 = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return (n, replica, atoms, wall, m2, "")


def _run_cells(worker, tasks, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks, chunksize=1))
    return [worker(t) for t in tasks]


def _assemble_rows(config, cell_results, d_by_n):
    by_n = {}
    for n, replica, atoms, wall, m2, err in cell_results:
        by_n.setdefault(n, []).append((replica, atoms, wall, m2, err))
    rows = []
    measures_by_n = {}
    for n in config.sizes:
        cells = sorted(by_n[n])
        measures = {}
        for replica, atoms, wall, m2, err in cells:
            if atoms is not None:
                measures[replica] = EmpiricalMeasure.from_atoms(atoms)
        measures_by_n[n] = measures
        ref_dist = float("nan")
        if config.reference is not None and measures:
            pooled = pooled_mean(list(measures.values()))
            ref_dist = kolmogorov_to_reference(pooled, config.reference)
        for replica, atoms, wall, m2, err in cells:
            if atoms is None:
                rows.append(ResultRow(n, d_by_n[n], replica, float("nan"),
                                      float("nan"), wall, m2, err))
                continue
            others = [m for r, m in measures.items() if r != replica]
            dist = config.metric.distance(measures[replica], pooled_mean(others))
            rows.append(ResultRow(n, d_by_n[n], replica, dist, ref_dist, wall, m2))
    return rows, measures_by_n


def run_concentration(config: ExperimentConfig, jobs: int = 1,
                      return_measures: bool = False):
    """Concentration experiment: distance of each replica's ESD to the
    leave-one-out pooled mean, one row per (n, replica)."""
    tasks = [
        (config.ensemble, n, r, config.seed, scale_for(config, n))
        for n in config.sizes
        for r in range(config.replicas)
    ]
    d_by_n = {n: dependency_d(config.ensemble, n) for n in config.sizes}
    cells = _run_cells(_square_cell, tasks, jobs)
    rows, measures = _assemble_rows(config, cells, d_by_n)
    return (rows, measures) if return_measures else rows


_HEAVY_OK = (WIGNER, TOEPLITZ, HANKEL, REVERSED_CIRCULANT, SYMMETRIC_CIRCULANT, BAND)


def run_heavy_tail(config: ExperimentConfig, jobs: int = 1,
                   return_measures: bool = False):
    """Concentration run under the heavy-tail scaling b_n.

    Requires an infinite-variance entry law and an ensemble whose block
    sizes grow at most linearly.
    """
    if config.ensemble.entry.finite_variance:
        raise ValueError("heavy-tail runs need an infinite-variance entry law")
    if config.ensemble.kind not in _HEAVY_OK:
        raise ValueError("heavy-tail runs need an ensemble with linearly bounded blocks")
    forced = ExperimentConfig(
        ensemble=config.ensemble, sizes=config.sizes, replicas=config.replicas,
        metric=config.metric, seed=config.seed, scale_rule="b_n",
        reference=config.reference, aspect=config.aspect,
    )
    return run_concentration(forced, jobs=jobs, return_measures=return_measures)


def run_singular(config: ExperimentConfig, N_rule: Callable[[int], int] | None = None,
                 jobs: int = 1, return_measures: bool = False):
    """Singular-value concentration for rectangular ensembles, scale sqrt(n)."""
    if not config.ensemble.rectangular_capable:
        raise ValueError("kind %r is square-only" % config.ensemble.kind)
    if N_rule is None:
        aspect = config.aspect
        N_rule = lambda n: max(1, int(round(aspect * n)))  # noqa: E731
    tasks = [
        (config.ensemble, n, N_rule(n), r, config.seed, math.sqrt(n))
        for n in config.sizes
        for r in range(config.replicas)
    ]
    d_by_n = {n: dependency_d_rect(config.ensemble, n, N_rule(n)) for n in config.sizes}
    cells = _run_cells(_rect_cell, tasks, jobs)
    rows, measures = _assemble_rows(config, cells, d_by_n)
    return (rows, measures) if return_measures else rows


# -- tail profile -------------------------------------------------------------


@dataclass(frozen=True)
class TailProfile:
    thresholds: tuple
    frequencies: tuple
    slope: float
    r_squared: float
    ccp_reference: tuple = (approx.CCP_C, approx.CCP_C_SCALE)


def tail_profile(spec: EnsembleSpec, n: int, replicas: int, f: Callable,
                 t_grid=None, seed: int = 0) -> TailProfile:
    """Empirical exceedance of |int f dESD - mean| over a threshold grid.

    Also fits log-frequency against t^2 (reported, never asserted).
    Needs at least 100 replicas for the frequencies to mean anything.
    A t_grid of None spans the observed deviations with 21 points.
    """
    if replicas < 100:
        raise ValueError("tail profiles need at least 100 replicas")
    root = RngStream(seed)
    scale = math.sqrt(n)
    values = np.empty(replicas)
    for r in range(replicas):
        h = sample_matrix(spec, n, root.child(n).child(r))
        atoms = eigenvalues(h).values / scale
        values[r] = float(np.mean(np.asarray(f(atoms), dtype=np.float64)))
    devs = np.abs(values - values.mean())
    if t_grid is None:
        t_grid = np.linspace(0.0, float(devs.max()), 21)
    t_grid = np.asarray(list(t_grid), dtype=np.float64)
    freqs = np.array([float(np.mean(devs > t)) for t in t_grid])
    mask = (t_grid > 0) & (freqs > 0)
    if mask.sum() >= 2:
        xs = t_grid[mask] ** 2
        ys = np.log(freqs[mask])
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = ys - (slope * xs + intercept)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, r2 = float("nan"), float("nan")
    return TailProfile(tuple(t_grid), tuple(freqs), float(slope), float(r2))


# -- lemma sweeps -------------------------------------------------------------


@dataclass(frozen=True)
class LemmaResult:
    lemma: str
    trial: int
    n: int
    margin: float
    floor: float

    @property
    def ok(self) -> bool:
        return self.margin >= self.floor


def _random_hermitian(law: EntryLaw, n: int, stream: RngStream) -> HermitianMatrix:
    return sample_matrix(EnsembleSpec(WIGNER, entry=law), n, stream)


def _clipped_abs(x):
    return np.minimum(np.abs(x), 3.0)


def run_lemma_sweeps(seed: int = 0, samples: int = 500) -> list:
    """Random sweeps of the five spectral inequalities; margins and floors.

    Trials alternate between real and complex Gaussian entries.
    """
    root = RngStream(seed)
    laws = (EntryLaw(GAUSSIAN_REAL), EntryLaw(GAUSSIAN_COMPLEX))
    results = []
    for trial in range(samples):
        law = laws[trial % 2]
        s = root.child(trial)

        n = 16
        a = _random_hermitian(law, n, s.child(0))
        b = _random_hermitian(law, n, s.child(1))
        hs2 = float(np.sum(np.abs(a.entries - b.entries) ** 2))
        results.append(LemmaResult(
            "hoffman_wielandt", trial, n,
            approx.check_hoffman_wielandt(a, b), -1e-8 * hs2))

        results.append(LemmaResult(
            "functional_lipschitz", trial, n,
            approx.check_functional_lipschitz(a, b, _clipped_abs), -1e-8))

        n = 12
        a = _random_hermitian(law, n, s.child(2))
        b = _random_hermitian(law, n, s.child(3))
        lam = s.child(4).generator().random()
        results.append(LemmaResult(
            "klein_convexity", trial, n,
            approx.check_klein_convexity(a, b, np.square, lam), -1e-8))

        n = 20
        a = _random_hermitian(law, n, s.child(5))
        gen = s.child(6).generator()
        rank = 1 + int(gen.integers(3))
        v = gen.standard_normal((n, rank))
        c = gen.standard_normal(rank)
        pert = (v * c) @ v.T
        pert = (pert + pert.T) / 2.0  # float matmul is not bitwise symmetric
        b = HermitianMatrix(a.entries + pert)
        results.append(LemmaResult(
            "rank_inequality", trial, n,
            approx.check_rank_inequality(a, b), -1e-8))

        n = 10
        x = _random_hermitian(law, n, s.child(7))
        rows = np.sqrt(np.sum(np.abs(x.entries) ** 2, axis=1))
        scale = float(np.sum(rows))
        results.append(LemmaResult(
            "moment_estimate", trial, n,
            approx.check_moment_estimate(x, 1.0), -1e-8 * max(scale, 1.0)))
    return results


# -- CSV output ---------------------------------------------------------------

RESULT_HEADER = ["n", "d_n", "replica", "dist", "ref_dist", "ms"]


def write_result_csv(rows, fileobj, timing: bool = False) -> None:
    """Pinned schema (n,d_n,replica,dist,ref_dist,ms).

    The ms column is 0 unless timing is requested, because measured wall
    times would break byte-level reproducibility of repeated runs.
    """
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for row in rows:
        ms = repr(row.wall_ms) if timing else "0"
        writer.writerow([row.n, row.d_n, row.replica,
                         repr(row.dist), repr(row.ref_dist), ms])


def write_lemma_csv(results, fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["lemma", "trial", "n", "margin", "floor"])
    for r in results:
        writer.writerow([r.lemma, r.trial, r.n, repr(r.margin), repr(r.floor)])


def write_tail_csv(profile: TailProfile, fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["t", "exceed_freq"])
    for t, freq in zip(profile.thresholds, profile.frequencies):
        writer.writerow([repr(float(t)), repr(float(freq))])
