"""specmeter: Monte Carlo laboratory for spectral measures of random
matrices with block-dependent entries."""

from .backend import BACKEND, HAVE_COMPILED
from .entries import EntryLaw, RngStream, derive_stream, parse_entry_law, sample_entry, truncated_second_moment
from .ensembles import (
    DependencyPartition,
    EnsembleSpec,
    PartitionError,
    RelationCounts,
    counterexample_z,
    dependency_d,
    dependency_partition,
    parse_ensemble,
    resample_block,
    sample_matrix,
    sample_rectangular,
    schenker_counts,
)
from .spectra import (
    EigensolverError,
    HermitianMatrix,
    RectMatrix,
    Spectrum,
    eigenvalues,
    esd,
    hermitize,
    singular_esd,
    singular_values,
)
from .measures import (
    EmpiricalMeasure,
    ReferenceLaw,
    bl_series_metric,
    integrate,
    kolmogorov,
    kolmogorov_to_reference,
    levy_prokhorov,
    pooled_mean,
    reference_cdf,
)
from .conditions import (
    BnSolution,
    LindebergReport,
    heavy_tail_diagnostics,
    lindeberg_an_stat,
    lindeberg_stat,
    solve_bn,
    truncate,
)
from .approx import (
    LipschitzDecomposition,
    PiecewiseRamp,
    build_f_delta,
    ccp_constants,
    check_functional_lipschitz,
    check_hoffman_wielandt,
    check_klein_convexity,
    check_moment_estimate,
    check_rank_inequality,
)
from .harness import (
    ExperimentConfig,
    MetricSpec,
    ResultRow,
    run_concentration,
    run_heavy_tail,
    run_lemma_sweeps,
    run_singular,
    tail_profile,
)

__version__ = "0.1.0"
