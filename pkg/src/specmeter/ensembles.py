"""Random matrix ensembles with prescribed dependency structure.

An ensemble is described by an EnsembleSpec: a kind (Wigner, patterned
link families, band, tiled blocks, relation-based, or the two-component
counterexample), an entry law, and optional structure parameters. Entries
belonging to one dependency block share a single block-level draw (or a
jointly Gaussian vector in correlated mode); distinct blocks use
independent derived streams. Hermitian symmetry is exact by construction:
draws fill the upper triangle and are mirrored with conjugation, and any
block touching the diagonal has its draw forced real.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .entries import EntryLaw, GAUSSIAN_COMPLEX, GAUSSIAN_REAL, RngStream, parse_entry_law
from .spectra import HermitianMatrix, RectMatrix

WIGNER = "wigner"
TOEPLITZ = "toeplitz"
HANKEL = "hankel"
REVERSED_CIRCULANT = "reversed_circulant"
SYMMETRIC_CIRCULANT = "symmetric_circulant"
BAND = "band"
BLOCK = "block"
SCHENKER = "schenker"
COUNTEREXAMPLE_Z = "counterexample_z"

_KINDS = (
    WIGNER,
    TOEPLITZ,
    HANKEL,
    REVERSED_CIRCULANT,
    SYMMETRIC_CIRCULANT,
    BAND,
    BLOCK,
    SCHENKER,
    COUNTEREXAMPLE_Z,
)
_PATTERNED = (TOEPLITZ, HANKEL, REVERSED_CIRCULANT, SYMMETRIC_CIRCULANT)
_RECT_CAPABLE = (WIGNER, BAND)

REPLICATED = "replicated"
CORRELATED = "correlated"


class PartitionError(ValueError):
    """A block rule failed to produce a partition of the index rectangle."""


@dataclass(frozen=True)
class DependencyPartition:
    """Partition of {0..n_rows-1} x {0..n_cols-1} into dependency blocks."""

    n_rows: int
    n_cols: int
    blocks: tuple

    @property
    def d(self) -> int:
        return max(len(b) for b in self.blocks)

    def validate(self) -> None:
        """Check the blocks tile the index rectangle exactly (bitmap)."""
        seen = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        for block in self.blocks:
            for i, j in block:
                if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
                    raise PartitionError("index pair (%d, %d) out of range" % (i, j))
                if seen[i, j]:
                    raise PartitionError("index pair (%d, %d) covered twice" % (i, j))
                seen[i, j] = True
        if not seen.all():
            i, j = map(int, np.argwhere(~seen)[0])
            raise PartitionError("index pair (%d, %d) not covered" % (i, j))


@dataclass(frozen=True)
class RelationCounts:
    """Counting statistics of an equivalence relation on index pairs."""

    c1_max: int
    c2_max: int
    c3_count: int
    d_max: int


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for a random matrix family.

    ``mode`` selects intra-block dependence for block/schenker kinds:
    'replicated' shares one scalar draw, 'correlated' fills the block with
    a jointly Gaussian vector of pairwise correlation ``rho`` (Gaussian
    entry laws only). ``scale_rule`` of None means the kind's natural
    default: 'unit' for the counterexample, 'sqrt_n' otherwise.
    """

    kind: str
    entry: EntryLaw = field(default_factory=lambda: EntryLaw(GAUSSIAN_REAL))
    band_width: int = 1
    tile: int = 2
    mode: str = REPLICATED
    rho: float = 0.5
    t: float = 0.5
    relation: str = "equality"
    sub_multipliers: tuple = (1.0, 2.0)
    partition_rule: object = None
    scale_rule: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown ensemble kind %r" % self.kind)
        if self.mode not in (REPLICATED, CORRELATED):
            raise ValueError("unknown block mode %r" % self.mode)
        if self.kind == BAND and self.band_width < 0:
            raise ValueError("band width must be nonnegative")
        if self.kind == BLOCK and self.partition_rule is None and self.tile < 1:
            raise ValueError("tile size must be positive")
        if self.kind == COUNTEREXAMPLE_Z and not (0.0 < self.t < 1.0):
            raise ValueError("counterexample split t must lie in (0, 1)")
        if not (0.0 <= self.rho <= 1.0):
            raise ValueError("rho must lie in [0, 1]")
        if self.mode == CORRELATED and self.entry.kind not in (GAUSSIAN_REAL, GAUSSIAN_COMPLEX):
            raise ValueError("correlated mode requires a Gaussian entry law")

    @property
    def rectangular_capable(self) -> bool:
        return self.kind in _RECT_CAPABLE

    @property
    def default_scale_rule(self) -> str:
        if self.scale_rule is not None:
            return self.scale_rule
        return "unit" if self.kind == COUNTEREXAMPLE_Z else "sqrt_n"

    def config_string(self) -> str:
        parts = ["entry=%s" % self.entry.config_string()]
        if self.kind == BAND:
            parts.append("b=%d" % self.band_width)
        if self.kind == BLOCK:
            parts.append("tile=%d" % self.tile)
        if self.kind in (BLOCK, SCHENKER) and self.mode != REPLICATED:
            parts.append("mode=%s" % self.mode)
            parts.append("rho=%r" % self.rho)
        if self.kind == SCHENKER:
            parts.append("relation=%s" % self.relation)
        if self.kind == COUNTEREXAMPLE_Z:
            parts.append("t=%r" % self.t)
        return "%s:%s" % (self.kind, ",".join(parts))


def parse_ensemble(text: str) -> EnsembleSpec:
    """Parse config text like 'toeplitz:entry=rademacher' or 'counterexample_z:t=0.5'."""
    head, _, rest = text.strip().partition(":")
    kind = head.strip().lower()
    if kind not in _KINDS:
        raise ValueError("unknown ensemble kind %r in %r" % (kind, text))
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError("malformed ensemble parameter %r in %r" % (item, text))
            key = key.strip().lower()
            value = value.strip()
            if key == "entry":
                kwargs["entry"] = parse_entry_law(value)
            elif key in ("b", "band", "band_width"):
                kwargs["band_width"] = int(value)
            elif key == "tile":
                kwargs["tile"] = int(value)
            elif key == "mode":
                kwargs["mode"] = value
            elif key == "rho":
                kwargs["rho"] = float(value)
            elif key == "t":
                kwargs["t"] = float(value)
            elif key == "relation":
                kwargs["relation"] = value
            elif key == "scale":
                kwargs["scale_rule"] = value
            else:
                raise ValueError("unknown ensemble parameter %r in %r" % (key, text))
    return EnsembleSpec(kind, **kwargs)


# -- link labels and fibers ---------------------------------------------------


def _upper_labels(kind: str, n: int, tile: int = 2):
    """Labels of the upper-triangle cells (row-major) for a patterned kind."""
    iu, ju = np.triu_indices(n)
    if kind == TOEPLITZ:
        lab = ju - iu
    elif kind == HANKEL:
        lab = iu + ju
    elif kind == REVERSED_CIRCULANT:
        lab = (iu + ju) % n
    elif kind == SYMMETRIC_CIRCULANT:
        k = np.abs(iu - ju)
        lab = np.minimum(k, n - k)
    elif kind == BLOCK:
        lab = (iu // tile) * ((n + tile - 1) // tile) + (ju // tile)
    else:
        raise ValueError("no link labels for kind %r" % kind)
    return iu, ju, lab


@functools.lru_cache(maxsize=128)
def _fibers(spec: EnsembleSpec, n: int):
    """First-seen ordered fibers of the link map on the upper triangle.

    Returns (iu, ju, inverse, counts): cell r belongs to fiber inverse[r];
    counts[f] is the number of upper cells in fiber f.
    """
    if spec.kind == SCHENKER:
        return _schenker_fibers(spec.relation, n)
    iu, ju, lab = _upper_labels(spec.kind, n, spec.tile)
    _, first, inverse = np.unique(lab, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    inverse = rank[inverse]
    counts = np.bincount(inverse)
    return iu, ju, inverse, counts


def _relation_label_matrix(name: str, n: int) -> np.ndarray:
    """Integer labels on the full index square for a built-in relation."""
    i, j = np.indices((n, n))
    if name == "equality":
        return np.minimum(i, j) * n + np.maximum(i, j)
    if name == "toeplitz":
        return np.abs(i - j)
    if name == "full":
        return np.zeros((n, n), dtype=np.int64)
    raise ValueError("unknown built-in relation %r" % name)


def _transpose_closed_labels(labels: np.ndarray) -> np.ndarray:
    """Merge labels so that (i,j) and (j,i) always share one; relabel densely."""
    _, dense = np.unique(labels, return_inverse=True)
    dense = dense.reshape(labels.shape)
    k = dense.max() + 1
    parent = np.arange(k)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    a = dense.ravel()
    b = dense.T.ravel()
    for x, y in zip(a, b):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx
    roots = np.array([find(x) for x in range(k)])
    return roots[dense]


def _schenker_fibers(relation: str, n: int):
    labels = _transpose_closed_labels(_relation_label_matrix(relation, n))
    iu, ju = np.triu_indices(n)
    lab = labels[iu, ju]
    _, first, inverse = np.unique(lab, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    inverse = rank[inverse]
    counts = np.bincount(inverse)
    return iu, ju, inverse, counts


# -- partitions ---------------------------------------------------------------


def _full_block_sizes(spec: EnsembleSpec, n: int) -> np.ndarray:
    """Sizes of the mirrored (full-square) blocks, in canonical order."""
    iu, ju, inverse, counts = _fibers(spec, n)
    strict = np.bincount(inverse[iu < ju], minlength=counts.size)
    return counts + strict


def dependency_d(spec: EnsembleSpec, n: int) -> int:
    """Largest block size of the induced partition, without materializing it."""
    if n < 1:
        raise ValueError("n must be positive")
    if spec.kind == WIGNER:
        return 2 if n >= 2 else 1
    if spec.kind == BAND:
        return 2 if (n >= 2 and spec.band_width >= 1) else 1
    if spec.kind == COUNTEREXAMPLE_Z:
        m = _counterexample_split(spec.t, n)
        return m * m
    if spec.kind == BLOCK and spec.partition_rule is not None:
        return dependency_partition(spec, n).d
    return int(_full_block_sizes(spec, n).max())


def dependency_partition(spec: EnsembleSpec, n: int) -> DependencyPartition:
    """The dependency partition induced by the spec on the full index square.

    Patterned kinds: fibers of the link map on the upper triangle, mirrored.
    Wigner: pairs {(i,j),(j,i)} plus diagonal singletons. Band: in-band
    pairs plus singleton structural zeros. Custom block rules are validated
    and rejected with a diagnostic if they overlap or leave gaps.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if spec.kind == WIGNER:
        return DependencyPartition(n, n, _wigner_order(n))
    if spec.kind == BAND:
        blocks = []
        b = spec.band_width
        for i in range(n):
            for j in range(i, n):
                if j - i <= b:
                    blocks.append(((i, j),) if i == j else ((i, j), (j, i)))
                else:
                    blocks.append(((i, j),))
                    blocks.append(((j, i),))
        return DependencyPartition(n, n, tuple(blocks))
    if spec.kind == COUNTEREXAMPLE_Z:
        m = _counterexample_split(spec.t, n)
        top = tuple((i, j) for i in range(m) for j in range(m))
        blocks = [top]
        for i in range(n):
            for j in range(n):
                if i < m and j < m:
                    continue
                blocks.append(((i, j),))
        return DependencyPartition(n, n, tuple(blocks))
    if spec.kind == BLOCK and spec.partition_rule is not None:
        blocks = tuple(tuple((int(i), int(j)) for i, j in block)
                       for block in spec.partition_rule(n))
        part = DependencyPartition(n, n, blocks)
        part.validate()
        for block in blocks:
            cells = set(block)
            for i, j in block:
                if (j, i) not in cells:
                    raise PartitionError(
                        "index pair (%d, %d) lacks its transpose in the same block"
                        % (i, j)
                    )
        return part
    iu, ju, inverse, counts = _fibers(spec, n)
    members = [[] for _ in range(counts.size)]
    for r in range(iu.size):
        i, j = int(iu[r]), int(ju[r])
        members[inverse[r]].append((i, j))
        if i < j:
            members[inverse[r]].append((j, i))
    return DependencyPartition(n, n, tuple(tuple(m) for m in members))


def _wigner_order(n: int):
    # row-major over the upper triangle, matching the sampling order
    blocks = []
    for i in range(n):
        for j in range(i, n):
            blocks.append(((i, j),) if i == j else ((i, j), (j, i)))
    return tuple(blocks)


# -- sampling -----------------------------------------------------------------


def _scatter_hermitian(n, iu, ju, values) -> np.ndarray:
    """Fill the upper triangle and mirror with conjugation; values must
    already be real on any cell symmetry forces real."""
    values = np.asarray(values, dtype=np.complex128)
    a = np.zeros((n, n), dtype=np.complex128)
    a[iu, ju] = values
    strict = iu < ju
    a[ju[strict], iu[strict]] = np.conj(values[strict])
    return a


def _sample_iid_hermitian(law: EntryLaw, n: int, stream: RngStream,
                          band_width: int | None = None) -> HermitianMatrix:
    iu, ju = np.triu_indices(n)
    if band_width is not None:
        keep = (ju - iu) <= band_width
        iu, ju = iu[keep], ju[keep]
    draws = np.asarray(law.sample_vector(stream.generator(), iu.size),
                       dtype=np.complex128).copy()
    diag = iu == ju
    draws[diag] = law.real_projection(draws[diag])
    return HermitianMatrix(_scatter_hermitian(n, iu, ju, draws))


def _block_draw(spec: EnsembleSpec, gen, size: int, touches_diag: bool) -> np.ndarray:
    """Values for one block's upper cells; forced real when the block
    touches the diagonal (symmetry then ties the shared draw to itself)."""
    law = spec.entry
    if spec.mode == REPLICATED or size == 1:
        draws = np.full(size, law.sample_vector(gen, 1)[0], dtype=np.complex128)
    else:
        shared = law.sample_vector(gen, 1)[0]
        noise = law.sample_vector(gen, size)
        draws = np.asarray(math.sqrt(spec.rho) * shared
                           + math.sqrt(1.0 - spec.rho) * noise, dtype=np.complex128)
    if touches_diag:
        draws = law.real_projection(draws).astype(np.complex128)
    return draws


def _sample_blockwise(spec: EnsembleSpec, n: int, stream: RngStream) -> HermitianMatrix:
    iu, ju, inverse, counts = _fibers(spec, n)
    values = np.empty(iu.size, dtype=np.complex128)
    for b in range(counts.size):
        cells = np.nonzero(inverse == b)[0]
        touches = bool(np.any(iu[cells] == ju[cells]))
        values[cells] = _block_draw(spec, stream.child(b).generator(),
                                    cells.size, touches)
    return HermitianMatrix(_scatter_hermitian(n, iu, ju, values))


def _counterexample_split(t: float, n: int) -> int:
    m = t * n
    if abs(m - round(m)) > 1e-9 or not (1 <= round(m) <= n - 1):
        raise ValueError(
            "split sizes n*t=%r and n*(1-t)=%r must be positive integers" % (m, n - m)
        )
    return int(round(m))


def counterexample_z(n: int, t: float, epsilon_stream: RngStream, sub_streams,
                     entry: EntryLaw | None = None,
                     multipliers=(1.0, 2.0)) -> HermitianMatrix:
    """Two-ensemble mixture with an identity tail block.

    Top-left block of size n*t: eps*X + (1-eps)*Y where eps is one fair
    Bernoulli draw shared across the matrix and X, Y are Wigner matrices
    normalized by sqrt(m) and dilated by the given multipliers (distinct
    limits). Bottom-right block: identity of size n*(1-t).
    """
    m = _counterexample_split(t, n)
    law = entry if entry is not None else EntryLaw(GAUSSIAN_REAL)
    eps = 1.0 if epsilon_stream.generator().random() < 0.5 else 0.0
    x_stream, y_stream = sub_streams
    scale = 1.0 / math.sqrt(m)
    x = _sample_iid_hermitian(law, m, x_stream).entries * (multipliers[0] * scale)
    y = _sample_iid_hermitian(law, m, y_stream).entries * (multipliers[1] * scale)
    z = np.zeros((n, n), dtype=np.complex128)
    z[:m, :m] = eps * x + (1.0 - eps) * y
    idx = np.arange(m, n)
    z[idx, idx] = 1.0
    return HermitianMatrix(z)


def sample_matrix(spec: EnsembleSpec, n: int, stream: RngStream) -> HermitianMatrix:
    """Draw one Hermitian matrix of size n from the ensemble."""
    if n < 1:
        raise ValueError("n must be positive")
    if spec.kind == WIGNER:
        return _sample_iid_hermitian(spec.entry, n, stream)
    if spec.kind == BAND:
        return _sample_iid_hermitian(spec.entry, n, stream, band_width=spec.band_width)
    if spec.kind == COUNTEREXAMPLE_Z:
        return counterexample_z(
            n, spec.t, stream.child(0), (stream.child(1), stream.child(2)),
            entry=spec.entry, multipliers=spec.sub_multipliers,
        )
    if spec.kind == BLOCK and spec.partition_rule is not None:
        return _sample_custom_blocks(spec, n, stream)
    return _sample_blockwise(spec, n, stream)


def _sample_custom_blocks(spec: EnsembleSpec, n: int, stream: RngStream) -> HermitianMatrix:
    part = dependency_partition(spec, n)
    a = np.zeros((n, n), dtype=np.complex128)
    for b, block in enumerate(part.blocks):
        upper = [(i, j) for i, j in block if i <= j]
        touches = any(i == j for i, j in upper)
        draws = _block_draw(spec, stream.child(b).generator(), len(upper), touches)
        for (i, j), v in zip(upper, draws):
            a[i, j] = v
            a[j, i] = np.conj(v)
    return HermitianMatrix(a)


def resample_block(spec: EnsembleSpec, n: int, stream: RngStream,
                   block_index: int, alt_stream: RngStream) -> HermitianMatrix:
    """Resample a single dependency block from a replacement stream.

    All entries outside the chosen block are identical to
    sample_matrix(spec, n, stream); used to check block locality.
    """
    law = spec.entry
    if spec.kind == WIGNER:
        # block order is row-major over the upper triangle
        iu, ju = np.triu_indices(n)
        draws = np.asarray(law.sample_vector(stream.generator(), iu.size),
                           dtype=np.complex128).copy()
        draws[block_index] = law.sample_vector(alt_stream.generator(), 1)[0]
        diag = iu == ju
        draws[diag] = law.real_projection(draws[diag])
        return HermitianMatrix(_scatter_hermitian(n, iu, ju, draws))
    if spec.kind in _PATTERNED + (BLOCK, SCHENKER) and spec.partition_rule is None:
        iu, ju, inverse, counts = _fibers(spec, n)
        values = np.empty(iu.size, dtype=np.complex128)
        for b in range(counts.size):
            cells = np.nonzero(inverse == b)[0]
            touches = bool(np.any(iu[cells] == ju[cells]))
            gen = (alt_stream if b == block_index else stream.child(b)).generator()
            values[cells] = _block_draw(spec, gen, cells.size, touches)
        return HermitianMatrix(_scatter_hermitian(n, iu, ju, values))
    raise ValueError("resample_block not supported for kind %r" % spec.kind)


def sample_rectangular(spec: EnsembleSpec, n: int, N: int, stream: RngStream) -> RectMatrix:
    """Draw an n x N matrix; only independent-entry and band layouts qualify."""
    if not spec.rectangular_capable:
        raise ValueError("kind %r is square-only" % spec.kind)
    if n < 1 or N < 1:
        raise ValueError("shape must be positive")
    gen = stream.generator()
    draws = spec.entry.sample_vector(gen, n * N)
    a = np.asarray(draws, dtype=np.complex128).reshape(n, N)
    if spec.kind == BAND:
        i, j = np.indices((n, N))
        a[np.abs(i - j) > spec.band_width] = 0.0
    return RectMatrix(a)


def dependency_d_rect(spec: EnsembleSpec, n: int, N: int) -> int:
    """Largest block of the rectangular partition (singletons for iid/band)."""
    if not spec.rectangular_capable:
        raise ValueError("kind %r is square-only" % spec.kind)
    return 1


# -- relation statistics ------------------------------------------------------


def schenker_counts(relation, n: int) -> RelationCounts:
    """Counting statistics of an equivalence relation on [n]^2.

    ``relation`` is a built-in name ('equality', 'toeplitz', 'full'),
    counted through its label fibers, or a callable (i, j, i2, j2) -> bool,
    counted by exhaustive enumeration (O(n^4); capped at n = 64).

    d_max is the size of the largest equivalence class of the relation as
    given, without the transpose closure the sampler applies.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(relation, str):
        labels = _relation_label_matrix(relation, n)
        return _counts_from_labels(labels, n)
    if n > 64:
        raise ValueError("exhaustive relation counting is capped at n = 64")
    return _counts_exhaustive(relation, n)


def _counts_from_labels(labels: np.ndarray, n: int) -> RelationCounts:
    flat = labels.ravel()
    _, dense = np.unique(flat, return_inverse=True)
    dense = dense.reshape(n, n)
    fiber_sizes = np.bincount(dense.ravel())
    # c1: per i, number of (j, i2, j2) with label(i,j) == label(i2,j2)
    c1 = int(fiber_sizes[dense].sum(axis=1).max())
    # c2: max over (i2, z) of row counts; every z occurs somewhere
    row_counts = np.zeros((n, fiber_sizes.size), dtype=np.int64)
    for i in range(n):
        row_counts[i] = np.bincount(dense[i], minlength=fiber_sizes.size)
    c2 = int(row_counts.max())
    # c3: pairs (i,j,i2), i2 != i, with label(i,j) == label(j,i2)
    c3 = 0
    for i in range(n):
        z = dense[i]  # labels of row i
        c3 += int(row_counts[np.arange(n), z].sum() - (dense[np.arange(n), i] == z).sum())
    d_max = int(fiber_sizes.max())
    return RelationCounts(c1, c2, c3, d_max)


def _counts_exhaustive(relation, n: int) -> RelationCounts:
    pairs = [(i, j) for i in range(n) for j in range(n)]
    k = len(pairs)
    c1 = 0
    for i in range(n):
        count = 0
        for j in range(n):
            for i2 in range(n):
                for j2 in range(n):
                    if relation(i, j, i2, j2):
                        count += 1
        c1 = max(c1, count)
    c2 = 0
    for i in range(n):
        for j in range(n):
            for i2 in range(n):
                count = sum(1 for j2 in range(n) if relation(i, j, i2, j2))
                c2 = max(c2, count)
    c3 = 0
    for i in range(n):
        for j in range(n):
            for i2 in range(n):
                if i2 != i and relation(i, j, j, i2):
                    c3 += 1
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(k):
        ia, ja = pairs[a]
        for b in range(a + 1, k):
            ib, jb = pairs[b]
            if relation(ia, ja, ib, jb):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    sizes = {}
    for a in range(k):
        r = find(a)
        sizes[r] = sizes.get(r, 0) + 1
    return RelationCounts(c1, c2, c3, max(sizes.values()))
