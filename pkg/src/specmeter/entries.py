"""Scalar entry distributions and splittable random streams.

Every built-in law is symmetric with mean zero. ``truncated_second_moment``
is the analytic map t -> E[x^2 1{|x| <= t}]; the heavy-tailed law exposes
its exact tail functionals as well, which the scaling solver in
``conditions`` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RADEMACHER = "rademacher"
UNIFORM = "uniform"
GAUSSIAN_REAL = "gaussian_real"
GAUSSIAN_COMPLEX = "gaussian_complex"
HEAVY_CUBIC = "heavy_cubic"

_KINDS = (RADEMACHER, UNIFORM, GAUSSIAN_REAL, GAUSSIAN_COMPLEX, HEAVY_CUBIC)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RngStream:
    """Value-type handle for a reproducible, splittable random stream.

    Two streams with different (seed, path) are statistically independent;
    the same (seed, path) always reproduces the identical sequence. Safe to
    send across processes.
    """

    seed: int
    path: tuple[int, ...] = field(default=())

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        """Fresh counter-based generator for this stream (deterministic)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def derive_stream(parent: RngStream, child_index: int) -> RngStream:
    """Derive an independent child stream by appending to the path."""
    return parent.child(child_index)


@dataclass(frozen=True)
class EntryLaw:
    """A scalar entry distribution.

    kind is one of 'rademacher', 'uniform' (bound), 'gaussian_real',
    'gaussian_complex', 'heavy_cubic' (cut). The heavy-tailed law has
    density cut^2 |x|^-3 on |x| >= cut: mean zero, infinite variance, and
    slowly varying truncated second moment.
    """

    kind: str
    bound: float = 1.0
    cut: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown entry law kind %r" % self.kind)
        if self.kind == UNIFORM and self.bound <= 0:
            raise ValueError("uniform law needs bound > 0")
        if self.kind == HEAVY_CUBIC and self.cut <= 0:
            raise ValueError("heavy_cubic law needs cut > 0")

    # -- static structure flags ------------------------------------------

    @property
    def is_real(self) -> bool:
        return self.kind != GAUSSIAN_COMPLEX

    @property
    def finite_variance(self) -> bool:
        return self.kind != HEAVY_CUBIC

    @property
    def second_moment(self) -> float:
        if self.kind in (RADEMACHER, GAUSSIAN_REAL, GAUSSIAN_COMPLEX):
            return 1.0
        if self.kind == UNIFORM:
            return self.bound * self.bound / 3.0
        return math.inf

    @property
    def sup_abs(self) -> float:
        """Essential supremum of |x| (inf for unbounded laws)."""
        if self.kind == RADEMACHER:
            return 1.0
        if self.kind == UNIFORM:
            return self.bound
        return math.inf

    @property
    def uniform_moment_bounds(self) -> bool:
        """Whether all absolute moments are finite (recorded, not computed)."""
        return self.kind != HEAVY_CUBIC

    @property
    def slowly_varying_l(self) -> bool:
        """Infinite variance with slowly varying truncated second moment."""
        return self.kind == HEAVY_CUBIC

    @property
    def l_positive_from(self) -> float:
        """inf{t : E[x^2 1{|x|<=t}] > 0}."""
        if self.kind == RADEMACHER:
            return 1.0
        if self.kind == HEAVY_CUBIC:
            return self.cut
        return 0.0

    # -- sampling ---------------------------------------------------------

    def sample_vector(self, gen: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` i.i.d. values (float64, or complex128 for complex laws)."""
        if self.kind == RADEMACHER:
            return np.where(gen.random(count) < 0.5, -1.0, 1.0)
        if self.kind == UNIFORM:
            return gen.uniform(-self.bound, self.bound, count)
        if self.kind == GAUSSIAN_REAL:
            return gen.standard_normal(count)
        if self.kind == GAUSSIAN_COMPLEX:
            g = gen.standard_normal(2 * count)
            return (g[:count] + 1j * g[count:]) / _SQRT2
        # heavy_cubic: inverse CDF for |x|, fair coin for the sign
        u = gen.random(count)
        mag = self.cut / np.sqrt(1.0 - u)
        sign = np.where(gen.random(count) < 0.5, -1.0, 1.0)
        return sign * mag

    def real_projection(self, values: np.ndarray) -> np.ndarray:
        """Map draws onto the real line, preserving the second moment.

        Identity for real laws. For the complex Gaussian the real part is
        rescaled by sqrt(2). Used for entries that symmetry forces real.
        """
        if self.is_real:
            return values
        return np.real(values) * _SQRT2

    # -- analytic functionals ----------------------------------------------

    def truncated_second_moment(self, t: float) -> float:
        """E[x^2 1{|x| <= t}], closed form."""
        if t < 0:
            raise ValueError("threshold must be nonnegative, got %r" % t)
        if self.kind == RADEMACHER:
            return 1.0 if t >= 1.0 else 0.0
        if self.kind == UNIFORM:
            b = self.bound
            return b * b / 3.0 if t >= b else t ** 3 / (3.0 * b)
        if self.kind == GAUSSIAN_REAL:
            return math.erf(t / _SQRT2) - t * math.sqrt(2.0 / math.pi) * math.exp(
                -0.5 * t * t
            )
        if self.kind == GAUSSIAN_COMPLEX:
            # |x|^2 is Exponential(1)
            t2 = t * t
            return 1.0 - (1.0 + t2) * math.exp(-t2)
        if t <= self.cut:
            return 0.0
        return 2.0 * self.cut * self.cut * math.log(t / self.cut)

    def tail_probability(self, t: float) -> float:
        """P(|x| > t)."""
        if t < 0:
            raise ValueError("threshold must be nonnegative, got %r" % t)
        if self.kind == RADEMACHER:
            return 1.0 if t < 1.0 else 0.0
        if self.kind == UNIFORM:
            return max(0.0, 1.0 - t / self.bound)
        if self.kind == GAUSSIAN_REAL:
            return math.erfc(t / _SQRT2)
        if self.kind == GAUSSIAN_COMPLEX:
            return math.exp(-t * t)
        if t <= self.cut:
            return 1.0
        return (self.cut / t) ** 2

    def mean_abs_above(self, t: float) -> float:
        """E[|x| 1{|x| > t}]."""
        if t < 0:
            raise ValueError("threshold must be nonnegative, got %r" % t)
        if self.kind == RADEMACHER:
            return 1.0 if t < 1.0 else 0.0
        if self.kind == UNIFORM:
            if t >= self.bound:
                return 0.0
            return (self.bound * self.bound - t * t) / (2.0 * self.bound)
        if self.kind == GAUSSIAN_REAL:
            return math.sqrt(2.0 / math.pi) * math.exp(-0.5 * t * t)
        if self.kind == GAUSSIAN_COMPLEX:
            # |x| has density 2 r exp(-r^2)
            return t * math.exp(-t * t) + 0.5 * math.sqrt(math.pi) * math.erfc(t)
        t = max(t, self.cut)
        return 2.0 * self.cut * self.cut / t

    # -- config text ------------------------------------------------------

    def config_string(self) -> str:
        if self.kind == UNIFORM:
            return "uniform:bound=%r" % self.bound
        if self.kind == HEAVY_CUBIC:
            return "heavy_cubic:cut=%r" % self.cut
        return self.kind


def parse_entry_law(text: str) -> EntryLaw:
    """Parse a law from config text, e.g. 'rademacher', 'heavy_cubic:cut=1.0'."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError("malformed entry law parameter %r in %r" % (item, text))
            params[key.strip()] = float(value)
    aliases = {"gaussian": GAUSSIAN_REAL, "rademacher": RADEMACHER}
    kind = aliases.get(head, head)
    if kind == UNIFORM:
        return EntryLaw(UNIFORM, bound=params.pop("bound", 1.0))
    if kind == HEAVY_CUBIC:
        return EntryLaw(HEAVY_CUBIC, cut=params.pop("cut", 1.0))
    if kind in (RADEMACHER, GAUSSIAN_REAL, GAUSSIAN_COMPLEX):
        if params:
            raise ValueError("law %r takes no parameters" % kind)
        return EntryLaw(kind)
    raise ValueError("unknown entry law %r" % text)


def sample_entry(law: EntryLaw, stream: RngStream) -> complex:
    """One draw from ``law``; pure function of (law, stream)."""
    value = law.sample_vector(stream.generator(), 1)[0]
    return complex(value)


def truncated_second_moment(law: EntryLaw, t: float) -> float:
    """Analytic E[x^2 1{|x| <= t}] for a built-in law."""
    return law.truncated_second_moment(t)
