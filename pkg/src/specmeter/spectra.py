"""Hermitian matrices, their spectra, and singular-value spectra.

Complex Hermitian problems are reduced to real symmetric ones through the
2n x 2n embedding [[Re H, -Im H], [Im H, Re H]], whose spectrum is that of
H with every eigenvalue doubled; the solver keeps every second value of
the sorted result. Eigenvalues come from the selected kernel backend
(compiled extension or NumPy fallback).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import backend
from .measures import EmpiricalMeasure


class EigensolverError(RuntimeError):
    """Raised when the QL iteration fails to converge."""


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense complex Hermitian matrix; symmetry is exact by construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("entries must be a square 2-d array")
        a = np.ascontiguousarray(a, dtype=np.complex128)
        if not np.array_equal(a, a.conj().T):
            raise ValueError("matrix is not exactly Hermitian")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def hs_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.entries) ** 2)))


@dataclass(frozen=True)
class RectMatrix:
    """Dense complex rectangular matrix."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.entries), dtype=np.complex128)
        if a.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        object.__setattr__(self, "entries", a)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of a Hermitian matrix, ascending, with multiplicity."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if np.any(np.diff(v) < 0):
            raise ValueError("spectrum must be nondecreasing")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(["eigenvalue"])
        for v in self.values:
            writer.writerow([repr(float(v))])


def _solve_real_symmetric(a: np.ndarray) -> np.ndarray:
    d, e = backend.tridiagonalize(a)
    try:
        return backend.tql_eigenvalues(d, e)
    except RuntimeError as exc:
        raise EigensolverError(str(exc)) from exc


def eigenvalues(h: HermitianMatrix) -> Spectrum:
    """All real eigenvalues of a Hermitian matrix, ascending."""
    a = h.entries
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if h.n == 0:
        return Spectrum(np.empty(0))
    if np.all(a.imag == 0.0):
        vals = _solve_real_symmetric(a.real)
    else:
        re, im = a.real, a.imag
        embedded = np.block([[re, -im], [im, re]])
        doubled = _solve_real_symmetric(embedded)
        vals = doubled[::2]
    return Spectrum(np.sort(vals))


def esd(h: HermitianMatrix, scale: float) -> EmpiricalMeasure:
    """Empirical spectral distribution of h / scale: weight 1/n per eigenvalue."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    spec = eigenvalues(h)
    return EmpiricalMeasure.from_atoms(spec.values / scale)


def hermitize(x: RectMatrix) -> HermitianMatrix:
    """Embed an n x N matrix X as [[0, X], [X*, 0]].

    The nonzero eigenvalues of the result are plus/minus the nonzero
    singular values of X.
    """
    n, m = x.n_rows, x.n_cols
    out = np.zeros((n + m, n + m), dtype=np.complex128)
    out[:n, n:] = x.entries
    out[n:, :n] = x.entries.conj().T
    return HermitianMatrix(out)


def singular_values(x: RectMatrix) -> np.ndarray:
    """Singular values of X padded with zeros to length n_rows, ascending."""
    spec = eigenvalues(hermitize(x))
    top = spec.values[x.n_cols:]
    return np.maximum(top, 0.0)


def singular_esd(x: RectMatrix, scale: float) -> EmpiricalMeasure:
    """ESD of sqrt(X X*) / scale: n_rows atoms on scaled singular values."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return EmpiricalMeasure.from_atoms(singular_values(x) / scale)
