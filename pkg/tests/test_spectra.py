import io

import numpy as np
import pytest

from oracles import eig_bisect, random_hermitian
from specmeter import backend
from specmeter.spectra import (
    HermitianMatrix,
    RectMatrix,
    Spectrum,
    eigenvalues,
    esd,
    hermitize,
    singular_esd,
    singular_values,
)


def _gen(seed=0):
    return np.random.default_rng(seed)


class TestHermitianMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermitianMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            HermitianMatrix(np.zeros((2, 3)))


class TestEigenvalues:
    def test_pauli_x(self):
        h = HermitianMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(eigenvalues(h).values, [-1.0, 1.0], atol=1e-14)

    def test_identity(self):
        h = HermitianMatrix(np.eye(5))
        assert np.allclose(eigenvalues(h).values, np.ones(5), atol=0)

    def test_rejects_non_finite(self):
        a = np.eye(3)
        a[0, 0] = np.nan
        with pytest.raises(ValueError):
            eigenvalues(HermitianMatrix(a))

    @pytest.mark.parametrize("complex_entries", [False, True])
    def test_matches_bisection_oracle_6x6(self, complex_entries):
        gen = _gen(5)
        for _ in range(20):
            a = random_hermitian(gen, 6, complex_entries)
            got = eigenvalues(HermitianMatrix(a)).values
            want = eig_bisect(a)
            assert np.max(np.abs(got - want)) < 1e-8

    @pytest.mark.parametrize("complex_entries", [False, True])
    def test_trace_and_hs_identities(self, complex_entries):
        gen = _gen(6)
        for n in (2, 3, 5, 9, 16):
            a = random_hermitian(gen, n, complex_entries)
            vals = eigenvalues(HermitianMatrix(a)).values
            tr = float(np.trace(a).real)
            hs2 = float(np.sum(np.abs(a) ** 2))
            assert abs(vals.sum() - tr) <= 1e-8 * max(1.0, abs(tr))
            assert abs(np.sum(vals ** 2) - hs2) <= 1e-8 * hs2

    def test_unitary_invariance(self):
        gen = _gen(7)
        a = random_hermitian(gen, 8, True)
        g = gen.standard_normal((8, 8)) + 1j * gen.standard_normal((8, 8))
        q, _ = np.linalg.qr(g)
        b = q @ a @ q.conj().T
        b = (b + b.conj().T) / 2
        va = eigenvalues(HermitianMatrix(a)).values
        vb = eigenvalues(HermitianMatrix(b)).values
        assert np.max(np.abs(va - vb)) < 1e-8

    def test_shift_equivariance(self):
        gen = _gen(8)
        a = random_hermitian(gen, 7)
        c = 3.25
        va = eigenvalues(HermitianMatrix(a)).values
        vb = eigenvalues(HermitianMatrix(a + c * np.eye(7))).values
        assert np.max(np.abs(vb - (va + c))) < 1e-10

    def test_backward_stability_spot_check(self):
        gen = _gen(9)
        a = random_hermitian(gen, 10, True)
        h = HermitianMatrix(a)
        hs = h.hs_norm()
        for lam in eigenvalues(h).values[::3]:
            smin = np.linalg.svd(a - lam * np.eye(10), compute_uv=False)[-1]
            assert smin <= 1e-10 * hs

    def test_backends_agree(self):
        gen = _gen(10)
        a = random_hermitian(gen, 12)
        results = []
        for name in backend.available_backends():
            mod = backend.get_kernels(name)
            d, e = mod.tridiagonalize(a.real)
            results.append(mod.tql_eigenvalues(d, e))
        for r in results[1:]:
            assert np.max(np.abs(r - results[0])) < 1e-10


class TestSpectrumType:
    def test_sorted_required(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([2.0, 1.0]))

    def test_csv_single_column(self):
        buf = io.StringIO()
        Spectrum(np.array([-1.0, 1.0])).to_csv(buf)
        assert buf.getvalue() == "eigenvalue\n-1.0\n1.0\n"


class TestEsd:
    def test_identity_point_mass(self):
        m = esd(HermitianMatrix(np.eye(4)), 1.0)
        assert m.positions.tolist() == [1.0]
        assert m.weights.tolist() == [1.0]

    def test_diagonal_scaled(self):
        m = esd(HermitianMatrix(np.diag([-2.0, 0.0, 2.0])), 2.0)
        assert np.allclose(m.positions, [-1.0, 0.0, 1.0])
        assert np.allclose(m.weights, [1 / 3] * 3)

    def test_second_moment_identity(self):
        gen = _gen(11)
        a = random_hermitian(gen, 9, True)
        h = HermitianMatrix(a)
        n = 9
        m = esd(h, np.sqrt(n))
        second = float(np.dot(m.weights, m.positions ** 2))
        # merged atoms keep the quadratic moment only through exact sums
        assert second == pytest.approx(np.sum(np.abs(a) ** 2) / n ** 2, rel=1e-10)

    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            esd(HermitianMatrix(np.eye(2)), 0.0)


class TestHermitize:
    def test_scalar(self):
        h = hermitize(RectMatrix(np.array([[1.0]])))
        assert np.allclose(eigenvalues(h).values, [-1.0, 1.0])

    def test_zero_rect(self):
        h = hermitize(RectMatrix(np.zeros((2, 3))))
        assert np.allclose(eigenvalues(h).values, np.zeros(5), atol=0)

    def test_spectrum_symmetric_and_matches_gram_oracle(self):
        gen = _gen(12)
        x = gen.standard_normal((3, 4)) + 1j * gen.standard_normal((3, 4))
        rect = RectMatrix(x)
        vals = eigenvalues(hermitize(rect)).values
        # symmetry about zero after dropping the |n-N| forced zeros
        trimmed = np.sort(np.abs(vals))[1:]  # one forced zero here
        assert np.max(np.abs(np.sort(vals)[: len(vals) // 2] +
                             np.sort(vals)[::-1][: len(vals) // 2])) < 1e-9
        want = np.sqrt(np.maximum(np.linalg.eigvalsh(x @ x.conj().T), 0.0))
        got = singular_values(rect)
        assert np.max(np.abs(np.sort(got) - np.sort(want))) < 1e-9


class TestSingularEsd:
    def test_identity(self):
        m = singular_esd(RectMatrix(np.eye(2)), 1.0)
        assert m.positions.size == 1
        assert m.positions[0] == pytest.approx(1.0, abs=1e-12)

    def test_padded_diagonal(self):
        x = np.zeros((2, 3))
        x[0, 0], x[1, 1] = 3.0, 4.0
        m = singular_esd(RectMatrix(x), 1.0)
        assert np.allclose(m.positions, [3.0, 4.0])

    def test_equals_positive_part_of_hermitized_esd(self):
        gen = _gen(13)
        x = RectMatrix(gen.standard_normal((4, 6)))
        measure = singular_esd(x, 2.0)
        # rebuild the atom multiset (weights are k/4 after merging)
        counts = np.rint(measure.weights * 4).astype(int)
        atoms = np.repeat(measure.positions, counts)
        top = np.sort(eigenvalues(hermitize(x)).values / 2.0)[-4:]
        assert atoms.size == 4
        assert np.max(np.abs(np.sort(atoms) - top)) < 1e-9
