import math

import numpy as np
import pytest

from qsts.errors import DimensionError, NotCirculant, RangeError
from qsts.spectral import SpectralDensity, eval_density, fourier_frequencies
from qsts.toeplitz import (
    DftUnitary,
    SymbolMatrix,
    abs_square,
    circulant_eigs,
    circulant_from_density,
    diagonalization_residue,
    eigen_bracket_check,
    hs_distance,
    op_norm,
    principal_submatrix,
    toeplitz_circulant_gap,
    toeplitz_from_density,
)

COS_2_05 = SpectralDensity.from_coeff_map({0: 2.0, 1: 0.5})   # 2 + cos w
COS_2_HALF = SpectralDensity.cosine(2.0, 0.5)                 # 2 + 0.5 cos w
GEOM = SpectralDensity(np.array([2.0 ** -k for k in range(21)], dtype=complex))
INVSQ = SpectralDensity(np.array([(1.0 + k) ** -2 for k in range(60)],
                                 dtype=complex))


def random_hermitian(n, rng):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (M + M.conj().T)


class TestToeplitzBuild:
    def test_constant_is_identity_multiple(self):
        A = toeplitz_from_density(SpectralDensity.constant(3.0), 4)
        np.testing.assert_allclose(A.entries, 3.0 * np.eye(4), atol=0)

    def test_tridiagonal(self):
        A = toeplitz_from_density(COS_2_05, 3)
        expect = np.array([[2.0, 0.5, 0.0], [0.5, 2.0, 0.5], [0.0, 0.5, 2.0]])
        np.testing.assert_allclose(A.entries, expect, atol=0)

    def test_complex_lag_hermitian(self):
        a = SpectralDensity.from_coeff_map({0: 2.0, 1: 0.3 + 0.1j})
        A = toeplitz_from_density(a, 2)
        assert A.entries[0, 1] == pytest.approx(0.3 + 0.1j)
        assert A.entries[1, 0] == pytest.approx(0.3 - 0.1j)

    def test_nesting(self):
        big = toeplitz_from_density(GEOM, 12)
        small = toeplitz_from_density(GEOM, 5)
        np.testing.assert_allclose(principal_submatrix(big, 5).entries,
                                   small.entries, atol=0)


class TestCirculant:
    def test_constant(self):
        C = circulant_from_density(SpectralDensity.constant(2.5), 5)
        np.testing.assert_allclose(C.entries, 2.5 * np.eye(5), atol=0)

    def test_rows_are_cyclic_shifts(self):
        C = circulant_from_density(COS_2_05, 3)
        first = np.array([2.0, 0.5, 0.5])
        for r in range(3):
            np.testing.assert_allclose(C.entries[r], np.roll(first, r), atol=0)

    def test_central_band_matches_toeplitz(self):
        m = 9
        C = circulant_from_density(GEOM, m)
        A = toeplitz_from_density(GEOM, m)
        half = (m - 1) // 2
        for j in range(m):
            for k in range(m):
                if abs(j - k) <= half:
                    assert C.entries[j, k] == A.entries[j, k]

    def test_banded_fully_inside_band_equal(self):
        # K_max = 1 <= (m-1)/2 means the circulant equals the Toeplitz matrix
        # on the band; wrap-around terms vanish only outside n < m anyway.
        m = 5
        C = circulant_from_density(COS_2_05, m)
        A = toeplitz_from_density(COS_2_05, m)
        band = np.abs(np.subtract.outer(np.arange(m), np.arange(m))) <= 2
        np.testing.assert_allclose(C.entries[band], A.entries[band], atol=0)


class TestCirculantEigs:
    def test_scalar(self):
        C = circulant_from_density(SpectralDensity.constant(4.0), 7)
        np.testing.assert_allclose(circulant_eigs(C), 4.0, atol=1e-12)

    def test_m3_values(self):
        C = circulant_from_density(COS_2_05, 3)
        np.testing.assert_allclose(circulant_eigs(C), [1.5, 3.0, 1.5], atol=1e-12)

    def test_against_dense_oracle(self):
        a = SpectralDensity(np.array([2.0, 0.5, 0.25], dtype=complex))
        C = circulant_from_density(a, 5)
        ours = np.sort(circulant_eigs(C))
        dense = np.linalg.eigvalsh(C.entries)
        np.testing.assert_allclose(ours, dense, atol=1e-10)

    def test_complex_coeffs_against_dense(self):
        a = SpectralDensity.from_coeff_map({0: 3.0, 1: 0.4 + 0.2j, 2: -0.1j})
        C = circulant_from_density(a, 7)
        np.testing.assert_allclose(np.sort(circulant_eigs(C)),
                                   np.linalg.eigvalsh(C.entries), atol=1e-10)

    def test_eigs_equal_truncated_density_at_frequencies(self):
        m = 9
        C = circulant_from_density(GEOM, m)
        from qsts.spectral import fourier_truncate
        kept, _ = fourier_truncate(GEOM, m)
        np.testing.assert_allclose(circulant_eigs(C),
                                   eval_density(kept, fourier_frequencies(m)),
                                   atol=1e-10)

    def test_not_circulant_rejected(self):
        A = toeplitz_from_density(GEOM, 5)
        with pytest.raises(NotCirculant):
            circulant_eigs(A)


class TestDftUnitary:
    def test_unitarity(self):
        for m in (3, 7, 21):
            U = DftUnitary(m).matrix
            np.testing.assert_allclose(U.conj().T @ U, np.eye(m), atol=1e-12)

    def test_diagonalizes_circulant(self):
        for a in (COS_2_05, GEOM):
            for m in (5, 9, 15):
                assert diagonalization_residue(a, m) < 1e-9

    def test_conjugation_diagonal_matches_eigs(self):
        m = 7
        C = circulant_from_density(GEOM, m)
        U = DftUnitary(m).matrix
        D = U.conj().T @ C.entries @ U
        np.testing.assert_allclose(np.diag(D).real, circulant_eigs(C), atol=1e-10)


class TestGap:
    def test_banded_no_overlap_gap_zero(self):
        # band K_max=1: lags (m+1)/2 .. n-1 all vanish and wrap-around misses
        gap, _ = toeplitz_circulant_gap(COS_2_05, 16, 21, 1.0, 4.5)
        assert gap == pytest.approx(0.0, abs=1e-15)

    def test_geometric_decay_bounded(self):
        from qsts.spectral import sobolev_norm
        _, M = sobolev_norm(GEOM, 1.0)
        gap, bound = toeplitz_circulant_gap(GEOM, 16, 21, 1.0, M)
        assert gap <= bound + 1e-9

    def test_monotone_in_m(self):
        from qsts.spectral import sobolev_norm
        _, M = sobolev_norm(GEOM, 1.0)
        g29, _ = toeplitz_circulant_gap(GEOM, 16, 29, 1.0, M)
        g21, _ = toeplitz_circulant_gap(GEOM, 16, 21, 1.0, M)
        assert g29 <= g21 + 1e-15

    def test_lag_sum_matches_dense(self):
        # the dense/lag-sum agreement is asserted inside the call
        from qsts.spectral import sobolev_norm
        for a in (GEOM, INVSQ):
            _, M = sobolev_norm(a, 1.0)
            for n, m in ((16, 21), (32, 35), (32, 61)):
                toeplitz_circulant_gap(a, n, m, 1.0, M)

    def test_range_checks(self):
        with pytest.raises(RangeError):
            toeplitz_circulant_gap(GEOM, 16, 16, 1.0, 1.0)
        with pytest.raises(RangeError):
            toeplitz_circulant_gap(GEOM, 16, 31, 1.0, 1.0)  # m >= 2(n-1)
        with pytest.raises(RangeError):
            toeplitz_circulant_gap(GEOM, 16, 20, 1.0, 1.0)  # even m


class TestEigenBracket:
    def test_constant(self):
        lam_min, lam_max, lo, hi, ok = eigen_bracket_check(
            SpectralDensity.constant(2.0), 6)
        assert ok and lam_min == pytest.approx(2.0) and lam_max == pytest.approx(2.0)

    def test_cosine_range(self):
        lam_min, lam_max, lo, hi, ok = eigen_bracket_check(COS_2_HALF, 8)
        assert ok
        assert lo == pytest.approx(1.5, abs=1e-9)
        assert hi == pytest.approx(2.5, abs=1e-9)
        assert 1.5 - 1e-9 <= lam_min <= lam_max <= 2.5 + 1e-9

    def test_lambda_min_decreases_toward_inf(self):
        mins = [eigen_bracket_check(COS_2_HALF, n)[0] for n in (4, 8, 16, 32)]
        assert all(b <= a + 1e-12 for a, b in zip(mins, mins[1:]))
        assert mins[-1] >= 1.5 - 1e-9


class TestNorms:
    def test_equal_matrices(self):
        A = toeplitz_from_density(GEOM, 5)
        assert hs_distance(A, A) == 0.0

    def test_diag_vs_zero(self):
        D = SymbolMatrix(np.diag([1.0, 2.0]).astype(complex))
        Z = SymbolMatrix(np.zeros((2, 2), dtype=complex))
        assert hs_distance(D, Z) == pytest.approx(math.sqrt(5.0))
        assert op_norm(D.entries - Z.entries) == pytest.approx(2.0)

    def test_op_le_hs(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            H = random_hermitian(5, rng)
            assert op_norm(H) <= np.linalg.norm(H) + 1e-12

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            hs_distance(np.eye(2), np.eye(3))


class TestAbsSquare:
    def test_identity(self):
        np.testing.assert_allclose(abs_square(np.eye(3)), np.eye(3), atol=0)

    def test_all_i(self):
        M = 1j * np.ones((2, 2))
        np.testing.assert_allclose(abs_square(M), np.ones((2, 2)), atol=0)

    def test_entrywise_oracle(self):
        rng = np.random.default_rng(3)
        H = random_hermitian(4, rng)
        U = DftUnitary(4 + 1).matrix[:4, :4]  # any complex matrix works
        M = U.conj().T @ H @ U
        S = abs_square(M)
        for j in range(4):
            for k in range(4):
                assert S[j, k] == pytest.approx(abs(M[j, k]) ** 2, abs=1e-14)
