"""Unit tests for Jacobi matrices and their spectral data."""

from math import comb

import numpy as np
import pytest

from favard.exceptions import IndexRangeError, PoleProximityError, SubdiagonalPositivityError, VerificationError
from favard.jacobi import (
    JacobiMatrix,
    cd_check,
    discrete_orthogonality,
    eigenvector_matrices,
    golub_welsch_masses,
    interlacing_check,
    measure_moment,
    moments,
    quadrature_check,
    recursion_polys,
    resolvent,
    second_kind,
    shift_bound,
    spectral_data,
    step_function,
    symmetrizer,
    truncated_polys,
    weyl,
)
from favard.polycore import Poly


def catalan(j: int) -> int:
    return comb(2 * j, j) // (j + 1)


class TestJacobiMatrix:
    """Test construction and truncation."""

    def test_truncate(self):
        J = JacobiMatrix(m=[1.0, 2.0, 3.0], ell=[1.0, 0.5, 0.25], n_max=3)
        np.testing.assert_array_equal(J.truncate(2), [[1, 1, 0], [0.5, 2, 1], [0, 0.25, 3]])
        assert J.entry(2, 1) == 0.25
        assert J.entry(0, 2) == 0.0

    def test_nonpositive_subdiagonal_rejected(self):
        with pytest.raises(SubdiagonalPositivityError) as exc_info:
            JacobiMatrix(m=[0.0, 0.0, 0.0], ell=[1.0, 1.0, 0.0], n_max=3)
        assert exc_info.value.details["index"] == 2

    def test_order_out_of_range(self, chebyshev):
        with pytest.raises(IndexRangeError):
            chebyshev.truncate(64)

    def test_symmetrizer(self):
        J = JacobiMatrix(m=[0.0, 1.0, 2.0], ell=[1.0, 4.0, 9.0], n_max=3)
        h_sqrt, S = symmetrizer(J, 2)
        np.testing.assert_allclose(h_sqrt, [1.0, 2.0, 6.0])
        np.testing.assert_allclose(S, S.T)
        np.testing.assert_allclose(np.diag(S, 1), [2.0, 3.0])


class TestRecursionPolynomials:
    """Test first and second kind polynomials."""

    def test_chebyshev_recursion(self, chebyshev):
        polys = recursion_polys(chebyshev, 3)
        assert polys.P[2].allclose(Poly((-1.0, 0.0, 1.0)))
        assert polys.P[3].allclose(Poly((0.0, -2.0, 0.0, 1.0)))
        assert polys.H == (1.0, 1.0, 1.0, 1.0)

    def test_second_kind_starts_at_zero_one(self, chebyshev):
        assert second_kind(chebyshev, 2).allclose(Poly((-1.0, 0.0, 1.0)))
        assert second_kind(chebyshev, 0).allclose(Poly((1.0,)))

    def test_truncated_polys_match_both_kinds(self, random_jacobi_matrix):
        J, N = random_jacobi_matrix, 4
        truncated = truncated_polys(J, N)
        assert truncated[0].allclose(recursion_polys(J, N).P[N + 1])
        assert truncated[1].allclose(second_kind(J, N))
        assert truncated[N + 1].allclose(Poly((1.0,)))


class TestSpectralData:
    """Test eigenvalues, masses and the derived measure."""

    def test_chebyshev_nodes_and_masses(self, chebyshev):
        N = 6
        data = spectral_data(chebyshev, N)
        k = np.arange(1, N + 2)
        np.testing.assert_allclose(data.lambdas, 2 * np.cos(k * np.pi / (N + 2)), atol=1e-12)
        np.testing.assert_allclose(data.masses, 2 / (N + 2) * np.sin(k * np.pi / (N + 2)) ** 2, atol=1e-12)

    def test_mass_formulas_agree(self, random_jacobi_matrix):
        data = spectral_data(random_jacobi_matrix, 12)
        assert data.mass_residual <= 1e-9
        np.testing.assert_allclose(data.masses, golub_welsch_masses(random_jacobi_matrix, 12), atol=1e-12)
        assert np.sum(data.masses) == pytest.approx(1.0, abs=1e-12)

    def test_tiny_masses_keep_relative_accuracy(self, random_jacobi_matrix):
        data = spectral_data(random_jacobi_matrix, 40)
        assert np.all(data.masses > 0)
        np.testing.assert_allclose(data.masses * data.christoffel, 1.0, rtol=1e-9)
        assert data.mass_residual <= 1e-9

    def test_mass_disagreement_fails_when_strict(self, random_jacobi_matrix, monkeypatch):
        monkeypatch.setattr("favard.jacobi.get_tolerance", lambda name: 0.0)
        with pytest.raises(VerificationError) as exc_info:
            spectral_data(random_jacobi_matrix, 12)
        assert exc_info.value.details["check"] == "mass_agreement"
        assert spectral_data(random_jacobi_matrix, 12, strict=False).mass_residual > 0.0

    def test_catalan_moments(self, chebyshev):
        data = spectral_data(chebyshev, 40)
        for j in range(5):
            assert measure_moment(data, 2 * j) == pytest.approx(catalan(j), rel=1e-9)
            assert moments(chebyshev, 2 * j) == catalan(j)
            assert moments(chebyshev, 2 * j + 1) == 0.0

    def test_step_function_right_continuous(self, chebyshev):
        data = spectral_data(chebyshev, 3)
        lowest = data.lambdas[-1]
        assert step_function(data, lowest - 1e-9) == 0.0
        assert step_function(data, lowest) == pytest.approx(data.masses[-1])
        assert step_function(data, 10.0) == pytest.approx(1.0)


class TestIdentities:
    """Test Christoffel-Darboux, eigenvectors and orthogonality."""

    @pytest.mark.parametrize("x,y", [(0.3, -1.1), (1.7, 1.7), (-2.5, 0.0)])
    def test_christoffel_darboux(self, random_jacobi_matrix, x, y):
        check = cd_check(random_jacobi_matrix, 10, x, y)
        assert check.relative <= 1e-9
        if x == y:
            assert check.confluent
            assert check.normalized > 0

    def test_eigenvector_matrices(self, random_jacobi_matrix):
        vectors = eigenvector_matrices(random_jacobi_matrix, 12)
        assert vectors.uw_residual <= 1e-7
        assert vectors.power_residual <= 1e-7

    def test_discrete_orthogonality(self, random_jacobi_matrix):
        G = discrete_orthogonality(random_jacobi_matrix, 8)
        assert np.max(np.abs(np.tril(G, -1))) <= 1e-9

    def test_interlacing(self, random_jacobi_matrix):
        for N in range(6):
            assert interlacing_check(random_jacobi_matrix, N).ok

    def test_shift_bound(self, chebyshev):
        assert shift_bound(chebyshev, [5]) == pytest.approx(2 * np.cos(np.pi / 7))
        assert shift_bound(chebyshev.shift(3.0), range(6)) == 0.0


class TestWeylAndQuadrature:
    """Test the scalar Weyl function and Gauss quadrature."""

    def test_weyl_closed_form(self, chebyshev):
        result = weyl(chebyshev, 40, 10.0)
        assert abs(result.value - (10 - np.sqrt(96)) / 2) <= 1e-10
        assert result.residual <= 1e-7

    def test_resolvent_corner_is_weyl(self, chebyshev):
        z = 0.5 + 1.0j
        R = resolvent(chebyshev, 8, z)
        assert R[0, 0] == pytest.approx(weyl(chebyshev, 8, z).value, rel=1e-9)

    def test_pole_rejected(self, chebyshev):
        with pytest.raises(PoleProximityError):
            weyl(chebyshev, 0, 0.0)

    def test_gauss_quadrature_degree(self, chebyshev):
        check = quadrature_check(chebyshev, 4)
        assert check.degree == 9
        assert check.exact
        assert check.optimal
        assert check.optimality_residual == pytest.approx(1 / 42, rel=1e-6)
