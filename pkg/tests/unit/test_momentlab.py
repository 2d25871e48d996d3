"""Unit tests for moments, Gauss-Borel, Weyl matrices, contours and quadrature."""

import numpy as np
import pytest

from favard.exceptions import (
    ContourError,
    IndexRangeError,
    PoleProximityError,
    RegularityError,
    VerificationError,
)
from favard.mixedmop import head_selector
from favard.momentlab import (
    contour_biorthogonality_check,
    gauss_borel,
    gauss_quadrature_check,
    leading_pivots,
    moment_matrix,
    moment_series_weyl,
    moments_from_T,
    quadrature_table,
    second_kind_matrix,
    weyl_convergence_probe,
    weyl_matrix,
)


class TestMoments:
    """Test moment extraction from powers of T."""

    def test_zeroth_moment_is_head_block(self, t1):
        np.testing.assert_array_equal(moments_from_T(t1, 0), head_selector(2))

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_against_dense_power(self, t1, n):
        dense = np.linalg.matrix_power(t1.truncate(2 * n + 3), n)[:2, :3]
        np.testing.assert_allclose(moments_from_T(t1, n), dense, rtol=1e-12)

    def test_independent_of_truncation_size(self, random_pbf_matrix):
        np.testing.assert_array_equal(
            moments_from_T(random_pbf_matrix, 4), moments_from_T(random_pbf_matrix, 4, size=30)
        )

    def test_initial_conditions(self, t1, skewed_ic):
        plain = moments_from_T(t1, 2)
        expected = skewed_ic.xi_inv @ plain @ skewed_ic.nu_inv.T
        np.testing.assert_allclose(moments_from_T(t1, 2, skewed_ic), expected, rtol=1e-12)

    def test_order_range(self, t1):
        with pytest.raises(IndexRangeError):
            moments_from_T(t1, -1)
        with pytest.raises(IndexRangeError):
            moments_from_T(t1, 40)

    def test_moment_matrix_layout(self, t1):
        M = moment_matrix(t1, None, 6)
        psi = M.moments
        assert M.entries[0, 0] == 1.0 and M.entries[1, 1] == 1.0
        assert M.entries[0, 1] == 0.0
        assert M.entries[2, 3] == psi[2][0, 0]
        assert M.entries[5, 5] == psi[3][1, 2]


class TestGaussBorel:
    """Test the factorization of the moment matrix by the recursion coefficients."""

    def test_leading_pivots(self):
        np.testing.assert_allclose(leading_pivots(np.array([[2.0, 1.0], [1.0, 2.0]])), [2.0, 1.5])

    def test_singular_leading_minor(self):
        with pytest.raises(RegularityError):
            leading_pivots(np.array([[0.0, 1.0], [1.0, 0.0]]))

    @pytest.mark.parametrize("n", [3, 5, 6])
    def test_t1_factorization(self, t1, n):
        result = gauss_borel(t1, None, n)
        assert result.residual <= 1e-7
        assert np.all(result.pivots != 0.0)

    def test_t1_factorization_at_twelve(self, t1):
        result = gauss_borel(t1, None, 12)
        assert result.residual <= 1e-7
        assert result.roundoff_bound > 0.0

    def test_residual_above_tolerance_fails(self, random_pbf_matrix, monkeypatch):
        monkeypatch.setattr("favard.momentlab.get_tolerance", lambda name: 1e-300)
        with pytest.raises(VerificationError) as exc_info:
            gauss_borel(random_pbf_matrix, None, 10)
        assert exc_info.value.details["check"] == "gauss_borel"
        assert "roundoff_bound" in exc_info.value.details
        assert gauss_borel(random_pbf_matrix, None, 10, strict=False).residual > 1e-300

    def test_with_initial_conditions(self, t1, skewed_ic):
        result = gauss_borel(t1, skewed_ic, 6)
        np.testing.assert_allclose(result.product, np.eye(6), atol=1e-7)


class TestWeylMatrix:
    """Test the Weyl matrix routes and its moment expansion."""

    def test_second_kind_routes(self, t1):
        assert second_kind_matrix(t1, 4, None, 2.0 + 1.0j).residual <= 1e-7

    @pytest.mark.parametrize("z", [100.0, 3.0 + 2.0j, -1.5])
    def test_routes_agree(self, t1, skewed_ic, z):
        assert weyl_matrix(t1, 5, skewed_ic, z).residual <= 1e-7

    def test_large_z_moment_series(self, t1):
        S = weyl_matrix(t1, 10, None, 1000.0).S
        np.testing.assert_allclose(S, moment_series_weyl(t1, None, 1000.0, 12), atol=1e-12)

    def test_pole(self, t1):
        with pytest.raises(PoleProximityError):
            weyl_matrix(t1, 1, None, 4 + np.sqrt(15))
        with pytest.raises(PoleProximityError):
            weyl_matrix(t1, 1, None, complex(np.inf, 0.0))

    def test_convergence_sequence(self, t1):
        sequence = weyl_convergence_probe(t1, None, 60.0, [4, 8, 12, 16])
        assert len(sequence.differences) == 3
        assert sequence.differences[-1] < sequence.differences[0]

    def test_jacobi_sequence_reaches_closed_form(self, chebyshev):
        sequence = weyl_convergence_probe(chebyshev, None, 3.0, [10, 20, 30])
        assert sequence.values[-1].shape == (1, 1)
        assert sequence.values[-1][0, 0].real == pytest.approx((3 - np.sqrt(5)) / 2, abs=1e-8)
        assert sequence.monotone


class TestContour:
    """Test biorthogonality recovered from a contour around the spectrum."""

    @pytest.mark.parametrize("n,m", [(0, 0), (2, 3), (5, 5), (6, 1)])
    def test_enclosing_circle(self, t1, n, m):
        result = contour_biorthogonality_check(t1, None, n, m, 10, 40.0)
        assert result.encloses_spectrum
        assert result.residual <= 1e-6

    @pytest.mark.parametrize("radius", [0.0, -1.0, float("inf")])
    def test_invalid_radius(self, t1, radius):
        with pytest.raises(ContourError):
            contour_biorthogonality_check(t1, None, 0, 0, 10, radius)

    def test_radius_missing_the_spectrum(self, t1):
        with pytest.raises(ContourError, match="outside the circle"):
            contour_biorthogonality_check(t1, None, 0, 0, 10, 1.0)

    def test_partial_circle_without_poles(self, t1):
        smallest = float(np.min(np.abs(np.linalg.eigvals(t1.truncate(10)))))
        result = contour_biorthogonality_check(t1, None, 0, 0, 10, 0.5 * smallest, allow_partial=True)
        assert result.value == 0j
        assert result.enclosed_poles == 0
        assert not result.encloses_spectrum

    def test_index_beyond_truncation(self, t1):
        with pytest.raises(IndexRangeError):
            contour_biorthogonality_check(t1, None, 11, 0, 10, 40.0)


class TestQuadrature:
    """Test the degrees of precision of the Gauss-type quadrature."""

    def test_t1_table(self, t1):
        table = quadrature_table(t1, None, 4)
        assert set(table) == {(b, a) for b in (1, 2) for a in (1, 2, 3)}
        assert table[(1, 1)].degree == 4
        assert table[(2, 3)].degree == 2
        assert all(check.exact for check in table.values())

    def test_entry_range(self, t1):
        with pytest.raises(IndexRangeError):
            gauss_quadrature_check(t1, None, 4, a=4, b=1)

    def test_t1_degrees_reached_at_twelve(self, t1):
        table = quadrature_table(t1, None, 12)
        for (b, a), check in table.items():
            assert check.exact, (b, a, check.observed, check.degree)
            assert check.residuals[0] <= 1e-8
