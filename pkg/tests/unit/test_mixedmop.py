"""Unit tests for mixed multiple orthogonal polynomials and the discrete measure."""

import numpy as np
import pytest

from favard.bandmat import BandedMatrix
from favard.exceptions import ExtremeBandError, IndexRangeError, InputError
from favard.polycore import Poly
from favard.mixedmop import (
    InitialConditions,
    bound_matrix,
    christoffel_numbers,
    degree_law_i,
    degree_law_ii,
    degrees_of_precision,
    determinantal_polys,
    discrete_biorthogonality,
    biorthogonality_residual,
    char_polys,
    darboux_initial_conditions,
    discrete_measure,
    extreme_products,
    family_values,
    generalized_cd_check,
    head_selector,
    interlacing_check,
    projector_weights,
    recursion_vectors,
    truncation_spectrum,
)


class TestDegreeLaws:
    """Test the degree formulas."""

    def test_type_i_law(self):
        assert [degree_law_i(n, 1) for n in range(7)] == [0, 0, 0, 1, 1, 1, 2]
        assert [degree_law_i(n, 3) for n in range(4)] == [-1, -1, 0, 0]

    def test_type_ii_law(self):
        assert [degree_law_ii(n, 1) for n in range(5)] == [0, 0, 1, 1, 2]
        assert [degree_law_ii(n, 2) for n in range(5)] == [-1, 0, 0, 1, 1]

    def test_degrees_of_precision(self):
        assert degrees_of_precision(4, 1, 1) == 4
        assert degrees_of_precision(4, 3, 2) == 2
        assert degrees_of_precision(0, 1, 1) == 1


class TestInitialConditions:
    """Test the initial condition matrices."""

    def test_inverses(self, skewed_ic):
        np.testing.assert_allclose(skewed_ic.nu_inv @ skewed_ic.nu, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(skewed_ic.xi_inv @ skewed_ic.xi, np.eye(2), atol=1e-15)
        assert not skewed_ic.is_identity
        assert InitialConditions().is_identity

    def test_head_selector(self):
        np.testing.assert_array_equal(head_selector(0), [[1, 0, 0], [0, 0, 0]])
        np.testing.assert_array_equal(head_selector(1), [[1, 0, 0], [0, 1, 0]])
        np.testing.assert_array_equal(head_selector(5), [[1, 0, 0], [0, 1, 0]])

    def test_bound_matrix(self, skewed_ic):
        np.testing.assert_array_equal(bound_matrix(InitialConditions(), 4), head_selector(4))
        expected = skewed_ic.xi_inv @ head_selector(4) @ skewed_ic.nu_inv.T
        np.testing.assert_allclose(bound_matrix(skewed_ic, 4), expected)


class TestRecursionVectors:
    """Test the type I and type II recurrences."""

    def test_type_ii_eigen_sequence(self, random_pbf_matrix, skewed_ic):
        T, N = random_pbf_matrix, 6
        x = np.array([0.7, -1.3])
        _, B = family_values(T, N, skewed_ic, x)
        M = np.array([[T.entry(n, m) for m in range(N + 2)] for n in range(N)])
        for b in range(2):
            np.testing.assert_allclose(M @ B[b, : N + 2], x * B[b, :N], atol=1e-9)

    def test_type_i_eigen_sequence(self, random_pbf_matrix, skewed_ic):
        T, N = random_pbf_matrix, 6
        x = np.array([0.7, -1.3])
        A, _ = family_values(T, N, skewed_ic, x)
        M = np.array([[T.entry(m, n) for m in range(N + 3)] for n in range(N)])
        for a in range(3):
            np.testing.assert_allclose(M @ A[a, : N + 3], x * A[a, :N], atol=1e-9)

    def test_initial_values(self, t1, skewed_ic):
        families = recursion_vectors(t1, 2, skewed_ic)
        assert families.type_ii(1)[0].coeffs == (0.4,)
        assert families.type_ii(0)[1].is_zero
        assert families.type_i(1)[0].coeffs == (0.3,)
        assert families.type_i(2)[1].coeffs == (0.5,)

    def test_degrees_follow_law(self, t1):
        families = recursion_vectors(t1, 8)
        for n in range(11):
            for a, poly in enumerate(families.type_i(n), start=1):
                assert poly.degree <= degree_law_i(n, a)
        for n in range(10):
            for b, poly in enumerate(families.type_ii(n), start=1):
                assert poly.degree <= degree_law_ii(n, b)

    def test_polynomial_and_pointwise_runs_agree(self, t1):
        families = recursion_vectors(t1, 5)
        x = np.array([0.25, 3.0])
        A, B = family_values(t1, 5, None, x)
        np.testing.assert_allclose(families.type_i(7)[1](x), A[1, 7], rtol=1e-8)
        np.testing.assert_allclose(families.type_ii(6)[0](x), B[0, 6], rtol=1e-8)

    def test_requires_2_3_band(self, chebyshev):
        with pytest.raises(InputError) as exc_info:
            recursion_vectors(chebyshev.to_banded(), 2)
        assert exc_info.value.error_code == "BAND_SHAPE"

    def test_order_beyond_represented_range(self, t1):
        with pytest.raises(IndexRangeError):
            recursion_vectors(t1, 62)

    def test_vanishing_extreme_band(self):
        T = BandedMatrix(p=2, q=3, bands={-3: [1.0] * 7, 0: [1.0] * 10}, n_max=10)
        with pytest.raises(ExtremeBandError):
            recursion_vectors(T, 3)


class TestDeterminantalPolys:
    """Test alpha Q_N = P_N = beta R_N."""

    def test_extreme_products_of_t1(self, t1):
        assert extreme_products(t1, 3) == (1.0, -1.0)
        assert extreme_products(t1, 4) == (1.0, 1.0)

    def test_char_polys_of_t1(self, t1):
        P = char_polys(t1, 1)
        assert len(P) == 3
        assert P[0].coeffs == (1.0,)
        assert P[1].allclose(Poly((-1.0, 1.0)))
        assert P[2].allclose(Poly((1.0, -8.0, 1.0)))

    @pytest.mark.parametrize("N", [1, 3, 6])
    def test_charpoly_identity(self, t1, N):
        det = determinantal_polys(t1, N)
        assert det.consistent
        assert det.Q[N + 1].is_zero and det.Q[N + 2].is_zero
        assert det.R[N + 1].is_zero


class TestTruncationSpectrum:
    """Test eigenvectors, Christoffel numbers and the discrete measure."""

    def test_t1_first_truncation(self, t1):
        spectrum = truncation_spectrum(t1, 1)
        np.testing.assert_allclose(spectrum.lambdas, [4 + np.sqrt(15), 4 - np.sqrt(15)], rtol=1e-10)

    @pytest.mark.parametrize("N", [2, 5, 8, 10])
    def test_biorthogonal_eigenvectors(self, t1, N):
        spectrum = truncation_spectrum(t1, N)
        assert spectrum.uw_residual <= 1e-8
        assert spectrum.power_residual <= 1e-7
        assert spectrum.eigen_residual <= 1e-7
        np.testing.assert_allclose(spectrum.matrix, t1.truncate(N), atol=1e-6 * t1.norm1(N))

    def test_christoffel_minors_and_projector_oracle(self, random_pbf_matrix, skewed_ic):
        spectrum = truncation_spectrum(random_pbf_matrix, 6, skewed_ic)
        numbers = christoffel_numbers(spectrum)
        assert numbers.residual <= 1e-8
        assert spectrum.projector_residual <= 1e-8
        values, weights = projector_weights(random_pbf_matrix.truncate(6), skewed_ic)
        np.testing.assert_allclose(values.real, spectrum.lambdas, rtol=1e-8, atol=1e-12)
        assert weights.shape == (7, 2, 3)

    def test_determinantal_vectors_agree_for_small_orders(self, t1):
        assert truncation_spectrum(t1, 2).determinantal_residual <= 1e-9

    def test_measure_bound_with_identity_conditions(self, t1):
        measure = discrete_measure(truncation_spectrum(t1, 6))
        np.testing.assert_allclose(measure.total_mass, head_selector(6), atol=1e-8)
        assert not measure.positive
        assert measure.nonpositive_weights()

    @pytest.mark.parametrize("N", [1, 4, 6, 10])
    def test_darboux_conditions_give_positive_weights(self, t1, N):
        ic = darboux_initial_conditions(t1)
        measure = discrete_measure(truncation_spectrum(t1, N, ic))
        assert measure.positive, measure.nonpositive_weights()
        np.testing.assert_allclose(measure.total_mass, bound_matrix(ic, N), atol=1e-8)

    def test_darboux_conditions_on_random_factors(self, random_pbf_matrix):
        ic = darboux_initial_conditions(random_pbf_matrix)
        for N in (3, 8):
            assert discrete_measure(truncation_spectrum(random_pbf_matrix, N, ic)).positive

    def test_darboux_conditions_need_factors(self, t1):
        with pytest.raises(InputError) as exc_info:
            darboux_initial_conditions(t1.shift(1.0))
        assert exc_info.value.error_code == "NO_FACTORS"

    def test_measure_bound_with_initial_conditions(self, random_pbf_matrix, skewed_ic):
        measure = discrete_measure(truncation_spectrum(random_pbf_matrix, 5, skewed_ic))
        assert measure.mass_residual <= 1e-8
        np.testing.assert_allclose(measure.total_mass, bound_matrix(skewed_ic, 5), atol=1e-8)

    def test_single_node_bound(self, t1):
        measure = discrete_measure(truncation_spectrum(t1, 0))
        np.testing.assert_allclose(measure.total_mass, head_selector(0), atol=1e-12)

    def test_step_function(self, t1):
        measure = discrete_measure(truncation_spectrum(t1, 4))
        lowest, highest = measure.support[-1], measure.support[0]
        np.testing.assert_array_equal(measure.step(lowest - 1.0), np.zeros((2, 3)))
        np.testing.assert_allclose(measure.step(highest), measure.total_mass, rtol=0, atol=1e-12)
        assert measure.entry(1, 1, lowest) == pytest.approx(measure.weights[-1, 0, 0])
        assert measure.step(np.array([lowest, highest])).shape == (2, 2, 3)

    def test_discrete_biorthogonality(self, t1, skewed_ic):
        G = discrete_biorthogonality(t1, 6, skewed_ic)
        assert biorthogonality_residual(G) <= 1e-7

    @pytest.mark.parametrize("N", [10, 15])
    def test_discrete_biorthogonality_relative_to_terms(self, t1, N):
        G, magnitudes = discrete_biorthogonality(t1, N, magnitudes=True)
        assert magnitudes.shape == G.shape
        assert np.all(magnitudes >= np.abs(G) - 1e-12)
        assert biorthogonality_residual(G, magnitudes) <= 1e-7


class TestKernelsAndInterlacing:
    """Test the generalized Christoffel-Darboux formula and interlacing."""

    @pytest.mark.parametrize("x,y", [(0.3, 1.7), (2.0, 2.0), (-0.5, 6.0)])
    def test_generalized_cd(self, random_pbf_matrix, x, y):
        check = generalized_cd_check(random_pbf_matrix, 5, None, x, y)
        assert check.relative <= 1e-9
        if x == y:
            assert check.normalized > 0

    def test_interlacing(self, random_pbf_matrix):
        for N in range(7):
            assert interlacing_check(random_pbf_matrix, N).ok
