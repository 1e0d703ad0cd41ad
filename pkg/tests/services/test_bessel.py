import numpy as np
import pytest
from scipy import special

from src.core.bessel import (
    bessel_j,
    bessel_j01,
    bessel_j1_over_x,
    bessel_j_derivative,
    bessel_zero,
    bessel_zeros,
    mcmahon_zero,
)


def test_j0_j1_match_scipy_across_regimes():
    # Arrange
    x = np.linspace(0.0, 80.0, 4001)

    # Act
    j0, j1 = bessel_j01(x)

    # Assert
    np.testing.assert_allclose(j0, special.j0(x), atol=1e-12)
    np.testing.assert_allclose(j1, special.j1(x), atol=1e-12)


def test_values_do_not_depend_on_the_rest_of_the_batch():
    # Arrange
    x = np.array([4.2, 7.5, 11.0, 18.3, 24.9])
    padded = np.concatenate([x, [24.99, 5.0]])

    # Act
    alone = [bessel_j01(value) for value in x]
    j0, j1 = bessel_j01(padded)

    # Assert
    np.testing.assert_array_equal(j0[: x.size], [value[0] for value in alone])
    np.testing.assert_array_equal(j1[: x.size], [value[1] for value in alone])


def test_parity_for_negative_arguments():
    # Arrange
    x = np.array([0.3, 3.7, 12.0, 40.0])

    # Act
    j0_pos, j1_pos = bessel_j01(x)
    j0_neg, j1_neg = bessel_j01(-x)

    # Assert
    np.testing.assert_array_equal(j0_neg, j0_pos)
    np.testing.assert_array_equal(j1_neg, -j1_pos)


def test_scalar_input_gives_float():
    # Act
    value = bessel_j(0, 1.5)

    # Assert
    assert isinstance(value, float)
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0


def test_unsupported_order_rejected():
    # Act & Assert
    with pytest.raises(ValueError):
        bessel_j(2, 1.0)


def test_derivatives():
    # Arrange
    x = np.linspace(0.1, 30.0, 300)

    # Act
    d0 = bessel_j_derivative(0, x)
    d1 = bessel_j_derivative(1, x)

    # Assert
    np.testing.assert_allclose(d0, special.jvp(0, x), atol=1e-12)
    np.testing.assert_allclose(d1, special.jvp(1, x), atol=1e-12)
    assert bessel_j_derivative(1, 0.0) == pytest.approx(0.5)


def test_j1_over_x_removable_singularity():
    # Arrange
    x = np.array([1e-8, 1e-3, 0.5, 7.0])

    # Act
    ratio = bessel_j1_over_x(x)

    # Assert
    assert float(bessel_j1_over_x(np.array(0.0))) == 0.5
    np.testing.assert_allclose(ratio, special.j1(x) / x, rtol=1e-12)


def test_zeros_match_reference_and_vanish():
    # Act
    roots = bessel_zeros(0, 100)

    # Assert
    np.testing.assert_allclose(roots, special.jn_zeros(0, 100), rtol=1e-13)
    assert np.all(np.abs(special.j0(roots)) < 1e-12)
    assert np.all(np.diff(roots) > 0)


def test_first_zero_and_seed():
    # Act
    root = bessel_zero(0, 1)
    seed = mcmahon_zero(1)

    # Assert
    assert root == pytest.approx(2.404825557695773, abs=1e-14)
    assert abs(seed - 2.404825557695773) < 1e-2


@pytest.mark.parametrize("nu, k", [(1, 1), (0, 0), (0, -3)])
def test_invalid_root_requests(nu, k):
    # Act & Assert
    with pytest.raises(ValueError):
        bessel_zero(nu, k)
