import numpy as np
import pytest

from src.core.exceptions import InvalidInputError
from src.services.basis import (
    build_basis,
    constant_projection,
    expand,
    fb_eval,
    fb_matrix,
    gram_matrix,
    project,
    project_log_pcf,
)


def test_gram_matrix_is_identity():
    # Arrange
    spec = build_basis(R=0.125, r_min=0.0, k_max=20)

    # Act
    gram = gram_matrix(spec, 20, nodes=512)

    # Assert
    np.testing.assert_allclose(gram, np.eye(20), atol=1e-6)


def test_gram_matrix_with_offset():
    # Arrange
    spec = build_basis(R=0.1, r_min=0.01, k_max=6)

    # Act
    gram = gram_matrix(spec, 6)

    # Assert
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-6)


def test_constant_projection_matches_quadrature(basis):
    # Act
    exact = constant_projection(basis, 8)
    numeric = project(basis, 8, lambda r: np.ones_like(r))

    # Assert
    np.testing.assert_allclose(exact, numeric, rtol=1e-9)


def test_projection_recovers_coefficients(basis):
    # Arrange
    coefficients = np.array([0.3, -0.2, 0.05])

    def pcf(r):
        return np.exp(expand(basis, coefficients, r))

    # Act
    recovered = project_log_pcf(basis, 3, pcf)

    # Assert
    np.testing.assert_allclose(recovered, coefficients, atol=1e-8)


def test_basis_vanishes_at_range_end(basis):
    # Act
    values = [fb_eval(basis, k, basis.R)[0] for k in range(1, 9)]

    # Assert
    assert values == pytest.approx([0.0] * 8, abs=1e-10)


def test_derivative_at_origin_is_zero(basis):
    # Act
    _, first, second = fb_eval(basis, 3, 0.0)

    # Assert
    assert first == 0.0
    assert second < 0


def test_derivatives_match_finite_differences(basis):
    # Arrange
    s = np.linspace(0.01, 0.11, 7)
    h = 1e-6

    # Act
    value, first, second = fb_eval(basis, 4, s)
    plus, first_plus, _ = fb_eval(basis, 4, s + h)
    minus, first_minus, _ = fb_eval(basis, 4, s - h)

    # Assert
    np.testing.assert_allclose(first, (plus - minus) / (2 * h), rtol=1e-5, atol=1e-4)
    np.testing.assert_allclose(second, (first_plus - first_minus) / (2 * h), rtol=1e-5, atol=1e-2)


def test_scalar_and_array_evaluation_agree(basis):
    # Act
    value, first, second = fb_eval(basis, 2, np.array([0.05]))
    scalar = fb_eval(basis, 2, 0.05)
    matrix, _, _ = fb_matrix(basis, 8, np.array([0.05]))

    # Assert
    assert scalar == pytest.approx((value[0], first[0], second[0]))
    assert matrix[0, 1] == pytest.approx(value[0])


@pytest.mark.parametrize("k, s", [(0, 0.05), (9, 0.05), (1, -0.01), (1, 0.2)])
def test_out_of_range_evaluation(basis, k, s):
    # Act & Assert
    with pytest.raises(InvalidInputError):
        fb_eval(basis, k, s)


def test_expand_outside_support(basis):
    # Act & Assert
    with pytest.raises(InvalidInputError):
        expand(basis, np.ones(2), np.array([0.05, 0.3]))


@pytest.mark.parametrize("kwargs", [{"R": 0.0}, {"R": -1.0}, {"r_min": -0.1}, {"k_max": 0}, {"nu": 1.0}])
def test_invalid_basis(kwargs):
    # Act & Assert
    with pytest.raises(InvalidInputError):
        build_basis(**kwargs)
