import numpy as np
import pytest

from src.core.exceptions import InvalidInputError, SingularSystemError
from src.entity.models import ConstantIntensity, PointPattern, PointwiseIntensity, PsiSpec, RngSeed, Variant
from src.services.geometry import close_pairs
from src.services.simulate import sim_poisson
from src.services.variational import (
    PsiTestFunction,
    ResidualVariant,
    assemble_system,
    condition_estimate,
    default_psi,
    eval_log_g,
    extend_system,
    psi_eval,
    sensitivity,
    solve_beta,
    variational_residual,
)


def _pairs(pattern, basis, intensity):
    return close_pairs(pattern, basis.r_min, basis.upper, intensity)


def test_psi_shape():
    # Arrange
    psi = PsiSpec(b=0.2)
    t = np.linspace(0.01, 0.19, 9)
    h = 1e-7

    # Act
    at_knots = psi_eval(psi, np.array([0.0, 0.1, 0.2, 0.3]))
    values = psi_eval(psi, t)

    # Assert
    np.testing.assert_allclose(at_knots.value, [0.0, 1 / 16, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(values.over_t, values.value / t, rtol=1e-12)
    np.testing.assert_allclose(values.derivative_over_t, values.derivative / t, rtol=1e-10, atol=1e-12)
    slope = (psi_eval(psi, t + h).value - psi_eval(psi, t - h).value) / (2 * h)
    np.testing.assert_allclose(values.derivative, slope, rtol=1e-6, atol=1e-8)


def test_default_psi_covers_range(basis):
    # Act
    psi = default_psi(basis)

    # Assert
    assert psi.b == pytest.approx(basis.upper)


def test_invalid_psi():
    # Act & Assert
    with pytest.raises(InvalidInputError):
        PsiSpec(b=0.0)


@pytest.mark.parametrize("variant", list(Variant))
def test_extension_matches_fresh_assembly(thomas_pattern, basis, variant):
    # Arrange
    pairs = _pairs(thomas_pattern, basis, ConstantIntensity(200.0))
    system = assemble_system(pairs, basis, K=3, variant=variant)

    # Act
    extended = extend_system(extend_system(system))
    fresh = assemble_system(pairs, basis, K=5, variant=variant)

    # Assert
    scale = np.abs(fresh.A).max()
    np.testing.assert_allclose(extended.A, fresh.A, rtol=1e-12, atol=1e-12 * scale)
    np.testing.assert_allclose(extended.b, fresh.b, rtol=1e-12, atol=1e-12 * np.abs(fresh.b).max())
    np.testing.assert_allclose(extended.records.rprime, fresh.records.rprime, rtol=1e-13)


def test_system_is_symmetric(thomas_pattern, basis):
    # Act
    system = assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=4)

    # Assert
    np.testing.assert_allclose(system.A, system.A.T, rtol=1e-14)
    assert np.all(np.linalg.eigvalsh(system.A) > 0)


def test_extend_beyond_capacity(thomas_pattern, basis):
    # Arrange
    system = assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=basis.k_max)

    # Act & Assert
    with pytest.raises(InvalidInputError):
        extend_system(system)


@pytest.mark.parametrize("K", [0, 9])
def test_assemble_rejects_bad_k(thomas_pattern, basis, K):
    # Arrange
    pairs = _pairs(thomas_pattern, basis, ConstantIntensity(200.0))

    # Act & Assert
    with pytest.raises(InvalidInputError):
        assemble_system(pairs, basis, K=K)


@pytest.mark.parametrize("c", [0.1, 1.0, 3.65, 10.0])
def test_constant_intensity_scale_does_not_change_beta(thomas_pattern, basis, c):
    # Act
    beta = solve_beta(assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=4)).beta
    scaled = solve_beta(assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0 * c)), basis, K=4)).beta

    # Assert
    np.testing.assert_allclose(scaled, beta, rtol=1e-12, atol=1e-12)


def test_pointwise_intensity_scale_does_not_change_beta(thomas_pattern, basis):
    # Arrange
    rng = np.random.default_rng(3)
    base = PointwiseIntensity(rng.uniform(150.0, 250.0, thomas_pattern.n))

    # Act
    beta = solve_beta(assemble_system(_pairs(thomas_pattern, basis, base), basis, K=3)).beta
    scaled = solve_beta(assemble_system(_pairs(thomas_pattern, basis, base.scaled(3.0)), basis, K=3)).beta

    # Assert
    np.testing.assert_allclose(scaled, beta, rtol=1e-12, atol=1e-12)


def test_fitted_curve_is_positive_and_clustered(thomas_pattern, basis):
    # Arrange
    r = np.linspace(0.0, basis.R, 50)

    # Act
    coeffs = solve_beta(assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=3))

    # Assert
    assert np.all(coeffs.g(r) > 0)
    assert coeffs.log_g(0.005) > coeffs.log_g(0.1)
    assert isinstance(eval_log_g(coeffs, 0.05), float)


def test_evaluation_outside_support(thomas_pattern, basis):
    # Arrange
    coeffs = solve_beta(assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=2))

    # Act & Assert
    with pytest.raises(InvalidInputError):
        eval_log_g(coeffs, basis.upper + 0.01)


def test_single_pair_system_is_singular(unit_window, basis):
    # Arrange
    pattern = PointPattern([0.4, 0.45], [0.5, 0.5], unit_window)

    # Act
    system = assemble_system(_pairs(pattern, basis, ConstantIntensity(2.0)), basis, K=3)

    # Assert
    assert condition_estimate(system.A) > 1e12
    with pytest.raises(SingularSystemError) as err:
        solve_beta(system)
    assert err.value.condition > 1e12


def test_empty_system_is_singular(unit_window, basis):
    # Arrange
    pattern = PointPattern([0.1, 0.9], [0.1, 0.9], unit_window)
    system = assemble_system(_pairs(pattern, basis, ConstantIntensity(2.0)), basis, K=2)

    # Act & Assert
    with pytest.raises(SingularSystemError):
        solve_beta(system)


@pytest.mark.parametrize("variant", list(Variant))
def test_sensitivity_is_positive_definite(thomas_pattern, basis, variant):
    # Arrange
    coeffs = solve_beta(
        assemble_system(_pairs(thomas_pattern, basis, ConstantIntensity(200.0)), basis, K=4, variant=variant)
    )

    # Act
    S = sensitivity(coeffs, lambda t: np.ones_like(t))

    # Assert
    np.testing.assert_allclose(S, S.T, rtol=1e-12)
    assert np.all(np.linalg.eigvalsh(S) > 0)


def test_residual_vanishes_for_poisson(unit_window):
    # Arrange
    replicates = [sim_poisson(unit_window, 200.0, RngSeed(5, stream)) for stream in range(20)]
    h = PsiTestFunction(PsiSpec(b=0.1))

    # Act
    estimate = variational_residual(
        replicates, h, lambda t: np.zeros_like(t), ResidualVariant.EQ6, ConstantIntensity(200.0)
    )

    # Assert
    assert estimate.replicates == 20
    assert estimate.lhs_mean == 0.0
    assert abs(estimate.difference) < 4.5 * estimate.difference_se
