"""
Orthonormal Fourier-Bessel basis on [0, R] with weight s (planar case, order 0).

phi_k(s) = sqrt(2) / (R J1(alpha_k)) * J0(alpha_k s / R), where alpha_k is the k-th
positive root of J0.
"""
import math
from functools import lru_cache
from typing import Callable

import numpy as np

from src.conf import constants, messages
from src.conf.config import settings
from src.core.bessel import bessel_j01, bessel_j1_over_x, bessel_zeros
from src.core.exceptions import InvalidInputError
from src.core.quadrature import gauss_legendre
from src.entity.models import BasisSpec

_SUPPORT_SLACK = 1e-12


@lru_cache(maxsize=8)
def _roots(k_max: int) -> tuple[float, ...]:
    return tuple(bessel_zeros(constants.BASIS_ORDER, k_max))


def build_basis(
    R: float | None = None,
    r_min: float | None = None,
    k_max: int | None = None,
    nu: float = constants.BASIS_ORDER,
) -> BasisSpec:
    """
    Precompute roots and normalising constants of the basis.

    Args:
        R (float | None): Range; defaults to ``settings.SUPPORT_R``.
        r_min (float | None): Offset; defaults to ``settings.SUPPORT_R_MIN``.
        k_max (int | None): Capacity; defaults to ``settings.BASIS_K_MAX``.
        nu (float): Bessel order, only 0 is supported.

    Returns:
        BasisSpec: Immutable basis description.
    """
    R = settings.SUPPORT_R if R is None else float(R)
    r_min = settings.SUPPORT_R_MIN if r_min is None else float(r_min)
    k_max = settings.BASIS_K_MAX if k_max is None else int(k_max)
    if nu != constants.BASIS_ORDER:
        raise InvalidInputError(messages.BASIS_ORDER_UNSUPPORTED)
    if not (R > 0 and r_min >= 0 and k_max >= 1) or not math.isfinite(R + r_min):
        raise InvalidInputError(messages.BASIS_RANGE_INVALID)

    roots = np.array(_roots(k_max))
    _, j1 = bessel_j01(roots)
    norms = math.sqrt(2.0) / (R * j1)
    roots.setflags(write=False)
    norms.setflags(write=False)
    return BasisSpec(R=R, r_min=r_min, k_max=k_max, roots=roots, norms=norms, nu=nu)


def _check_count(spec: BasisSpec, K: int) -> None:
    if not 1 <= K <= spec.k_max:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)


def support_argument(spec: BasisSpec, t, message: str = messages.PAIR_OUTSIDE_SUPPORT) -> np.ndarray:
    """
    Map distances t to basis arguments s = t - r_min, clipped to [0, R].

    Raises:
        InvalidInputError: If any s lies outside [0, R] by more than a relative 1e-12.
    """
    s = np.asarray(t, dtype=float) - spec.r_min
    slack = _SUPPORT_SLACK * spec.R
    if np.any(s < -slack) or np.any(s > spec.R + slack) or np.any(np.isnan(s)):
        raise InvalidInputError(message)
    return np.clip(s, 0.0, spec.R)


def fb_columns(spec: BasisSpec, s, start: int, stop: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, first and second derivatives of phi_{start+1..stop} at s, each of shape (len(s), stop - start)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    scale = spec.roots[start:stop] / spec.R
    norms = spec.norms[start:stop]
    x = s[:, None] * scale[None, :]
    j0, j1 = bessel_j01(x)
    value = norms * j0
    first = -norms * scale * j1
    second = norms * scale**2 * (bessel_j1_over_x(x, j1) - j0)
    return value, first, second


def fb_matrix(spec: BasisSpec, K: int, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi_k, phi_k' and phi_k'' for k = 1..K at every s in [0, R]."""
    _check_count(spec, K)
    return fb_columns(spec, s, 0, K)


def fb_eval(spec: BasisSpec, k: int, s):
    """
    Evaluate phi_k and its first two derivatives.

    Args:
        spec (BasisSpec): Basis.
        k (int): One-based index, 1 <= k <= K_max.
        s (float | array-like): Arguments in [0, R].

    Returns:
        tuple: (phi_k(s), phi_k'(s), phi_k''(s)), floats for scalar s.

    Raises:
        InvalidInputError: If k is out of range or s lies outside [0, R].
    """
    _check_count(spec, k)
    scalar = np.ndim(s) == 0
    s = support_argument(spec, np.asarray(s, dtype=float) + spec.r_min, messages.BASIS_SUPPORT)
    value, first, second = (column[:, 0] for column in fb_columns(spec, s, k - 1, k))
    if scalar:
        return float(value[0]), float(first[0]), float(second[0])
    return value, first, second


def gram_matrix(spec: BasisSpec, K: int, nodes: int | None = None) -> np.ndarray:
    """Quadrature approximation of the Gram matrix of phi_1..phi_K under the weight s."""
    s, weights = gauss_legendre(nodes or settings.SENSITIVITY_NODES, 0.0, spec.R)
    value, _, _ = fb_matrix(spec, K, s)
    return value.T @ (value * (weights * s)[:, None])


def constant_projection(spec: BasisSpec, K: int) -> np.ndarray:
    """Exact coefficients of the constant 1: integral of phi_k(s) s over [0, R] equals sqrt(2) R / alpha_k."""
    _check_count(spec, K)
    return math.sqrt(2.0) * spec.R / spec.roots[:K]


def project(spec: BasisSpec, K: int, func: Callable[[np.ndarray], np.ndarray], nodes: int | None = None) -> np.ndarray:
    """Coefficients of func(r) on phi_1..phi_K, r = s + r_min, by Gauss-Legendre quadrature."""
    s, weights = gauss_legendre(nodes or settings.SENSITIVITY_NODES, 0.0, spec.R)
    value, _, _ = fb_matrix(spec, K, s)
    return value.T @ (weights * s * func(s + spec.r_min))


def project_log_pcf(spec: BasisSpec, K: int, pcf: Callable[[np.ndarray], np.ndarray], nodes: int | None = None) -> np.ndarray:
    """Projection of log g0 on the first K basis functions; the coefficients a VSE fit targets."""
    return project(spec, K, lambda r: np.log(pcf(r)), nodes)


def expand(spec: BasisSpec, coefficients: np.ndarray, r, message: str = messages.DISTANCE_OUT_OF_RANGE) -> np.ndarray:
    """Evaluate sum_k c_k phi_k(r - r_min) on [r_min, r_min + R]."""
    coefficients = np.asarray(coefficients, dtype=float)
    s = support_argument(spec, r, message)
    value, _, _ = fb_columns(spec, np.ravel(s), 0, coefficients.size)
    return (value @ coefficients).reshape(np.shape(s))
