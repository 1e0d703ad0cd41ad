"""
Bessel functions of the first kind of orders 0 and 1 and the positive roots of J0.

Three evaluation regimes are stitched together:

* ``x <= BESSEL_SERIES_LIMIT``: the ascending power series;
* ``x <= BESSEL_ASYMPTOTIC_LIMIT``: Miller's backward recurrence normalised with
  ``J0 + 2 * (J2 + J4 + ...) = 1``;
* larger ``x``: Hankel's asymptotic expansion.

All three are accurate to a few units of 1e-15 in absolute terms.
"""
import math

import numpy as np

from src.conf import constants, messages
from src.core.exceptions import ConvergenceError

_SERIES_TERMS = 30
_ASYMPTOTIC_TERMS = 30
_MILLER_START = 2 * ((int(1.5 * constants.BESSEL_ASYMPTOTIC_LIMIT) + 40) // 2)


def _series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = -0.25 * x * x
    term0 = np.ones_like(x)
    term1 = 0.5 * x
    j0 = term0.copy()
    j1 = term1.copy()
    for m in range(1, _SERIES_TERMS):
        term0 = term0 * q / (m * m)
        term1 = term1 * q / (m * (m + 1))
        j0 += term0
        j1 += term1
    return j0, j1


def _miller(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    upper = np.zeros_like(x)
    current = np.ones_like(x)
    norm = 2.0 * current
    for k in range(_MILLER_START, 0, -1):
        lower = (2.0 * k / x) * current - upper
        upper, current = current, lower
        if (k - 1) % 2 == 0 and k > 1:
            norm += 2.0 * current
        big = np.abs(current) > constants.BESSEL_RESCALE
        if big.any():
            current[big] /= constants.BESSEL_RESCALE
            upper[big] /= constants.BESSEL_RESCALE
            norm[big] /= constants.BESSEL_RESCALE
    norm += current
    return current / norm, upper / norm


def _hankel(order: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * order * order
    term = np.ones_like(x)
    p = term.copy()
    q = np.zeros_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
    chi = x - (0.5 * order + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j01(x) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate J0 and J1 together.

    Args:
        x (float | array-like): Arguments; negative values use the parity of J0 (even) and J1 (odd).

    Returns:
        tuple[np.ndarray, np.ndarray]: ``(J0(x), J1(x))`` with the shape of ``x``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = np.abs(x.ravel())
    j0 = np.empty_like(flat)
    j1 = np.empty_like(flat)

    small = flat <= constants.BESSEL_SERIES_LIMIT
    large = flat > constants.BESSEL_ASYMPTOTIC_LIMIT
    middle = ~small & ~large
    if small.any():
        j0[small], j1[small] = _series(flat[small])
    if middle.any():
        j0[middle], j1[middle] = _miller(flat[middle])
    if large.any():
        j0[large] = _hankel(0, flat[large])
        j1[large] = _hankel(1, flat[large])

    j1 = np.where(x.ravel() < 0, -j1, j1)
    return j0.reshape(shape), j1.reshape(shape)


def bessel_j(order: int, x):
    """
    Bessel function of the first kind J0 or J1.

    Args:
        order (int): 0 or 1.
        x (float | array-like): Argument(s).

    Returns:
        float | np.ndarray: J_order(x), a float for scalar input.
    """
    if order not in (0, 1):
        raise ValueError(f"Unsupported Bessel order {order}")
    j0, j1 = bessel_j01(x)
    value = j0 if order == 0 else j1
    return float(value) if np.ndim(value) == 0 else value


def bessel_j_derivative(order: int, x):
    """Derivative of J0 or J1: J0' = -J1 and J1' = J0 - J1/x (limit 1/2 at x = 0)."""
    if order not in (0, 1):
        raise ValueError(f"Unsupported Bessel order {order}")
    x_arr = np.asarray(x, dtype=float)
    j0, j1 = bessel_j01(x_arr)
    if order == 0:
        value = -j1
    else:
        value = j0 - bessel_j1_over_x(x_arr, j1)
    return float(value) if np.ndim(value) == 0 else value


def bessel_j1_over_x(x: np.ndarray, j1: np.ndarray | None = None) -> np.ndarray:
    """J1(x)/x with the removable singularity at 0 replaced by its series 1/2 - x^2/16."""
    x = np.asarray(x, dtype=float)
    if j1 is None:
        _, j1 = bessel_j01(x)
    tiny = np.abs(x) < 1e-6
    safe = np.where(tiny, 1.0, x)
    return np.where(tiny, 0.5 - x * x / 16.0, j1 / safe)


def mcmahon_zero(k: int) -> float:
    """McMahon's large-k expansion of the k-th positive root of J0."""
    beta = (k - 0.25) * math.pi
    return beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta**3)


def bessel_zero(nu: float, k: int) -> float:
    """
    k-th positive root of J_nu, refined by Newton's method from McMahon's seed.

    Args:
        nu (float): Order; only 0 is supported.
        k (int): Root index, k >= 1.

    Returns:
        float: The root alpha_{nu,k}.

    Raises:
        ConvergenceError: If Newton does not converge within NEWTON_MAX_ITERATIONS steps.
    """
    if nu != 0:
        raise ValueError(messages.BASIS_ORDER_UNSUPPORTED)
    if k < 1:
        raise ValueError(messages.BASIS_INDEX_OUT_OF_RANGE)
    x = mcmahon_zero(k)
    for _ in range(constants.NEWTON_MAX_ITERATIONS):
        j0, j1 = bessel_j01(x)
        step = float(j0) / float(j1)
        x += step
        if abs(step) <= constants.NEWTON_TOLERANCE * x:
            return x
    raise ConvergenceError(messages.NEWTON_DIVERGED.format(k=k))


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """The first ``count`` positive roots of J_nu as an array."""
    return np.array([bessel_zero(nu, k) for k in range(1, count + 1)])
