"""
Point-process samplers and theoretical pair correlation functions.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special, stats
from scipy.integrate import quad

from src.conf import constants, messages
from src.core.bessel import bessel_j01, bessel_zeros
from src.core.exceptions import ConvergenceError, InvalidInputError
from src.core.quadrature import gauss_legendre
from src.entity.models import PointPattern, RngSeed, Window
from src.schemas.simulation import ModelKind, ModelSpec

logger = logging.getLogger(__name__)

_EULER_LEVELS = 16


@dataclass(frozen=True)
class GaussianKernel:
    """Isotropic Gaussian displacement with standard deviation omega per coordinate."""

    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidInputError(messages.KERNEL_INVALID)

    def fourier(self, k):
        return np.exp(-0.5 * (self.omega * np.asarray(k)) ** 2)

    def margin(self) -> float:
        return constants.DILATION_SIGMAS * self.omega

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(scale=self.omega, size=(n, 2))


@dataclass(frozen=True)
class VarianceGammaKernel:
    """
    Gaussian scale mixture sqrt(V) Z with V ~ Gamma(shape nu + 1, scale 2 eta^2).

    Its Fourier transform is (1 + eta^2 k^2)^-(nu + 1).
    """

    eta: float
    nu: float

    def __post_init__(self):
        if not self.eta > 0 or not self.nu > -0.5:
            raise InvalidInputError(messages.KERNEL_INVALID)

    @property
    def shape(self) -> float:
        return self.nu + 1.0

    @property
    def scale(self) -> float:
        return 2.0 * self.eta**2

    def fourier(self, k):
        return (1.0 + (self.eta * np.asarray(k)) ** 2) ** (-self.shape)

    def margin(self) -> float:
        variance = stats.gamma(self.shape, scale=self.scale).ppf(1.0 - constants.DISPERSAL_TAIL_MASS)
        return constants.DILATION_SIGMAS * math.sqrt(variance)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        variance = rng.gamma(self.shape, self.scale, size=n)
        return np.sqrt(variance)[:, None] * rng.standard_normal((n, 2))


DispersalKernel = GaussianKernel | VarianceGammaKernel


def kernel_for(model: ModelSpec) -> DispersalKernel:
    if model.kind == ModelKind.THOMAS:
        return GaussianKernel(model.omega)
    if model.kind == ModelKind.VARIANCE_GAMMA:
        return VarianceGammaKernel(model.omega, model.nu)
    raise InvalidInputError(messages.NO_SAMPLER.format(kind=model.kind.value))


def _uniform(rng: np.random.Generator, window: Window, n: int) -> tuple[np.ndarray, np.ndarray]:
    return rng.uniform(window.x0, window.x1, n), rng.uniform(window.y0, window.y1, n)


def sim_poisson(window: Window, rho: float, seed: RngSeed) -> PointPattern:
    """Homogeneous Poisson process: N ~ Poisson(rho |W|), points i.i.d. uniform."""
    if not rho > 0:
        raise InvalidInputError(messages.INTENSITY_NOT_POSITIVE)
    rng = seed.generator()
    x, y = _uniform(rng, window, rng.poisson(rho * window.area))
    return PointPattern(x, y, window)


def sim_neyman_scott(
    window: Window, kappa: float, mu: float, kernel: DispersalKernel, seed: RngSeed
) -> PointPattern:
    """
    Neyman-Scott cluster process.

    Poisson(kappa) parents are drawn on the window dilated by the kernel margin,
    each parent gets Poisson(mu) offspring displaced by the kernel, and offspring
    outside the window are discarded.

    Args:
        window (Window): Observation window.
        kappa (float): Parent intensity.
        mu (float): Mean number of offspring per parent.
        kernel (DispersalKernel): Displacement distribution.
        seed (RngSeed): Random stream.

    Returns:
        PointPattern: Offspring inside the window.
    """
    if not (kappa > 0 and mu > 0):
        raise InvalidInputError(messages.KERNEL_INVALID)
    rng = seed.generator()
    margin = kernel.margin()
    dilated = Window(window.x0 - margin, window.y0 - margin, window.x1 + margin, window.y1 + margin)
    px, py = _uniform(rng, dilated, rng.poisson(kappa * dilated.area))
    counts = rng.poisson(mu, px.size)
    total = int(counts.sum())
    displacement = kernel.sample(rng, total)
    x = np.repeat(px, counts) + displacement[:, 0]
    y = np.repeat(py, counts) + displacement[:, 1]
    inside = window.contains(x, y)
    logger.debug("%d parents, %d offspring, %d inside the window", px.size, total, int(inside.sum()))
    return PointPattern(x[inside], y[inside], window)


def simulate(model: ModelSpec, seed: RngSeed) -> PointPattern:
    """Draw one realisation of a model on its window."""
    window = model.window.to_entity()
    if model.kind == ModelKind.POISSON:
        return sim_poisson(window, model.intensity, seed)
    return sim_neyman_scott(window, model.kappa, model.mu, kernel_for(model), seed)


def _vg_terms(model: ModelSpec, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """x^p K_p(x) and x^p K_{p-1}(x) at x = r / eta, and the pcf prefactor, p = 2 nu + 1."""
    eta, p = model.omega, 2.0 * model.nu + 1.0
    x = r / eta
    prefactor = 1.0 / (2.0 * math.pi * model.kappa * eta**2 * 2.0**p * special.gamma(p + 1.0))
    safe = np.where(x > 0, x, 1.0)
    value = np.where(x > 0, safe**p * special.kv(p, safe), 2.0 ** (p - 1.0) * special.gamma(p))
    # x^p K_{p-1}(x) behaves like 2^{-p} Gamma(1-p) x^{2p-1} near 0 when p < 1
    if p < 0.5:
        limit = np.inf
    elif p == 0.5:
        limit = math.sqrt(0.5 * math.pi)
    else:
        limit = 0.0
    lower = np.where(x > 0, safe**p * special.kv(p - 1.0, safe), limit)
    return value, lower, prefactor


def true_pcf(model: ModelSpec, r):
    """
    Theoretical pair correlation function g0(r).

    poisson: 1; thomas: 1 + exp(-r^2 / 4 omega^2) / (4 pi kappa omega^2);
    dpp-exponential: 1 - exp(-2 r / alpha); variance-gamma:
    1 + (r/eta)^p K_p(r/eta) / (2 pi kappa eta^2 2^p Gamma(p + 1)) with p = 2 nu + 1,
    the self-convolution of the dispersal density divided by kappa.
    """
    r = np.asarray(r, dtype=float)
    if model.kind == ModelKind.POISSON:
        g = np.ones_like(r)
    elif model.kind == ModelKind.THOMAS:
        omega = model.omega
        g = 1.0 + np.exp(-(r**2) / (4.0 * omega**2)) / (4.0 * math.pi * model.kappa * omega**2)
    elif model.kind == ModelKind.DPP_EXPONENTIAL:
        g = 1.0 - np.exp(-2.0 * r / model.alpha)
    else:
        value, _, prefactor = _vg_terms(model, r)
        g = 1.0 + prefactor * value
    return float(g) if g.ndim == 0 else g


def true_log_pcf(model: ModelSpec, r):
    with np.errstate(divide="ignore"):
        return np.log(true_pcf(model, r))


def true_log_pcf_derivative(model: ModelSpec, r):
    """(log g0)'(r) in closed form."""
    r = np.asarray(r, dtype=float)
    g = np.asarray(true_pcf(model, r))
    if model.kind == ModelKind.POISSON:
        slope = np.zeros_like(r)
    elif model.kind == ModelKind.THOMAS:
        omega = model.omega
        bump = np.exp(-(r**2) / (4.0 * omega**2)) / (4.0 * math.pi * model.kappa * omega**2)
        slope = -bump * r / (2.0 * omega**2) / g
    elif model.kind == ModelKind.DPP_EXPONENTIAL:
        with np.errstate(divide="ignore"):
            slope = (2.0 / model.alpha) / np.expm1(2.0 * r / model.alpha)
    else:
        _, lower, prefactor = _vg_terms(model, r)
        slope = -prefactor * lower / model.omega / g
    return float(slope) if slope.ndim == 0 else slope


@lru_cache(maxsize=4)
def _j0_roots(count: int) -> np.ndarray:
    roots = bessel_zeros(0, count)
    roots.setflags(write=False)
    return roots


def _self_convolution(kernel: DispersalKernel, r: float) -> float:
    """(f * f)(r) = (1 / 2 pi) int_0^inf fhat(k)^2 J0(k r) k dk."""
    if r == 0:
        value, _ = quad(lambda k: float(kernel.fourier(k)) ** 2 * k, 0.0, np.inf, limit=200)
        return value / (2.0 * math.pi)

    edges = np.concatenate([[0.0], _j0_roots(constants.HANKEL_INTERVALS) / r])
    nodes, weights = gauss_legendre(constants.HANKEL_NODES, -1.0, 1.0)
    half = 0.5 * np.diff(edges)
    k = edges[:-1, None] + half[:, None] * (nodes[None, :] + 1.0)
    j0, _ = bessel_j01(k * r)
    pieces = half * np.sum(weights * kernel.fourier(k) ** 2 * j0 * k, axis=1)
    level = np.cumsum(pieces)[-_EULER_LEVELS:]
    previous = level[-1]
    while level.size > 1:
        previous = level[-1]
        level = 0.5 * (level[:-1] + level[1:])
    value = float(level[0])
    change = abs(value - previous)
    if change > constants.HANKEL_TOLERANCE * max(1.0, abs(value)):
        raise ConvergenceError(messages.QUADRATURE_DIVERGED.format(change=change))
    return value / (2.0 * math.pi)


def pcf_convolution_oracle(kernel: DispersalKernel, kappa: float, r):
    """
    Neyman-Scott pair correlation 1 + (f * f)(r) / kappa by a numerical Hankel transform.

    The oscillatory integral is split at the zeros of J0(k r), each piece integrated
    by Gauss-Legendre, and the alternating partial sums accelerated by repeated averaging.

    Raises:
        ConvergenceError: If the accelerated partial sums have not settled.
    """
    r = np.asarray(r, dtype=float)
    values = np.array([_self_convolution(kernel, float(radius)) for radius in r.ravel()])
    g = 1.0 + values.reshape(r.shape) / kappa
    return float(g) if g.ndim == 0 else g
