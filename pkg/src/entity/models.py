from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.conf import messages
from src.core.exceptions import InvalidInputError, MissingIntensityError, WindowError


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class EstimatorKind(str, Enum):

    VSE = "vse"
    OSE = "ose"
    KDE = "kde"


class Variant(str, Enum):
    """Which of the two planar estimating equations builds the variational system."""

    EQ9_10 = "eq9-10"
    EQ11_12 = "eq11-12"


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        values = (self.x0, self.y0, self.x1, self.y1)
        if not all(np.isfinite(values)) or self.x1 <= self.x0 or self.y1 <= self.y0:
            raise WindowError(messages.WINDOW_DEGENERATE)

    @classmethod
    def square(cls, side: float) -> "Window":
        return cls(0.0, 0.0, float(side), float(side))

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def min_side(self) -> float:
        return min(self.width, self.height)

    def contains(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)


@dataclass(frozen=True, eq=False)
class PointPattern:
    """
    Points observed in a window, optionally with an intensity value per point.

    Attributes:
        x (np.ndarray): Abscissae.
        y (np.ndarray): Ordinates.
        window (Window): Observation window; every point lies inside it.
        intensity (np.ndarray | None): Per-point intensity values, strictly positive.
    """

    x: np.ndarray
    y: np.ndarray
    window: Window
    intensity: np.ndarray | None = None

    def __post_init__(self):
        x = _frozen_array(self.x).ravel()
        y = _frozen_array(self.y).ravel()
        if x.shape != y.shape or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidInputError(messages.PATTERN_VALUES)
        if not np.all(self.window.contains(x, y)):
            raise InvalidInputError(messages.POINT_OUTSIDE_WINDOW)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.intensity is not None:
            object.__setattr__(self, "intensity", _check_intensity(self.intensity, x.size))

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def with_intensity(self, values) -> "PointPattern":
        return PointPattern(self.x, self.y, self.window, values)


def _check_intensity(values, n: int) -> np.ndarray:
    values = _frozen_array(values).ravel()
    if values.size != n:
        raise MissingIntensityError(messages.INTENSITY_LENGTH)
    if np.any(np.isnan(values)):
        raise MissingIntensityError(messages.INTENSITY_MISSING)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise InvalidInputError(messages.INTENSITY_NOT_POSITIVE)
    return values


@dataclass(frozen=True)
class ConstantIntensity:
    value: float

    kind = "constant"

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value <= 0:
            raise InvalidInputError(messages.INTENSITY_NOT_POSITIVE)

    @classmethod
    def plugin(cls, pattern: PointPattern) -> "ConstantIntensity":
        """Plug-in estimate n / |W|."""
        return cls(pattern.n / pattern.window.area)

    def scaled(self, factor: float) -> "ConstantIntensity":
        return ConstantIntensity(self.value * factor)

    def at_points(self, n: int) -> np.ndarray:
        return np.full(n, float(self.value))


@dataclass(frozen=True, eq=False)
class IntensityGrid:
    """
    Intensity raster over a window, one value per cell centre.

    Attributes:
        window (Window): Covered window.
        values (np.ndarray): Array of shape (ny, nx); row index runs along y.
    """

    window: Window
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 2 or values.size == 0:
            raise InvalidInputError(messages.INTENSITY_MISSING)
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise InvalidInputError(messages.INTENSITY_NOT_POSITIVE)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def cell_area(self) -> float:
        ny, nx = self.shape
        return self.window.area / (nx * ny)

    def centres(self) -> tuple[np.ndarray, np.ndarray]:
        ny, nx = self.shape
        xs = self.window.x0 + (np.arange(nx) + 0.5) * self.window.width / nx
        ys = self.window.y0 + (np.arange(ny) + 0.5) * self.window.height / ny
        return xs, ys


@dataclass(frozen=True, eq=False)
class PointwiseIntensity:
    """Intensity known at the data points, optionally with a raster for window integrals."""

    values: np.ndarray
    grid: IntensityGrid | None = None

    kind = "column"

    def __post_init__(self):
        values = _frozen_array(self.values).ravel()
        if np.any(np.isnan(values)):
            raise MissingIntensityError(messages.INTENSITY_MISSING)
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise InvalidInputError(messages.INTENSITY_NOT_POSITIVE)
        object.__setattr__(self, "values", values)

    def scaled(self, factor: float) -> "PointwiseIntensity":
        grid = None
        if self.grid is not None:
            grid = IntensityGrid(self.grid.window, self.grid.values * factor)
        return PointwiseIntensity(self.values * factor, grid)

    def at_points(self, n: int) -> np.ndarray:
        if self.values.size != n:
            raise MissingIntensityError(messages.INTENSITY_LENGTH)
        return np.asarray(self.values)


IntensityModel = ConstantIntensity | PointwiseIntensity


@dataclass(frozen=True, eq=False)
class PairList:
    """
    Ordered point pairs within a distance band, sorted by (i, j).

    Both (i, j) and (j, i) are present with identical distance and edge weight.
    ``pair_id`` numbers the unordered pairs, so the two orientations share an id.
    """

    i: np.ndarray
    j: np.ndarray
    t: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    e: np.ndarray
    pair_id: np.ndarray
    r_lo: float
    r_hi: float
    n_points: int
    window: Window
    intensity: IntensityModel | None = None
    log_rho_i: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_rho_j: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def n_unordered(self) -> int:
        return int(self.pair_id.max()) + 1 if self.pair_id.size else 0

    def first_of_each(self) -> np.ndarray:
        """Row index of the (i < j) orientation of every unordered pair, ordered by pair id."""
        _, first = np.unique(self.pair_id, return_index=True)
        return first


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """
    Fourier-Bessel family on [0, R] shifted to start at r_min.

    Attributes:
        R (float): Range of the expansion.
        r_min (float): Offset of the expansion.
        k_max (int): Number of precomputed roots.
        roots (np.ndarray): Positive roots of J_nu, strictly increasing.
        norms (np.ndarray): Normalising constants sqrt(2) / (R J_{nu+1}(root)).
        nu (float): Bessel order (0 in the plane).
    """

    R: float
    r_min: float
    k_max: int
    roots: np.ndarray
    norms: np.ndarray
    nu: float = 0.0

    @property
    def upper(self) -> float:
        return self.r_min + self.R


@dataclass(frozen=True)
class PsiSpec:
    b: float

    def __post_init__(self):
        if not np.isfinite(self.b) or self.b <= 0:
            raise InvalidInputError(messages.PSI_SUPPORT)


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair; equal pairs give identical random streams."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([int(self.seed), int(self.stream)]))
