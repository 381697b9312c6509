"""Uniform grids, quadrature under the ``dω/2π`` measure, and the Fourier pair.

All spectral amplitudes live on a :class:`FrequencyGrid` and are integrated
with trapezoidal weights times ``step / 2π``.  Time-domain amplitudes live on
a :class:`TimeGrid` and use the plain ``dt`` measure.  The transform pair is

    φ(τ) = ∫ dω/2π f(ω) exp(-iωτ)

evaluated by a direct sum, so the two grids can be chosen independently.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_POINTS = 4097
GRID_POINTS_ENV = "ETPA_GRID_POINTS"
NORM_TOL = 1e-9

# rows of the phase matrix held in memory at once by the direct transform
_DFT_BLOCK = 256


class DimensionError(ValueError):
    """Sample array does not match its grid."""


class DegenerateAmplitudeError(ValueError):
    """Amplitude has zero norm and cannot be normalized."""


def default_points() -> int:
    """Default grid size, overridable through ``ETPA_GRID_POINTS``.

    Even values are bumped to the next odd number so the grid keeps a center
    sample.
    """
    raw = os.environ.get(GRID_POINTS_ENV)
    if not raw:
        return DEFAULT_POINTS
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{GRID_POINTS_ENV} must be an integer, got {raw!r}") from exc
    if n < 3:
        raise ValueError(f"{GRID_POINTS_ENV} must be >= 3, got {n}")
    return n if n % 2 else n + 1


def _check_points(n_points: int) -> None:
    if int(n_points) != n_points or n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"n_points must be an odd integer >= 3, got {n_points}")


def trapezoid_weights(n_points: int) -> np.ndarray:
    w = np.ones(n_points)
    w[0] = w[-1] = 0.5
    return w


@dataclass(frozen=True)
class FrequencyGrid:
    """Angular frequencies ``center + k*step`` for ``k`` in ``[-(n-1)/2, (n-1)/2]``."""

    center: float
    step: float
    n_points: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        _check_points(self.n_points)

    @classmethod
    def spanning(cls, halfwidth: float, n_points: Optional[int] = None,
                 center: float = 0.0) -> "FrequencyGrid":
        """Grid whose end samples sit exactly at ``center ± halfwidth``."""
        n = default_points() if n_points is None else n_points
        _check_points(n)
        return cls(center=center, step=halfwidth / ((n - 1) // 2), n_points=n)

    @property
    def half_count(self) -> int:
        return (self.n_points - 1) // 2

    @property
    def halfwidth(self) -> float:
        return self.half_count * self.step

    @property
    def offsets(self) -> np.ndarray:
        """Detunings from the grid center."""
        return np.arange(-self.half_count, self.half_count + 1) * self.step

    @property
    def samples(self) -> np.ndarray:
        return self.center + self.offsets

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights for the ``dω/2π`` measure."""
        return trapezoid_weights(self.n_points) * (self.step / TWO_PI)

    def refine(self) -> "FrequencyGrid":
        """Same span, half the step."""
        return FrequencyGrid(self.center, self.step / 2, 2 * self.n_points - 1)


@dataclass(frozen=True)
class TimeGrid:
    """Times ``k*step`` symmetric about zero."""

    step: float
    n_points: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        _check_points(self.n_points)

    @classmethod
    def spanning(cls, halfwidth: float, n_points: Optional[int] = None) -> "TimeGrid":
        n = default_points() if n_points is None else n_points
        _check_points(n)
        return cls(step=halfwidth / ((n - 1) // 2), n_points=n)

    @property
    def half_count(self) -> int:
        return (self.n_points - 1) // 2

    @property
    def halfwidth(self) -> float:
        return self.half_count * self.step

    @property
    def samples(self) -> np.ndarray:
        return np.arange(-self.half_count, self.half_count + 1) * self.step

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_points) * self.step


def _frozen(values, n_points: int, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1 or arr.shape[0] != n_points:
        raise DimensionError(
            f"expected {n_points} samples, got array of shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralAmplitude1D:
    """Complex amplitude samples on a frequency grid.

    ``profile`` optionally keeps the analytic function the samples came from
    (already including any normalization constant), so that 2D constructions
    can evaluate the amplitude off-grid without interpolation.  ``support``
    is the half-width of the interval outside of which the amplitude vanishes,
    when known.
    """

    grid: FrequencyGrid
    values: np.ndarray
    normalized: bool = False
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    support: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.n_points))
        if self.normalized and abs(self.norm_sq() - 1.0) > NORM_TOL:
            raise ValueError(f"amplitude tagged normalized has norm {self.norm_sq():.12g}")

    def norm_sq(self) -> float:
        return float(integrate_freq(np.abs(self.values) ** 2, self.grid))

    def sample(self, offsets: np.ndarray) -> np.ndarray:
        """Evaluate at detunings from the grid center.

        Uses the stored profile when there is one, otherwise linear
        interpolation of the samples with zero outside the grid.
        """
        offsets = np.asarray(offsets, dtype=float)
        if self.profile is not None:
            return np.asarray(self.profile(offsets), dtype=complex)
        x = self.grid.offsets
        re = np.interp(offsets, x, self.values.real, left=0.0, right=0.0)
        im = np.interp(offsets, x, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im

    def scaled(self, factor: complex, normalized: bool = False) -> "SpectralAmplitude1D":
        profile = None
        if self.profile is not None:
            base = self.profile
            profile = lambda x: factor * base(x)  # noqa: E731
        return SpectralAmplitude1D(self.grid, self.values * factor, normalized, profile,
                                   self.support, self.label)


@dataclass(frozen=True, eq=False)
class TemporalAmplitude1D:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.n_points))

    def norm_sq(self) -> float:
        """``∫ dt |φ|²``."""
        return float(np.sum(self.grid.weights * np.abs(self.values) ** 2))


Grid = Union[FrequencyGrid, TimeGrid]


def integrate_freq(f, grid: Optional[FrequencyGrid] = None):
    """Trapezoidal ``∫ dω/2π f(ω)``.

    ``f`` is a :class:`SpectralAmplitude1D` or a sample array, in which case
    ``grid`` is required.  Real input gives a real result.
    """
    if isinstance(f, SpectralAmplitude1D):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise TypeError("grid is required when integrating raw samples")
        values = np.asarray(f)
    if values.ndim != 1 or values.shape[0] != grid.n_points:
        raise DimensionError(
            f"expected {grid.n_points} samples, got array of shape {values.shape}")
    total = np.dot(grid.weights, values)
    return complex(total) if np.iscomplexobj(total) else float(total)


def normalize(f: SpectralAmplitude1D) -> SpectralAmplitude1D:
    """Return a copy of ``f`` rescaled so that ``∫ dω/2π |f|² = 1``."""
    norm = f.norm_sq()
    if not norm > 0:
        raise DegenerateAmplitudeError("cannot normalize an amplitude with zero norm")
    return f.scaled(1.0 / math.sqrt(norm), normalized=True)


def to_time_domain(f: SpectralAmplitude1D, tgrid: TimeGrid) -> TemporalAmplitude1D:
    """``φ(τ) = ∫ dω/2π f(ω) exp(-iωτ)`` by direct summation.

    ω is the absolute grid frequency, so amplitudes centered at zero are
    transformed in the rotating frame.
    """
    weighted = f.grid.weights * f.values
    omega = f.grid.samples
    tau = tgrid.samples
    out = np.empty(tau.shape[0], dtype=complex)
    for start in range(0, tau.shape[0], _DFT_BLOCK):
        block = tau[start:start + _DFT_BLOCK]
        out[start:start + _DFT_BLOCK] = np.exp(-1j * np.outer(block, omega)) @ weighted
    return TemporalAmplitude1D(tgrid, out)
