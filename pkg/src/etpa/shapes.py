"""Amplitude shape library.

Each shape is a real function of detuning parameterized by one width:

* ``gaussian``: ``exp(-x²/4w²)``, so ``|f|²`` has rms width ``w``.
* ``box``: ``1`` on the closed interval ``|x| <= w``.
* ``sinc``: ``sin(x/w)/(x/w)``, first zero at ``x = πw``.

New shapes can be added to :data:`SHAPES`.
"""
from __future__ import annotations

from typing import Callable, Dict, Optional

import numpy as np

from .spectral import FrequencyGrid, SpectralAmplitude1D, normalize

# relative slack when deciding that a sample sits on a box edge
_EDGE_RTOL = 1e-12


def gaussian(x, width):
    x = np.asarray(x, dtype=float)
    return np.exp(-(x * x) / (4.0 * width * width))


def box(x, width):
    x = np.asarray(x, dtype=float)
    return (np.abs(x) <= width * (1 + _EDGE_RTOL)).astype(float)


def sinc(x, width):
    return np.sinc(np.asarray(x, dtype=float) / (np.pi * width))


SHAPES: Dict[str, Callable] = {"gaussian": gaussian, "box": box, "sinc": sinc}


def shape_function(name: str) -> Callable:
    try:
        return SHAPES[name]
    except KeyError:
        raise ValueError(f"unknown shape {name!r}; choose from {sorted(SHAPES)}") from None


def sample_amplitude(name: str, width: float, grid: FrequencyGrid,
                     support: Optional[float] = None,
                     normalized: bool = True) -> SpectralAmplitude1D:
    """Sample a library shape on ``grid`` (offsets from the grid center).

    ``support`` truncates the shape to ``|x| <= support``; a box is always
    supported on its own width.
    """
    fn = shape_function(name)
    if name == "box":
        support = width if support is None else min(support, width)

    if support is None:
        def profile(x):
            return fn(x, width)
    else:
        def profile(x):
            return fn(x, width) * box(x, support)

    amp = SpectralAmplitude1D(grid, profile(grid.offsets), profile=profile,
                              support=support, label=name)
    return normalize(amp) if normalized else amp


def support_grid(omega_cap: float, n_points: Optional[int] = None) -> FrequencyGrid:
    """Grid covering exactly ``[-Ω, Ω]``.

    With trapezoidal end weights this makes the box normalization and the
    box overlap integral exact on the grid.
    """
    return FrequencyGrid.spanning(omega_cap, n_points)
