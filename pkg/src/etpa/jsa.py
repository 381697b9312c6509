"""Joint spectral amplitudes of a photon pair on a square frequency grid.

The two-photon amplitude is stored as an ``n × n`` matrix ``Ψ[i, j] =
Ψ(ω_i, ω̃_j)`` with both axes on the same :class:`FrequencyGrid` centered at
the pair center frequency ω₀.  The normalization is

    ∫∫ dω dω̃ / 4π² |Ψ|² = 1

with trapezoidal weights on both axes.

In the factored model ``Ψ = ψ_N(ω + ω̃ - 2ω₀) ψ_B((ω - ω̃)/2)`` the narrow
factor is sampled at multiples of the grid step and the broad factor at
multiples of half the step, so a JSA on step ``h`` wants ``ψ_N`` on step
``h`` and ``ψ_B`` on step ``h/2`` (see :func:`factor_grids`).  Other inputs
are evaluated through their stored profile or by linear interpolation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .shapes import sample_amplitude
from .spectral import DegenerateAmplitudeError, FrequencyGrid, SpectralAmplitude1D

NORM_TOL = 1e-6
SYMMETRY_TOL = 1e-9
KINDS = ("raw", "symmetrized", "factored")
MAX_EXPORT_POINTS = 2 ** 14

# grid span needed around the narrow factor, in units of its rms width
_NARROW_SPAN = 8.0
# grid steps per line half-width; trapezoid error on a Lorentzian ~ exp(-2π·LINE_SAMPLES)
LINE_SAMPLES = 3.0


class SymmetryError(ValueError):
    """Broad factor is not even, or a matrix is not exchange symmetric."""


class TruncationError(ValueError):
    """Grid too small to hold the requested amplitude."""


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    grid: FrequencyGrid
    values: np.ndarray
    kind: str = "raw"
    normalized: bool = False
    factors: Optional[Tuple[SpectralAmplitude1D, SpectralAmplitude1D]] = field(
        default=None, repr=False)
    entanglement_ratio: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        arr = np.array(self.values, dtype=complex)
        n = self.grid.n_points
        if arr.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.normalized and abs(self.norm_sq() - 1.0) > NORM_TOL:
            raise ValueError(f"JSA tagged normalized has norm {self.norm_sq():.9g}")
        if self.kind != "raw" and not self.is_symmetric():
            raise SymmetryError(f"a {self.kind} JSA must equal its transpose")

    @property
    def omega_0(self) -> float:
        return self.grid.center

    @property
    def weights(self) -> np.ndarray:
        w = self.grid.weights
        return np.outer(w, w)

    def norm_sq(self) -> float:
        return float(np.sum(self.weights * np.abs(self.values) ** 2))

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        v = self.values
        scale = max(float(np.max(np.abs(v))), 1e-300)
        return float(np.max(np.abs(v - v.T))) <= tol * scale


def _renormalized(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    w = grid.weights
    norm = float(np.sum(np.outer(w, w) * np.abs(values) ** 2))
    if not norm > 0:
        raise DegenerateAmplitudeError("JSA has zero norm on this grid")
    return values / math.sqrt(norm)


def factor_grids(grid: FrequencyGrid) -> Tuple[FrequencyGrid, FrequencyGrid]:
    """1D grids on which ``ψ_N`` and ``ψ_B`` are sampled exactly by a JSA on ``grid``."""
    n = grid.n_points
    return (FrequencyGrid(0.0, grid.step, 2 * n - 1),
            FrequencyGrid(0.0, grid.step / 2, 2 * n - 1))


def _check_normalized(amp: SpectralAmplitude1D, name: str) -> None:
    if abs(amp.norm_sq() - 1.0) > NORM_TOL:
        raise ValueError(f"{name} must be normalized (norm={amp.norm_sq():.9g})")


def _even_part(samples: np.ndarray, name: str) -> np.ndarray:
    mirrored = samples[::-1]
    scale = max(float(np.max(np.abs(samples))), 1e-300)
    if float(np.max(np.abs(samples - mirrored))) > SYMMETRY_TOL * scale:
        raise SymmetryError(f"{name} must be even: psi_B(-x) = psi_B(x)")
    # exact symmetrization of an already-even array only removes rounding
    return 0.5 * (samples + mirrored)


def make_factored_jsa(psi_N: SpectralAmplitude1D, psi_B: SpectralAmplitude1D,
                      omega_0: float, grid: FrequencyGrid) -> JointSpectralAmplitude:
    """``Ψ(ω, ω̃) = ψ_N(ω + ω̃ - 2ω₀) ψ_B((ω - ω̃)/2)``, renormalized on the grid."""
    if not math.isclose(grid.center, omega_0, rel_tol=1e-12, abs_tol=1e-12 * grid.step):
        raise ValueError(f"grid center {grid.center} differs from omega_0 {omega_0}")
    _check_normalized(psi_N, "psi_N")
    _check_normalized(psi_B, "psi_B")
    if psi_B.grid.center != 0.0:
        raise ValueError("psi_B must be given in detuning (grid centered at zero)")
    _even_part(psi_B.values, "psi_B")

    n, h = grid.n_points, grid.step
    m = np.arange(-(n - 1), n)
    narrow = psi_N.sample(m * h)
    broad = _even_part(psi_B.sample(m * h / 2), "psi_B")

    idx = np.arange(n)
    total = idx[:, None] + idx[None, :]
    diff = idx[:, None] - idx[None, :] + (n - 1)
    values = _renormalized(narrow[total] * broad[diff], grid)
    return JointSpectralAmplitude(grid, values, kind="factored", normalized=True,
                                  factors=(psi_N, psi_B))


def make_spdc_jsa(pump_bandwidth: float, phasematch_bandwidth: float,
                  omega_0: float, grid: FrequencyGrid, pump_shape: str = "gaussian",
                  pm_shape: str = "gaussian") -> JointSpectralAmplitude:
    """Pump envelope along the sum frequency times phase matching along the difference.

    ``pump_bandwidth`` is the width of the pump envelope in ``ω + ω̃ - 2ω₀``,
    ``phasematch_bandwidth`` the width of the phase-matching function in
    ``(ω - ω̃)/2``; widths follow the conventions of :mod:`etpa.shapes`.
    """
    if pump_shape not in ("gaussian",):
        raise ValueError(f"pump_shape must be 'gaussian', got {pump_shape!r}")
    if pm_shape not in ("gaussian", "sinc"):
        raise ValueError(f"pm_shape must be 'gaussian' or 'sinc', got {pm_shape!r}")
    if not (pump_bandwidth > 0 and phasematch_bandwidth > 0):
        raise ValueError("bandwidths must be positive")
    # corners of the region |x| <= 3 pump widths, |z| <= 3 phase-matching widths
    needed = 1.5 * pump_bandwidth + 3.0 * phasematch_bandwidth
    if grid.halfwidth < needed:
        raise TruncationError(
            f"grid half-width {grid.halfwidth:.6g} rad/s is below the {needed:.6g} rad/s "
            "needed for 6 pump and 6 phase-matching widths")
    narrow_grid, broad_grid = factor_grids(grid)
    psi_N = sample_amplitude(pump_shape, pump_bandwidth, narrow_grid)
    psi_B = sample_amplitude(pm_shape, phasematch_bandwidth, broad_grid)
    jsa = make_factored_jsa(psi_N, psi_B, omega_0, grid)
    return JointSpectralAmplitude(jsa.grid, jsa.values, kind="factored", normalized=True,
                                  factors=jsa.factors,
                                  entanglement_ratio=phasematch_bandwidth / pump_bandwidth)


def symmetrize(jsa: JointSpectralAmplitude) -> JointSpectralAmplitude:
    """Exchange-symmetric two-photon amplitude ``(ψ(ω, ω̃) + ψ(ω̃, ω))/2``."""
    v = jsa.values
    values = _renormalized(0.5 * (v + v.T), jsa.grid)
    return JointSpectralAmplitude(jsa.grid, values, kind="symmetrized", normalized=True,
                                  entanglement_ratio=jsa.entanglement_ratio)


def factored_grid(omega_0: float, omega_cap: float, psi_n_width: float,
                  points_per_cap: int = 400, max_points: Optional[int] = None,
                  n_points: Optional[int] = None,
                  gamma_fg: Optional[float] = None) -> FrequencyGrid:
    """JSA grid for a broad factor supported on ``[-Ω, Ω]`` and a narrow Gaussian.

    The step resolves ``Ω / points_per_cap``, a third of the narrow width and,
    when ``gamma_fg`` is given, a third of the line width, unless ``n_points``
    fixes the grid size instead.  ``Ω`` is placed
    a quarter step past a sample, so no antidiagonal sample falls on a
    support edge; then every antidiagonal carries the same mean number of
    in-support samples, ``2Ω/h``, and the discrete box keeps the continuum
    normalization.
    """
    reach = omega_cap + _NARROW_SPAN * psi_n_width / 2
    if n_points is None:
        h_req = min(omega_cap / points_per_cap, psi_n_width / 3.0)
        if gamma_fg is not None:
            h_req = min(h_req, gamma_fg / LINE_SAMPLES)
        m = math.ceil(omega_cap / h_req - 0.25)
        h = omega_cap / (m + 0.25)
        half = math.ceil(reach / h) + 2
    else:
        if n_points < 7 or n_points % 2 == 0:
            raise ValueError(f"n_points must be an odd integer >= 7, got {n_points}")
        half = (n_points - 1) // 2
        # rounding m down only widens the step, so the grid still reaches `reach`
        m = max(math.floor(omega_cap * (half - 2) / reach - 0.25), 1)
        h = omega_cap / (m + 0.25)
    n = 2 * half + 1
    if max_points is not None and n > max_points:
        raise TruncationError(
            f"JSA grid needs {n} points per axis, above the limit of {max_points}")
    return FrequencyGrid(omega_0, h, n)


@dataclass(frozen=True)
class EppState:
    """Single-pair state: vacuum plus a pair with probability ``epsilon_sq``."""

    jsa: JointSpectralAmplitude
    epsilon_sq: float

    def __post_init__(self):
        if not 0 < self.epsilon_sq <= 0.5:
            raise ValueError(
                f"epsilon_sq must lie in (0, 0.5] for isolated pairs, got {self.epsilon_sq}")

    @property
    def n_epp(self) -> float:
        """Mean photon number per pulse (two photons per pair)."""
        return 2.0 * self.epsilon_sq


# -- export / import ---------------------------------------------------------

PathLike = Union[str, Path]


def _paths(prefix: PathLike) -> Tuple[Path, Path]:
    prefix = Path(prefix)
    return prefix.with_name(prefix.name + ".csv"), prefix.with_name(prefix.name + ".json")


def jsa_metadata(jsa: JointSpectralAmplitude) -> dict:
    broad = jsa.factors[1] if jsa.factors is not None else None
    return {
        "omega_cap_rad_s": None if broad is None else broad.support,
        "center_rad_s": jsa.grid.center,
        "step_rad_s": jsa.grid.step,
        "n_points": jsa.grid.n_points,
        "kind": jsa.kind,
        "normalized": jsa.normalized,
        "entanglement_ratio": jsa.entanglement_ratio,
        "columns": ["omega", "omega_tilde", "re", "im"],
        "order": "row-major: omega outer, omega_tilde inner",
    }


def export_jsa(jsa: JointSpectralAmplitude, prefix: PathLike) -> Tuple[Path, Path]:
    """Write ``<prefix>.csv`` (omega, omega_tilde, re, im) and ``<prefix>.json``."""
    csv_path, json_path = _paths(prefix)
    n = jsa.grid.n_points
    if n > MAX_EXPORT_POINTS:
        raise ValueError(f"refusing to export a grid with {n} > {MAX_EXPORT_POINTS} points")
    w = jsa.grid.samples
    table = np.column_stack([
        np.repeat(w, n), np.tile(w, n), jsa.values.real.ravel(), jsa.values.imag.ravel()])
    # 17 significant digits: amplitudes round-trip exactly, so imported η matches
    np.savetxt(csv_path, table, fmt="%.16e", delimiter=",",
               header="omega,omega_tilde,re,im", comments="")
    json_path.write_text(json.dumps(jsa_metadata(jsa), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def read_metadata(prefix: PathLike) -> dict:
    return json.loads(_paths(prefix)[1].read_text())


def load_jsa(prefix: PathLike) -> JointSpectralAmplitude:
    csv_path, json_path = _paths(prefix)
    meta = json.loads(json_path.read_text())
    grid = FrequencyGrid(meta["center_rad_s"], meta["step_rad_s"], meta["n_points"])
    table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    n = grid.n_points
    if table.shape != (n * n, 4):
        raise ValueError(f"{csv_path}: expected {n * n} rows of 4 columns, got {table.shape}")
    values = (table[:, 2] + 1j * table[:, 3]).reshape(n, n)
    kind = meta.get("kind", "raw")
    # a factored JSA loses its factors on export; it is still exchange symmetric
    if kind == "factored":
        kind = "symmetrized"
    return JointSpectralAmplitude(grid, values, kind=kind,
                                  normalized=bool(meta.get("normalized", False)),
                                  entanglement_ratio=meta.get("entanglement_ratio"))
