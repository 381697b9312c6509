"""Antidiagonal projection, spectral overlap factor and entanglement time.

Conventions (rotating frame, detunings from ω₀):

* ``K(x) = ∫ dz/2π Ψ(ω₀ + z, ω₀ + x - z)``, the antidiagonal projection.
* ``η = 2 ∫ dx/2π L(x) |K(x)|²``, in units of 1/s.
* ``η_N = ∫ dx/2π L(x) |ψ_N(x)|²`` and ``η_B = |∫ dz/2π L(z) ψ_B(z)|²``.
  ``η_B_flat = |∫ dz/2π ψ_B(z)|² = |φ_B(0)|²`` is the same factor with the
  line set to one.  For a factored amplitude ``η = 2 η_N η_B_flat``, and
  ``η = 2 η_N η_B`` once the line is broad compared with the broad factor.
* ``T = 1/|φ(τ_max)|²`` and ``B = 1/|f(ω_max)|²`` for square-normalized
  transform pairs (widths of the peak-normalized distributions).

The weights on each antidiagonal are a plain Riemann sum with the grid step;
amplitudes are expected to vanish at the grid boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conventions import width_by_peak_norm
from .jsa import LINE_SAMPLES, JointSpectralAmplitude
from .lineshape import LorentzianLine, lorentzian_eval
from .spectral import (TWO_PI, FrequencyGrid, SpectralAmplitude1D, TimeGrid,
                       integrate_freq, to_time_domain)

# relative slack on η <= 2Ω/π for 2D amplitudes (discretization of the broad edge)
BOUND_RTOL = 1e-6
# relative slack on η_B <= Ω/π for 1D amplitudes (rounding only)
FACTOR_RTOL = 1e-9
NORM_TOL = 1e-6
# a secondary maximum above this fraction of the peak breaks the single-peak assumption
SECONDARY_PEAK_FRACTION = 0.5
TIME_POINTS = 2001


class ContractError(ValueError):
    """Input violates a precondition (e.g. a JSA that is not normalized)."""


@dataclass(frozen=True)
class EtaFactors:
    eta_N: float
    eta_B: float
    eta_B_flat: float

    @property
    def eta(self) -> float:
        """``2 η_N η_B_flat``, exact for the factored model."""
        return 2.0 * self.eta_N * self.eta_B_flat


@dataclass(frozen=True)
class EntanglementTime:
    T_e: float
    B: float
    tau_peak: float
    peak: float
    warning: Optional[str] = None


@dataclass(frozen=True)
class OverlapReport:
    eta: float
    eta_N: Optional[float]
    eta_B: Optional[float]
    eta_B_flat: Optional[float]
    eta_max: float
    omega_cap: float
    T_e: float
    T_e_method: str
    f_EPP: float
    B_marginal: float
    resonant: bool
    warning: Optional[str] = None

    @property
    def bound_satisfied(self) -> bool:
        return self.eta <= self.eta_max * (1 + BOUND_RTOL)


def antidiagonal_projection(jsa: JointSpectralAmplitude) -> SpectralAmplitude1D:
    """``K(x)`` on the two-photon detuning grid ``x = k·h``, ``|k| <= n-1``."""
    n, h = jsa.grid.n_points, jsa.grid.step
    idx = np.arange(n)
    diag = (idx[:, None] + idx[None, :]).ravel()
    v = jsa.values.ravel()
    scale = h / TWO_PI
    re = np.bincount(diag, weights=v.real, minlength=2 * n - 1)
    im = np.bincount(diag, weights=v.imag, minlength=2 * n - 1)
    return SpectralAmplitude1D(FrequencyGrid(0.0, h, 2 * n - 1), scale * (re + 1j * im),
                               label="K")


def marginal_spectrum(jsa: JointSpectralAmplitude) -> np.ndarray:
    """Single-photon spectrum ``M(ω) = ∫ dω̃/2π |Ψ(ω, ω̃)|²`` on the JSA grid."""
    return (np.abs(jsa.values) ** 2) @ jsa.grid.weights


def eta_factors(psi_N: SpectralAmplitude1D, psi_B: SpectralAmplitude1D,
                line: LorentzianLine, omega_0: Optional[float] = None) -> EtaFactors:
    """Narrow and broad overlap factors.

    ``omega_0`` shifts the line for off-resonant pairs; ``None`` means
    ``2ω₀ = ω_fg``.
    """
    offset = 0.0 if omega_0 is None else line.omega_fg - 2.0 * omega_0
    x = psi_N.grid.offsets
    eta_N = integrate_freq(lorentzian_eval(line, x - offset) * np.abs(psi_N.values) ** 2,
                           psi_N.grid)
    z = psi_B.grid.offsets
    eta_B = abs(integrate_freq(lorentzian_eval(line, z) * psi_B.values, psi_B.grid)) ** 2
    eta_B_flat = abs(integrate_freq(psi_B.values, psi_B.grid)) ** 2
    return EtaFactors(float(eta_N), float(eta_B), float(eta_B_flat))


def rms_width(amp: SpectralAmplitude1D) -> float:
    """Root-mean-square width of ``|f|²`` about its mean."""
    p = np.abs(amp.values) ** 2
    x = amp.grid.offsets
    total = integrate_freq(p, amp.grid)
    mean = integrate_freq(x * p, amp.grid) / total
    return math.sqrt(integrate_freq((x - mean) ** 2 * p, amp.grid) / total)


def default_time_grid(psi_B: SpectralAmplitude1D, n_points: int = TIME_POINTS) -> TimeGrid:
    # ±20 inverse rms widths holds the main lobe and the first few side lobes
    return TimeGrid.spanning(20.0 / rms_width(psi_B), n_points)


def _peak(values: np.ndarray, axis: np.ndarray):
    """Grid argmax with three-point parabolic refinement.

    Ties go to the sample closest to zero.  Returns (position, value, index).
    """
    top = values.max()
    candidates = np.flatnonzero(values == top)
    k = int(candidates[np.argmin(np.abs(axis[candidates]))])
    if 0 < k < values.shape[0] - 1:
        y0, y1, y2 = values[k - 1], values[k], values[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            delta = 0.5 * (y0 - y2) / denom
            step = axis[1] - axis[0]
            return axis[k] + delta * step, y1 - 0.25 * (y0 - y2) * delta, k
    return axis[k], top, k


def _shape_warning(p: np.ndarray, k: int) -> Optional[str]:
    top = p[k]
    if p.min() > 0.99 * top:
        return "flat: no clear peak in the time-domain distribution"
    if k in (0, p.shape[0] - 1):
        return "peak at the edge of the time grid"
    interior = (p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])
    maxima = np.flatnonzero(interior) + 1
    others = maxima[maxima != k]
    if others.size and p[others].max() > SECONDARY_PEAK_FRACTION * top:
        return "multiple peaks: duration convention assumes a single smooth peak"
    return None


def entanglement_time(psi_B: SpectralAmplitude1D,
                      tgrid: Optional[TimeGrid] = None) -> EntanglementTime:
    """Width ``1/|φ_B(τ_max)|²`` of the difference-time distribution.

    Also returns the companion bandwidth ``1/|ψ_B(z_max)|²`` (Hz).  A warning
    is attached when ``|φ_B|²`` is flat or has several comparable peaks; the
    value is still returned.
    """
    if tgrid is None:
        tgrid = default_time_grid(psi_B)
    phi = to_time_domain(psi_B, tgrid)
    p = np.abs(phi.values) ** 2
    tau_peak, peak, k = _peak(p, tgrid.samples)
    _, spec_peak, _ = _peak(np.abs(psi_B.values) ** 2, psi_B.grid.offsets)
    return EntanglementTime(T_e=float(1.0 / peak), B=float(1.0 / spec_peak),
                            tau_peak=float(tau_peak), peak=float(peak),
                            warning=_shape_warning(p, k))


def f_epp(eta: float, T_e: float) -> float:
    """Dimensionless shape factor ``η·T_e``."""
    if eta < 0 or not T_e > 0:
        raise ValueError(f"need eta >= 0 and T_e > 0, got eta={eta}, T_e={T_e}")
    return float(eta * T_e)


def spectral_overlap_eta(jsa: JointSpectralAmplitude, line: LorentzianLine,
                         omega_cap: Optional[float] = None,
                         tgrid: Optional[TimeGrid] = None) -> OverlapReport:
    """Overlap factor of a normalized two-photon amplitude with a TPA line.

    ``omega_cap`` is the half-width Ω of the broad support used for the bound
    ``η <= 2Ω/π``; by default it is taken from the broad factor's support,
    else from the grid.  The bound is only meaningful on resonance.
    """
    norm = jsa.norm_sq()
    if not jsa.normalized or abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"JSA must be normalized (norm={norm:.9g})")

    K = antidiagonal_projection(jsa)
    x = K.grid.offsets
    weight = line.two_photon_weight(x, jsa.omega_0)
    eta = 2.0 * float(integrate_freq(weight * np.abs(K.values) ** 2, K.grid))
    resonant = math.isclose(line.omega_fg, 2.0 * jsa.omega_0,
                            rel_tol=0.0, abs_tol=1e-9 * line.gamma_fg)

    factors = None
    warning = None
    if jsa.factors is not None:
        psi_N, psi_B = jsa.factors
        factors = eta_factors(psi_N, psi_B, line, jsa.omega_0)
        if omega_cap is None:
            omega_cap = psi_B.support
    if omega_cap is None:
        omega_cap = jsa.grid.halfwidth

    B = width_by_peak_norm(marginal_spectrum(jsa), jsa.grid)
    if jsa.factors is not None:
        te = entanglement_time(jsa.factors[1], tgrid)
        T_e, method, warning = te.T_e, "peak", te.warning
    else:
        T_e, method = 1.0 / B, "inverse_bandwidth"
    if jsa.grid.step > line.gamma_fg / LINE_SAMPLES:
        warning = "grid step does not resolve the line width; eta is inaccurate"

    return OverlapReport(
        eta=eta,
        eta_N=None if factors is None else factors.eta_N,
        eta_B=None if factors is None else factors.eta_B,
        eta_B_flat=None if factors is None else factors.eta_B_flat,
        eta_max=2.0 * omega_cap / math.pi,
        omega_cap=float(omega_cap),
        T_e=T_e,
        T_e_method=method,
        f_EPP=f_epp(eta, T_e),
        B_marginal=B,
        resonant=resonant,
        warning=warning,
    )


def coherent_projection(alpha: SpectralAmplitude1D) -> SpectralAmplitude1D:
    """``K_α(x) = ∫ dz/2π α(z) α(x - z)`` for a coherent pulse amplitude."""
    h = alpha.grid.step
    n = alpha.grid.n_points
    K = np.convolve(alpha.values, alpha.values) * (h / TWO_PI)
    return SpectralAmplitude1D(FrequencyGrid(0.0, h, 2 * n - 1), K, label="K_alpha")


def coherent_eta(alpha: SpectralAmplitude1D, line: LorentzianLine,
                 omega_0: Optional[float] = None) -> float:
    """Overlap factor ``∫ dx/2π L(x) |K_α(x)|²`` of a normalized coherent pulse.

    The coherent excitation probability is ``(N²/A₀)(σ⁽²⁾/A₀)`` times this,
    so ``f_coh = T_c·coherent_eta``.
    """
    offset = 0.0 if omega_0 is None else line.omega_fg - 2.0 * omega_0
    K = coherent_projection(alpha)
    weight = lorentzian_eval(line, K.grid.offsets - offset)
    return float(integrate_freq(weight * np.abs(K.values) ** 2, K.grid))
