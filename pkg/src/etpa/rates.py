"""Cross sections and absorption probabilities with unit checking.

Every function accepts either plain floats, read as SI (cross sections in
m⁴·s, areas in m², times in s, rates in 1/s), or :mod:`pint` quantities in
any compatible unit, and returns pint quantities.  Probabilities are reduced
to dimensionless at the end, so a wrongly dimensioned input raises
:class:`pint.DimensionalityError` instead of producing a number.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import pint
from scipy import constants

ureg = pint.UnitRegistry()
# pint's own "GM" is gigamolar
ureg.define("goeppert_mayer = 1e-58 * meter ** 4 * second")
Q_ = ureg.Quantity
DimensionalityError = pint.DimensionalityError

HBAR = constants.hbar
C = constants.c
EPS0 = constants.epsilon_0
N_A = constants.Avogadro
GM_SI = 1e-58

# perturbative-regime ceiling on a per-pulse transition probability
VALIDITY_LIMIT = 1e-2
# closest allowed approach of an intermediate-state denominator, relative to ω₀
RESONANCE_RTOL = 1e-6


class ModelValidityWarning(UserWarning):
    """Result lies outside the perturbative, isolated-pair regime."""


class ResonantIntermediateError(ValueError):
    """An intermediate state is resonant with the exciting light."""


def _q(value, unit: str):
    """Attach ``unit`` to a bare number; pass quantities through unchanged."""
    if isinstance(value, pint.Quantity):
        return value
    return Q_(float(value), unit)


def gm_to_si(x_gm: float) -> float:
    return x_gm * GM_SI


def si_to_gm(x_si: float) -> float:
    return x_si / GM_SI


def wavelength_to_omega(wavelength_m: float) -> float:
    return 2.0 * math.pi * C / wavelength_m


@dataclass(frozen=True)
class IntermediateState:
    """One virtual intermediate level ``m`` of a two-photon transition.

    Dipole elements are scaled, ``μ = d·e/ħ``, in SI (C·m per J·s); frequencies
    in rad/s.
    """

    mu_fm: float
    mu_mg: float
    omega_mg: float
    omega_fm: float


@dataclass(frozen=True)
class MolecularTpaParams:
    sigma2_gm: float
    omega_fg: float
    gamma_fg: float
    states: Sequence[IntermediateState] = field(default_factory=tuple)

    def __post_init__(self):
        if self.sigma2_gm < 0:
            raise ValueError(f"sigma2_gm must be >= 0, got {self.sigma2_gm}")
        if not self.gamma_fg > 0:
            raise ValueError(f"gamma_fg must be positive, got {self.gamma_fg}")

    @property
    def sigma2(self):
        return Q_(self.sigma2_gm, "goeppert_mayer").to("m**4*s")


@dataclass(frozen=True)
class BeamParams:
    """Beam at the molecule.

    ``bandwidth_hz`` is ``B/2π``, the pair spectrum's bandwidth in Hz.
    ``area_e`` optionally sets a separate entanglement area; it then replaces
    ``A₀`` in the cross-section factor, while the flux factor keeps ``A₀``.
    """

    omega_0: float
    area_A0: object
    bandwidth_hz: object
    refractive_index: float = 1.0
    area_e: Optional[object] = None

    def __post_init__(self):
        if not _q(self.area_A0, "m**2").magnitude > 0:
            raise ValueError(f"area_A0 must be positive, got {self.area_A0}")
        if self.refractive_index < 1:
            raise ValueError(f"refractive index must be >= 1, got {self.refractive_index}")
        if _q(self.bandwidth_hz, "Hz").magnitude < 0:
            raise ValueError(f"bandwidth must be >= 0, got {self.bandwidth_hz}")

    @classmethod
    def from_wavelength(cls, wavelength_m: float, area_A0, bandwidth_hz,
                        refractive_index: float = 1.0) -> "BeamParams":
        return cls(wavelength_to_omega(wavelength_m), area_A0, bandwidth_hz,
                   refractive_index)

    @property
    def area(self):
        return _q(self.area_A0, "m**2")

    @property
    def cross_section_area(self):
        return self.area if self.area_e is None else _q(self.area_e, "m**2")


@dataclass(frozen=True)
class PulseParams:
    """Photon numbers and durations for the entangled vs coherent comparison."""

    n_epp: float
    n_coh: float
    T_c: float
    T_e: float
    f_coh: float = 1.0
    f_epp: float = 1.0
    T_p: Optional[float] = None  # recorded only; enters no formula

    def __post_init__(self):
        if not 0 <= self.n_epp <= 1:
            raise ValueError(f"n_epp must lie in [0, 1] for isolated pairs, got {self.n_epp}")
        if self.n_coh < 0:
            raise ValueError(f"n_coh must be >= 0, got {self.n_coh}")
        if not (self.T_c > 0 and self.T_e > 0):
            raise ValueError("T_c and T_e must be positive")


@dataclass(frozen=True)
class Probability:
    """Dimensionless transition probability per pulse, with the formula used."""

    value: pint.Quantity
    mode: str

    def __float__(self) -> float:
        return float(self.value.to("dimensionless").magnitude)


def _checked_probability(p, mode: str) -> Probability:
    p = p.to("dimensionless")
    if p.magnitude > VALIDITY_LIMIT:
        warnings.warn(f"transition probability {p.magnitude:.3g} exceeds {VALIDITY_LIMIT}; "
                      "perturbative isolated-pair model is not valid here",
                      ModelValidityWarning, stacklevel=3)
    return Probability(p, mode)


def sigma2_sum_over_states(params: MolecularTpaParams, omega_0: float,
                           refractive_index: float = 1.0):
    """Conventional TPA cross section from a table of intermediate states.

    Real dipole elements are assumed, so ``μ_m'f = μ_fm'`` and ``μ_gm' = μ_m'g``.
    Returns a quantity in m⁴·s; use ``.to("goeppert_mayer")`` for GM.
    """
    if not params.states:
        raise ValueError("sum over states needs at least one intermediate state")
    emission, absorption = 0.0, 0.0
    for s in params.states:
        d1 = omega_0 - s.omega_fm
        d2 = s.omega_mg - omega_0
        for d in (d1, d2):
            if abs(d) < RESONANCE_RTOL * omega_0:
                raise ResonantIntermediateError(
                    f"intermediate state at omega_mg={s.omega_mg:.6g} rad/s is resonant "
                    "with the exciting light; the virtual-state model does not apply")
        emission += s.mu_fm * s.mu_mg / d1
        absorption += s.mu_fm * s.mu_mg / d2
    prefactor = (HBAR * omega_0 / (EPS0 * refractive_index * C)) ** 2 / (2.0 * params.gamma_fg)
    return Q_(prefactor * emission * absorption, "m**4*s")


def sigma_e(sigma2, beam: BeamParams):
    """Entangled cross section ``σ⁽²⁾ (B/2π) / A₀``, in m²."""
    s2 = _q(sigma2, "m**4*s")
    return (s2 * _q(beam.bandwidth_hz, "Hz") / beam.cross_section_area).to("m**2")


def eta_from_entanglement_time(T_e, f_epp: float = 1.0):
    """Overlap factor ``f_EPP / T_e`` in 1/s."""
    return (f_epp / _q(T_e, "s")).to("1/s")


def p_f_epp(n_epp: float, beam: BeamParams, sigma2, eta=None) -> Probability:
    """Probability that a pulse carrying ``n_epp`` photons in pairs is absorbed.

    With ``eta`` (1/s) given this is the exact overlap form; otherwise the
    bandwidth approximation ``η ≈ B/2π`` is used.  ``n_epp = 1`` is allowed as
    the per-pair basis used for rate bookkeeping.
    """
    if not 0 <= n_epp <= 1:
        raise ValueError(f"n_epp must lie in [0, 1] for isolated pairs, got {n_epp}")
    if eta is None:
        factor, mode = _q(beam.bandwidth_hz, "Hz"), "bandwidth"
    else:
        factor, mode = _q(eta, "1/s"), "eta"
    s2 = _q(sigma2, "m**4*s")
    p = (n_epp / beam.area) * (s2 / beam.cross_section_area) * factor
    return _checked_probability(p, mode)


def p_f_coherent(pulse: PulseParams, beam: BeamParams, sigma2) -> Probability:
    """Coherent-pulse probability ``(N²/A₀)(σ⁽²⁾/(A₀ T_c)) f_coh``."""
    s2 = _q(sigma2, "m**4*s")
    T_c = _q(pulse.T_c, "s")
    p = (pulse.n_coh ** 2 / beam.area) * (s2 / (beam.area * T_c)) * pulse.f_coh
    return _checked_probability(p, "coherent")


@dataclass(frozen=True)
class QefResult:
    general: float
    equal_n: Optional[float]


def qef(pulse: PulseParams) -> QefResult:
    """Quantum enhancement factor ``(N_EPP/N_coh²)(T_c/T_e)``.

    ``equal_n`` is ``(1/N)(T_c/T_e)`` and is only set when the two photon
    numbers coincide.
    """
    if not (pulse.n_epp > 0 and pulse.n_coh > 0):
        raise ValueError("QEF needs positive photon numbers")
    ratio = pulse.T_c / pulse.T_e
    general = pulse.n_epp / pulse.n_coh ** 2 * ratio
    equal = ratio / pulse.n_epp if math.isclose(pulse.n_epp, pulse.n_coh) else None
    return QefResult(general, equal)


def qef_report(pulse: PulseParams, beam: BeamParams, sigma2) -> dict:
    """Record with the QEF next to both absorption probabilities.

    The EPP probability uses ``η = f_EPP/T_e`` so the two sides share their
    shape factors.
    """
    q = qef(pulse)
    p_epp = p_f_epp(pulse.n_epp, beam, sigma2, eta_from_entanglement_time(pulse.T_e, pulse.f_epp))
    p_coh = p_f_coherent(pulse, beam, sigma2)
    return {
        "n_epp": pulse.n_epp,
        "n_coh": pulse.n_coh,
        "T_c_s": pulse.T_c,
        "T_e_s": pulse.T_e,
        "p_f_epp": float(p_epp),
        "p_f_coh": float(p_coh),
        "qef_general": q.general,
        "qef_equal_n": q.equal_n,
    }
