"""Peak-normalized Lorentzian two-photon line."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LorentzianLine:
    """TPA line centered at ``omega_fg`` with half linewidth ``gamma_fg`` (rad/s)."""

    omega_fg: float
    gamma_fg: float

    def __post_init__(self):
        if not self.gamma_fg > 0:
            raise ValueError(f"gamma_fg must be positive, got {self.gamma_fg}")

    @classmethod
    def resonant(cls, omega_0: float, gamma_fg: float) -> "LorentzianLine":
        """Line whose center sits at twice the pair center frequency."""
        return cls(omega_fg=2.0 * omega_0, gamma_fg=gamma_fg)

    def __call__(self, x):
        return lorentzian_eval(self, x)

    def two_photon_weight(self, x, omega_0: float):
        """``L`` at two-photon detuning ``x = ω + ω̃ - 2ω₀``.

        Off resonance the line is shifted by ``ω_fg - 2ω₀``.
        """
        return lorentzian_eval(self, np.asarray(x) - (self.omega_fg - 2.0 * omega_0))

    def tail_integral(self, a: float) -> float:
        """``∫_a^∞ L(x) dx`` for ``a >= 0``."""
        g = self.gamma_fg
        return g * (math.pi / 2 - math.atan(a / g))


def lorentzian_eval(line: LorentzianLine, x):
    g2 = line.gamma_fg ** 2
    x = np.asarray(x, dtype=float)
    out = g2 / (g2 + x * x)
    return float(out) if out.ndim == 0 else out
