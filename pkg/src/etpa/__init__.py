"""Spectral overlap, rate and feasibility calculations for entangled two-photon absorption."""

__version__ = "0.1.0"
