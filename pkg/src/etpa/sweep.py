"""Bound sweeps over (Ω, γ_fg, ψ_N width) for the factored two-photon amplitude."""
from __future__ import annotations

import math
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass
from itertools import product
from typing import Iterable, List, Optional, Sequence

from .jsa import (LINE_SAMPLES, TruncationError, factor_grids, factored_grid,
                  make_factored_jsa)
from .lineshape import LorentzianLine
from .overlap import (BOUND_RTOL, FACTOR_RTOL, entanglement_time, eta_factors,
                      spectral_overlap_eta)
from .shapes import sample_amplitude, support_grid
from .spectral import FrequencyGrid, default_points

CSV_COLUMNS = ("omega_cap_rad_s", "gamma_fg_rad_s", "psi_N_width", "eta", "eta_N",
               "eta_B", "eta_max", "T_e_s", "f_EPP", "bound_satisfied")
BROAD_SHAPES = ("box", "gaussian", "sinc")
JSA_MAX_POINTS = 1601
MAX_LINE_POINTS = 2 ** 21 + 1


@dataclass(frozen=True)
class SweepRow:
    omega_cap_rad_s: float
    gamma_fg_rad_s: float
    psi_N_width: float
    eta: float
    eta_N: float
    eta_B: float
    eta_max: float
    T_e_s: float
    f_EPP: float
    bound_satisfied: bool

    def as_tuple(self):
        return astuple(self)


def broad_factor(shape: str, omega_cap: float, grid: FrequencyGrid):
    """Broad factor supported on ``[-Ω, Ω]``.

    Gaussian and sinc shapes are truncated at Ω with width Ω/3.
    """
    if shape == "box":
        return sample_amplitude("box", omega_cap, grid)
    if shape in ("gaussian", "sinc"):
        return sample_amplitude(shape, omega_cap / 3.0, grid, support=omega_cap)
    raise ValueError(f"broad shape must be one of {BROAD_SHAPES}, got {shape!r}")


@lru_cache(maxsize=256)
def _broad_entanglement_time(shape: str, omega_cap: float, n: int) -> float:
    # independent of γ and the narrow width, so a sweep computes it once per Ω
    return entanglement_time(broad_factor(shape, omega_cap, support_grid(omega_cap, n))).T_e


def bound_point(omega_cap: float, gamma_fg: float, psi_n_width: float,
                psi_b_shape: str = "box", method: str = "auto",
                n_points: Optional[int] = None,
                jsa_max_points: int = JSA_MAX_POINTS) -> SweepRow:
    """Overlap factors and bound check for one parameter point.

    ``method="jsa"`` builds the 2D amplitude and projects it; ``"factors"``
    uses ``η = 2 η_N η_B_flat`` from 1D amplitudes; ``"auto"`` takes the 2D
    route whenever its grid fits in ``jsa_max_points`` per axis.
    """
    if not (omega_cap > 0 and gamma_fg > 0 and psi_n_width > 0):
        raise ValueError("omega_cap, gamma_fg and psi_n_width must be positive")
    if method not in ("auto", "jsa", "factors"):
        raise ValueError(f"method must be auto, jsa or factors, got {method!r}")
    line = LorentzianLine.resonant(0.0, gamma_fg)

    grid = None
    if method != "factors":
        try:
            grid = factored_grid(0.0, omega_cap, psi_n_width, max_points=jsa_max_points,
                                 gamma_fg=gamma_fg)
        except TruncationError:
            if method == "jsa":
                raise

    if grid is not None:
        narrow_grid, broad_grid = factor_grids(grid)
        psi_N = sample_amplitude("gaussian", psi_n_width, narrow_grid)
        psi_B = broad_factor(psi_b_shape, omega_cap, broad_grid)
        rep = spectral_overlap_eta(make_factored_jsa(psi_N, psi_B, 0.0, grid), line,
                                   omega_cap=omega_cap)
        eta, eta_N, eta_B, T_e = rep.eta, rep.eta_N, rep.eta_B, rep.T_e
    else:
        n = default_points() if n_points is None else n_points
        # the narrow grid must also resolve the line
        span = 12.0 * psi_n_width
        n_line = 2 * math.ceil(span * LINE_SAMPLES / gamma_fg) + 1
        psi_N = sample_amplitude("gaussian", psi_n_width,
                                 FrequencyGrid.spanning(span, min(max(n, n_line), MAX_LINE_POINTS)))
        psi_B = broad_factor(psi_b_shape, omega_cap, support_grid(omega_cap, n))
        fac = eta_factors(psi_N, psi_B, line)
        eta, eta_N, eta_B = fac.eta, fac.eta_N, fac.eta_B
        T_e = _broad_entanglement_time(psi_b_shape, float(omega_cap), n)

    eta_max = 2.0 * omega_cap / math.pi
    ok = (eta <= eta_max * (1 + BOUND_RTOL)
          and eta_B <= omega_cap / math.pi * (1 + FACTOR_RTOL)
          and eta_N <= 1 + FACTOR_RTOL)
    return SweepRow(float(omega_cap), float(gamma_fg), float(psi_n_width), float(eta),
                    float(eta_N), float(eta_B), eta_max, float(T_e), float(eta * T_e), ok)


def bound_sweep(omega_caps: Sequence[float], gammas: Sequence[float],
                psi_n_widths: Sequence[float], psi_b_shape: str = "box",
                method: str = "auto", jobs: int = 1,
                n_points: Optional[int] = None) -> List[SweepRow]:
    """Rows in input order: Ω outermost, then γ_fg, then ψ_N width."""
    points = list(product(omega_caps, gammas, psi_n_widths))
    if not points:
        raise ValueError("sweep ranges must be non-empty")

    def run(p):
        return bound_point(*p, psi_b_shape=psi_b_shape, method=method, n_points=n_points)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, points))
    return [run(p) for p in points]


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for value in row.as_tuple():
            cells.append(str(value).lower() if isinstance(value, bool) else f"{value:.8e}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
