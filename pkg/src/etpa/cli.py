"""Command-line front end: ``etpa {bounds,feasibility,conventions,qef,jsa}``.

Exit codes: 0 success, 1 runtime or numerical failure (including a violated
bound), 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .conventions import duration_table
from .feasibility import ConfigError, ScenarioConfig, golden_r6g, run_scenario
from .jsa import (MAX_EXPORT_POINTS, export_jsa, factor_grids, factored_grid, load_jsa,
                  make_factored_jsa, make_spdc_jsa, read_metadata)
from .lineshape import LorentzianLine
from .overlap import eta_factors, marginal_spectrum, spectral_overlap_eta
from .rates import BeamParams, PulseParams, gm_to_si, qef_report
from .shapes import sample_amplitude, support_grid
from .spectral import FrequencyGrid
from .sweep import BROAD_SHAPES, CSV_COLUMNS, broad_factor, bound_sweep, rows_to_csv

DEFAULT_SEED = 20210212
QEF_NOTE = ("decreasing N raises the QEF but lowers the absolute absorption "
            "probability p_f_epp, so the overall signal always drops")


class InvariantViolation(RuntimeError):
    pass


# -- argument helpers --------------------------------------------------------

def value_range(text: str) -> List[float]:
    """``1e12`` or ``1e12,2e12`` or ``start:stop:num`` or ``start:stop:num:log``."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                raise ValueError
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            if len(parts) == 4:
                if parts[3] != "log" or start <= 0 or stop <= 0:
                    raise ValueError
                return [float(v) for v in np.geomspace(start, stop, num)]
            return [float(v) for v in np.linspace(start, stop, num)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid range {text!r}: use a value, a comma list, or start:stop:num[:log]")
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def positive_ranges(name: str, values: Sequence[float]) -> None:
    if not values:
        raise ValueError(f"{name}: empty range")
    bad = [v for v in values if not (v > 0 and math.isfinite(v))]
    if bad:
        raise ValueError(f"{name}: values must be positive and finite, got {bad}")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    def cell(v):
        if isinstance(v, bool) or v is None:
            return str(v)
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    cells = [[cell(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def emit(text: str, output: Optional[str]) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


# -- subcommands -------------------------------------------------------------

def random_broad_check(omega_cap: float, gammas: Sequence[float], count: int, seed: int,
                       n_points: int = 1001, modes: int = 8):
    """Largest ``η_B / (Ω/π)`` over ``count`` random smooth broad factors per line width."""
    rng = np.random.default_rng(seed)
    grid = support_grid(omega_cap, n_points)
    z = grid.offsets / omega_cap
    narrow = sample_amplitude("gaussian", omega_cap, FrequencyGrid.spanning(12 * omega_cap, 401))
    worst = 0.0
    for _ in range(count):
        psi_B = random_smooth_amplitude(rng, grid, z, modes)
        for g in gammas:
            fac = eta_factors(narrow, psi_B, LorentzianLine.resonant(0.0, g))
            worst = max(worst, fac.eta_B / (omega_cap / math.pi))
    return worst


def random_smooth_amplitude(rng, grid, z, modes: int = 8):
    """Random band-limited complex amplitude on ``[-Ω, Ω]`` (``z`` in units of Ω)."""
    from .spectral import SpectralAmplitude1D, normalize
    k = np.arange(modes)
    coef = (rng.normal(size=modes) + 1j * rng.normal(size=modes)) / (1.0 + k)
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    values = (coef[None, :] * np.cos(np.pi * k[None, :] * z[:, None] / 2 + phase)).sum(axis=1)
    return normalize(SpectralAmplitude1D(grid, values, label="random"))


def cmd_bounds(args) -> int:
    for name in ("omega_cap", "gamma_fg", "psi_n_width"):
        positive_ranges("--" + name.replace("_", "-"), getattr(args, name))
    rows = bound_sweep(args.omega_cap, args.gamma_fg, args.psi_n_width,
                       psi_b_shape=args.psi_b_shape, method=args.method, jobs=args.jobs)
    checks = []
    if args.random_checks:
        for om in args.omega_cap:
            worst = random_broad_check(om, args.gamma_fg, args.random_checks, args.seed)
            checks.append({"omega_cap_rad_s": om, "count": args.random_checks,
                           "seed": args.seed, "max_eta_B_over_bound": worst,
                           "bound_satisfied": worst <= 1 + 1e-9})
    if args.format == "csv":
        emit(rows_to_csv(rows), args.output)
        for c in checks:
            sys.stderr.write(f"random check: {dumps(c)}")
    elif args.format == "json":
        emit(dumps({"rows": [dict(zip(CSV_COLUMNS, r.as_tuple())) for r in rows],
                    "random_checks": checks}), args.output)
    else:
        emit(table(CSV_COLUMNS, [r.as_tuple() for r in rows]), args.output)
    failed = [r for r in rows if not r.bound_satisfied] + \
        [c for c in checks if not c["bound_satisfied"]]
    if failed:
        raise InvariantViolation(f"{len(failed)} sweep entries violate the overlap bound")
    return 0


def load_scenario(args) -> ScenarioConfig:
    if args.golden_r6g:
        cfg = golden_r6g(args.source or "pulsed")
    else:
        if args.config is None:
            raise ValueError("give a config file or --golden-r6g")
        path = Path(args.config)
        if not path.is_file():
            raise ValueError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
        cfg = ScenarioConfig.from_dict(data)
        if args.source is not None and cfg.source.kind != args.source:
            raise ValueError(f"--source {args.source} does not match the config's "
                             f"{cfg.source.kind} source")
    overrides = {k: getattr(args, k) for k in ("qe", "ce") if getattr(args, k) is not None}
    if overrides:
        data = cfg.to_dict()
        data.update(overrides)
        cfg = ScenarioConfig.from_dict(data)
    return cfg.validate()


def cmd_feasibility(args) -> int:
    cfg = load_scenario(args)
    report = run_scenario(cfg).to_dict()
    if args.format == "json":
        emit(dumps({"config": cfg.to_dict(), "report": report}), args.output)
    else:
        emit(table(("quantity", "value"), list(report.items())), args.output)
    return 0


def cmd_conventions(args) -> int:
    rows = duration_table(args.sigma)
    headers = ("function", "fwhm", "duration_analytic", "duration_numeric", "rel_error")
    data = [(r.name, r.fwhm, r.analytic, r.numeric, r.rel_error) for r in rows]
    if args.format == "json":
        emit(dumps([dict(zip(headers, d)) for d in data]), args.output)
    elif args.format == "csv":
        lines = [",".join(headers)]
        lines += [",".join([d[0]] + [f"{v:.8e}" for v in d[1:]]) for d in data]
        emit("\n".join(lines) + "\n", args.output)
    else:
        emit(table(headers, data), args.output)
    worst = max(r.rel_error for r in rows)
    if worst > 1e-2:
        raise InvariantViolation(f"duration table error {worst:.3g} exceeds 1%")
    return 0


def cmd_qef(args) -> int:
    positive_ranges("--n", args.n)
    if any(n > 1 for n in args.n):
        raise ValueError("--n values must be <= 1 (isolated pairs)")
    beam = BeamParams(0.0, args.area_m2, 0.0)
    sigma2 = gm_to_si(args.sigma2_gm)
    rows = []
    for n in args.n:
        pulse = PulseParams(n_epp=n, n_coh=n, T_c=args.t_c, T_e=args.t_e,
                            f_coh=args.f_coh, f_epp=args.f_epp)
        rep = qef_report(pulse, beam, sigma2)
        rows.append({"n": n, "qef": rep["qef_general"], "qef_equal_n": rep["qef_equal_n"],
                     "p_f_epp": rep["p_f_epp"], "p_f_coh": rep["p_f_coh"]})
    order = sorted(rows, key=lambda r: r["n"])
    monotone = all(a["qef"] >= b["qef"] and a["p_f_epp"] <= b["p_f_epp"]
                   for a, b in zip(order, order[1:]))
    out = {"T_c_s": args.t_c, "T_e_s": args.t_e, "area_m2": args.area_m2,
           "sigma2_gm": args.sigma2_gm, "rows": rows, "note": QEF_NOTE,
           "monotone": monotone}
    if args.format == "json":
        emit(dumps(out), args.output)
    else:
        emit(table(("n", "qef", "p_f_epp", "p_f_coh"),
                   [(r["n"], r["qef"], r["p_f_epp"], r["p_f_coh"]) for r in rows])
             + QEF_NOTE + "\n", args.output)
    return 0


def build_export_jsa(args):
    if args.n_points is not None and args.n_points > MAX_EXPORT_POINTS:
        raise ValueError(f"--n-points {args.n_points} exceeds the limit of {MAX_EXPORT_POINTS}")
    if args.model == "factored":
        positive_ranges("--omega-cap", [args.omega_cap])
        positive_ranges("--psi-n-width", [args.psi_n_width])
        grid = factored_grid(args.omega_0, args.omega_cap, args.psi_n_width,
                             points_per_cap=100, max_points=MAX_EXPORT_POINTS,
                             n_points=args.n_points)
        narrow_grid, broad_grid = factor_grids(grid)
        psi_N = sample_amplitude("gaussian", args.psi_n_width, narrow_grid)
        psi_B = broad_factor(args.psi_b_shape, args.omega_cap, broad_grid)
        return make_factored_jsa(psi_N, psi_B, args.omega_0, grid)
    positive_ranges("--pump-bandwidth", [args.pump_bandwidth])
    positive_ranges("--pm-bandwidth", [args.pm_bandwidth])
    n = args.n_points or 401
    if n % 2 == 0 or n < 3:
        raise ValueError(f"--n-points must be odd and >= 3, got {n}")
    reach = 3.0 * args.pump_bandwidth + 6.0 * args.pm_bandwidth
    grid = FrequencyGrid.spanning(reach, n, center=args.omega_0)
    return make_spdc_jsa(args.pump_bandwidth, args.pm_bandwidth, args.omega_0, grid,
                         pm_shape=args.pm_shape)


def cmd_jsa(args) -> int:
    if args.action == "export":
        jsa = build_export_jsa(args)
        csv_path, json_path = export_jsa(jsa, args.output)
        info = {"csv": str(csv_path), "json": str(json_path), "n_points": jsa.grid.n_points,
                "rows": jsa.grid.n_points ** 2}
        if args.marginal:
            m = marginal_spectrum(jsa)
            omega = jsa.grid.samples
            cols = [omega, m]
            header = "omega,marginal"
            if jsa.factors is not None:
                cols.append(np.abs(jsa.factors[1].sample(jsa.grid.offsets)) ** 2)
                header += ",psi_B_sq"
            path = Path(args.output).with_name(Path(args.output).name + "_marginal.csv")
            np.savetxt(path, np.column_stack(cols), fmt="%.8e", delimiter=",",
                       header=header, comments="")
            info["marginal"] = str(path)
        sys.stdout.write(dumps(info))
        return 0
    jsa = load_jsa(args.input)
    positive_ranges("--gamma-fg", [args.gamma_fg])
    omega_cap = args.omega_cap
    if omega_cap is None:
        omega_cap = read_metadata(args.input).get("omega_cap_rad_s")
    rep = spectral_overlap_eta(jsa, LorentzianLine.resonant(jsa.omega_0, args.gamma_fg),
                               omega_cap=omega_cap)
    out = {"eta": rep.eta, "eta_max": rep.eta_max, "B_marginal_hz": rep.B_marginal,
           "T_e_s": rep.T_e, "T_e_method": rep.T_e_method, "f_EPP": rep.f_EPP,
           "bound_satisfied": rep.bound_satisfied}
    sys.stdout.write(dumps(out))
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="etpa", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats, default):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")

    b = sub.add_parser("bounds", help="sweep overlap factors and check the bound")
    b.add_argument("--omega-cap", type=value_range, required=True,
                   help="broad half-width Ω (rad/s)")
    b.add_argument("--gamma-fg", type=value_range, required=True,
                   help="TPA half linewidth (rad/s)")
    b.add_argument("--psi-n-width", type=value_range, required=True,
                   help="rms width of |psi_N|^2 (rad/s)")
    b.add_argument("--psi-b-shape", choices=BROAD_SHAPES, default="box")
    b.add_argument("--method", choices=("auto", "jsa", "factors"), default="auto")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--random-checks", type=int, default=0,
                   help="random broad factors per Ω checked against the bound")
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(b, ("csv", "json", "table"), "csv")
    b.set_defaults(func=cmd_bounds)

    f = sub.add_parser("feasibility", help="event rates for a solution-phase experiment")
    f.add_argument("config", nargs="?", help="scenario JSON file")
    f.add_argument("--golden-r6g", action="store_true",
                   help="built-in Rhodamine 6G scenario")
    f.add_argument("--source", choices=("pulsed", "cw"), default=None)
    f.add_argument("--qe", type=float, default=None)
    f.add_argument("--ce", type=float, default=None)
    common(f, ("json", "table"), "table")
    f.set_defaults(func=cmd_feasibility)

    c = sub.add_parser("conventions", help="durations of reference pulse shapes")
    c.add_argument("--sigma", type=float, default=1.0)
    common(c, ("table", "json", "csv"), "table")
    c.set_defaults(func=cmd_conventions)

    q = sub.add_parser("qef", help="quantum enhancement factor vs photon number")
    q.add_argument("--n", type=value_range, required=True, help="photons per pulse")
    q.add_argument("--t-c", type=float, required=True, help="coherent pulse duration (s)")
    q.add_argument("--t-e", type=float, required=True, help="entanglement time (s)")
    q.add_argument("--area-m2", type=float, default=math.pi * 5e-6 ** 2)
    q.add_argument("--sigma2-gm", type=float, default=9.0)
    q.add_argument("--f-coh", type=float, default=1.0)
    q.add_argument("--f-epp", type=float, default=1.0)
    common(q, ("json", "table"), "json")
    q.set_defaults(func=cmd_qef)

    j = sub.add_parser("jsa", help="export or analyse a joint spectral amplitude")
    jsub = j.add_subparsers(dest="action", required=True)
    e = jsub.add_parser("export", help="write <prefix>.csv and <prefix>.json")
    e.add_argument("--model", choices=("factored", "spdc"), default="factored")
    e.add_argument("--omega-0", type=float, default=0.0, help="pair center (rad/s)")
    e.add_argument("--omega-cap", type=float, default=1.0)
    e.add_argument("--psi-n-width", type=float, default=0.05)
    e.add_argument("--psi-b-shape", choices=BROAD_SHAPES, default="box")
    e.add_argument("--pump-bandwidth", type=float, default=0.05)
    e.add_argument("--pm-bandwidth", type=float, default=1.0)
    e.add_argument("--pm-shape", choices=("gaussian", "sinc"), default="gaussian")
    e.add_argument("--n-points", type=int, default=None)
    e.add_argument("--marginal", action="store_true", help="also write the marginal spectrum")
    e.add_argument("--output", "-o", required=True, help="path prefix")
    e.add_argument("--format", choices=("json",), default="json")
    e.set_defaults(func=cmd_jsa)
    a = jsub.add_parser("eta", help="overlap factor of an exported JSA")
    a.add_argument("--input", "-i", required=True, help="path prefix")
    a.add_argument("--gamma-fg", type=float, required=True)
    a.add_argument("--omega-cap", type=float, default=None)
    a.add_argument("--format", choices=("json",), default="json")
    a.set_defaults(func=cmd_jsa)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"etpa: error: {exc}\n")
        return 2
    except InvariantViolation as exc:
        sys.stderr.write(f"etpa: invariant violated: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"etpa: error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"etpa: runtime failure: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
