import dataclasses
import math

import pytest
from hypothesis import given, strategies as st

from etpa.feasibility import (DETECTION_THRESHOLD, ConfigError, CwSource, PulsedSource,
                              ScenarioConfig, bandwidth_hz, beam_geometry, golden_r6g,
                              molecules_in_focus, run_scenario)


def test_beam_geometry_golden():
    geo = beam_geometry(golden_r6g())
    assert geo.area == pytest.approx(7.85e-11, rel=1e-3)
    assert geo.area * 1e4 == pytest.approx(8e-7, rel=0.05)
    assert geo.rayleigh_range == pytest.approx(73.8e-6, rel=1e-3)
    assert geo.volume * 1e6 == pytest.approx(1.16e-8, rel=5e-3)
    assert geo.volume == pytest.approx(math.pi * 25e-12 * 2 * math.pi * 25e-12 / 1064e-9, rel=1e-12)


def test_short_cuvette_clamps_length():
    cfg = dataclasses.replace(golden_r6g(), cuvette_length=50e-6)
    geo = beam_geometry(cfg)
    assert geo.effective_length == 50e-6
    assert geo.volume == pytest.approx(geo.area * 50e-6)


def test_bandwidth():
    cfg = golden_r6g()
    assert bandwidth_hz(cfg) == pytest.approx(1.06e13, rel=1e-3)
    assert bandwidth_hz(dataclasses.replace(cfg, marginal_bandwidth=0.0)) == 0.0
    double = dataclasses.replace(cfg, marginal_bandwidth=80e-9)
    assert bandwidth_hz(double) == pytest.approx(2 * bandwidth_hz(cfg), rel=1e-14)
    with pytest.raises(ValueError):
        bandwidth_hz(dataclasses.replace(cfg, marginal_bandwidth=2e-6))


def test_molecules_in_focus():
    assert molecules_in_focus(1.16e-14) == pytest.approx(7.0e9, rel=5e-3)
    assert molecules_in_focus(0.0) == 0.0
    assert molecules_in_focus(1e-14, 10.0) == pytest.approx(10 * molecules_in_focus(1e-14))
    with pytest.raises(ValueError):
        molecules_in_focus(-1.0)


def test_golden_pulsed():
    r = run_scenario(golden_r6g("pulsed"))
    assert r.pair_rate_per_s == pytest.approx(8e6)
    assert r.event_rate_per_s == pytest.approx(8.8e-6, rel=0.15)
    assert r.p_f_per_pair == pytest.approx(1.5e-24, rel=0.15)
    assert r.absorbed_fraction_per_mmol == pytest.approx(1.1e-14, rel=0.15)
    assert r.rate_rule_per_gm_mmol_pair == pytest.approx(1.2e-15, rel=0.15)
    assert r.figure_of_merit == pytest.approx(9 * 100 * 8e6)
    assert not r.detectable


def test_golden_cw():
    r = run_scenario(golden_r6g("cw"))
    assert r.event_rate_per_s == pytest.approx(11, rel=0.15)
    assert r.figure_of_merit == pytest.approx(9e15)
    assert r.detectable
    assert r.detection_margin == pytest.approx(9.0)


def test_report_fields_finite_and_non_negative():
    for src in ("pulsed", "cw"):
        for k, v in run_scenario(golden_r6g(src)).to_dict().items():
            if isinstance(v, float):
                assert math.isfinite(v) and v >= 0, k


@pytest.mark.parametrize("field,factor", [
    ("concentration_mmol", 3.0), ("sigma2_gm", 2.0), ("qe", 0.5), ("ce", 0.25)])
def test_rate_linear_in_each_factor(field, factor):
    cfg = golden_r6g("cw")
    base = run_scenario(cfg).event_rate_per_s
    scaled = dataclasses.replace(cfg, **{field: getattr(cfg, field) * factor})
    assert run_scenario(scaled).event_rate_per_s == pytest.approx(factor * base, rel=1e-12)


def test_rate_linear_in_pair_rate():
    base = run_scenario(golden_r6g("cw")).event_rate_per_s
    cfg = dataclasses.replace(golden_r6g("cw"), source=CwSource(3e13))
    assert run_scenario(cfg).event_rate_per_s == pytest.approx(3 * base, rel=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.1, 1e3), st.floats(0.1, 100))
def test_rate_rule_consistency(qe, ce, mmol, gm):
    cfg = dataclasses.replace(golden_r6g(), qe=qe, ce=ce, concentration_mmol=mmol, sigma2_gm=gm)
    r = run_scenario(cfg)
    rebuilt = r.rate_rule_per_gm_mmol_pair * gm * mmol * r.pair_rate_per_s * qe * ce
    assert rebuilt == pytest.approx(r.event_rate_per_s, rel=1e-6)
    assert r.detectable == (r.figure_of_merit > DETECTION_THRESHOLD)


def test_exact_eta_mode():
    cfg = dataclasses.replace(golden_r6g(), eta_per_s=2 * bandwidth_hz(golden_r6g()))
    r = run_scenario(cfg)
    assert r.p_f_mode == "eta"
    assert r.p_f_per_pair == pytest.approx(2 * run_scenario(golden_r6g()).p_f_per_pair)


def test_refractive_index_does_not_enter_geometry():
    a = run_scenario(golden_r6g())
    b = run_scenario(dataclasses.replace(golden_r6g(), refractive_index=1.0))
    assert a.focal_volume_m3 == b.focal_volume_m3


# -- config -------------------------------------------------------------------------

def test_validation_lists_every_failure():
    cfg = dataclasses.replace(golden_r6g(), waist_radius=-1e-6, qe=2.0,
                              source=PulsedSource(80e6, 0.7))
    with pytest.raises(ConfigError) as exc:
        cfg.validate()
    msg = str(exc.value)
    assert "waist_radius" in msg and "qe" in msg and "epsilon_sq" in msg
    assert len(exc.value.errors) == 3


def test_from_dict_with_nm_keys_round_trip():
    data = {"center_wavelength_nm": 1064, "marginal_bandwidth_nm": 40, "waist_radius": 5e-6,
            "cuvette_length": 0.01, "concentration_mmol": 100, "sigma2_gm": 9,
            "refractive_index": 1.33, "source": {"kind": "cw", "pair_rate": 1e13}}
    cfg = ScenarioConfig.from_dict(data)
    assert cfg.center_wavelength == pytest.approx(1064e-9)
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg
    assert run_scenario(cfg).event_rate_per_s == pytest.approx(
        run_scenario(golden_r6g("cw")).event_rate_per_s, rel=1e-12)


@pytest.mark.parametrize("patch,needle", [
    ({"colour": 1}, "unknown fields: colour"),
    ({"source": {"kind": "laser"}}, "source.kind"),
    ({"source": {"kind": "pulsed", "rep_rate": 1e6}}, "epsilon_sq"),
    ({"source": None}, "source"),
    ({"waist_radius": -1}, "waist_radius"),
    ({"center_wavelength_nm": 1064}, "both center_wavelength"),
])
def test_from_dict_errors(patch, needle):
    data = golden_r6g().to_dict()
    data.update(patch)
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict(data)
    assert needle in str(exc.value)


def test_from_dict_missing_fields():
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict({"source": {"kind": "cw", "pair_rate": 1.0}})
    assert "missing field waist_radius" in str(exc.value)


def test_golden_source_choice():
    with pytest.raises(ValueError):
        golden_r6g("laser")
    assert golden_r6g("pulsed").source.kind == "pulsed"
