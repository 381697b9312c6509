"""Print the built-in rhodamine 6G feasibility estimates for both pair sources."""
import argparse

from etpa.feasibility import golden_r6g, run_scenario

KEYS = ("beam_area_m2", "focal_volume_m3", "molecules_per_mmol", "bandwidth_hz",
        "p_f_per_pair", "absorbed_fraction_per_mmol", "rate_rule_per_gm_mmol_pair",
        "event_rate_per_s", "figure_of_merit", "detectable")


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    reports = {src: run_scenario(golden_r6g(src)).to_dict() for src in ("pulsed", "cw")}
    print(f"{'quantity':<30}{'pulsed':>16}{'cw':>16}")
    for key in KEYS:
        a, b = reports["pulsed"][key], reports["cw"][key]
        fmt = (lambda v: f"{v!s:>16}") if isinstance(a, bool) else (lambda v: f"{v:>16.4e}")
        print(f"{key:<30}{fmt(a)}{fmt(b)}")


if __name__ == "__main__":
    main()
