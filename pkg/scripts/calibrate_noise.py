"""Calibrate the double-pair probability for the ten-photon noise configs.

The per-fusion overlap is pinned to the two-photon interference visibility
(0.91). The pair probability p at 0.57 W is then solved so the exact witness
fidelity of the simulated ten-photon state is 0.53, and the 0.7 W config
scales p by the pump-power ratio. Writes configs/calibrated_0.57W.yaml and
configs/calibrated_0.7W.yaml and prints the resulting fidelities.

    python3 scripts/calibrate_noise.py
"""

from dataclasses import replace
from pathlib import Path

from scipy.optimize import brentq

from ghzlab.config import SamplingConfig, WorkbenchConfig, dump_config
from ghzlab.network import NetworkSpec, build_ghz
from ghzlab.simulate import exact_distributions, exact_witness
from ghzlab.source import SourceParams, pump_to_pair_rate

OVERLAP = 0.91
TARGET = 0.53
OUT = Path(__file__).resolve().parents[1] / "src" / "ghzlab" / "configs"


def witness_fidelity(p, overlap=OVERLAP, n_pairs=5):
    build = build_ghz(NetworkSpec(n_pairs, per_fusion_overlap=overlap), SourceParams(p=p))
    return exact_witness(*exact_distributions(build)).fidelity


def main():
    p_low = brentq(lambda p: witness_fidelity(p) - TARGET, 1e-4, 0.15, xtol=1e-7)
    scale = pump_to_pair_rate(0.7) / pump_to_pair_rate(0.57)
    p_high = p_low * scale
    base = WorkbenchConfig(network=NetworkSpec(5, per_fusion_overlap=OVERLAP),
                           sampling=SamplingConfig(hv_total=144, theta_total=103))
    for name, p, totals in (("calibrated_0.57W", p_low, (144, 103)), ("calibrated_0.7W", p_high, (322, 92))):
        cfg = replace(base, source=SourceParams(p=round(p, 6)),
                      sampling=SamplingConfig(hv_total=totals[0], theta_total=totals[1]))
        (OUT / f"{name}.yaml").write_text(dump_config(cfg), encoding="utf-8")
        print(f"{name}: p={p:.6f} fidelity={witness_fidelity(round(p, 6)):.4f}")


if __name__ == "__main__":
    main()
