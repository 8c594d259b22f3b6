"""End-to-end simulation: network build, exact distributions, seeded count tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import WorkbenchConfig
from .measurement import OutcomeDistribution, outcome_distribution, sample_counts
from .network import GhzBuild, build_ghz, ideal_ghz
from .tables import CountTable, MeasurementSetting, write_count_table


@dataclass(frozen=True)
class ExactWitness:
    population: float
    coherence: float
    expectations: tuple[float, ...]

    @property
    def fidelity(self) -> float:
        return (self.population + self.coherence) / 2


def settings_for(n: int) -> tuple[MeasurementSetting, list[MeasurementSetting]]:
    return MeasurementSetting.hv(n), [MeasurementSetting.angle(k, n) for k in range(n)]


def exact_distributions(build: GhzBuild) -> tuple[OutcomeDistribution, list[OutcomeDistribution]]:
    hv, angles = settings_for(build.n_photons)
    return outcome_distribution(build, hv), [outcome_distribution(build, s) for s in angles]


def exact_witness(hv: OutcomeDistribution, angles: list[OutcomeDistribution]) -> ExactWitness:
    n = hv.n
    pop = hv["H" * n] + hv["V" * n]
    exps = tuple(d.expectation() for d in angles)
    coh = math.fsum((-1) ** k * e for k, e in enumerate(exps)) / n
    return ExactWitness(pop, coh, exps)


@dataclass(frozen=True)
class Simulation:
    build: GhzBuild
    hv: CountTable
    angles: tuple[CountTable, ...]
    truth: dict

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_count_table(self.hv, out / "hv.csv")
        for k, t in enumerate(self.angles):
            write_count_table(t, out / f"theta_k{k}.csv")
        (out / "truth.json").write_bytes((json.dumps(self.truth, indent=2) + "\n").encode("utf-8"))
        return out


def simulate(cfg: WorkbenchConfig, seed: int) -> Simulation:
    """Sample one fixture set. Stream 0 is the H/V table, stream k+1 the k-th angle."""
    build = build_ghz(cfg.network, cfg.source)
    hv_d, angle_d = exact_distributions(build)
    truth = exact_witness(hv_d, angle_d)
    hv = sample_counts(hv_d, cfg.sampling.hv_total, seed, 0)
    angles = tuple(sample_counts(d, cfg.sampling.theta_total, seed, k + 1) for k, d in enumerate(angle_d))
    sidecar = {
        "n_photons": build.n_photons,
        "seed": int(seed),
        "state_fidelity": build.ensemble.fidelity(ideal_ghz(build.n_photons)),
        "witness_fidelity": truth.fidelity,
        "population": truth.population,
        "coherence": truth.coherence,
        "expectations": list(truth.expectations),
        "postselection_probability": build.postselection_probability,
        "detection_probability": hv_d.valid_probability,
    }
    return Simulation(build, hv, angles, sidecar)


def fringe_samples(build: GhzBuild, n_points: int) -> list[tuple[float, float]]:
    """Exact <M_theta> on ``n_points`` evenly spaced angles in [0, pi)."""
    out = []
    for theta in np.linspace(0.0, math.pi, n_points, endpoint=False):
        d = outcome_distribution(build, MeasurementSetting(build.n_photons, float(theta)))
        out.append((float(theta), d.expectation()))
    return out
