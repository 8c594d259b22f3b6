"""Reduce count tables to population, coherence, fidelity and witness significances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import SettingMismatchError, ValidationError
from .measurement import diff_ratio, expectation_from_counts, ratio
from .tables import HV, CountTable

SIGNIFICANCE_CAP = 1e9

Estimate = tuple  # (value, sigma)


def _require_hv(t: CountTable):
    if t.setting.kind != HV:
        raise SettingMismatchError(f"expected an H/V table, got {t.setting.label}")


def population(hv: CountTable) -> Estimate:
    _require_hv(hv)
    n = hv.n_photons
    desired = hv["H" * n] + hv["V" * n]
    return ratio(desired, hv.total - desired)


def coherence(tables: Sequence[CountTable]) -> Estimate:
    """Alternating mean of <M> over the N angles k*pi/N, k = 0..N-1."""
    if not tables:
        raise SettingMismatchError("no angle tables")
    n = tables[0].n_photons
    if len(tables) != n:
        raise SettingMismatchError(f"need {n} angle tables, got {len(tables)}")
    vals, sig2 = [], 0.0
    for k, t in enumerate(tables):
        if t.n_photons != n or t.setting.k != k:
            raise SettingMismatchError(f"table {k} has setting {t.setting.label}, expected theta={k}/{n}")
        v, s = expectation_from_counts(t)
        vals.append((-1) ** k * v)
        sig2 += s * s
    return math.fsum(vals) / n, math.sqrt(sig2) / n


def fidelity(p: Estimate, c: Estimate) -> Estimate:
    return (p[0] + c[0]) / 2, 0.5 * math.hypot(p[1], c[1])


def genuine_test(f: Estimate) -> float:
    """One-sided z-score of the fidelity against the 0.5 threshold."""
    if f[1] <= 0:
        raise ValidationError("fidelity sigma must be positive")
    return (f[0] - 0.5) / f[1]


def _complement(k: str) -> str:
    return k.translate(str.maketrans("HV", "VH"))


def lambda_spectrum(hv: CountTable) -> dict[str, Estimate]:
    """lambda_k = (n_k + n_kbar)/(2 total) keyed by the smaller of k and kbar.

    The all-H/all-V pair is excluded. Sigma treats the pair tally a = n_k +
    n_kbar against the rest b as independent Poisson counts: sqrt(ab/T^3)/2.
    """
    _require_hv(hv)
    n, total = hv.n_photons, hv.total
    if total <= 0:
        raise ValidationError("empty table")
    out = {}
    for i in range(1, (1 << n) - 1):
        k = "".join("HV"[(i >> (n - 1 - q)) & 1] for q in range(n))
        kb = _complement(k)
        if kb < k:
            continue
        a = hv[k] + hv[kb]
        b = total - a
        sigma = 0.5 * math.sqrt(max(a, 1) * max(b, 1) / total ** 3)
        out[k] = (a / (2 * total), sigma)
    return out


def lambda_max(spectrum: dict[str, Estimate]) -> tuple[float, float, str]:
    """Largest lambda_k; ties go to the lexicographically smallest key."""
    key = min(spectrum, key=lambda k: (-spectrum[k][0], k))
    return spectrum[key][0], spectrum[key][1], key


def distillable_test(lam: Estimate, c: Estimate, include_lambda_sigma: bool = True) -> float:
    """z-score of C/2 - lambda_max; capped when the combined sigma vanishes."""
    sl = lam[1] if include_lambda_sigma else 0.0
    sigma = math.hypot(c[1] / 2, sl)
    margin = c[0] / 2 - lam[0]
    if sigma == 0:
        return math.copysign(SIGNIFICANCE_CAP, margin) if margin else 0.0
    return margin / sigma


@dataclass(frozen=True)
class FringeFit:
    frequency: int
    visibility: float
    phase: float
    refined_frequency: float
    chi2: float

    def __iter__(self):
        return iter((self.frequency, self.visibility, self.phase))


def _linear_fit(theta, y, w, f):
    a = np.column_stack([np.cos(f * theta), np.sin(f * theta)]) * w[:, None]
    coef, *_ = np.linalg.lstsq(a, y * w, rcond=None)
    resid = a @ coef - y * w
    return coef, float(resid @ resid)


def fringe_fit(samples, max_frequency: int | None = None, frequency: int | None = None) -> FringeFit:
    """Weighted least squares of v*cos(f*theta + phi).

    Integer frequencies 1..max_frequency are scanned and the best is refined
    continuously within half a unit; amplitude and phase come from the linear
    solve at the integer optimum. Passing ``frequency`` skips the scan, which
    is the only sound option when the angles alias (e.g. N samples at k*pi/N).
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 2:
        raise ValidationError("need at least two (theta, value, sigma) samples")
    theta, y, sig = arr.T
    if np.any(sig <= 0):
        raise ValidationError("sigmas must be positive")
    if np.ptp(theta) == 0:
        raise ValidationError("degenerate sample set: all angles equal")
    w = 1.0 / sig
    if frequency is None:
        max_frequency = max_frequency or (len(arr) - 1)
        if len(arr) < max_frequency + 1:
            raise ValidationError(f"{len(arr)} samples cannot resolve frequencies up to {max_frequency}")
        chis = [(_linear_fit(theta, y, w, f)[1], f) for f in range(1, max_frequency + 1)]
        frequency = min(chis)[1]
    coef, chi2 = _linear_fit(theta, y, w, frequency)
    res = minimize_scalar(lambda f: _linear_fit(theta, y, w, f)[1],
                          bounds=(frequency - 0.5, frequency + 0.5), method="bounded",
                          options={"xatol": 1e-8})
    refined = float(res.x) if res.fun < chi2 else float(frequency)
    a, b = coef
    return FringeFit(int(frequency), float(math.hypot(a, b)), float(math.atan2(-b, a)), refined, chi2)


@dataclass(frozen=True)
class RateBudget:
    efficiency: float
    rates: tuple[float, ...]
    ratios: tuple[float, ...]

    def as_dict(self) -> dict:
        return {"efficiency": self.efficiency,
                "rates": {f"N={2 * (i + 1)}": r for i, r in enumerate(self.rates)},
                "ratios": list(self.ratios)}


def rate_budget(pair_rates: Sequence[float], per_photon_eff: float, rep_rate: float = 76e6) -> RateBudget:
    """R_2k = rep * prod_{i<=k}(r_i/rep) * eta^(2(k-1)) * (1/2)^(k-1)."""
    rates = np.asarray(pair_rates, dtype=np.float64)
    if rates.size != 5:
        raise ValidationError(f"need five pair rates, got {rates.size}")
    if rep_rate <= 0 or not 0 < per_photon_eff <= 1:
        raise ValidationError("rep_rate must be positive and efficiency in (0, 1]")
    k = np.arange(rates.size)
    pred = rep_rate * np.cumprod(rates / rep_rate) * per_photon_eff ** (2 * k) * 0.5 ** k
    return RateBudget(float(per_photon_eff), tuple(pred), tuple(pred[1:] / pred[:-1]))


def fit_efficiency(pair_rates: Sequence[float], observed: Sequence[float], rep_rate: float = 76e6) -> float:
    """Single per-photon efficiency minimizing squared log residuals to observed rates."""
    obs = np.asarray(observed, dtype=np.float64)
    if obs.size != 5 or np.any(obs <= 0):
        raise ValidationError("need five positive observed rates")

    def cost(eta):
        pred = np.asarray(rate_budget(pair_rates, eta, rep_rate).rates)
        return float(np.sum(np.log(pred / obs) ** 2))

    return float(minimize_scalar(cost, bounds=(1e-3, 1.0), method="bounded", options={"xatol": 1e-10}).x)


@dataclass(frozen=True)
class AnalysisReport:
    n_photons: int
    population: Estimate
    coherence: Estimate
    expectations: tuple[tuple[int, float, float], ...]
    fidelity: Estimate
    genuine_significance: float
    lambda_max: tuple[float, float, str]
    distillable_significance: float
    distillable_significance_c_only: float
    sources: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_photons": self.n_photons,
            "population": {"value": self.population[0], "sigma": self.population[1]},
            "coherence": {"value": self.coherence[0], "sigma": self.coherence[1]},
            "expectations": [{"k": k, "value": v, "sigma": s} for k, v, s in self.expectations],
            "fidelity": {"value": self.fidelity[0], "sigma": self.fidelity[1]},
            "genuine_significance": self.genuine_significance,
            "lambda_max": {"value": self.lambda_max[0], "sigma": self.lambda_max[1],
                           "argmax": self.lambda_max[2]},
            "distillable_significance": self.distillable_significance,
            "distillable_significance_c_only": self.distillable_significance_c_only,
            "sources": dict(self.sources),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def analyze(hv: CountTable, angle_tables: Sequence[CountTable], sources: dict | None = None) -> AnalysisReport:
    n = hv.n_photons
    if any(t.n_photons != n for t in angle_tables):
        raise SettingMismatchError("angle tables and H/V table disagree on photon number")
    p = population(hv)
    c = coherence(angle_tables)
    f = fidelity(p, c)
    exps = tuple((k, *expectation_from_counts(t)) for k, t in enumerate(angle_tables))
    lam = lambda_max(lambda_spectrum(hv))
    return AnalysisReport(
        n_photons=n, population=p, coherence=c, expectations=exps, fidelity=f,
        genuine_significance=genuine_test(f), lambda_max=lam,
        distillable_significance=distillable_test(lam[:2], c),
        distillable_significance_c_only=distillable_test(lam[:2], c, include_lambda_sigma=False),
        sources=sources or {},
    )
