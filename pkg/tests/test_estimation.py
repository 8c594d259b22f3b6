import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghzlab.errors import SettingMismatchError, ValidationError
from ghzlab.estimation import (SIGNIFICANCE_CAP, analyze, coherence, distillable_test, fidelity,
                               fit_efficiency, fringe_fit, genuine_test, lambda_max, lambda_spectrum,
                               population, rate_budget)
from ghzlab.fixtures import bundled_names, load_fixture_set
from ghzlab.tables import CountTable, MeasurementSetting

N10_LOW = [(73, 30), (39, 98), (84, 33), (29, 79), (69, 23), (29, 80), (69, 28), (37, 90), (68, 27), (33, 76)]
N10_HIGH = [(58, 35), (39, 67), (58, 32), (36, 55), (66, 38), (38, 57), (63, 34), (38, 57), (56, 36), (42, 69)]


def angle_tables(pairs):
    n = len(pairs)
    return [CountTable(MeasurementSetting.angle(k, n), {"+" * n: p, "-" + "+" * (n - 1): m})
            for k, (p, m) in enumerate(pairs)]


def hv_table(n, desired, others):
    counts = {"H" * n: desired}
    if others:
        counts["H" * (n - 1) + "V"] = others
    return CountTable(MeasurementSetting.hv(n), counts)


class TestPopulation:
    @pytest.mark.parametrize("desired, others, value, sigma", [(102, 42, 0.708, 0.038), (198, 124, 0.615, 0.027)])
    def test_published(self, desired, others, value, sigma):
        p, s = population(hv_table(10, desired, others))
        assert round(p, 3) == value and round(s, 3) == sigma

    def test_all_h(self):
        assert population(hv_table(4, 10, 0))[0] == 1.0

    def test_requires_hv(self):
        with pytest.raises(SettingMismatchError):
            population(angle_tables([(1, 1), (1, 1)])[0])


class TestCoherence:
    @pytest.mark.parametrize("pairs, value, sigma", [(N10_LOW, 0.438, 0.027), (N10_HIGH, 0.244, 0.031)])
    def test_published(self, pairs, value, sigma):
        c, s = coherence(angle_tables(pairs))
        assert round(c, 3) == value and round(s, 3) == sigma

    def test_ideal(self):
        pairs = [(10, 0) if k % 2 == 0 else (0, 10) for k in range(6)]
        assert coherence(angle_tables(pairs))[0] == 1

    def test_wrong_angles(self):
        tables = angle_tables(N10_LOW)
        with pytest.raises(SettingMismatchError):
            coherence(tables[1:] + tables[:1])
        with pytest.raises(SettingMismatchError):
            coherence(tables[:9])


class TestFidelityAndWitnesses:
    @pytest.mark.parametrize("p, c, f, s", [((0.708, 0.038), (0.438, 0.027), 0.573, 0.023),
                                            ((0.615, 0.027), (0.244, 0.031), 0.429, 0.021),
                                            ((1, 0), (1, 0), 1, 0)])
    def test_fidelity(self, p, c, f, s):
        got = fidelity(p, c)
        assert got[0] == pytest.approx(f, abs=1e-3) and got[1] == pytest.approx(s, abs=5e-4)

    @pytest.mark.parametrize("f, z", [((0.573, 0.023), 3.2), ((0.429, 0.021), -3.4), ((0.5, 0.02), 0.0)])
    def test_genuine(self, f, z):
        assert genuine_test(f) == pytest.approx(z, abs=0.05)

    def test_genuine_needs_sigma(self):
        with pytest.raises(ValidationError):
            genuine_test((0.6, 0.0))

    def test_distillable_published(self):
        assert distillable_test((0.0093, 0.0005), (0.244, 0.031)) == pytest.approx(7.2, abs=0.1)

    def test_distillable_cap(self):
        assert distillable_test((0.0, 0.0), (1.0, 0.0)) == SIGNIFICANCE_CAP


class TestLambda:
    def test_ideal_is_zero(self):
        t = CountTable(MeasurementSetting.hv(4), {"HHHH": 5, "VVVV": 7})
        assert all(v == 0 for v, _ in lambda_spectrum(t).values())

    def test_uniform(self):
        n = 4
        counts = {format(i, "04b").replace("0", "H").replace("1", "V"): 3 for i in range(16)}
        spec = lambda_spectrum(CountTable(MeasurementSetting.hv(n), counts))
        assert len(spec) == 2 ** (n - 1) - 1
        assert all(v == pytest.approx(2 ** -n) for v, _ in spec.values())

    def test_keys_use_smaller_complement(self):
        t = CountTable(MeasurementSetting.hv(3), {"VHH": 4, "HVV": 2, "HHH": 10})
        spec = lambda_spectrum(t)
        assert spec["HVV"][0] == pytest.approx(6 / 32) and "VHH" not in spec

    def test_high_power_fixture(self, fixture_dir):
        hv, _ = load_fixture_set(fixture_dir / "n10_0.7W")
        value, sigma, key = lambda_max(lambda_spectrum(hv))
        assert round(value, 4) == 0.0093
        assert 0.003 < sigma < 0.005

    @pytest.mark.parametrize("name", bundled_names())
    def test_pairs_and_population_sum_to_one(self, fixture_dir, name):
        hv, _ = load_fixture_set(fixture_dir / name)
        spec = lambda_spectrum(hv)
        total = 2 * math.fsum(v for v, _ in spec.values()) + population(hv)[0]
        assert total == pytest.approx(1, abs=1e-12)


class TestFixtureInvariants:
    @pytest.mark.parametrize("name", bundled_names())
    def test_alternating_signs(self, fixture_dir, name):
        report = analyze(*load_fixture_set(fixture_dir / name))
        assert all((-1) ** k * v > 0 for k, v, _ in report.expectations)

    @pytest.mark.parametrize("name", bundled_names())
    def test_distillable_at_least_genuine(self, fixture_dir, name):
        r = analyze(*load_fixture_set(fixture_dir / name))
        assert r.distillable_significance >= r.genuine_significance

    def test_six_photon_coherence(self, fixture_dir):
        _, angles = load_fixture_set(fixture_dir / "n6_0.57W")
        assert coherence(angles)[0] == pytest.approx(0.612, abs=0.002)

    def test_low_power_distillable(self, fixture_dir):
        r = analyze(*load_fixture_set(fixture_dir / "n10_0.57W"))
        assert r.distillable_significance_c_only == pytest.approx(15.2, abs=0.1)
        assert r.distillable_significance < r.distillable_significance_c_only

    def test_fixture_summaries_agree_with_tables(self, fixture_dir):
        for name in bundled_names():
            summary = json.loads((fixture_dir / name / "summary.json").read_text())
            hv, angles = load_fixture_set(fixture_dir / name)
            n = hv.n_photons
            assert hv["H" * n] + hv["V" * n] == summary["population_counts"]["desired"]
            assert hv.total - summary["population_counts"]["desired"] == summary["population_counts"]["others"]
            for row, t in zip(summary["eigenvalue_counts"], angles):
                assert t.parity_counts() == (row["plus"], row["minus"])

    def test_report_json_key_order(self, fixture_dir):
        r = analyze(*load_fixture_set(fixture_dir / "n8_0.57W"))
        keys = list(json.loads(r.to_json()))
        assert keys == ["n_photons", "population", "coherence", "expectations", "fidelity",
                        "genuine_significance", "lambda_max", "distillable_significance",
                        "distillable_significance_c_only", "sources"]
        assert r.fidelity[0] == (r.population[0] + r.coherence[0]) / 2


class TestFringeFit:
    def test_exact_with_midpoints(self):
        theta = np.arange(20) * math.pi / 20
        fit = fringe_fit([(t, math.cos(10 * t), 0.01) for t in theta], max_frequency=12)
        assert fit.frequency == 10
        assert fit.visibility == pytest.approx(1, abs=1e-9)
        assert fit.phase == pytest.approx(0, abs=1e-9)

    def test_noisy(self):
        rng = np.random.default_rng(17)
        theta = np.linspace(0, math.pi, 41, endpoint=False)
        y = 0.438 * np.cos(10 * theta) + rng.normal(0, 0.05, theta.size)
        fit = fringe_fit(np.column_stack([theta, y, np.full(theta.size, 0.05)]), max_frequency=15)
        assert fit.frequency == 10
        assert fit.visibility == pytest.approx(0.438, abs=0.05)

    def test_single_photon(self):
        theta = np.linspace(0, math.pi, 9, endpoint=False)
        assert fringe_fit([(t, math.cos(t), 0.1) for t in theta]).frequency == 1

    def test_phase_sign(self):
        theta = np.linspace(0, math.pi, 30, endpoint=False)
        fit = fringe_fit([(t, 0.5 * math.cos(4 * t + 0.3), 0.1) for t in theta], max_frequency=8)
        assert (fit.frequency, fit.visibility, fit.phase) == pytest.approx((4, 0.5, 0.3), abs=1e-9)

    def test_degenerate(self):
        with pytest.raises(ValidationError):
            fringe_fit([(0.1, 1, 0.1), (0.1, 0.9, 0.1), (0.1, 1.1, 0.1)])
        with pytest.raises(ValidationError):
            fringe_fit([(0.0, 1, 0.1)])

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            fringe_fit([(t, 1, 0.1) for t in (0, 1, 2)], max_frequency=5)

    def test_fixed_frequency(self):
        n = 10
        rows = [(k * math.pi / n, (-1) ** k * 0.4, 0.05) for k in range(n)]
        fit = fringe_fit(rows, frequency=n)
        assert fit.visibility == pytest.approx(0.4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.floats(0.1, 1.0), st.floats(-1.5, 1.5))
    def test_recovers_synthetic(self, f, v, phi):
        theta = np.linspace(0, math.pi, 2 * 12 + 1, endpoint=False)
        fit = fringe_fit([(t, v * math.cos(f * t + phi), 0.1) for t in theta], max_frequency=12)
        assert fit.frequency == f and fit.visibility == pytest.approx(v, abs=1e-8)


class TestRates:
    PAIRS = [1.2e6, 1.07e6, 0.97e6, 0.89e6, 0.78e6]

    def test_two_photon_identity(self):
        assert rate_budget(self.PAIRS, 0.9).rates[0] == pytest.approx(1.2e6)

    def test_ideal_cost(self):
        rep = 76e6
        b = rate_budget([rep] * 5, 1.0, rep)
        assert b.rates == pytest.approx(tuple(rep * 2.0 ** -k for k in range(5)))

    def test_fitted_ratios(self):
        eta = fit_efficiency(self.PAIRS, [1.2e6, 6000, 39, 0.2, 0.0011])
        assert all(0.004 <= r <= 0.008 for r in rate_budget(self.PAIRS, eta).ratios)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            rate_budget(self.PAIRS[:4], 0.9)
