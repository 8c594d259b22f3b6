"""Command-line workbench: ``ghzlab analyze|simulate|fringe|spectral|rates|witness``.

Exit codes: 0 success, 2 input or validation error, 3 incomplete fixture set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import WorkbenchConfig, load_config
from .errors import GhzlabError, IncompleteFixtureError
from .estimation import (analyze, distillable_test, fit_efficiency, fringe_fit, lambda_max,
                         lambda_spectrum, coherence, rate_budget)
from .fixtures import load_fixture_set, resolve_fixture_dir, verify_checksums
from .measurement import expectation_from_counts, outcome_distribution, sample_counts
from .network import build_ghz
from .simulate import fringe_samples, simulate
from .spectral import (SpectrumParams, apply_filters, gaussian_jsa, hom_visibility,
                       schmidt_purity)
from .tables import MeasurementSetting

EXIT_OK, EXIT_INPUT, EXIT_INCOMPLETE = 0, 2, 3

PAIR_RATES = (1.2e6, 1.07e6, 0.97e6, 0.89e6, 0.78e6)
OBSERVED_RATES = (1.2e6, 6000.0, 39.0, 0.2, 0.0011)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _load_config(path) -> WorkbenchConfig:
    return load_config(path) if path else WorkbenchConfig()


def cmd_analyze(args) -> int:
    if args.verify:
        problems = verify_checksums(args.fixture_dir)
        if problems:
            for p in problems:
                print(f"verify: {p}", file=sys.stderr)
            return EXIT_INPUT
    d = resolve_fixture_dir(args.fixture_dir)
    hv, angles = load_fixture_set(d, args.n)
    report = analyze(hv, angles, sources={"fixture": d.name})
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    hv, angles = load_fixture_set(args.fixture_dir, args.n)
    c = coherence(angles)
    spec = lambda_spectrum(hv)
    lam = lambda_max(spec)
    out = {
        "n_photons": hv.n_photons,
        "coherence": {"value": c[0], "sigma": c[1]},
        "lambda_max": {"value": lam[0], "sigma": lam[1], "argmax": lam[2]},
        "distillable_significance": distillable_test(lam[:2], c),
        "distillable_significance_c_only": distillable_test(lam[:2], c, include_lambda_sigma=False),
        "nonzero_lambdas": {k: v[0] for k, v in spec.items() if v[0] > 0},
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _resize(cfg, n_pairs: int):
    # a uniform per-edge overlap list survives a change of chain length
    ov = cfg.network.per_fusion_overlap
    if isinstance(ov, tuple):
        if len(set(ov)) > 1:
            raise GhzlabError("--n-pairs needs a uniform per_fusion_overlap")
        ov = ov[0] if ov else None
    net = replace(cfg.network, n_pairs=n_pairs, fusion_edges=None, per_fusion_overlap=ov if n_pairs > 1 else None)
    return replace(cfg, network=net)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.sampling.seed
    if seed is None:
        raise GhzlabError("simulate needs --seed (or sampling.seed in the config)")
    if args.n_pairs:
        cfg = _resize(cfg, args.n_pairs)
    sim = simulate(cfg, seed)
    out = sim.write(args.out)
    print(json.dumps({"out": str(out), **sim.truth}, indent=2))
    return EXIT_OK


def _fringe_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("theta", "value", "sigma"))
    for theta, v, s in rows:
        w.writerow((f"{theta:.12g}", f"{v:.12g}", f"{s:.6g}"))
    return buf.getvalue()


def cmd_fringe(args) -> int:
    if args.fixtures:
        hv, angles = load_fixture_set(args.fixtures, args.n)
        n = hv.n_photons
        rows = [(t.setting.theta, *expectation_from_counts(t)) for t in angles]
        fit = fringe_fit(rows, frequency=n)
        signs = [(-1) ** k * v > 0 for k, (_, v, _) in enumerate(rows)]
        summary = {"frequency": fit.frequency, "visibility": fit.visibility, "phase": fit.phase,
                   "alternating": all(signs), "mean_abs": float(np.mean([abs(v) for _, v, _ in rows]))}
    else:
        cfg = _load_config(args.config)
        if args.n_pairs is not None or args.n == 1:
            cfg = _resize(cfg, max(1, args.n_pairs or 1))
        build = build_ghz(cfg.network, cfg.source)
        n = build.n_photons
        points = args.points or cfg.measurement.fringe_points or max(4 * n + 2, 24)
        if args.n == 1:
            rows = _single_photon_fringe(points)
            n = 1
        elif args.seed is not None:
            rows = []
            for i, theta in enumerate(np.linspace(0, math.pi, points, endpoint=False)):
                d = outcome_distribution(build, MeasurementSetting(n, float(theta)))
                rows.append((float(theta), *expectation_from_counts(
                    sample_counts(d, cfg.sampling.theta_total, args.seed, i))))
        else:
            rows = [(t, v, 1.0) for t, v in fringe_samples(build, points)]
        fit = fringe_fit(rows, max_frequency=min(len(rows) - 1, 2 * n + 2))
        summary = {"frequency": fit.frequency, "visibility": fit.visibility, "phase": fit.phase,
                   "refined_frequency": fit.refined_frequency}
    text = _fringe_csv(rows) + "# fit " + json.dumps(summary) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _single_photon_fringe(points: int):
    from .state import PureState, Role, normalize
    plus = normalize(PureState({((1, 0, 0, 1),): 1.0, ((1, 1, 0, 1),): 1.0}, {1: Role.ORDINARY}))
    rows = []
    for theta in np.linspace(0, math.pi, points, endpoint=False):
        d = outcome_distribution(plus, MeasurementSetting(1, float(theta)))
        rows.append((float(theta), d.expectation(), 1.0))
    return rows


def _spectrum_params(args) -> SpectrumParams:
    base = _load_config(args.config).spectral
    over = {k: v for k, v in {
        "fwhm_e": args.fwhm_e, "fwhm_o": args.fwhm_o, "tilt_deg": args.tilt,
        "filter_e_fwhm": args.filter_e, "filter_o_fwhm": args.filter_o, "n_points": args.points,
    }.items() if v is not None}
    return replace(base, **over)


def cmd_spectral(args) -> int:
    params = _spectrum_params(args)
    raw = gaussian_jsa(replace(params, filter_e_fwhm=math.inf, filter_o_fwhm=math.inf))
    filt = apply_filters(raw, params.filter_e_fwhm, params.filter_o_fwhm, params.filter_order)
    purity = schmidt_purity(filt)
    if args.sweep:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("scale", "filter_e_fwhm", "filter_o_fwhm", "purity"))
        fe = params.filter_e_fwhm if math.isfinite(params.filter_e_fwhm) else 3.0
        fo = params.filter_o_fwhm if math.isfinite(params.filter_o_fwhm) else 8.0
        for scale in np.geomspace(0.1, 10.0, args.sweep):
            js = apply_filters(raw, fe * scale, fo * scale, params.filter_order)
            w.writerow((f"{scale:.6g}", f"{fe * scale:.6g}", f"{fo * scale:.6g}", f"{schmidt_purity(js):.10f}"))
        _emit(buf.getvalue(), args.out)
        return EXIT_OK
    report = {
        "params": {k: (v if not (isinstance(v, float) and math.isinf(v)) else "inf")
                   for k, v in vars(params).items()},
        "purity_unfiltered": schmidt_purity(raw),
        "purity": purity,
        "transmission": filt.transmission,
        "correlation": filt.correlation(),
        "hom_visibility": hom_visibility(purity, purity),
    }
    if args.grid_out:
        Path(args.grid_out).write_bytes(filt.to_csv().encode("utf-8"))
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_rates(args) -> int:
    pairs = args.pair_rates or PAIR_RATES
    observed = args.observed or OBSERVED_RATES
    eta = args.eta if args.eta is not None else fit_efficiency(pairs, observed, args.rep_rate)
    budget = rate_budget(pairs, eta, args.rep_rate)
    out = budget.as_dict()
    out["observed"] = {f"N={2 * (i + 1)}": r for i, r in enumerate(observed)}
    out["predicted_over_observed"] = [p / o for p, o in zip(budget.rates, observed)]
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghzlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="population, coherence, fidelity and witnesses from a fixture set")
    p.add_argument("fixture_dir")
    p.add_argument("--n", type=int, help="photon number (checked against the tables)")
    p.add_argument("--verify", action="store_true", help="check checksums.json before analyzing")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("witness", help="lambda spectrum and distillability test only")
    p.add_argument("fixture_dir")
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("simulate", help="sample a fixture set from a configured network")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-pairs", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fringe", help="<M_theta> samples and a sinusoid fit")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config")
    src.add_argument("--fixtures")
    p.add_argument("--n", type=int, help="photon number; 1 gives the single-photon fringe")
    p.add_argument("--n-pairs", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int, help="sample Poisson counts instead of exact values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("spectral", help="joint-spectrum purity, transmission and HOM visibility")
    p.add_argument("--config")
    p.add_argument("--fwhm-e", type=float)
    p.add_argument("--fwhm-o", type=float)
    p.add_argument("--tilt", type=float)
    p.add_argument("--filter-e", type=float)
    p.add_argument("--filter-o", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--sweep", type=int, metavar="K", help="emit purity vs. filter width at K scales")
    p.add_argument("--grid-out", help="write the filtered |JSA|^2 grid as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("rates", help="N-fold count-rate budget")
    p.add_argument("--pair-rates", type=float, nargs=5)
    p.add_argument("--observed", type=float, nargs=5)
    p.add_argument("--eta", type=float, help="per-photon efficiency; fitted when omitted")
    p.add_argument("--rep-rate", type=float, default=76e6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rates)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IncompleteFixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except GhzlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
