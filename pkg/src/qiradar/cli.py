"""Command-line front end.

Subcommands::

    bounds   closed-form error-probability bounds, optionally swept over one parameter
    fig3     bound-crossover sweep: CS/QI Chernoff bounds and the CS lower bound vs M
    fig5     five-radar ROC comparison (analytic curves, or desk-scale Monte Carlo)
    roc      one radar's ROC by a chosen method
    mc       raw Monte Carlo trial batches for one radar, both hypotheses

Every output CSV is paired with a ``*.manifest.json`` sufficient to regenerate
it bit-identically.  Exit codes: 0 success, 2 validation/usage error, 3 budget
refusal.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bounds import (
    cs_bhattacharyya_lower_bound,
    cs_chernoff_bound,
    crossover_m,
    opa_chernoff_bound,
    qi_chernoff_bound,
)
from .montecarlo import BudgetError, FadingModel, empirical_roc, run_trials
from .reporting import RunManifest, manifest_path, write_csv
from .rocs import (
    RocMethod,
    SaddlePointError,
    ccn_asymptotic_roc,
    cs_het_roc,
    cs_hom_roc,
    saddlepoint_roc_for_radar,
)
from .scenario import Hypothesis, Radar, RadarScenario, ScenarioError, load_scenario

_SCENARIO_FLOAT_FIELDS = (
    "kappa", "theta", "n_s", "n_b", "n_i", "n_f", "g_a",
    "g_opa", "kappa_idler", "kappa_match",
)
_SCENARIO_INT_FIELDS = ("m_modes", "n_pulses", "k_bins")

_BOUND_BUILDERS = {
    "cs-ub": lambda m, k, ns, nb: cs_chernoff_bound(m, k, ns, nb),
    "qi-ub": lambda m, k, ns, nb: qi_chernoff_bound(m, k, ns, nb),
    "cs-lb": lambda m, k, ns, nb: cs_bhattacharyya_lower_bound(m, k, ns, nb),
    "opa-ub": lambda m, k, ns, nb: opa_chernoff_bound(m, k, ns, nb),
}

_ROC_METHODS = {
    Radar.CS_HET: (RocMethod.EXACT, RocMethod.MONTE_CARLO),
    Radar.CS_HOM: (RocMethod.EXACT, RocMethod.MONTE_CARLO),
    Radar.CCN: (RocMethod.SADDLEPOINT, RocMethod.ASYMPTOTIC, RocMethod.MONTE_CARLO),
    Radar.QCN: (RocMethod.SADDLEPOINT, RocMethod.MONTE_CARLO),
    Radar.QI_OPA: (RocMethod.SADDLEPOINT, RocMethod.MONTE_CARLO),
}

#: Desk-scale replacement parameters for Monte Carlo reproduction of fig5.
DESK_SCALE = {"kappa": 0.1, "n_s": 0.1, "m_modes": 2000}


def _parse_u64(text: str) -> int:
    value = int(text, 0)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _parse_count(text: str) -> int:
    value = float(text)
    if value <= 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("scenario")
    group.add_argument("--scenario", type=Path, default=None, metavar="JSON",
                       help="scenario file; flags below override its values")
    for name in _SCENARIO_FLOAT_FIELDS:
        group.add_argument(f"--{name.replace('_', '-')}", type=float, default=None,
                           dest=name, help=argparse.SUPPRESS)
    for name in _SCENARIO_INT_FIELDS:
        group.add_argument(f"--{name.replace('_', '-')}", type=_parse_count, default=None,
                           dest=name, help=argparse.SUPPRESS)
    run = common.add_argument_group("run")
    run.add_argument("--seed", type=_parse_u64, default=0)
    run.add_argument("--out", type=Path, default=None)
    run.add_argument("--budget", type=_parse_count, default=None,
                     help="max trials*m_modes per Monte Carlo run")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--no-plot", action="store_true", help="skip the PNG companion")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qiradar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"qiradar {__version__}")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", parents=[common],
                              help="closed-form bounds, optionally swept")
    p_bounds.add_argument("--sweep", action="append", default=None, metavar="P=LO:HI:Nlog",
                          help="sweep one of M, kappa, n_s, n_b (e.g. M=1e4:1e8:25log)")
    p_bounds.add_argument("--bounds", default="cs-ub,qi-ub,cs-lb",
                          help="comma list from: " + ",".join(_BOUND_BUILDERS))
    p_bounds.set_defaults(func=cmd_bounds)

    p_fig3 = sub.add_parser("fig3", parents=[common],
                            help="bound-crossover sweep over M")
    p_fig3.add_argument("--m-min", type=float, default=1e3)
    p_fig3.add_argument("--m-max", type=float, default=1e8)
    p_fig3.add_argument("--points", type=_parse_count, default=121)
    p_fig3.set_defaults(func=cmd_fig3)

    p_fig5 = sub.add_parser("fig5", parents=[common],
                            help="five-radar ROC comparison")
    p_fig5.add_argument("--mode", choices=("analytic", "mc-desk"), default="analytic")
    p_fig5.add_argument("--trials", type=_parse_count, default=200_000)
    p_fig5.add_argument("--pf-points", type=_parse_count, default=68)
    p_fig5.add_argument("--no-rescale", action="store_true",
                        help="mc-desk: simulate the scenario as given instead of desk scale")
    p_fig5.set_defaults(func=cmd_fig5)

    p_roc = sub.add_parser("roc", parents=[common], help="one radar's ROC")
    p_roc.add_argument("--radar", required=True, choices=[r.value for r in Radar])
    p_roc.add_argument("--method", required=True, choices=[m.value for m in RocMethod])
    p_roc.add_argument("--trials", type=_parse_count, default=100_000)
    p_roc.add_argument("--pf-min", type=float, default=None)
    p_roc.add_argument("--pf-max", type=float, default=0.5)
    p_roc.add_argument("--pf-points", type=_parse_count, default=68)
    p_roc.add_argument("--trace", action="store_true",
                       help="saddlepoint: also write the s-grid diagnostic trace")
    p_roc.set_defaults(func=cmd_roc)

    p_mc = sub.add_parser("mc", parents=[common], help="raw trial batches")
    p_mc.add_argument("--radar", required=True, choices=[r.value for r in Radar])
    p_mc.add_argument("--trials", type=_parse_count, default=10_000)
    p_mc.add_argument("--fading", choices=("none", "rayleigh"), default="none")
    p_mc.add_argument("--mean-kappa", type=float, default=0.05)
    p_mc.set_defaults(func=cmd_mc)
    return parser


def _scenario_from_args(args) -> RadarScenario:
    overrides = {
        name: getattr(args, name)
        for name in (*_SCENARIO_FLOAT_FIELDS, *_SCENARIO_INT_FIELDS)
        if getattr(args, name) is not None
    }
    return load_scenario(args.scenario, overrides)


def _manifest(args, command: str, scenario: RadarScenario, outputs: list[Path],
              base: Optional[Path] = None, **extras) -> None:
    argv = getattr(args, "_argv", None) or _reconstruct_argv(args, command)
    manifest = RunManifest(
        command=command,
        argv=list(argv),
        scenario=scenario.to_dict(),
        seed=getattr(args, "seed", None),
        workers=getattr(args, "workers", 1),
        budget=getattr(args, "budget", None),
        outputs=[str(p) for p in outputs],
        extras=extras,
        version=__version__,
    )
    manifest.write(manifest_path(base if base is not None else outputs[0]))


def _reconstruct_argv(args, command: str) -> list[str]:
    argv = [command]
    skip = {"func", "command", "_argv"}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    return argv


_SWEEP_RE = re.compile(
    r"^(?P<name>[A-Za-z_]+)=(?P<lo>[^:]+):(?P<hi>[^:]+):(?P<count>\d+)(?P<kind>log|lin)?$"
)
_SWEEP_PARAMS = {"M": "m_modes", "kappa": "kappa", "n_s": "n_s", "n_b": "n_b"}


def _parse_sweep(specs) -> Optional[tuple[str, np.ndarray]]:
    if not specs:
        return None
    if len(specs) > 1:
        raise ScenarioError("only one parameter may be swept at a time")
    match = _SWEEP_RE.match(specs[0])
    if not match:
        raise ScenarioError(f"malformed sweep spec {specs[0]!r} (want P=LO:HI:Nlog)")
    name = match.group("name")
    if name not in _SWEEP_PARAMS:
        raise ScenarioError(f"cannot sweep {name!r}; choose from {sorted(_SWEEP_PARAMS)}")
    lo, hi = float(match.group("lo")), float(match.group("hi"))
    count = int(match.group("count"))
    if count < 1 or lo <= 0 and (match.group("kind") or "log") == "log":
        raise ScenarioError(f"bad sweep range in {specs[0]!r}")
    if (match.group("kind") or "log") == "log":
        values = np.logspace(math.log10(lo), math.log10(hi), count)
    else:
        values = np.linspace(lo, hi, count)
    return _SWEEP_PARAMS[name], values


def cmd_bounds(args) -> int:
    scenario = _scenario_from_args(args)
    sweep = _parse_sweep(args.sweep)
    names = [n.strip() for n in args.bounds.split(",") if n.strip()]
    for name in names:
        if name not in _BOUND_BUILDERS:
            raise ScenarioError(f"unknown bound {name!r}; choose from {sorted(_BOUND_BUILDERS)}")
    out = args.out or Path("bounds.csv")
    base = {"m_modes": float(scenario.m_modes), "kappa": scenario.kappa,
            "n_s": scenario.n_s, "n_b": scenario.n_b}
    points = [dict(base)] if sweep is None else [
        dict(base, **{sweep[0]: float(v)}) for v in sweep[1]
    ]
    rows = []
    series: dict[str, list] = {name: [] for name in names}
    for point in points:
        for name in names:
            bound = _BOUND_BUILDERS[name](point["m_modes"], point["kappa"],
                                          point["n_s"], point["n_b"])
            rows.append((point["m_modes"], point["kappa"], point["n_s"], point["n_b"],
                         name, bound.total_exponent, bound.value, bound.regime_valid))
            series[name].append(bound.value)
    write_csv(out, "M,kappa,n_s,n_b,bound_name,exponent,value,regime_valid", rows)
    outputs = [out]
    if not args.no_plot:
        from .plots import save_bounds_figure

        sweep_name = sweep[0] if sweep else "m_modes"
        values = sweep[1] if sweep else [base["m_modes"]]
        outputs.append(save_bounds_figure(out.with_suffix(".png"), sweep_name, values, series))
    _manifest(args, "bounds", scenario, outputs, sweep=args.sweep, bounds=names)
    return 0


def cmd_fig3(args) -> int:
    scenario = _scenario_from_args(args)
    out = args.out or Path("fig3.csv")
    m_values = np.logspace(math.log10(args.m_min), math.log10(args.m_max), args.points)
    cs_ub, qi_ub, cs_lb = [], [], []
    for m in m_values:
        cs_ub.append(cs_chernoff_bound(m, scenario.kappa, scenario.n_s, scenario.n_b).value)
        qi_ub.append(qi_chernoff_bound(m, scenario.kappa, scenario.n_s, scenario.n_b).value)
        cs_lb.append(cs_bhattacharyya_lower_bound(m, scenario.kappa, scenario.n_s, scenario.n_b).value)
    write_csv(out, "M,pr_e_cs_ub,pr_e_qi_ub,pr_e_cs_lb",
              zip(m_values, cs_ub, qi_ub, cs_lb))
    m_star = crossover_m(scenario.kappa, scenario.n_s, scenario.n_b)
    outputs = [out]
    if not args.no_plot:
        from .plots import save_fig3

        outputs.append(save_fig3(out.with_suffix(".png"), m_values, cs_ub, qi_ub, cs_lb, m_star))
    _manifest(args, "fig3", scenario, outputs, crossover_m=m_star)
    return 0


def _analytic_fig5_curves(scenario: RadarScenario, pf_grid):
    curves = [cs_het_roc(scenario, pf_grid)]
    for radar in (Radar.CCN, Radar.QCN):
        curve, _ = saddlepoint_roc_for_radar(scenario, radar, pf_grid)
        curves.append(curve)
    curves.append(cs_hom_roc(scenario, pf_grid))
    curve, _ = saddlepoint_roc_for_radar(scenario, Radar.QI_OPA, pf_grid)
    curves.append(curve)
    return curves


def cmd_fig5(args) -> int:
    scenario = _scenario_from_args(args)
    out = args.out or Path("fig5.csv")
    outputs = [out]
    if args.mode == "analytic":
        pf_grid = np.logspace(-7.0, -0.3, args.pf_points)
        curves = _analytic_fig5_curves(scenario, pf_grid)
        rows = [row for curve in curves for row in curve.csv_rows()]
        write_csv(out, "pf,pd,radar,method", rows)
        if not args.no_plot:
            from .plots import save_fig5

            outputs.append(save_fig5(out.with_suffix(".png"), curves))
        _manifest(args, "fig5", scenario, outputs, mode="analytic")
        return 0

    # Desk-scale Monte Carlo reproduction: rescaled parameters keep the run
    # inside the sample budget while exercising every radar's simulator.
    desk = scenario if args.no_rescale else replace(scenario, **DESK_SCALE)
    pf_grid = np.logspace(-3.0, -0.3, max(8, args.pf_points // 4))
    estimates = []
    for radar in (Radar.CS_HET, Radar.CCN, Radar.QCN, Radar.CS_HOM, Radar.QI_OPA):
        batch_h0 = run_trials(desk, radar, Hypothesis.H0, args.trials, args.seed,
                              workers=args.workers, budget=args.budget)
        batch_h1 = run_trials(desk, radar, Hypothesis.H1, args.trials, args.seed,
                              workers=args.workers, budget=args.budget)
        estimates.append(empirical_roc(batch_h0, batch_h1, pf_grid))
    per_radar = []
    for est in estimates:
        radar_out = out.with_name(f"{out.stem}_{est.radar.value.replace('-', '_')}{out.suffix}")
        est.write_csv(radar_out)
        per_radar.append(radar_out)
    outputs = per_radar
    if not args.no_plot:
        from .plots import save_roc_estimates

        outputs.append(save_roc_estimates(out.with_suffix(".png"), estimates))
    _manifest(args, "fig5", scenario, outputs, base=out, mode="mc-desk",
              desk_scenario=desk.to_dict(), trials=args.trials)
    return 0


def cmd_roc(args) -> int:
    scenario = _scenario_from_args(args)
    radar = Radar(args.radar)
    method = RocMethod(args.method)
    allowed = _ROC_METHODS[radar]
    if method not in allowed:
        raise ScenarioError(
            f"method {method.value!r} does not apply to radar {radar.value!r}; "
            f"valid methods: {', '.join(m.value for m in allowed)}"
        )
    out = args.out or Path("roc.csv")
    pf_min = args.pf_min if args.pf_min is not None else (
        1e-3 if method is RocMethod.MONTE_CARLO else 1e-7
    )
    pf_grid = np.logspace(math.log10(pf_min), math.log10(args.pf_max), args.pf_points)
    outputs = [out]
    trace = None
    if method is RocMethod.MONTE_CARLO:
        batch_h0 = run_trials(scenario, radar, Hypothesis.H0, args.trials, args.seed,
                              workers=args.workers, budget=args.budget)
        batch_h1 = run_trials(scenario, radar, Hypothesis.H1, args.trials, args.seed,
                              workers=args.workers, budget=args.budget)
        estimate = empirical_roc(batch_h0, batch_h1, pf_grid)
        estimate.write_csv(out)
        if not args.no_plot:
            from .plots import save_roc_estimates

            outputs.append(save_roc_estimates(out.with_suffix(".png"), [estimate]))
    else:
        if method is RocMethod.EXACT:
            curve = cs_het_roc(scenario, pf_grid) if radar is Radar.CS_HET else cs_hom_roc(scenario, pf_grid)
        elif method is RocMethod.ASYMPTOTIC:
            curve = ccn_asymptotic_roc(scenario, pf_grid)
        else:
            curve, trace = saddlepoint_roc_for_radar(scenario, radar, pf_grid)
        write_csv(out, "pf,pd,radar,method", curve.csv_rows())
        if args.trace and trace is not None:
            trace_out = out.with_name(out.stem + "_trace" + out.suffix)
            write_csv(trace_out, "s,mu,mu_dot,mu_ddot,pf,pm",
                      zip(trace.s, trace.mu, trace.mu_dot, trace.mu_ddot, trace.pf, trace.pm))
            outputs.append(trace_out)
        if not args.no_plot:
            from .plots import save_roc_curve

            outputs.append(save_roc_curve(out.with_suffix(".png"), curve))
    _manifest(args, "roc", scenario, outputs, radar=radar.value, method=method.value,
              trials=args.trials if method is RocMethod.MONTE_CARLO else None)
    return 0


def cmd_mc(args) -> int:
    scenario = _scenario_from_args(args)
    radar = Radar(args.radar)
    fading = (
        FadingModel.rayleigh(args.mean_kappa) if args.fading == "rayleigh" else FadingModel.none()
    )
    out = args.out or Path("mc.csv")
    batches = {}
    for hyp in (Hypothesis.H0, Hypothesis.H1):
        batches[hyp] = run_trials(scenario, radar, hyp, args.trials, args.seed,
                                  fading=fading if fading.kind != "none" else None,
                                  workers=args.workers, budget=args.budget)
    outputs = []
    for hyp, batch in batches.items():
        hyp_out = out.with_name(f"{out.stem}_{hyp.value}{out.suffix}")
        batch.write_csv(hyp_out)
        outputs.append(hyp_out)
    if not args.no_plot:
        from .plots import save_trial_histogram

        outputs.append(save_trial_histogram(out.with_suffix(".png"),
                                            batches[Hypothesis.H0], batches[Hypothesis.H1]))
    _manifest(args, "mc", scenario, outputs, base=out, radar=radar.value, trials=args.trials,
              fading=fading.kind, engine=batches[Hypothesis.H0].engine)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    args._argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"qiradar: budget refusal: {exc}", file=sys.stderr)
        return 3
    except (ScenarioError, SaddlePointError) as exc:
        print(f"qiradar: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
