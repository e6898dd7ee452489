"""Command line entry point.

Subcommands
-----------
simulate   generate one TVAR realization and write parameter/realization CSVs
run        Monte Carlo experiment: per-replication losses, summary, plot data
check      seeded property suites (regret, lemma-a2, decay, equivalence, all)
bench      wall-time/memory benchmark with linear-scaling gates

Exit codes: 0 success, 1 configuration error, 2 property violation,
3 runtime failure.  When no ``--seed`` is given the environment variable
``AGGFC_SEED`` is consulted before falling back to the config file.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import csvio
from ._accel import backend_name
from .bench import run_bench
from .checks import all_suites, decay_suite, equivalence_suite, exp_concavity_suite, regret_suite
from .config import ConfigError, ExperimentConfig, load_config
from .evaluation import load_params, resolve_eta, run_experiment
from .predictors import build_nlms_bank
from .tvar import simulate_tvar

__all__ = ["main"]


def _resolve_seed(args_seed):
    if args_seed is not None:
        return args_seed
    env = os.environ.get("AGGFC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"AGGFC_SEED must be an integer, got {env!r}") from exc
    return None


def _load(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    seed = _resolve_seed(getattr(args, "seed", None))
    if seed is not None:
        overrides["base_seed"] = seed
    if getattr(args, "replications", None) is not None:
        overrides["replications"] = args.replications
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    if getattr(args, "strategy", None) is not None:
        overrides["strategies"] = {"1": (1,), "2": (2,), "both": (1, 2)}[args.strategy]
    if getattr(args, "eta_mode", None) is not None:
        overrides["eta_mode"] = args.eta_mode
    if getattr(args, "eta", None) is not None:
        overrides["eta_value"] = args.eta
        overrides.setdefault("eta_mode", "manual")
    if getattr(args, "export_weights", False):
        overrides["export_weights"] = True
    return config.with_overrides(**overrides)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(config):
    # parameter paths are part of the configuration: a missing or unstable
    # file is a config error, reported before any computation starts
    try:
        return load_params(config)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args) -> int:
    config = _load(args)
    params = _params(config)
    out = _outdir(args)
    realization = simulate_tvar(params, config.T, config.innovations, config.base_seed)
    csvio.write_params_csv(out / "params.csv", params)
    csvio.write_realization_csv(out / "realization.csv", realization)
    var = float(np.var(realization.x))
    print(f"T={config.T} d={params.d} seed={config.base_seed}")
    print(f"max|x|={np.max(np.abs(realization.x)):.6g} sample_variance={var:.6g}")
    print(f"wrote {out / 'params.csv'} and {out / 'realization.csv'}")
    return 0


def cmd_run(args) -> int:
    config = _load(args)
    params = _params(config)
    report = run_experiment(config, params=params)
    out = _outdir(args)
    csvio.write_losses_csv(out / "losses.csv", report)
    csvio.write_summary_csv(out / "summary.csv", report)
    csvio.write_plot_data(out / "plot_data.json", report)
    for s, trace in report.weight_traces.items():
        csvio.write_weights_csv(out / f"weights_strategy_{s}.csv", trace)
    if args.svg:
        csvio.write_boxplot_svg(out / "boxplot.svg", report)
    spec, _ = build_nlms_bank(
        config.T, beta_0=config.beta_0, c_mu=config.c_mu, d=config.d,
        eps=config.eps, clip=config.clip,
    )
    manifest = {
        "backend": backend_name(),
        "replications_requested": config.replications,
        "replications_completed": report.n_replications,
        "failures": [{"replication": r, "error": msg} for r, msg in report.failures],
        "bank": spec.to_dict(),
        "etas": {str(s): resolve_eta(config, s, params, spec.N) for s in config.strategies},
        "base_seed": config.base_seed,
        "strategies": list(config.strategies),
    }
    with open(out / "MANIFEST.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for pid, five in report.five_number().items():
        print(f"{pid}: median={five[2]:.6g} iqr={five[3] - five[1]:.6g}")
    if report.failures:
        print(f"{len(report.failures)} replication(s) failed; see MANIFEST.json", file=sys.stderr)
        return 3
    print(f"wrote results to {out}")
    return 0


_SUITES = {
    "equivalence": equivalence_suite,
    "regret": regret_suite,
    "lemma-a2": exp_concavity_suite,
    "decay": decay_suite,
}


def cmd_check(args) -> int:
    results = all_suites() if args.suite == "all" else [_SUITES[args.suite]()]
    failed = False
    for res in results:
        print(res.summary())
        if not res.passed:
            failed = True
            if args.out:
                out = _outdir(args)
                path = out / f"violations_{res.name}.json"
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(res.violations, fh, indent=2, sort_keys=True)
                    fh.write("\n")
                print(f"violations written to {path}", file=sys.stderr)
    return 2 if failed else 0


def cmd_bench(args) -> int:
    report = run_bench(compare_backends=not args.no_compare)
    scaling = report["scaling"]
    print(f"active backend: {scaling['active_backend']}")
    for backend in ("active", "python"):
        if backend not in scaling:
            continue
        for row in scaling[backend]["times"]:
            print(
                f"[{backend}] T={row['T']}: {row['seconds'] * 1e3:.3f} ms "
                f"({row['us_per_step']:.3f} us/step)"
            )
        print(
            f"[{backend}] wall ratio (T hi/lo) = {scaling[backend]['wall_ratio_hi_lo']:.2f}, "
            f"N-doubling per-step ratio = {scaling[backend]['n_doubling_per_step_ratio']:.2f}"
        )
    if "speedup_python_over_active" in scaling:
        print(f"python/active speedup at T={scaling['horizons'][0]}: "
              f"{scaling['speedup_python_over_active']:.1f}x")
    mem = report["memory"]
    for T, peak in mem["peak_bytes"].items():
        print(f"streaming peak memory at T={T}: {peak / 1024:.1f} KiB")
    print(f"memory ratio = {mem['ratio_hi_lo']:.2f}")
    gates = report["gates"]
    for key in ("wall_ratio_ok", "n_doubling_ok", "memory_ok"):
        print(f"{key}: {'pass' if gates[key] else 'FAIL'}")
    if args.out:
        out = _outdir(args)
        with open(out / "bench.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return 0 if gates["all_ok"] else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggfc",
        description="Exponential-weight aggregation of NLMS forecasters on TVAR streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory")
    common.add_argument("--seed", type=int, metavar="U64", help="override the base seed")
    common.add_argument("--jobs", type=int, metavar="K", help="parallel replication workers")
    common.add_argument("--replications", type=int, metavar="R")
    common.add_argument("--strategy", choices=("1", "2", "both"))
    common.add_argument("--eta-mode", choices=("corollary", "adaptive", "manual"))
    common.add_argument("--eta", type=float, metavar="F", help="manual learning rate")

    p = sub.add_parser("simulate", parents=[common], help="write one simulated path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", parents=[common], help="run the Monte Carlo experiment")
    p.add_argument("--svg", action="store_true", help="also render a boxplot SVG")
    p.add_argument(
        "--export-weights", action="store_true",
        help="write the first replication's weight trajectories as CSV",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="run a property suite")
    p.add_argument(
        "suite", choices=("regret", "lemma-a2", "decay", "equivalence", "all"), nargs="?",
        default="all",
    )
    p.add_argument("--out", metavar="DIR", default=None, help="where to dump violations")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="benchmark scaling and memory")
    p.add_argument("--out", metavar="DIR", default=None)
    p.add_argument("--no-compare", action="store_true", help="skip the python backend")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
