"""Command-line entry points for batch experiments and config validation."""

from __future__ import annotations

import argparse
import sys

from .baselines import SchemeId
from .config import SystemConfig
from .harness import ExperimentSpec, run_experiment


def _cmd_run(args) -> int:
    spec = ExperimentSpec.from_yaml(args.spec)
    overrides = {}
    if args.seed is not None:
        overrides["base"] = spec.base.replace(rng_seed=args.seed)
    if args.draws is not None:
        overrides["n_channel_draws"] = args.draws
    if args.output is not None:
        overrides["output_dir"] = args.output
    if overrides:
        d = spec.to_dict()
        d["base"] = (overrides.get("base") or spec.base).to_dict()
        d["n_channel_draws"] = overrides.get("n_channel_draws",
                                             spec.n_channel_draws)
        d["output_dir"] = overrides.get("output_dir", spec.output_dir)
        spec = ExperimentSpec.from_dict(d)

    result = run_experiment(spec, n_workers=args.workers)
    summary = result.summary
    for value in summary.values:
        for scheme in summary.schemes:
            cell = summary.cells.get((scheme, value))
            if cell is None:
                continue
            if cell.mean_energy is None:
                print(f"{spec.axis}={value:g} {scheme}: infeasible "
                      f"({cell.n_rows} draws)")
            else:
                print(f"{spec.axis}={value:g} {scheme}: "
                      f"{cell.mean_energy:.6g} W "
                      f"+/- {cell.ci_half_width:.2g} "
                      f"(feasible {cell.n_feasible}/{cell.n_rows})")
    print(f"wrote results to {result.output_dir}")
    if result.has_numerical_failure:
        n_bad = sum(r.status == "numerical_failure" for r in result.rows)
        print(f"error: {n_bad} rows hit a numerical failure", file=sys.stderr)
        return 1
    return 0


def _cmd_list_schemes(args) -> int:
    for scheme in SchemeId:
        print(scheme.value)
    return 0


def _cmd_validate_config(args) -> int:
    try:
        cfg = SystemConfig.from_yaml(args.config)
    except (ValueError, TypeError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    print(f"ok: N_t={cfg.n_antennas}, M={cfg.n_ris_elements}, "
          f"thresholds={list(cfg.rate_thresholds)} bits/s/Hz, "
          f"P_BS={cfg.p_bs_dbm} dBm, P_D2D={cfg.p_d2d_dbm} dBm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crsma-ris",
        description="Monte Carlo energy sweeps for RIS-assisted downlink schemes")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment spec")
    run.add_argument("spec", help="path to an experiment spec YAML file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the base RNG seed")
    run.add_argument("--draws", type=int, default=None,
                     help="override the number of channel draws per cell")
    run.add_argument("--output", default=None,
                     help="override the output directory")
    run.add_argument("--workers", type=int, default=1,
                     help="worker pool size (default 1)")
    run.set_defaults(func=_cmd_run)

    ls = sub.add_parser("list-schemes", help="print the available scheme ids")
    ls.set_defaults(func=_cmd_list_schemes)

    val = sub.add_parser("validate-config",
                         help="check a system config YAML file")
    val.add_argument("config", help="path to a system config YAML file")
    val.set_defaults(func=_cmd_validate_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
