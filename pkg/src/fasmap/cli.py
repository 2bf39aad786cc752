"""Command-line interface.

Subcommands: gen-scenario, simulate, sample, reconstruct, benchmark,
export-slices. Global flags: --config, --seed, --out-dir, --threads,
--verbose.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import antenna, channel, harness, sampling, scenario as scenario_mod
from .config import (ExperimentConfig, default_experiment_config,
                     load_experiment_config, save_experiment_config)


def _add_common(parser):
    parser.add_argument("--config", type=Path, default=None,
                        help="experiment config TOML (defaults built in)")
    parser.add_argument("--seed", type=int, default=None,
                        help="experiment seed (default: first seed in config)")
    parser.add_argument("--out-dir", type=Path, default=None,
                        help="output directory (default: config out_dir)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasmap",
        description="Pixel-antenna radio map simulation and reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario",
                       help="write the realized scenario and codebook files")
    _add_common(p)

    p = sub.add_parser("simulate", help="write the ground-truth RSS tensor")
    _add_common(p)

    p = sub.add_parser("sample", help="write the observation set")
    _add_common(p)
    p.add_argument("--ratio", type=float, default=None,
                   help="sampling ratio (default: first ratio in config)")

    p = sub.add_parser("reconstruct", help="reconstruct from an observation set")
    _add_common(p)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--method", required=True,
                   choices=["pr_lrtc", "lrtc", "pr_only", "knn", "kriging"])

    p = sub.add_parser("benchmark", help="full sweep over seeds/ratios/methods")
    _add_common(p)

    p = sub.add_parser("export-slices", help="export tensor mode slices as CSV grids")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True,
                   help="RMT header file (.json)")
    p.add_argument("--modes", type=str, default="0",
                   help="comma-separated mode indices")

    p = sub.add_parser("write-config", help="write the default config TOML")
    _add_common(p)
    p.add_argument("--path", type=Path, default=Path("fasmap.toml"))
    return parser


def _load(args) -> ExperimentConfig:
    cfg = (load_experiment_config(args.config) if args.config
           else default_experiment_config())
    if args.out_dir is not None:
        from dataclasses import replace
        cfg = replace(cfg, out_dir=str(args.out_dir))
    return cfg


def _world(cfg, args):
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    return seed, harness.build_world(cfg, seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _load(args)
    out = Path(cfg.out_dir)

    if args.command == "write-config":
        save_experiment_config(args.path, cfg)
        print(f"wrote {args.path}")
        return 0

    if args.command == "benchmark":
        records, code = harness.run_experiment(cfg, threads=args.threads,
                                               verbose=args.verbose)
        n_err = sum(r.status != "ok" for r in records)
        print(f"{len(records)} cells, {n_err} errors -> {out / 'results.csv'}")
        return code

    if args.command == "export-slices":
        values, _ = channel.load_rmt(args.input)
        modes = [int(s) for s in args.modes.split(",") if s]
        paths = harness.export_map_slices(values, modes, out)
        for p in paths:
            print(f"wrote {p}")
        return 0

    out.mkdir(parents=True, exist_ok=True)
    seed, (scen, codebook, prior, truth) = _world(cfg, args)

    if args.command == "gen-scenario":
        scenario_mod.save_scenario(out / "scenario.toml", scen)
        antenna.save_codebook(out / "codebook.txt", codebook)
        print(f"wrote {out / 'scenario.toml'} and {out / 'codebook.txt'}")
        return 0

    if args.command == "simulate":
        channel.save_rmt(out / "truth.rmt.json", truth,
                         scenario_mod.scenario_hash(scen), seed)
        print(f"wrote {out / 'truth.rmt.json'}")
        return 0

    ratio = args.ratio if getattr(args, "ratio", None) is not None else cfg.ratios[0]
    r_idx = cfg.ratios.index(ratio) if ratio in cfg.ratios else 0
    obs = sampling.sample_observations(
        truth, ratio, cfg.noise_sigma, harness.sampling_seed(seed, r_idx),
        harness.excluded_cells(cfg, scen, prior))

    if args.command == "sample":
        sampling.export_omega_csv(out / "omega.csv", obs)
        channel.save_rmt(out / "observed.rmt.json", obs.values,
                         scenario_mod.scenario_hash(scen), seed)
        print(f"wrote {out / 'omega.csv'} ({obs.n_observed} observations)")
        return 0

    if args.command == "reconstruct":
        recon, report = harness.reconstruct(args.method, obs, scen, prior, cfg)
        channel.save_rmt(out / f"{args.method}.rmt.json", recon,
                         scenario_mod.scenario_hash(scen), seed)
        if report is not None:
            (out / f"{args.method}_report.json").write_text(report.to_json(),
                                                            encoding="utf-8")
        err = harness.rmse_db(recon, truth)
        print(f"{args.method}: rmse={err:.3f} dB -> {out / (args.method + '.rmt.json')}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
