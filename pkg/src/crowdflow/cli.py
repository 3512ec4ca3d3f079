"""Command line: ``simulate``, ``sweep`` and ``bench``, each writing CSV files.

Usage:
    crowdflow simulate --width 96 --height 96 --agents-per-side 500 --steps 2000
    crowdflow sweep --model lem --densities 2560,5120 --repeats 3
    crowdflow bench --agents-per-side 10240 --steps 500 --threads 4
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Iterable, Sequence

from .config import ConfigError, ScenarioConfig, parse_config, read_config_file
from .engine import run
from .metrics import RunReport, SweepRow, aggregate

log = logging.getLogger("crowdflow")

STEPS_HEADER = ["run_id", "seed", "model", "executor", "step", "crossed_top", "crossed_bottom",
                "crossed_total", "moved"]
SUMMARY_HEADER = ["run_id", "seed", "model", "executor", "agents_total", "steps", "throughput",
                  "runtime_seconds"]
SWEEP_HEADER = ["agents_total", "model", "repeats", "throughput_mean", "throughput_sd",
                "runtime_mean_seconds"]
BENCH_HEADER = ["agents_total", "model", "executor", "threads", "steps", "seconds",
                "speedup_vs_seq"]

# flag name -> config key, for flags whose names differ from the key
_FLAG_KEYS = {"sel_mu": "mu_sel", "sel_sigma": "sigma_sel", "out": "out_dir"}
_CONFIG_FLAGS = [
    ("--width", int), ("--height", int), ("--agents-per-side", int), ("--steps", int),
    ("--seed", int), ("--repeats", int), ("--threads", int), ("--d0", float),
    ("--sel-mu", float), ("--sel-sigma", float), ("--alpha", float), ("--beta", float),
    ("--rho", float), ("--tau0", float), ("--q", float), ("--out", str),
]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _open_csv(out_dir: Path, name: str, header: Sequence[str]):
    fh = open(out_dir / name, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    return fh, writer


def default_densities(width: int, height: int) -> list[int]:
    """Forty evenly spaced totals, each 1/90 of the cells apart (2560..102400 on 480x480)."""
    unit = width * height / 90
    return [2 * round(k * unit / 2) for k in range(1, 41)]


def _runs(cfg: ScenarioConfig, timing: bool) -> Iterable[RunReport]:
    for i in range(cfg.repeats):
        rep = run(cfg, seed=cfg.seed + i)
        if not timing:
            rep.runtime = 0.0
        log.info("%s seed=%d agents=%d throughput=%d %.2fs", cfg.model, rep.seed,
                 cfg.agents_total, rep.throughput, rep.runtime)
        yield rep


def cmd_simulate(cfg: ScenarioConfig, timing: bool = True) -> list[RunReport]:
    cfg.check_capacity()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    steps_fh, steps_w = _open_csv(out, "steps.csv", STEPS_HEADER)
    with steps_fh:
        for run_id, rep in enumerate(_runs(cfg, timing)):
            ct, cb, moved = rep.crossed_top, rep.crossed_bottom, rep.moved
            for s in range(len(moved)):
                steps_w.writerow([run_id, rep.seed, cfg.model, rep.executor, s, ct[s], cb[s],
                                  ct[s] + cb[s], moved[s]])
            reports.append(rep)
    sum_fh, sum_w = _open_csv(out, "summary.csv", SUMMARY_HEADER)
    with sum_fh:
        for run_id, rep in enumerate(reports):
            sum_w.writerow([run_id, rep.seed, cfg.model, rep.executor, cfg.agents_total,
                            cfg.steps, rep.throughput, _fmt(rep.runtime)])
        if len(reports) > 1:
            agg = aggregate(reports)
            sum_w.writerow(["mean", "", cfg.model, cfg.executor, cfg.agents_total, cfg.steps,
                            _fmt(agg.throughput_mean), _fmt(agg.runtime_mean)])
    return reports


def _check_densities(cfg: ScenarioConfig, densities: Sequence[int]) -> list[ScenarioConfig]:
    configs = []
    for total in densities:
        if total < 0 or total % 2:
            raise ConfigError("densities", f"agent total {total} must be even and >= 0")
        dcfg = cfg.replace(agents_per_side=total // 2)
        dcfg.check_capacity()
        configs.append(dcfg)
    return configs


def cmd_sweep(cfg: ScenarioConfig, densities: Sequence[int], models: Sequence[str],
              timing: bool = True) -> list[SweepRow]:
    """Throughput over agent totals for each model; the same seeds for every model."""
    configs = _check_densities(cfg, densities)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    fh, writer = _open_csv(out, "sweep.csv", SWEEP_HEADER)
    with fh:
        for dcfg in configs:
            for model in models:
                row = aggregate(list(_runs(dcfg.replace(model=model), timing)))
                writer.writerow([row.agents_total, row.model, row.repeats,
                                 _fmt(row.throughput_mean), _fmt(row.throughput_sd),
                                 _fmt(row.runtime_mean)])
                fh.flush()
                rows.append(row)
    return rows


def _warm_up() -> None:
    for model in ("lem", "aco"):
        tiny = ScenarioConfig(width=16, height=16, agents_per_side=8, model=model, steps=2)
        run(tiny)
        run(tiny, executor="par", threads=2)


def cmd_bench(cfg: ScenarioConfig, densities: Sequence[int] | None = None,
              models: Sequence[str] = ("lem", "aco")) -> list[dict]:
    """Time sequential vs parallel stepping per density and model; writes bench.csv."""
    configs = _check_densities(cfg, densities or [cfg.agents_total])
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _warm_up()
    rows = []
    fh, writer = _open_csv(out, "bench.csv", BENCH_HEADER)
    with fh:
        for dcfg in configs:
            for model in models:
                mcfg = dcfg.replace(model=model)
                seq = run(mcfg, executor="seq").runtime
                par = run(mcfg, executor="par", threads=cfg.threads).runtime
                for kind, threads, secs in (("seq", 1, seq), ("par", cfg.threads, par)):
                    speedup = seq / secs if cfg.steps and secs > 0 else 1.0
                    row = dict(agents_total=mcfg.agents_total, model=model, executor=kind,
                               threads=threads, steps=cfg.steps, seconds=secs,
                               speedup_vs_seq=speedup)
                    writer.writerow([row["agents_total"], model, kind, threads, cfg.steps,
                                     _fmt(secs), _fmt(speedup)])
                    rows.append(row)
                log.info("bench %s agents=%d seq=%.3fs par=%.3fs", model, mcfg.agents_total,
                         seq, par)
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat 'key = value' config file")
    for flag, kind in _CONFIG_FLAGS:
        common.add_argument(flag, type=kind)
    common.add_argument("--model", choices=("lem", "aco"))
    common.add_argument("--executor", choices=("seq", "par"))
    common.add_argument("--densities", help="comma-separated agent totals (both sides)")
    common.add_argument("--no-timing", action="store_true",
                        help="write 0 for runtimes so outputs are byte-reproducible")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="crowdflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run one scenario for `repeats` seeds")
    sub.add_parser("sweep", parents=[common], help="throughput across agent densities")
    sub.add_parser("bench", parents=[common], help="sequential vs parallel timings")
    return parser


def _config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    overrides = {}
    for flag, _ in _CONFIG_FLAGS:
        name = flag.lstrip("-").replace("-", "_")
        overrides[_FLAG_KEYS.get(name, name)] = getattr(args, name)
    overrides["model"] = args.model
    overrides["executor"] = args.executor
    return parse_config(args.config, overrides)


def _parse_densities(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError("densities", f"malformed list {text!r}") from None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config_from_args(args)
        densities = _parse_densities(args.densities) if args.densities else None
        if args.command == "simulate":
            cmd_simulate(cfg, timing=not args.no_timing)
        elif args.command == "sweep":
            explicit = args.model or (args.config and "model" in read_config_file(args.config))
            models = [cfg.model] if explicit else ["lem", "aco"]
            cmd_sweep(cfg, densities or default_densities(cfg.width, cfg.height), models,
                      timing=not args.no_timing)
        else:
            cmd_bench(cfg, densities)
    except ConfigError as exc:
        print(f"crowdflow: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"crowdflow: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
