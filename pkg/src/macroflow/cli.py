"""Command-line entry point.

Subcommands: ``run`` (simulate, reduce, write panel + tables + figures),
``summarize`` (re-reduce an existing panel CSV), ``bench`` (allocator
throughput and parallel speedup), ``validate-config`` and ``print-defaults``.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .config import ConfigError, build_config, dump_config_yaml
from .engine import SimConfig, TraderPanel, run_simulation
from .stats import summarize, summary_text, write_tables


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML config file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, metavar="U64", help="experiment seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macroflow",
        description="Deterministic simulator of trader order flow and portfolio "
                    "rebalancing around scheduled CPI announcements.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the simulation and write all outputs")
    _add_config_args(run_p)
    run_p.add_argument("--out", metavar="DIR", help="output directory "
                       "(falls back to $MACROFLOW_OUT)")
    run_p.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N",
                       help="worker threads (any value yields identical output)")
    run_p.add_argument("--replications", type=int, metavar="R",
                       help="repeat the run with derived seeds, stacking panels")
    run_p.add_argument("--liq-bins", type=int, default=5, metavar="N")
    run_p.add_argument("--wealth-bins", type=int, default=30, metavar="N")
    run_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run_p.add_argument("--jsonl", action="store_true",
                       help="additionally write the panel as line-delimited JSON")

    sum_p = sub.add_parser("summarize", help="re-reduce an existing panel CSV")
    sum_p.add_argument("panel", metavar="PANEL_CSV")
    sum_p.add_argument("--out", metavar="DIR")
    sum_p.add_argument("--liq-bins", type=int, default=5, metavar="N")
    sum_p.add_argument("--wealth-bins", type=int, default=30, metavar="N")
    sum_p.add_argument("--no-figures", action="store_true")

    bench_p = sub.add_parser("bench", help="time the allocator and report parallel speedup")
    _add_config_args(bench_p)
    bench_p.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N")
    bench_p.add_argument("--solves", type=int, default=200, metavar="N",
                         help="allocation solves per timing pass")

    val_p = sub.add_parser("validate-config", help="check a config and echo it")
    _add_config_args(val_p)

    sub.add_parser("print-defaults", help="print the full default config")
    return parser


def _resolve_out(args) -> str:
    out = args.out or os.environ.get("MACROFLOW_OUT")
    if not out:
        raise ConfigError("no output directory: pass --out DIR or set MACROFLOW_OUT")
    return out


def _write_outputs(panel: TraderPanel, cfg: SimConfig | None, out_dir: str,
                   liq_bins: int, wealth_bins: int, figures: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    tables = summarize(panel, liq_bins=liq_bins, wealth_bins=wealth_bins)
    if cfg is not None:
        panel.write_csv(os.path.join(out_dir, "panel.csv"))
        panel.write_events_csv(os.path.join(out_dir, "shocks.csv"))
        with open(os.path.join(out_dir, "config.yaml"), "w") as fh:
            fh.write(dump_config_yaml(cfg))
    write_tables(tables, out_dir, panel.seed)
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(summary_text(panel, tables))
    if figures:
        from .plots import render_figures

        render_figures(tables, out_dir, panel.seed)


def _cmd_run(args) -> int:
    cfg = build_config(args.config, args.overrides, seed=args.seed,
                       replications=args.replications)
    out_dir = _resolve_out(args)
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    panel = run_simulation(cfg, workers=args.workers)
    _write_outputs(panel, cfg, out_dir, args.liq_bins, args.wealth_bins,
                   not args.no_figures)
    if args.jsonl:
        panel.write_jsonl(os.path.join(out_dir, "panel.jsonl"))
    print(f"wrote {panel.n_rows} panel rows to {out_dir}")
    return 0


def _cmd_summarize(args) -> int:
    panel = TraderPanel.from_csv(args.panel)
    out_dir = _resolve_out(args)
    _write_outputs(panel, None, out_dir, args.liq_bins, args.wealth_bins,
                   not args.no_figures)
    print(f"summarized {panel.n_rows} panel rows into {out_dir}")
    return 0


def _cmd_bench(args) -> int:
    from concurrent.futures import ThreadPoolExecutor

    from .allocation import optimal_allocation
    from .market import effective_risky_std
    from .rng import StreamKey, stream_for

    cfg = build_config(args.config, args.overrides, seed=args.seed)
    n_draws = cfg.allocation.n_draws

    stream = stream_for(StreamKey(cfg.seed, "trader-returns", 0, 0))
    warm = stream.normals(1000)  # noqa: F841  (forces JIT before timing)
    t0 = time.perf_counter()
    n_norm = 2_000_000
    stream.normals(n_norm)
    draw_rate = n_norm / (time.perf_counter() - t0)

    def solve(i: int) -> float:
        arch = cfg.agents[i % len(cfg.agents)]
        sigma = effective_risky_std(cfg.market.risky_std_base, arch.info_level,
                                    cfg.market.noise_mult)
        s = stream_for(StreamKey(cfg.seed, "trader-returns", i, 0))
        res = optimal_allocation(arch.risk_aversion, arch.max_risk, cfg.market.rf,
                                 cfg.market.risky_mean, sigma, cfg.allocation, s,
                                 return_floor=cfg.market.return_floor)
        return res.x_star

    solve(0)  # JIT warmup for every kernel shape
    t0 = time.perf_counter()
    serial = [solve(i) for i in range(args.solves)]
    t_serial = time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        t0 = time.perf_counter()
        parallel = list(pool.map(solve, range(args.solves)))
        t_parallel = time.perf_counter() - t0

    assert serial == parallel, "parallel bench must reproduce serial results"
    print(f"normal draws/s:          {draw_rate:,.0f}")
    print(f"allocator solves/s (1):  {args.solves / t_serial:,.1f}  "
          f"(n_draws={n_draws})")
    print(f"allocator solves/s ({args.workers}):  {args.solves / t_parallel:,.1f}")
    print(f"parallel speedup:        {t_serial / t_parallel:.2f}x "
          f"({args.workers} workers)")
    return 0


def _cmd_validate_config(args) -> int:
    cfg = build_config(args.config, args.overrides, seed=args.seed)
    sys.stdout.write(dump_config_yaml(cfg))
    print("# config OK")
    return 0


def _cmd_print_defaults(_args) -> int:
    sys.stdout.write(dump_config_yaml(SimConfig()))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "summarize": _cmd_summarize,
    "bench": _cmd_bench,
    "validate-config": _cmd_validate_config,
    "print-defaults": _cmd_print_defaults,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
