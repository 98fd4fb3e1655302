"""Command-line front end.

    gebits <mode> --config <path> [--out <dir>] [--format csv|json]
                  [--seed <u64>] [--serial]

Exit codes: 0 success, 1 validation error, 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import MODES, ConfigError, load_config, with_seed
from .experiment import TOOL_VERSION, emit_report, run_experiment

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gebits", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES, help="experiment mode")
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--format", choices=("csv", "json"), default="json",
                        help="output format (default: json)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--serial", action="store_true",
                        help="serial reference mode (the default; kept for compatibility)")
    parser.add_argument("--version", action="version", version=f"gebits {TOOL_VERSION}")
    return parser


def _summary_line(report) -> str:
    mode = report.config.mode
    res = report.results
    if mode == "maximize":
        opt = res["optimum"]
        fit = res["fit"]
        d_txt = f" d={fit['d']:.4f}" if fit else ""
        return f"maximize: N={opt['N']} p={opt['p']} -> L={opt['L']} log_prob={opt['log_prob']:.4f}{d_txt}"
    if mode == "sweep":
        pts = res["curve"]
        return f"sweep: {len(pts)} points, d in [{min(p['d'] for p in pts):.4f}, {max(p['d'] for p in pts):.4f}]"
    if mode == "fit":
        fit = res["fit"]
        return f"fit: d={fit['d']:.6f} residual={fit['residual']:.6f} points={fit['points_used']}"
    if mode == "iterate":
        final = res["final"]
        return (
            f"iterate: {final['step']} steps, sigma range "
            f"[{final['sigma_min']:.6g}, {final['sigma_max']:.6g}]"
        )
    census = res["census"]
    if census:
        last = census[-1]
        return (
            f"emerge: {len(census)} census records, final {last['n_gebits']} gebits "
            f"over {last['n_linked_nodes']} linked nodes"
        )
    return "emerge: empty census (no recorded steps)"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        config = load_config(args.config)
        if config.mode != args.mode:
            raise ConfigError(
                f"config file sets mode '{config.mode}' but the command line asked for '{args.mode}'"
            )
        if args.seed is not None:
            config = with_seed(config, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        report = run_experiment(config)
        written = emit_report(report, args.format, Path(args.out))
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(_summary_line(report))
    print(f"duration: {report.duration_seconds:.3f}s")
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
