"""Command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .model import ModelError
from .solvers.conic import SolverError
from .harness.config import FORMATS, ConfigError, apply_overrides, load_config
from .harness.experiments import (design_bundle, design_tables, run_convergence,
                                  run_detection_sweep, run_psd, run_pulse_compression,
                                  run_robustness)
from .harness.selftest import selftest
from .harness.tables import EmitError, ResultTable, emit

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2


class PartialFailure(Exception):
    """Some grid points failed; the rest were written."""


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors; argparse's own code 2 is reserved for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                   help="YAML experiment configuration (defaults reproduce the built-in scenario)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    g.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS,
                   help="output directory (overrides output.directory)")
    g.add_argument("--format", choices=FORMATS + ("all",), default=argparse.SUPPRESS,
                   help="write only this format (default: output.formats)")
    g.add_argument("--set", metavar="BLOCK.FIELD=VALUE", action="append", default=argparse.SUPPRESS,
                   help="override one config field; repeatable")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="radargame", parents=[common],
                                     description="Worst-case SINR waveform and filter design.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command",
                                parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    add("design-ec", "energy-constrained design (closed-form equilibrium via one SDP)")
    add("design-cmsc", "constant-modulus design with a similarity constraint")
    add("design-scsc", "spectrally compatible design with a similarity constraint")
    add("sweep", "detection probability over the configured sweep grid")
    add("convergence", "per-iteration traces of the iterative designs")
    for name, text in (("psd", "power spectral density of a designed waveform"),
                       ("pulse", "pulse-compression profile of a designed waveform")):
        p = add(name, text)
        p.add_argument("--kind", choices=("ec", "cmsc", "scsc"),
                       help="design to analyse (default: constraint.kind)")
        if name == "pulse":
            p.add_argument("--cross", action="store_true",
                           help="correlate against the reference code instead of the code itself")
    p = add("robust", "SINR of the designed pair at random responses in the uncertainty ball")
    p.add_argument("--kind", choices=("ec", "cmsc", "scsc"))
    p.add_argument("--samples", type=int, default=100)
    add("selftest", "small deterministic pipeline with sanity checks")
    return parser


def _config(args):
    cfg = load_config(getattr(args, "config", None))
    overrides = list(getattr(args, "set", []) or [])
    if hasattr(args, "seed"):
        overrides.append(f"seed={args.seed}")
    if hasattr(args, "out"):
        overrides.append(f"output.directory={args.out}")
    if hasattr(args, "format"):
        fmts = list(FORMATS) if args.format == "all" else [args.format]
        overrides.append(f"output.formats=[{', '.join(fmts)}]")
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    if getattr(args, "kind", None):
        cfg = replace(cfg, constraint=replace(cfg.constraint, kind=args.kind))
    return cfg


def _write(cfg, command: str, tables: dict[str, ResultTable]) -> list[Path]:
    out = Path(cfg.output.directory) / command
    written = []
    for name, table in tables.items():
        for fmt in cfg.output.formats:
            if fmt == "svg" and table.plot is None:
                continue  # scalar summaries have nothing to chart
            written.append(emit(table, fmt, out / f"{name}.{fmt}"))
    return written


def _drop_failed(table: ResultTable) -> tuple[ResultTable, list[int]]:
    bad = np.flatnonzero(~np.all(np.isfinite(table.rows), axis=1))
    if not bad.size:
        return table, []
    meta = dict(table.metadata, failed_rows=bad.tolist())
    keep = np.delete(table.rows, bad, axis=0)
    return ResultTable(table.columns, keep, meta, table.plot), bad.tolist()


def run(args) -> int:
    cfg = _config(args)
    cmd = args.command
    failed: list[int] = []
    if cmd in ("design-ec", "design-cmsc", "design-scsc"):
        kind = cmd.split("-")[1]
        cfg = replace(cfg, constraint=replace(cfg.constraint, kind=kind))
        bundle = design_bundle(cfg)
        tables = design_tables(bundle)
        s = tables["summary"]
        print(f"sinr_worst = {s.column('sinr_worst')[0]:.6g}  p_d = {s.column('p_d')[0]:.6g}  "
              f"converged = {bundle.result.converged}")
    elif cmd == "sweep":
        table, failed = _drop_failed(run_detection_sweep(cfg))
        tables = {"sweep": table}
    elif cmd == "convergence":
        tables = {"convergence": run_convergence(cfg)}
    elif cmd == "psd":
        tables = {"psd": run_psd(cfg)}
        depth = tables["psd"].metadata.get("notch_depth_db")
        if depth is not None:
            print(f"notch depth = {depth:.2f} dB")
    elif cmd == "pulse":
        tables = {"pulse": run_pulse_compression(cfg, cross_reference=args.cross)}
        psl = tables["pulse"].metadata["peak_sidelobe_db"]
        print("peak sidelobe (dB): " + ", ".join(f"{v:.2f}" for v in psl))
    elif cmd == "robust":
        if args.samples < 1:
            raise ModelError("--samples must be at least 1")
        samples, summary = run_robustness(cfg, args.samples)
        tables = {"robustness": samples, "robustness_summary": summary}
        mn, mean, worst = summary.rows[0]
        print(f"min = {mn:.6g}  mean = {mean:.6g}  sinr_worst = {worst:.6g}")
    elif cmd == "selftest":
        rep = selftest(cfg)
        tables = rep.tables
        for name, passed, detail in rep.checks:
            print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        if not rep.ok:
            _write(cfg, cmd, tables)
            return EXIT_SOLVER
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ModelError(f"unknown command {cmd}")
    for path in _write(cfg, cmd, tables):
        print(path)
    if failed:
        raise PartialFailure(f"{len(failed)} grid point(s) failed (rows {failed}); "
                             "the remaining rows were written")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ModelError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverError, PartialFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except EmitError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
