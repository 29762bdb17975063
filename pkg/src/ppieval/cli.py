"""Command-line interface: ``ppieval <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 infeasible
search or censored savings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artificial import BankSpec, generate_bank
from .control_variates import cv_interval, cv_split_interval
from .core import (
    Method,
    SimDataset,
    check_alpha,
    load_paired_dataset,
    load_sim_dataset,
    summary_stats,
    write_paired_dataset,
)
from .exceptions import ConfigError, DataError, InfeasibleError
from .harness import (
    CsvSource,
    SweepConfig,
    compute_savings,
    render_results,
    run_coverage_sweep,
    run_width_sweep,
)
from .ppi import (
    RiskSplit,
    classical_interval,
    heuristic_split,
    optimize_risk_split,
    rectifier_interval,
    suresim_interval,
    suresim_ub_interval,
    two_stage_interval,
    two_stage_ub_interval,
)
from .wsr import WsrConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4

logger = logging.getLogger("ppieval")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# --------------------------------------------------------------------------
# Config files


def read_config_file(path):
    """Turn ``key = value`` lines into command-line tokens.

    Blank lines and ``#`` comments are skipped. ``key = true`` becomes a bare
    ``--key`` flag and ``key = false`` is dropped. Underscores in keys map to
    dashes, so ``grid_size = 2001`` reads as ``--grid-size 2001``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: missing key")
        flag = "--" + key.lstrip("-").replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.extend([flag, *shlex.split(value)])
    return tokens


def _expand_config(argv):
    # config tokens go last so they win over flags given on the command line
    argv = list(argv)
    extra = []
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a file argument")
            extra.extend(read_config_file(argv[i + 1]))
            i += 2
            continue
        if tok.startswith("--config="):
            extra.extend(read_config_file(tok.split("=", 1)[1]))
        else:
            out.append(tok)
        i += 1
    return out + extra


# --------------------------------------------------------------------------
# Parser


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _method_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="output file; stdout if omitted")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--config", metavar="FILE", help="key = value file overriding flags")
    parser.add_argument("--grid-size", type=int, default=None)
    parser.add_argument("--wsr-c", type=float, default=0.99)


def _experiment(parser):
    parser.add_argument("--methods", type=_method_list,
                        default=("classical", "suresim", "suresim-ub", "two-stage",
                                 "two-stage-ub"))
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--N", dest="cap_n", type=int, default=1000)
    parser.add_argument("--alpha", type=float, default=0.1)
    parser.add_argument("--rho", type=float, default=0.97)
    parser.add_argument("--mu", type=float, default=0.5)
    parser.add_argument("--mu-sim", type=float, default=0.5)
    parser.add_argument("--rho-tol", type=float, default=0.01)
    parser.add_argument("--redraws", type=int, default=100)
    parser.add_argument("--optimize-delta", action="store_true")
    parser.add_argument("--split-frac", type=float, default=0.2)
    # not mutually exclusive: the last one given (config file included) wins
    parser.add_argument("--fresh-bank", dest="bank_mode", action="store_const", const="fresh")
    parser.add_argument("--bootstrap-bank", dest="bank_mode", action="store_const",
                        const="bootstrap")
    parser.set_defaults(bank_mode="fresh")
    parser.add_argument("--bank-multiplier", type=int, default=2)
    parser.add_argument("--bank-size", type=int, default=20000)
    parser.add_argument("--sim-with-replacement", action="store_true")
    parser.add_argument("--paired", help="real paired bank (id,y,f); replaces synthetic data")
    parser.add_argument("--sim", help="simulation pool (id,f); used with --paired")


def build_parser():
    parser = _Parser(prog="ppieval", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("interval", help="confidence interval on one dataset")
    _common(p)
    p.add_argument("--method", required=True, choices=[m.value for m in Method])
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--optimize-delta", action="store_true", help="takes precedence over --delta")
    p.add_argument("--split-frac", type=float, default=0.2)
    p.add_argument("--paired", required=True)
    p.add_argument("--sim")

    p = sub.add_parser("summary", help="correlation, means and variances of a dataset")
    _common(p)
    p.add_argument("--paired", required=True)
    p.add_argument("--sim")

    p = sub.add_parser("gen-data", help="write a synthetic bank with known mean")
    _common(p)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--mu-sim", type=float, default=0.5)
    p.add_argument("--rho", type=float, default=0.97)
    p.add_argument("--size", type=int, default=20000)
    p.add_argument("--tol", type=float, default=0.01)

    p = sub.add_parser("sweep", help="mean interval widths over a parameter grid")
    _common(p)
    _experiment(p)
    p.add_argument("--axis", choices=("nsim", "rho", "alpha"), required=True)
    p.add_argument("--grid", type=_float_list, required=True)

    p = sub.add_parser("coverage", help="empirical coverage over a parameter grid")
    _common(p)
    _experiment(p)
    p.add_argument("--axis", choices=("nsim", "rho", "alpha"), default="nsim")
    p.add_argument("--grid", type=_float_list, default=None)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--truth", choices=("exact", "heldout"), default="exact")
    p.add_argument("--heldout", type=int, default=400)

    p = sub.add_parser("savings", help="real trials saved relative to Classical")
    _common(p)
    _experiment(p)
    p.add_argument("--savings-cap", type=int, default=None)
    return parser


# --------------------------------------------------------------------------
# Commands


def _wsr(args):
    return WsrConfig(grid_size=args.grid_size, c=args.wsr_c)


def _write(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_record(record, args, default="json"):
    fmt = args.format or default
    if fmt == "json":
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
        writer.writeheader()
        writer.writerow(record)
        text = buf.getvalue()
    _write(text, args.out)


def _load_sim(args, required):
    if args.sim:
        return load_sim_dataset(args.sim)
    if required:
        raise ConfigError(f"method {args.method} needs --sim")
    return SimDataset(np.empty(0))


def cmd_interval(args):
    method = Method(args.method)
    alpha = check_alpha(args.alpha)
    paired = load_paired_dataset(args.paired)
    needs_sim = method not in (Method.CLASSICAL, Method.RECTIFIER)
    sim = _load_sim(args, needs_sim)
    wsr = _wsr(args)
    if args.optimize_delta:
        split = optimize_risk_split(paired, sim, alpha, wsr)
    elif args.delta is not None:
        split = RiskSplit(args.delta, alpha) if method is not Method.RECTIFIER else None
    else:
        split = heuristic_split(alpha)

    if method is Method.CLASSICAL:
        ci = classical_interval(paired.y, alpha, wsr)
    elif method is Method.SURESIM:
        ci = suresim_interval(paired, sim, alpha, wsr, args.seed)
    elif method is Method.SURESIM_UB:
        ci = suresim_ub_interval(paired, sim, alpha, wsr, args.seed)
    elif method is Method.TWO_STAGE:
        ci = two_stage_interval(paired, sim, alpha, split, wsr)
    elif method is Method.TWO_STAGE_UB:
        ci = two_stage_ub_interval(paired, sim, alpha, wsr)
    elif method is Method.CV_STANDARD:
        ci = cv_interval(paired, sim, alpha)
    elif method is Method.CV_SPLIT:
        ci = cv_split_interval(paired, sim, alpha, args.split_frac, args.seed)
    else:
        level = args.delta if args.delta is not None else split.delta
        ci = rectifier_interval(paired, check_alpha(level, "delta"), wsr)
    record = ci.to_dict()
    record.update(n=paired.n, N=sim.cap_n)
    _write_record(record, args)
    return EXIT_OK


def cmd_summary(args):
    paired = load_paired_dataset(args.paired)
    sim = load_sim_dataset(args.sim) if args.sim else SimDataset(np.empty(0))
    _write_record(summary_stats(paired, sim).to_dict(), args)
    return EXIT_OK


def cmd_gen_data(args):
    if not args.out:
        raise ConfigError("gen-data needs --out")
    spec = BankSpec(args.mu, args.mu_sim, args.rho, args.size, args.tol, args.seed)
    bank = generate_bank(spec)
    out = Path(args.out)
    meta = {"true_mu": bank.true_mu, "achieved_rho": bank.achieved_rho, "spec": spec.to_dict()}
    if (args.format or "csv") == "csv":
        write_paired_dataset(bank.as_paired(), out)
        sidecar = out.with_suffix(".json") if out.suffix != ".json" else out.with_name(
            out.name + ".meta.json")
        sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        payload = dict(meta, ids=list(bank.ids), y=bank.y.tolist(), f=bank.f.tolist())
        out.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def _sweep_config(args, **extra):
    return SweepConfig(
        methods=args.methods,
        n=args.n,
        cap_n=args.cap_n,
        alpha=args.alpha,
        rho=args.rho,
        mu_real=args.mu,
        mu_sim=args.mu_sim,
        redraws=args.redraws,
        seed=args.seed,
        delta_policy="optimized" if args.optimize_delta else "heuristic",
        grid_size=args.grid_size,
        wsr_c=args.wsr_c,
        rho_tol=args.rho_tol,
        bank_mode=args.bank_mode,
        bank_multiplier=args.bank_multiplier,
        bank_size=args.bank_size,
        sim_with_replacement=args.sim_with_replacement,
        split_frac=args.split_frac,
        **extra,
    )


def _source(args):
    if not args.paired:
        if args.sim:
            raise ConfigError("--sim needs --paired")
        return None
    paired = load_paired_dataset(args.paired)
    sim = load_sim_dataset(args.sim) if args.sim else SimDataset(paired.f, paired.ids)
    return CsvSource(paired, sim, args.sim_with_replacement)


def _grid(args):
    if args.grid:
        return args.grid
    return ({"nsim": args.cap_n, "alpha": args.alpha, "rho": args.rho}[args.axis],)


def _emit(result, args):
    fmt = args.format or "csv"
    text = render_results(result, fmt)
    _write(text, args.out)
    if args.out and fmt == "csv":
        meta = Path(args.out)
        meta = meta.with_name(meta.name + ".meta.json")
        meta.write_text(json.dumps(result.provenance, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")


def cmd_sweep(args):
    config = _sweep_config(args, axis=args.axis, grid=_grid(args))
    _emit(run_width_sweep(config, _source(args)), args)
    return EXIT_OK


def cmd_coverage(args):
    config = _sweep_config(args, axis=args.axis, grid=_grid(args), trials=args.trials,
                           truth=args.truth, heldout=args.heldout)
    _emit(run_coverage_sweep(config, _source(args)), args)
    return EXIT_OK


def cmd_savings(args):
    config = _sweep_config(args, savings_cap=args.savings_cap)
    result = compute_savings(config, _source(args))
    _emit(result, args)
    if result.any_censored:
        print("censored: the savings search hit its cap on at least one redraw", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


COMMANDS = {
    "interval": cmd_interval,
    "summary": cmd_summary,
    "gen-data": cmd_gen_data,
    "sweep": cmd_sweep,
    "coverage": cmd_coverage,
    "savings": cmd_savings,
}


def main(argv=None):
    """Entry point; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(_expand_config(argv))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
