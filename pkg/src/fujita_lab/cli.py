"""
Command-line interface: ``fujita-lab {run,sweep,audit,exponents,verify}``.

Exit codes: 0 on success (any classification), 1 on a failed ``verify`` or
another library error, 2 on configuration errors, 3 on a numerical overflow
outside the blow-up protocol.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, FieldOverflowError, FujitaLabError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3

THREADS_ENV = "FUJITA_LAB_THREADS"


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fujita-lab", description="Nonlocal fractional heat equation laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, metavar="PATH", help="experiment configuration (TOML)")
        p.add_argument("--out", metavar="DIR", help="output root (default: outputs.directory of the config)")
        p.add_argument("--seed", type=_seed, metavar="U64", help="override the configured seed")

    p = sub.add_parser("run", help="evolve one configuration and write its artifacts")
    common(p)
    p = sub.add_parser("sweep", help="classify every cell of a p / alpha / amplitude grid")
    common(p)
    p.add_argument("--workers", type=_positive, default=1, metavar="N", help=f"worker processes (overridden by {THREADS_ENV})")
    p = sub.add_parser("audit", help="capacity audit of a stored run")
    common(p)
    p.add_argument("--run", required=True, metavar="DIR", help="run directory holding result.json and snapshots.npz")
    p = sub.add_parser("exponents", help="print the critical exponents")
    p.add_argument("--config", metavar="PATH", help="take n, beta and alpha from a configuration")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p = sub.add_parser("verify", help="run the end-to-end checks")
    p.add_argument("--only", nargs="+", metavar="NAME", help="subset of checks")
    p.add_argument("--seed", type=_seed, default=0, metavar="U64")
    p.add_argument("--list", action="store_true", help="list check names and exit")
    return parser


def _workers(requested: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return requested
    try:
        v = int(env)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    if v < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return v


def _load(args):
    from .config import load_config

    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _cmd_run(args) -> int:
    from .experiments import run_single

    art = run_single(_load(args), out=args.out)
    r = art.result
    tail = "" if r.t_blowup is None else f" T*={r.t_blowup:.6g}"
    print(f"{r.classification}: {r.reason}{tail}")
    print(f"artifacts: {art.directory}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .experiments import sweep

    diagram, directory = sweep(_load(args), workers=_workers(args.workers), out=args.out)
    print(diagram.summary(), end="")
    print(f"artifacts: {directory}")
    return EXIT_OK


def _cmd_audit(args) -> int:
    from .experiments import audit

    art = audit(_load(args), args.run, out=args.out)
    v = art.verdict
    print(f"inequality holds at all {len(art.reports)} (R, T): {v.inequality_holds}")
    print(f"lower bound holds: {v.lower_bound_holds}")
    if v.interpretation:
        print(v.interpretation)
    print(f"artifacts: {art.directory}")
    return EXIT_OK


def _cmd_exponents(args) -> int:
    from .exponents import critical_exponents

    n, beta, alpha = args.n, args.beta, args.alpha
    if args.config:
        cfg = _load(args)
        n, beta, alpha = cfg.n, cfg.params().beta, cfg.alpha_values[0]
    try:
        ex = critical_exponents(n, beta, alpha)
    except FujitaLabError as exc:
        raise ConfigError(str(exc)) from exc
    print(ex.table())
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .checks import CHECKS, run_checks

    if args.list:
        print("\n".join(CHECKS))
        return EXIT_OK
    names = args.only or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks: {', '.join(unknown)}")
    results = run_checks(names)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAILURE if failed else EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "audit": _cmd_audit,
    "exponents": _cmd_exponents,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FieldOverflowError, FloatingPointError, OverflowError) as exc:
        print(f"numerical overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except FujitaLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
