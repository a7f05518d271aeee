"""``gevreylab`` command line.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 a verify suite failed its assertions.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .dynamics import NotContractive, NumericalBlowup
from .spectral import GevreyOverflowError

OK, INVALID, NUMERICAL, VERIFY_FAILED = 0, 1, 2, 3

log = logging.getLogger("gevreylab")


def _parse_range(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"--range expects 'lo,hi', got {text!r}") from None
    if not 0 < lo < hi:
        raise ConfigError(f"--range needs 0 < lo < hi, got {text!r}")
    return lo, hi


def _guard(fn, *args, **kw) -> int:
    try:
        fn(*args, **kw)
    except (NumericalBlowup, NotContractive, GevreyOverflowError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    return OK


def run_config_file(path: str, command: str | None = None, outdir=None) -> int:
    """Run one config: ``continue`` if it sets continuation keys, else ``simulate``."""
    from .experiments import run_continuation, run_simulate

    def go():
        cfg = load_config(path)
        cmd = command or ("continue" if cfg.has("continuation.sigma0") else "simulate")
        out = (run_continuation if cmd == "continue" else run_simulate)(cfg, outdir)
        print(out)

    return _guard(go)


def _cmd_verify(args) -> int:
    from .experiments import run_verify

    result = {}

    def go():
        result.update(run_verify(args.suite, args.seed, args.out, args.samples, args.trials))

    code = _guard(go)
    if code != OK:
        return code
    for chk in result["checks"]:
        mark = "PASS" if chk["passed"] else "FAIL"
        print(f"{mark} {chk['check']}: max_ratio={chk['max_ratio']:.6g} "
              f"violations={chk['violations']} samples={chk['samples']}")
    return OK if result["passed"] else VERIFY_FAILED


def _cmd_fit(args) -> int:
    from .experiments import fit_power_law, read_schedule

    def go():
        fit = fit_power_law(read_schedule(args.schedule), _parse_range(args.range))
        print(json.dumps({"exponent": fit.exponent, "coefficient": fit.coefficient,
                          "r_squared": fit.r_squared, "range": list(fit.range)}, indent=2))

    return _guard(go)


def _cmd_sweep(args) -> int:
    from .experiments import run_sweep

    results = []
    code = _guard(lambda: results.extend(run_sweep(args.pattern, args.workers)))
    if code != OK:
        return code
    for path, rc in results:
        print(f"{rc} {path}")
    return max((rc for _, rc in results), default=OK)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gevreylab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (("simulate", "integrate a config and write diagnostics"),
                        ("continue", "run the continuation scheduler")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        sp.add_argument("--out", help="output directory (default: output.dir)")

    sp = sub.add_parser("verify", help="run an inequality suite")
    sp.add_argument("suite")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", default=None, help="directory for verify_<suite>.json")
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--trials", type=int, default=200)

    sp = sub.add_parser("fit", help="fit sigma(T) ~ c T^p to a schedule CSV")
    sp.add_argument("schedule")
    sp.add_argument("--range", default=None, help="T interval 'lo,hi'")

    sp = sub.add_parser("sweep", help="run every config matching a glob")
    sp.add_argument("pattern")
    sp.add_argument("--workers", type=int, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("simulate", "continue"):
        return run_config_file(args.config, args.command, args.out)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "fit":
        return _cmd_fit(args)
    return _cmd_sweep(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
