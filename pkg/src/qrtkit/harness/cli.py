"""Command-line entry point ``qrtkit``.

Exit codes: 0 when every check passes, 1 on check failures, 2 on
configuration, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError, IoError, ParseError, QrtError
from ..theories import theory_from_json, validate_axioms
from .config import SuiteConfig
from .io import emit_csv, load_channel, load_json, save_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

STEIN_COLUMNS = ("n", "epsilon", "phi_id", "beta", "exponent", "inner_relent", "gap")


def _theory(path):
    try:
        return theory_from_json(load_json(path))
    except (ParseError, IoError):
        raise
    except (QrtError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: bad theory spec: {exc}") from exc


def cmd_run(args) -> int:
    from .suites import run_suite
    cfg = SuiteConfig.from_file(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    report = run_suite(cfg)
    s = report.summary()
    print(f"{s['passed']}/{s['total']} checks passed; report in {cfg.out_dir}")
    for r in report.failures()[:20]:
        print(f"FAIL {r.suite}/{r.check} [{r.instance}] slack={r.slack:.3g} tol={r.tol:g} {r.message}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_compute(args) -> int:
    from .. import measures as ms
    from .. import smoothing as sm
    N = load_channel(args.channel)
    T = _theory(args.theory)
    opts = ms.MeasureOptions(restarts=args.restarts, tol=args.tol, seed=args.seed)
    if args.measure in ("LReps", "uLReps"):
        f = sm.lr_eps if args.measure == "LReps" else sm.underline_lr_eps
        res = f(N, T, args.eps, opts)
    else:
        res = ms.evaluate(args.measure, N, T, opts)
    out = {"measure": args.measure, **res.to_json()}
    if args.out:
        save_json(out, args.out)
    print(f"{args.measure} = {res.value:.10g} ({res.status})")
    return EXIT_OK


def cmd_stein(args) -> int:
    from ..hypothesis import stein_scan
    N = load_channel(args.channel)
    T = _theory(args.theory)
    scan = stein_scan(N, T, args.eps, args.nmax, seed=args.seed)
    rows = list(scan.rows())
    if args.out:
        emit_csv(rows, args.out, STEIN_COLUMNS)
    for r in rows:
        print(f"n={r['n']} beta={r['beta']:.6g} exponent={r['exponent']:.6g}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from ..theories import stein_closure_check
    T = _theory(args.theory)
    rep = validate_axioms(T, args.samples, args.seed)
    phi = T.state_param(("R", "A"))
    import numpy as np
    phi0 = phi.state(phi.from_state(np.eye(phi.dim) / phi.dim)) if phi.n else phi.state(np.zeros(0))
    rep2 = stein_closure_check(T, phi0, 2, args.samples, args.seed)
    ok = rep.passed and rep2.passed
    for name, v in {**rep.summary(), **{f"stein_{k}": v for k, v in rep2.summary().items()}}.items():
        print(f"{name:28s} max violation {v:.3e}")
    print("theory valid" if ok else "theory INVALID")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrtkit", description="Resource measures for quantum channels.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run property suites from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out-dir")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compute", help="evaluate one measure")
    c.add_argument("--measure", required=True,
                   choices=["DF", "EF", "LRF", "uLRF", "RF", "tRF", "DAF", "EAF", "LReps", "uLReps"])
    c.add_argument("--channel", required=True)
    c.add_argument("--theory", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=32)
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--eps", type=float, default=0.1, help="smoothing radius for LReps/uLReps")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("stein", help="finite-n Stein exponents")
    s.add_argument("--channel", required=True)
    s.add_argument("--theory", required=True)
    s.add_argument("--nmax", type=int, default=3)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stein)

    v = sub.add_parser("validate-theory", help="check the closure axioms of a theory")
    v.add_argument("--theory", required=True)
    v.add_argument("--samples", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParseError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
