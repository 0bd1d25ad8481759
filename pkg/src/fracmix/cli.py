"""Command-line entry point: ``fracmix {forward,observe,invert,verify,ml-eval}``.

Exit codes: 0 success, 2 usage or invalid configuration, 3 audit failure,
4 solvability violation, 5 I/O error (including malformed files),
6 verification check failed or recovery residuals above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .caputo import branch_grid, convergence_order, ode_residual
from .config import ExperimentConfig, parse_orders
from .errors import AuditError, FracmixError, ParameterDomainError, SolvabilityError
from .forward import (
    FractionalOrders,
    hyperbolic_norm,
    norm_functional_W,
    solution_grid,
    solve_gluing,
    solve_mode,
    tail_bound,
)
from .inverse import (
    ObservationPair,
    audit_ratio_P,
    monotonicity_audit,
    observe,
    recover,
    select_k0,
)
from .special import mittag_leffler, ml_neg, monotonicity_time

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_AUDIT = 3
EXIT_SOLVABILITY = 4
EXIT_IO = 5
EXIT_CHECK = 6

DEFAULT_ORDERS = "0.7,1.5"
OBS_FIELDS = ("t1", "d1", "t2", "k0", "d2", "swapped")

log = logging.getLogger("fracmix")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def _orders(args, cfg: ExperimentConfig) -> FractionalOrders:
    a, b = parse_orders(args.orders)
    return FractionalOrders(a, b, cfg.box)


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    return Path(args.out) if args.out else cfg.out_dir


# --- verbs -----------------------------------------------------------------

def cmd_forward(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    setup = cfg.build()
    orders = _orders(args, cfg)
    out = _out_dir(args, cfg)
    n = args.grid_points or cfg.grid_points
    times = cfg.times
    rows = solution_grid(setup, orders, times, n)
    coords = ["x"] if setup.basis.domain.dim == 1 else ["x", "y"]
    write_csv(out / "solution.csv", [*coords, "t", "u"], rows)
    modes = solve_gluing(setup, orders)
    write_csv(
        out / "modes.csv",
        ["k", "lambda_k", "phi_k", "delta_k", "w_minus0", "w_prime_minus0"],
        [(m.k, m.lam, m.phi_k, m.delta_k, m.w_minus0, m.w_prime_minus0) for m in modes],
    )
    print(f"audit: {setup.audit.summary()}")
    print(f"retained modes K = {setup.K}")
    for t in times:
        print(f"tail_bound(t={t:g}) = {tail_bound(setup, orders.alpha, orders.beta, t):.3e}")
    print(f"wrote {out / 'solution.csv'} and {out / 'modes.csv'}")
    return EXIT_OK


def cmd_observe(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    setup = cfg.build()
    orders = _orders(args, cfg)
    obs = observe(setup, orders, cfg.t1, cfg.t2, cfg.k0, swapped=args.swapped)
    path = Path(args.observation) if args.observation else _out_dir(args, cfg) / "observation.csv"
    d = obs.as_dict()
    write_csv(path, OBS_FIELDS, [[d[k] for k in OBS_FIELDS]])
    mode = "swapped" if obs.swapped else "default"
    print(f"observation ({mode}): t1={fmt(obs.t1)} d1={fmt(obs.d1)} t2={fmt(obs.t2)} k0={obs.k0} d2={fmt(obs.d2)}")
    print(f"wrote {path}")
    return EXIT_OK


def read_observation(path: str) -> ObservationPair:
    """Parse a one-record observation CSV; raises OSError/ValueError on bad input."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != 1:
        raise ValueError(f"expected exactly one observation record, found {len(rows)}")
    r = rows[0]
    missing = [k for k in OBS_FIELDS if k not in r or r[k] in (None, "")]
    if missing:
        raise ValueError(f"observation file lacks fields {missing}")
    sw = r["swapped"].strip().lower()
    if sw not in ("true", "false"):
        raise ValueError(f"swapped must be true or false, got {r['swapped']!r}")
    return ObservationPair(
        float(r["t1"]), float(r["d1"]), float(r["t2"]), int(r["k0"]), float(r["d2"]), sw == "true"
    )


def cmd_invert(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if not args.observation:
        raise ParameterDomainError("invert needs --observation PATH")
    try:
        obs = read_observation(args.observation)
    except (OSError, ValueError, ParameterDomainError) as exc:
        print(f"error: cannot read observation file: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.swapped and not obs.swapped:
        print("error: --swapped given but the observation record is not swapped", file=sys.stderr)
        return EXIT_USAGE
    setup = cfg.build()
    result = recover(setup, obs, cfg.audit_points)
    rows = sorted(result.as_dict().items())
    out = _out_dir(args, cfg)
    write_csv(out / "recovery.csv", ["key", "value"], rows)
    for k, v in rows:
        print(f"{k} = {fmt(v)}")
    print(f"wrote {out / 'recovery.csv'}")
    if not result.residuals_ok:
        print("error: recovery residuals exceed tolerance", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def run_checks(cfg: ExperimentConfig, orders: FractionalOrders):
    """Yield (name, passed, value, threshold) for the verification suite."""
    setup = cfg.build(audit=False)
    box = setup.box
    rep = setup.audit
    yield "delta_positive", rep.passed, rep.min_delta, 0.0
    yield "delta_above_delta0", rep.above_floor, rep.min_margin, 0.0
    if not rep.passed:
        return
    k0 = cfg.k0 or select_k0(setup)
    grid_b = box.beta_grid(max(cfg.audit_points, 32))
    pa = audit_ratio_P(setup, cfg.t2, k0, grid_b)
    yield "P_monotone", pa.passed and pa.direction == "increasing", pa.min_abs_slope, 0.0
    hn = monotonicity_audit(lambda b: hyperbolic_norm(setup, b, cfg.t2), grid_b)
    yield "hyperbolic_norm_monotone", hn.passed, hn.min_abs_slope, 0.0
    grid_a = box.alpha_grid(max(cfg.audit_points, 32))
    for b in (box.beta1, 0.5 * (box.beta1 + box.beta2), box.beta2):
        wa = monotonicity_audit(lambda a: norm_functional_W(setup, a, b, cfg.t1), grid_a, "decreasing")
        yield f"W_monotone_beta={b:.4g}", wa.passed, wa.min_abs_slope, 0.0
    # parameter monotonicity of the Mittag-Leffler factors at the smallest eigenvalue
    lam = float(setup.eigenvalues[0])
    fine_b = np.linspace(box.beta1, box.beta2, 101)
    fine_a = np.linspace(box.alpha1, 0.999, 101)
    for kind, grid, mu, direction, sign in (
        ("e2", fine_b, 2.0, "decreasing", 1.0),
        ("e1", fine_b, 1.0, "increasing", -1.0),
        ("e3", fine_a, 1.0, "decreasing", 1.0),
    ):
        t = monotonicity_time(kind, grid, lam)
        if not math.isfinite(t):
            yield f"ml_{kind}_monotone", False, math.inf, 0.0
            continue
        vals = np.array([ml_neg(p, mu, lam * t**p) for p in grid])
        ok = monotonicity_audit(vals, grid, direction).passed and bool(np.all(sign * vals > 0))
        yield f"ml_{kind}_monotone(t={t:.4g})", ok, float(np.min(np.abs(np.diff(vals)))), 0.0
    # Caputo oracle on a unit mode: lambda = 1 on [0, 5], window t >= 1
    m = solve_mode(1, 1.0, 1.0, 5.0, orders.beta)
    ns = [1024, 2048, 4096]
    for branch, order, rate in (
        ("parabolic", orders.alpha, 2.0 - orders.alpha),
        ("hyperbolic", orders.beta, 3.0 - orders.beta),
    ):
        errs = [
            ode_residual(m, orders.alpha, orders.beta, 1.0, branch,
                         branch_grid(m, orders.alpha, orders.beta, branch, 5.0, n), t_min=1.0)
            for n in ns
        ]
        yield f"caputo_{branch}_residual", errs[-1] <= 1e-4, errs[-1], 1e-4
        obs_rate = float(convergence_order(errs, ns)[-1])
        yield f"caputo_{branch}_order", abs(obs_rate - rate) <= 0.3, obs_rate, rate
    # round trip at the requested orders, both observation modes
    for swapped in (False, True):
        obs = observe(setup, orders, cfg.t1, cfg.t2, k0, swapped=swapped)
        r = recover(setup, obs, cfg.audit_points)
        err = max(abs(r.alpha_hat - orders.alpha), abs(r.beta_hat - orders.beta))
        yield f"round_trip{'_swapped' if swapped else ''}", err <= 1e-7, err, 1e-7


def cmd_verify(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    orders = _orders(args, cfg)
    rows = []
    for name, ok, value, thr in run_checks(cfg, orders):
        rows.append((name, bool(ok), value, thr))
        print(f"{'PASS' if ok else 'FAIL'} {name}: value={fmt(value)} threshold={fmt(thr)}")
    if args.out:
        write_csv(_out_dir(args, cfg) / "verify.csv", ["check", "passed", "value", "threshold"], rows)
    failed = [r[0] for r in rows if not r[1]]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    print(f"all {len(rows)} checks passed")
    return EXIT_OK


def cmd_ml_eval(args) -> int:
    print(fmt(mittag_leffler(args.rho, args.mu, args.x)))
    return EXIT_OK


# --- entry -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracmix", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON experiment config (defaults built in)")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="reserved; all commands are deterministic")

    sp = sub.add_parser("forward", help="evaluate the series solution on a grid")
    common(sp)
    sp.add_argument("--orders", default=DEFAULT_ORDERS, metavar="A,B")
    sp.add_argument("--grid-points", type=int, default=None, metavar="N")
    sp.set_defaults(func=cmd_forward)

    sp = sub.add_parser("observe", help="synthesize the observation pair")
    common(sp)
    sp.add_argument("--orders", default=DEFAULT_ORDERS, metavar="A,B")
    sp.add_argument("--observation", metavar="PATH", help="output file (default OUT/observation.csv)")
    sp.add_argument("--swapped", action="store_true", help="norm at -t2, Fourier coefficient at t1")
    sp.set_defaults(func=cmd_observe)

    sp = sub.add_parser("invert", help="recover (alpha, beta) from an observation file")
    common(sp)
    sp.add_argument("--observation", metavar="PATH", required=True)
    sp.add_argument("--swapped", action="store_true", help="require a swapped record")
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("verify", help="run audits, oracle residuals and a round trip")
    common(sp)
    sp.add_argument("--orders", default=DEFAULT_ORDERS, metavar="A,B")
    sp.add_argument("--grid-points", type=int, default=None, metavar="N")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("ml-eval", help="evaluate E_{rho,mu}(x), x <= 0")
    sp.add_argument("rho", type=float)
    sp.add_argument("mu", type=float)
    sp.add_argument("x", type=float)
    sp.set_defaults(func=cmd_ml_eval)
    return p


def _configure_logging() -> None:
    level = os.environ.get("FRACMIX_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except SolvabilityError as exc:
        print(f"solvability violation [{exc.code}]: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(json.dumps(exc.report.as_dict(), indent=2), file=sys.stderr)
        return EXIT_SOLVABILITY
    except json.JSONDecodeError as exc:
        print(f"malformed config file: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FracmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
