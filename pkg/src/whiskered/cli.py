"""``kam`` command line: check-model | solve | continue | lindstedt | domain | rates.

Exit codes: 0 success, 2 validated rejection (the computation ran and
said no), 1 internal error, 64 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .cocycle import FrameError, HyperbolicityError, ResolutionError, estimate_rates
from .domain import GridSpec, scan_analyticity_domain, scan_solver_config
from .fourier import CohomologyError, ResonanceError, SpectralGrid
from .lindstedt import LindstedtError, lindstedt_bundle_expansion, lindstedt_torus_expansion
from .models import DomainMarginError, check_conformal
from .newton import (NonConvergenceError, TwistError, cocycle_of, continue_in_eps, exact_torus,
                     invariance_error, reference_splitting, run_kam_iteration)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INTERNAL, EXIT_REJECTED, EXIT_USAGE = 0, 1, 2, 64

REJECTIONS = (NonConvergenceError, TwistError, HyperbolicityError, FrameError, ResolutionError,
              CohomologyError, ResonanceError, DomainMarginError, LindstedtError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(text: str):
    try:
        z = complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return z.real if z.imag == 0 else z


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (complex, np.complexfloating)):
        return _c(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(payload) -> str:
    """Canonical JSON: sorted keys, fixed indentation, repr floats."""
    return json.dumps(payload, sort_keys=True, indent=1, default=_json_default) + "\n"


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ----------------------------------------------------------------------------- commands

def _config(args):
    cfg = load_config(args.model)
    s = cfg.solver
    if getattr(args, "modes", None) is not None:
        s = replace(s, n_modes=args.modes)
    if getattr(args, "tol", None) is not None:
        s = replace(s, tol=args.tol)
    cfg.solver = s
    d = cfg.domain
    for flag, name in (("order_N", "order_N"), ("A", "threshold_A"), ("r0", "r0"), ("grid", "grid"),
                       ("workers", "workers"), ("grid_kind", "grid_kind")):
        v = getattr(args, flag, None)
        if v is not None:
            d = replace(d, **{name: v})
    cfg.domain = d
    dio = cfg.diophantine
    if getattr(args, "tau", None) is not None:
        dio = replace(dio, tau=args.tau)
    if getattr(args, "kmax", None) is not None:
        dio = replace(dio, k_max=args.kmax)
    cfg.diophantine = dio
    return cfg


def cmd_check_model(args, cfg):
    fam = cfg.family()
    out = {"eps": [], "conformality_residual": []}
    ok = True
    for eps in args.eps:
        r = check_conformal(fam.with_eps(eps), args.samples, rng=args.seed)
        out["eps"].append(_c(eps))
        out["conformality_residual"].append(r)
        ok &= r <= args.threshold
        print(f"eps={eps}: max |Df^T J Df - lambda J| = {r:.3e}")
    grid = SpectralGrid(cfg.solver.n_modes)
    fam0 = fam.with_eps(0.0)
    _, ex = invariance_error(exact_torus(fam0, grid), fam0)
    out["exact_torus_residual"] = ex
    ok &= ex <= 1e-14
    print(f"eps=0 exact torus invariance residual = {ex:.3e}")
    out["passed"] = bool(ok)
    return (EXIT_OK if ok else EXIT_REJECTED), out


def _seed(cfg, fam, grid, how, order_N):
    fam0 = fam.with_eps(0.0)
    if how == "lindstedt" and fam.eps != 0:
        ex = lindstedt_torus_expansion(fam, order_N, SpectralGrid(max(32, 4 * order_N)))
        K = ex.torus_at(fam.eps, grid=grid)
    else:
        K = exact_torus(fam0, grid)
    if cfg.model.mu_initial is not None:
        K = replace(K, mu=cfg.model.mu_initial)
    return K, reference_splitting(fam, grid)


def cmd_solve(args, cfg):
    fam = cfg.family(args.eps)
    grid = cfg.solver.grid()
    K, s = _seed(cfg, fam, grid, args.seed, cfg.domain.order_N)
    res = run_kam_iteration(K, fam, s, cfg.solver)
    out = {"eps": _c(args.eps), "seed": args.seed, **res.to_json()}
    for i, e in enumerate(res.errors):
        print(f"iter {i}: error {e:.3e}")
    green = res.report.green
    print(f"mu = {complex(res.K.mu).real:.15g}  converged={res.converged}  report green={green}")
    return (EXIT_OK if green else EXIT_REJECTED), out


def cmd_continue(args, cfg):
    fam = cfg.family()
    r = continue_in_eps(fam, args.eps_start, args.eps_end, args.step, cfg.solver, args.min_step)
    for p in r.points:
        print(f"eps={p['eps']:.6g} mu={p['mu'][0]:.15g} iterations={p['iterations']}")
    if r.breakdown:
        print(f"breakdown at eps={r.breakdown_eps}: {r.reason}")
    return (EXIT_REJECTED if r.breakdown else EXIT_OK), r.to_json()


def cmd_lindstedt(args, cfg):
    fam = cfg.family()
    grid = SpectralGrid(args.modes)
    ex = lindstedt_torus_expansion(fam, cfg.domain.order_N, grid)
    if args.bundles and fam.phase_dim > 2:
        lindstedt_bundle_expansion(fam, ex)
    coeffs = ex.residual_coefficients()
    table = []
    for eps in args.eps_table:
        row = {"eps": eps, "residual_series": ex.residual_at(eps, coeffs=coeffs),
               "residual_direct": ex.direct_residual_at(eps)}
        table.append(row)
        print(f"eps={eps:.4g}  residual {row['residual_series']:.3e}  (direct {row['residual_direct']:.3e})")
    return EXIT_OK, {"expansion": ex.to_json(), "residual_table": table}


def cmd_domain(args, cfg):
    fam = cfg.family()
    d = cfg.domain
    spec = GridSpec(d.grid_kind, d.grid, d.r0, d.n_r, d.n_theta)
    ex = lindstedt_torus_expansion(fam, d.order_N, SpectralGrid(64))
    if d.use_bundles and fam.phase_dim > 2:
        lindstedt_bundle_expansion(fam, ex)
    solver = scan_solver_config(tol=cfg.solver.tol, tol_split=cfg.solver.tol_split)
    raster = scan_analyticity_domain(fam, ex, spec, cfg.dio_params(), cfg.set_params(), solver,
                                     workers=d.workers or None, use_bundles=d.use_bundles, modes=d.modes)
    text = raster.to_csv()
    counts = raster.counts()
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    return EXIT_OK, {"csv": text, "counts": counts}


def cmd_rates(args, cfg):
    fam = cfg.family(args.eps)
    grid = cfg.solver.grid()
    if args.eps == 0:
        K, s = exact_torus(fam, grid), reference_splitting(fam, grid)
        rates = estimate_rates(cocycle_of(K, fam), s, cfg.solver.rate_horizon, cfg.solver.rate_samples)
    else:
        K, s = _seed(cfg, fam, grid, "exact", cfg.domain.order_N)
        res = run_kam_iteration(K, fam, s, cfg.solver)
        rates = res.splitting.rates
    lam = abs(complex(fam.lam))
    out = {"eps": _c(args.eps), "rates": rates.as_dict(), "lambda": lam,
           "pairing_product": rates.lam_minus * rates.lam_plus,
           "pairing_defect": abs(rates.lam_minus * rates.lam_plus - lam),
           "trichotomy": rates.trichotomy_ok(), "detail": rates.detail}
    for k, v in rates.as_dict().items():
        print(f"{k} = {v:.12g}")
    print(f"lambda_- * lambda_+ = {out['pairing_product']:.12g} (lambda = {lam:.12g})")
    return (EXIT_OK if out["trichotomy"] else EXIT_REJECTED), out


# ----------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kam", description="Whiskered tori of conformally symplectic maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default="-"):
        sp.add_argument("--model", required=True, help="TOML config file")
        sp.add_argument("--out", default=out_default, help="output path ('-' for stdout)")
        sp.add_argument("--metadata", default=None, help="write timing / platform metadata here")
        return sp

    sp = common(sub.add_parser("check-model", help="conformality and exact-torus self test"), out_default=None)
    sp.add_argument("--eps", type=_number, nargs="+", default=[0.0, 0.05, 0.1])
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=1e-12)
    sp.set_defaults(func=cmd_check_model)

    sp = common(sub.add_parser("solve", help="Newton iteration at one eps"))
    sp.add_argument("--eps", type=_number, required=True)
    sp.add_argument("--modes", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--seed", choices=("exact", "lindstedt"), default="exact")
    sp.set_defaults(func=cmd_solve)

    sp = common(sub.add_parser("continue", help="continuation in eps with step halving"))
    sp.add_argument("--eps-start", type=float, default=0.0)
    sp.add_argument("--eps-end", type=float, required=True)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--min-step", type=float, default=None)
    sp.add_argument("--modes", type=int)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_continue)

    sp = common(sub.add_parser("lindstedt", help="series expansion and residual table"))
    sp.add_argument("--order-N", dest="order_N", type=int)
    sp.add_argument("--modes", type=int, default=64)
    sp.add_argument("--eps-table", type=float, nargs="+", default=list(np.logspace(-3, -1, 9)))
    sp.add_argument("--no-bundles", dest="bundles", action="store_false")
    sp.set_defaults(func=cmd_lindstedt)

    sp = common(sub.add_parser("domain", help="scan the complex eps disc"))
    sp.add_argument("--r0", type=float)
    sp.add_argument("--grid", type=int)
    sp.add_argument("--grid-kind", dest="grid_kind", choices=("cartesian", "polar"))
    sp.add_argument("--order-N", dest="order_N", type=int)
    sp.add_argument("--A", type=float)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_domain)

    sp = common(sub.add_parser("rates", help="trichotomy rate estimates"))
    sp.add_argument("--eps", type=_number, default=0.0)
    sp.add_argument("--modes", type=int)
    sp.set_defaults(func=cmd_rates)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = _config(args)
    except (ConfigError, OSError) as exc:
        print(f"kam: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        code, payload = args.func(args, cfg)
    except REJECTIONS as exc:
        print(f"kam: rejected: {type(exc).__name__}: {exc}", file=sys.stderr)
        code, payload = EXIT_REJECTED, {"rejected": True, "error": f"{type(exc).__name__}: {exc}"}
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"kam: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.out is not None:
        if args.command == "domain" and "csv" in payload:
            _write(args.out, payload["csv"])
        else:
            doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": cfg.as_dict(),
                   "result": payload}
            _write(args.out, dumps(doc))
    if args.metadata:
        meta = {"elapsed_seconds": time.perf_counter() - t0, "python": platform.python_version(),
                "numpy": np.__version__, "platform": platform.platform()}
        _write(args.metadata, dumps(meta))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
