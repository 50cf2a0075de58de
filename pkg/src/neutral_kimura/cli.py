"""Command-line front end: ``kimura identities | solve | validate-mc``.

Exit status: 0 on success, 1 on a numerical failure or a failed check,
2 on usage or configuration errors.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import kimura, special_functions as sf
from .config import ConfigError, load_config
from .quadrature import QuadratureError, adaptive_integrate, gauss_gegenbauer
from .wf_oracle import WfConfig, WfConfigError, generation_for_time, simulate, time_map

OUT_ENV = "KIMURA_OUT_DIR"
DEFAULT_ALPHAS = "0.6,0.9,0.999,1.0,1.001,1.5,2.0,3.25"
IDENTITY_T_GRID = (-0.5, -0.3, -0.1, 0.1, 0.3, 0.5)
Z_LIMIT = 4.0


def fmt(value):
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def _out_dir(args):
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

def identity_rows(alphas, n_max, tol):
    """Yield (identity, alpha, n, closed, quadrature, abs_error, passed) for every check."""
    quad_tol = tol / 10.0
    for alpha in alphas:
        for n in range(n_max + 1):
            closed = sf.integral_identity_const(alpha, n)
            quad = adaptive_integrate(lambda x: sf.gegenbauer_eval(alpha, n, x), (-1.0, 1.0), quad_tol)
            yield "integral_const", alpha, n, closed, quad, abs(closed - quad), abs(closed - quad) <= tol
            closed = sf.integral_identity_linear(alpha, n)
            quad = adaptive_integrate(lambda x: x * sf.gegenbauer_eval(alpha, n, x), (-1.0, 1.0), quad_tol)
            yield "integral_linear", alpha, n, closed, quad, abs(closed - quad), abs(closed - quad) <= tol
        if alpha != 0.0:
            rule = gauss_gegenbauer(n_max + 1, alpha)
            table = sf.gegenbauer_table(alpha, n_max, rule.nodes)
            gram = np.array([[math.fsum(rule.weights * table[i] * table[j]) for j in range(n_max + 1)]
                             for i in range(n_max + 1)])
            scale = 1.0
            for n in range(n_max + 1):
                closed = sf.orthogonality_norm(alpha, n)
                scale = max(scale, closed)
                err = abs(closed - gram[n, n])
                yield "orthogonality_norm", alpha, n, closed, gram[n, n], err, err <= max(tol, 1e-9) * closed
            off = np.abs(gram - np.diag(np.diag(gram))).max()
            yield "orthogonality_offdiag", alpha, n_max, 0.0, off, off, off <= tol * scale
        for t in IDENTITY_T_GRID:
            closed = sf.f_closed(alpha, t)
            quad = adaptive_integrate(lambda x: (1.0 - 2.0 * x * t + t * t) ** (-alpha), (-1.0, 1.0), quad_tol)
            yield f"f_closed[t={t!r}]", alpha, "", closed, quad, abs(closed - quad), abs(closed - quad) <= tol
            if alpha > 0.5:
                closed = sf.xmoment_gen_closed(alpha, t)
                quad = adaptive_integrate(lambda x: x * (1.0 - 2.0 * x * t + t * t) ** (-alpha),
                                          (-1.0, 1.0), quad_tol)
                yield f"xmoment[t={t!r}]", alpha, "", closed, quad, abs(closed - quad), abs(closed - quad) <= tol


def cmd_identities(args):
    rows = []
    failures = 0
    for identity, alpha, n, closed, quad, err, ok in identity_rows(args.alpha, args.n_max, args.tol):
        rows.append((identity, fmt(alpha), str(n), closed, quad, err))
        if not ok:
            failures += 1
            print(f"FAIL {identity} alpha={alpha!r} n={n} abs_error={err:.3e}", file=sys.stderr)
    out = _out_dir(args)
    write_csv(out / "identities.csv", ["identity", "alpha", "n", "closed_form", "quadrature", "abs_error"], rows)
    print(f"{len(rows) - failures}/{len(rows)} identity checks passed; wrote {out / 'identities.csv'}")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _asymptotic(sol, ic, times):
    if isinstance(ic, kimura.Delta):
        return kimura.asymptotic_fixation(ic.x0, times)
    d0 = sol.coefficients.values[0]
    return sol.initial_mean - 0.5 * d0 * np.exp(-2.0 * np.asarray(times))


def cmd_solve(args):
    cfg = load_config(args.config)
    out = _out_dir(args)
    ic = cfg.initial_condition
    sol = kimura.solve(ic, cfg.truncation, None if isinstance(ic, kimura.Delta) else cfg.quad_order)
    times = np.asarray(cfg.times, dtype=np.float64)
    report = kimura.conservation_report(sol, times, cfg.quad_order)
    a = np.atleast_1d(kimura.extinction_probability(sol, times))
    b = np.atleast_1d(kimura.fixation_probability(sol, times))
    asym = np.atleast_1d(_asymptotic(sol, ic, times))
    rows = list(zip(times, a, b, report.interior_mass, report.mass_residual, report.mean_residual, asym))
    if not np.all(np.isfinite(np.array(rows, dtype=np.float64))):
        raise FloatingPointError("non-finite value in the solution summary")
    write_csv(out / "summary.csv",
              ["t", "a", "b", "interior_mass", "mass_residual", "mean_residual", "asymptotic_b"], rows)
    grid = np.linspace(0.0, 1.0, cfg.output_grid)
    for t in cfg.times:
        r = kimura.interior_density(sol, grid, float(t))
        write_csv(out / f"density_{float(t)!r}.csv", ["x", "r"], zip(grid, r))
    meta = {
        "config": cfg.to_dict(),
        "coefficients": [float(v) for v in sol.coefficients.values],
        "diagnostics": {
            "initial_mass": sol.initial_mass,
            "initial_mean": sol.initial_mean,
            "even_coefficient_sum": sol.coefficients.even_sum,
            "half_coefficient_sum": sol.coefficients.half_sum,
            "fixation_tail": sol.fixation_tail,
            "extinction_tail": sol.extinction_tail,
            "projection_error": report.projection_error,
            "min_interior_density": [float(v) for v in report.min_density],
        },
    }
    with open(out / "meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(rows)} summary rows to {out}")
    return 0


# ---------------------------------------------------------------------------
# validate-mc
# ---------------------------------------------------------------------------

def mc_compare_rows(cfg):
    """(t, b_spectral, b_mc, stderr, z) for every requested time."""
    wf = cfg.wf
    stats = simulate(wf)
    sol = kimura.solve(kimura.Delta(wf.start_frequency), cfg.truncation)
    rows = []
    for t in cfg.times:
        g = generation_for_time(t, wf.population_size)
        if g > wf.generations:
            raise ConfigError("times", f"t={t!r} needs generation {g} > wf.generations={wf.generations}")
        tg = time_map(g, wf.population_size)
        b_spec = kimura.fixation_probability(sol, tg)
        b_mc = stats.fixed_fraction[g]
        se = float(stats.fraction_stderr(b_spec))
        if se > 0:
            z = (b_mc - b_spec) / se
        else:
            z = 0.0 if abs(b_mc - b_spec) < 1.0 / wf.replicates else math.inf
        rows.append((tg, b_spec, b_mc, se, z))
    return rows


def cmd_validate_mc(args):
    cfg = load_config(args.config)
    if cfg.wf is None:
        raise ConfigError("wf", "validate-mc needs a wf block")
    if args.seed is not None:
        w = cfg.wf
        try:
            wf = WfConfig(w.population_size, w.x0, w.generations, w.replicates, args.seed)
        except WfConfigError as exc:
            raise ConfigError("--seed", str(exc)) from None
        cfg = type(cfg)(cfg.initial_condition, cfg.truncation, cfg.times, cfg.quad_order, cfg.output_grid, wf)
    out = _out_dir(args)
    rows = mc_compare_rows(cfg)
    write_csv(out / "mc_compare.csv", ["t", "b_spectral", "b_mc", "mc_stderr", "z_score"], rows)
    worst = max((abs(r[4]) for r in rows), default=0.0)
    print(f"max |z| = {worst:.3f} over {len(rows)} times; wrote {out / 'mc_compare.csv'}")
    return 0 if worst <= Z_LIMIT else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _alpha_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty alpha list")
    for v in values:
        if not v > -0.5:
            raise argparse.ArgumentTypeError(f"alpha must exceed -1/2, got {v!r}")
    return values


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _natural(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text!r}")
    return v


def _seed(text):
    v = _natural(text)
    if v >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="kimura", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="check closed-form Gegenbauer identities against quadrature")
    p.add_argument("--alpha", type=_alpha_list, default=_alpha_list(DEFAULT_ALPHAS),
                   help=f"comma-separated alpha values (default {DEFAULT_ALPHAS})")
    p.add_argument("--n-max", type=_natural, default=20)
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("solve", help="solve a scenario and write summary/density/meta files")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate-mc", help="compare b(t) with Wright-Fisher Monte Carlo")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_validate_mc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, kimura.InitialConditionError, sf.DomainError) as exc:
        print(f"kimura: error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, FloatingPointError, ArithmeticError) as exc:
        print(f"kimura: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
