"""Command-line entry point.

Exit status: 0 success (all chains pass), 1 chain failure, 2 invalid
configuration, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import three_circle_check, vanishing_order_fit
from .beltrami import reduce_solution, save_reduction
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    CertificateRefused,
    NormalizationUnmet,
    TRACE_METHOD,
    RescaleParams,
    TraceInstance,
    landis_infsup,
    rescale_bourgain_kenig,
    trace_lower_bound,
)
from .fieldio import FieldFormatError, read_field, write_field
from .grid import ComplexField, RealField, VectorField2, make_disk_grid
from .manufactured import manufactured_instance
from .reports import FORMATS, emit_report, parse_report
from .singular import beurling_transform, cauchy_transform, make_plan
from .solver import PLaplaceProblem, solve_dirichlet
from .textfmt import dumps

__all__ = ["main", "run_config", "build_problem", "EXIT_OK", "EXIT_CHAIN", "EXIT_CONFIG", "EXIT_SOLVER"]

EXIT_OK, EXIT_CHAIN, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
log = logging.getLogger("pucp")


class SolverFailure(RuntimeError):
    pass


def _trig_weight_problem(cfg: ExperimentConfig, grid):
    """Weight 1 + a sin(b1 x) cos(b2 y) with quadratic boundary data."""
    prm = cfg.problem.get("params", {})
    a = float(prm.get("amplitude", 0.3))
    b1, b2 = prm.get("wave", (0.4, 0.3))
    c1, c2 = prm.get("quadratic", (0.05, 0.02))
    X, Y = grid.x, grid.y
    A = RealField(grid, 1 + a * np.sin(b1 * X) * np.cos(b2 * Y))
    data = X + c1 * (X ** 2 - Y ** 2) + c2 * X * Y
    return PLaplaceProblem("weighted", cfg.p, grid, data, weight=A, epsilon=cfg.epsilon,
                           description=f"trig weight p={cfg.p}")


def _coefficient_from_file(cfg: ExperimentConfig, path: str):
    fld = read_field(cfg.resolve(path))
    if cfg.variant == "drift":
        if not isinstance(fld, ComplexField):
            raise ConfigError("drift file must hold the complex field W_x + i W_y")
        return VectorField2(fld.grid, fld.samples.real.copy(), fld.samples.imag.copy())
    if not isinstance(fld, RealField):
        raise ConfigError("weight file must hold a real field")
    return fld


def build_problem(cfg: ExperimentConfig):
    """``(problem or None, solved v or None, coefficient)`` for a configuration."""
    src = cfg.problem["source"]
    if src == "manufactured":
        grid = make_disk_grid(cfg.n, cfg.domain_radius)
        inst = manufactured_instance(cfg.problem["kind"], cfg.p, grid, epsilon=cfg.epsilon,
                                     **cfg.problem.get("params", {}))
        prob = inst.problem
        if prob.variant != cfg.variant:
            raise ConfigError(f"kind {cfg.problem['kind']} builds the {prob.variant} equation")
        return prob, None, prob.drift if prob.variant == "drift" else prob.weight
    if src == "trig_weight":
        if cfg.variant != "weighted":
            raise ConfigError("trig_weight problems are weighted")
        prob = _trig_weight_problem(cfg, make_disk_grid(cfg.n, cfg.domain_radius))
        return prob, None, prob.weight
    coef = _coefficient_from_file(cfg, cfg.problem["coefficient"]) if "coefficient" in cfg.problem else None
    if "solution" in cfg.problem:
        return None, read_field(cfg.resolve(cfg.problem["solution"]), RealField), coef
    bd = read_field(cfg.resolve(cfg.problem["boundary"]), RealField)
    prob = PLaplaceProblem(cfg.variant, cfg.p, bd.grid, bd.samples,
                           drift=coef if cfg.variant == "drift" else None,
                           weight=coef if cfg.variant == "weighted" else None, epsilon=cfg.epsilon)
    return prob, None, coef


def _solve(cfg: ExperimentConfig, out: Path | None):
    prob, v, coef = build_problem(cfg)
    summary = {}
    if v is None:
        v, rep = solve_dirichlet(prob, tol=cfg.solver_tol, max_iter=cfg.solver_max_iter)
        summary = {"iterations": rep.iterations, "final_residual": rep.final_residual,
                   "regularized_residual": rep.regularized_residual,
                   "achieved_tolerance": rep.achieved_tolerance, "epsilon": rep.epsilon,
                   "residual_history": rep.residual_history}
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            write_field(out / "v.pucp", v)
            (out / "solve.json").write_text(dumps(summary))
        if not rep.achieved_tolerance:
            raise SolverFailure(f"solver stopped after {rep.iterations} iterations, "
                                f"residual {rep.regularized_residual:.3e} > {cfg.solver_tol:.1e}")
    return v, coef, summary


def _reduction_variant(cfg: ExperimentConfig) -> str:
    if cfg.variant == "drift":
        return "drift"
    return "weighted_nonlinear" if cfg.branch == "weighted_holder" else "weighted_lipschitz"


def run_config(cfg: ExperimentConfig, out: Path | None = None, stages: str = "trace") -> int:
    """Solve, reduce and trace as far as ``stages`` (solve | reduce | trace)."""
    out = Path(cfg.output) if out is None else out
    out.mkdir(parents=True, exist_ok=True)
    v, coef, _ = _solve(cfg, out)
    if stages == "solve":
        return EXIT_OK
    q_red = 2.0 if cfg.branch == "drift_l2" else cfg.q
    red = reduce_solution(v, coef, cfg.p, _reduction_variant(cfg), q=q_red, method=TRACE_METHOD)
    save_reduction(red, out / "reduction")
    if stages == "reduce":
        return EXIT_OK
    inst = TraceInstance(v, cfg.p, cfg.variant, coef, q=cfg.q, description=cfg.name)
    chain = trace_lower_bound(inst, cfg.branch, cfg.radii, calibration=cfg.calibration, reduction=red,
                              omega_inflation=cfg.omega_inflation, normalize=cfg.normalize)
    (out / "chain.json").write_text(emit_report(chain, "structured"))
    (out / "chain.csv").write_text(emit_report(chain, "csv"))
    (out / "chain.plot").write_text(emit_report(chain, "plotdata"))
    status = "pass" if chain.passed else f"FAIL at {chain.first_failure}"
    print(f"{cfg.name}: {cfg.branch} {status}")
    return EXIT_OK if chain.passed else EXIT_CHAIN


def _emit(obj, out: Path | None, name: str):
    text = dumps(obj)
    if out is None:
        sys.stdout.write(text)
    else:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _overrides(args):
    return {"branch": args.branch, "n": args.n, "tol": args.tol, "seed": args.seed}


def _cmd_pipeline(args, stages):
    cfg = load_config(args.config, _overrides(args))
    return run_config(cfg, Path(args.out) if args.out else None, stages)


def _cmd_transform(args):
    g = read_field(args.field)
    plan = make_plan(g.grid)
    res = (cauchy_transform if args.kind == "cauchy" else beurling_transform)(plan, g)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / f"{'T' if args.kind == 'cauchy' else 'S'}g.pucp", res)
    return EXIT_OK


def _cmd_three_circle(args):
    f = read_field(args.field)
    rep = three_circle_check(f, args.r, mode=args.mode)
    _emit(rep, Path(args.out) if args.out else None, "three_circle.json")
    return EXIT_OK if rep.get("passed", True) else EXIT_CHAIN


def _cmd_vanish(args):
    v = read_field(args.field, RealField)
    grid = v.grid
    r_max = args.r_max or grid.domain_radius
    r_min = args.r_min or r_max / 2 ** math.floor(math.log2(r_max / (4 * grid.spacing)))
    fit = vanishing_order_fit(v, 0j, r_min, r_max, args.n_max)
    _emit({"verdict": fit.verdict, "slope": fit.slope, "local_slope": fit.local_slope,
           "residual": fit.residual, "radii": list(fit.radii), "norms": list(fit.norms)},
          Path(args.out) if args.out else None, "vanish.json")
    return EXIT_OK


def _cmd_rescale(args):
    u = read_field(args.u, RealField) if args.u else None
    W = None
    if args.W:
        Wc = read_field(args.W, ComplexField)
        W = VectorField2(Wc.grid, Wc.samples.real.copy(), Wc.samples.imag.copy())
    params = RescaleParams(args.R, complex(args.z0.replace(" ", "")), args.q)
    uR, WR, rep = rescale_bourgain_kenig(u, W, params, make_disk_grid(args.n or 256, 8.0))
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if uR is not None:
            write_field(out / "u_R.pucp", uR)
        write_field(out / "W_R.pucp", ComplexField(WR.grid, WR.x_component + 1j * WR.y_component))
    _emit(rep, out, "rescale.json")
    return EXIT_OK if rep["passed"] else EXIT_CHAIN


def _cmd_landis(args):
    u = read_field(args.field)
    val = landis_infsup(u, args.R, args.probes, seed=args.seed)
    _emit({"R": args.R, "probe_count": args.probes, "seed": args.seed, "infsup": val},
          Path(args.out) if args.out else None, "landis.json")
    return EXIT_OK


def _cmd_report(args):
    chain = parse_report(Path(args.chain).read_text())
    text = emit_report(chain, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if chain.passed else EXIT_CHAIN


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (file for report)")
    common.add_argument("--seed", type=int, help="seed for probe angles and random pairs")
    common.add_argument("--format", choices=FORMATS, default="structured")
    common.add_argument("-v", "--verbose", action="store_true")
    cfgp = argparse.ArgumentParser(add_help=False)
    cfgp.add_argument("--config", required=True, help="YAML experiment configuration")
    cfgp.add_argument("--branch", help="override the configured proof branch")
    cfgp.add_argument("--n", type=int, help="override grid samples per side")
    cfgp.add_argument("--tol", type=float, help="override solver tolerance")
    fieldp = argparse.ArgumentParser(add_help=False)
    fieldp.add_argument("--field", required=True, help="input field file")

    ap = argparse.ArgumentParser(prog="pucp", description="Unique-continuation certificates for p-Laplace type equations.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("solve", lambda a: _cmd_pipeline(a, "solve"), "solve the Dirichlet problem"),
                            ("reduce", lambda a: _cmd_pipeline(a, "reduce"), "solve and reduce to Beltrami form"),
                            ("trace", lambda a: _cmd_pipeline(a, "trace"), "solve, reduce and trace the proof chain"),
                            ("run", lambda a: _cmd_pipeline(a, "trace"), "alias of trace")):
        sp = sub.add_parser(name, parents=[common, cfgp], help=help_)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("transform", parents=[common, fieldp], help="Cauchy or Beurling transform of a field")
    sp.add_argument("--kind", choices=("cauchy", "beurling"), default="cauchy")
    sp.set_defaults(func=_cmd_transform)
    sp = sub.add_parser("three-circle", parents=[common, fieldp], help="three-circle check")
    sp.add_argument("--r", type=float, default=0.25)
    sp.add_argument("--mode", choices=("holomorphic_exact", "quasiregular_fit"), default="holomorphic_exact")
    sp.set_defaults(func=_cmd_three_circle)
    sp = sub.add_parser("vanish", parents=[common, fieldp], help="vanishing-order fit at the centre")
    sp.add_argument("--r-min", type=float)
    sp.add_argument("--r-max", type=float)
    sp.add_argument("--n-max", type=float, default=50.0)
    sp.set_defaults(func=_cmd_vanish)
    sp = sub.add_parser("rescale", parents=[common], help="rescale u and W onto the standard grid")
    sp.add_argument("--u")
    sp.add_argument("--W", help="complex field W_x + i W_y")
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--z0", required=True, help="complex, e.g. 16+0j")
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=_cmd_rescale)
    sp = sub.add_parser("landis", parents=[common, fieldp], help="inf over |z0| = R of the unit-disc sup")
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--probes", type=int, default=64)
    sp.set_defaults(func=_cmd_landis)
    sp = sub.add_parser("report", parents=[common], help="re-emit a structured chain report")
    sp.add_argument("--chain", required=True)
    sp.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CertificateRefused, NormalizationUnmet) as exc:
        print(f"certificate refused: {exc}", file=sys.stderr)
        return EXIT_CHAIN
    except (FieldFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
