"""Command-line entry point: ``nbarrier <command> [options]``.

Structured results go to standard output as JSON (per-point data to CSV
files); diagnostics go to standard error, with verbosity chosen by the
``NBARRIER_LOG`` environment variable (quiet, info, debug).

Exit codes: 0 success or pass, 2 invalid input, 3 inconclusive certificate,
4 bound violation, 5 solver non-convergence, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import barrier, model, nonexistence, tangent, verify, waves
from .errors import ConvergenceError, NBarrierError, ValidationError

log = logging.getLogger("nbarrier")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_INCONCLUSIVE = 3
EXIT_VIOLATION = 4
EXIT_NONCONVERGENCE = 5

COMMANDS = ("equilibria", "box", "bounds", "barrier", "tangent", "nonexist", "solve", "verify", "sweep")


@dataclass
class RunConfig:
    command: str
    system_path: str | None = None
    params: dict = field(default_factory=dict)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _setup_logging() -> None:
    level = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("NBARRIER_LOG", "info").lower(), logging.INFO
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("nbarrier")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _emit(obj, out_path=None) -> None:
    text = json.dumps(obj, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
    print(text)


def _load_system(cfg: RunConfig) -> model.LVSystem:
    if not cfg.system_path:
        raise ValidationError("--system is required")
    path = Path(cfg.system_path)
    if not path.is_file():
        try:
            path = model.preset_path(cfg.system_path)
        except Exception:
            pass
    if not path.is_file():
        raise ValidationError(f"system file not found: {cfg.system_path}")
    try:
        return model.load_system(path)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"system file is not valid JSON: {exc}") from None


def _alpha(p: dict, n: int) -> np.ndarray:
    a = p.get("alpha")
    return np.ones(n) if a is None else np.asarray(a, dtype=float)


def _two_species(p: dict) -> tangent.TwoSpeciesParams:
    return tangent.TwoSpeciesParams(p["alpha2"], p["beta"], p["d"], p["k"], p["a1"], p["a2"])


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


# one handler per command; each returns an exit code


def cmd_equilibria(cfg: RunConfig) -> int:
    sys_ = _load_system(cfg)
    eq = model.enumerate_equilibria(sys_)
    _emit(eq.to_dict(), cfg.params.get("out"))
    log.info("%d equilibria (%d singular supports skipped)", len(eq), len(eq.skipped))
    return EXIT_OK


def cmd_box(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    box = barrier.lv_box(sys_)
    out = {"box": box.to_dict()}
    if p.get("check_samples"):
        if p.get("seed") is None:
            raise ValidationError("--seed is required with --check-samples")
        rep = barrier.check_hypothesis_H(sys_, box, p["check_samples"], p["seed"])
        out["hypothesis"] = rep.to_dict()
    _emit(out, p.get("out"))
    log.info("box u_lower=%s u_upper=%s", box.u_lower.tolist(), box.u_upper.tolist())
    return EXIT_OK


def _chi_from(p: dict, sys_: model.LVSystem) -> int:
    if p.get("chi") is not None:
        return int(p["chi"])
    if p.get("e_minus") is not None and p.get("e_plus") is not None:
        return barrier.chi(p["e_minus"], p["e_plus"])
    return 1


def cmd_bounds(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    box = barrier.lv_box(sys_)
    b = barrier.nbmp_bounds(box, sys_.d, _alpha(p, sys_.n), _chi_from(p, sys_))
    _emit(b.to_dict(), p.get("out"))
    log.info("lambda_lower=%.6g lambda_upper=%.6g chi=%d", b.lambda_lower, b.lambda_upper, b.chi)
    return EXIT_OK


def cmd_barrier(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    box = barrier.lv_box(sys_)
    a = _alpha(p, sys_.n)
    out = {
        "lower": barrier.lower_barrier(box, sys_.d, a).to_dict(),
        "upper": barrier.upper_barrier(box, sys_.d, a).to_dict(),
    }
    _emit(out, p.get("out"))
    log.info("lower lambda1=%.6g upper lambda1=%.6g", out["lower"]["lambda1"], out["upper"]["lambda1"])
    return EXIT_OK


def cmd_tangent(cfg: RunConfig) -> int:
    p = cfg.params
    tp = _two_species(p)
    res = tangent.tangent_lambda2(tp)
    eta, lam1 = tangent.barrier_levels(res.lambda2, tp.d)
    cmp_ = verify.compare_bounds(tp, p.get("composition", "divide"))
    out = res.to_dict()
    out.update(eta=eta, lambda1=lam1, bounds=cmp_.to_dict())
    if p.get("check_samples"):
        if p.get("seed") is None:
            raise ValidationError("--seed is required with --check-samples")
        out["containment"] = {
            "at_lambda2": verify.containment_oracle(res.lambda2, tp, p["check_samples"], p["seed"]).to_dict(),
            "at_1.001_lambda2": verify.containment_oracle(
                1.001 * res.lambda2, tp, p["check_samples"], p["seed"]
            ).to_dict(),
        }
    if p.get("plot"):
        _write_csv(p["plot"], ["series", "u", "v"], [(s, _fmt(u), _fmt(v)) for s, u, v in tangent.plot_rows(tp)])
    _emit(out, p.get("out"))
    log.info("case %s lambda2=%.10g", res.case_id, res.lambda2)
    return EXIT_OK


def cmd_nonexist(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    mode = p.get("diffusions", "all")
    cert = nonexistence.check_nonexistence(sys_, mode)
    out = cert.to_dict()
    if p.get("threshold"):
        out["sigma4_threshold"] = nonexistence.sigma4_threshold(sys_, diffusions=mode)
    _emit(out, p.get("out"))
    log.info("verdict: %s", cert.verdict)
    return EXIT_OK if cert.certified else EXIT_INCONCLUSIVE


def _solver_config(p: dict) -> waves.SolverConfig:
    return waves.SolverConfig(
        newton_tol=p.get("newton_tol", 1e-10),
        max_iters=p.get("max_iters", 50),
        continuation_steps=p.get("continuation_steps", 1),
    )


def cmd_solve(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    if p.get("theta") is not None:
        sys_ = sys_.replace(theta=p["theta"])
    if p.get("e_minus") is None or p.get("e_plus") is None:
        raise ValidationError("--e-minus and --e-plus are required")
    grid = waves.Grid(p.get("L", 40.0), p.get("h", 0.05))
    try:
        prof = waves.solve_wave(sys_, p["e_minus"], p["e_plus"], grid, _solver_config(p), p.get("width", 1.0))
    except ConvergenceError as exc:
        if exc.profile is not None and p.get("out"):
            waves.save_profile(exc.profile, p["out"])
        log.error("%s", exc)
        return EXIT_NONCONVERGENCE
    if p.get("out"):
        waves.save_profile(prof, p["out"])
    _emit(prof.metadata())
    log.info("converged in %d iterations, residual %.3e", prof.iterations, prof.residual_norm)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params
    sys_ = _load_system(cfg)
    if not p.get("profile"):
        raise ValidationError("--profile is required")
    path = Path(p["profile"])
    if not path.is_file():
        raise ValidationError(f"profile file not found: {path}")
    prof = waves.load_profile(path)
    if prof.n != sys_.n:
        raise ValidationError(f"profile has {prof.n} species, system has {sys_.n}")
    a = _alpha(p, sys_.n)
    box = barrier.lv_box(sys_)
    b = barrier.nbmp_bounds(box, sys_.d, a, barrier.chi(prof.e_minus, prof.e_plus))
    tol = p.get("tol")
    if tol is None:
        tol = 10 * prof.grid.h**2 + 1e-8
    kw = {}
    if p.get("barriers"):
        kw = dict(d=sys_.d, lower=barrier.lower_barrier(box, sys_.d, a), upper=barrier.upper_barrier(box, sys_.d, a))
    rep = verify.verify_bounds(prof, a, b, tol, **kw)
    _emit(rep.to_dict(), p.get("out"))
    log.info("p in [%.6g, %.6g], bounds [%.6g, %.6g]: %s",
             rep.p_min, rep.p_max, b.lambda_lower, b.lambda_upper, "pass" if rep.pass_ else "VIOLATION")
    return EXIT_OK if rep.pass_ else EXIT_VIOLATION


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic range; values rounded to 12 decimals for stable output."""
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)):
        raise ValidationError("sweep bounds must be finite")
    if step <= 0 or stop < start:
        raise ValidationError("empty sweep range")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


TANGENT_SWEEP_PARAMS = ("alpha", "beta", "d", "k", "a1", "a2")


def sweep(cfg: RunConfig) -> tuple[list[str], list[tuple]]:
    """Rows of (swept value, results...) in increasing parameter order."""
    p = cfg.params
    target = p.get("target", "tangent")
    name = p.get("param")
    values = sweep_values(p["start"], p["stop"], p["step"])
    if target == "tangent":
        if name not in TANGENT_SWEEP_PARAMS:
            raise ValidationError(f"tangent sweeps accept --param in {TANGENT_SWEEP_PARAMS}")
        base = dict(alpha=p["alpha2"], beta=p["beta"], d=p["d"], k=p["k"], a1=p["a1"], a2=p["a2"])
        header = [name, "case_id", "lambda2", "baseline", "improved"]
        rows = []
        for v in values:
            tp = tangent.TwoSpeciesParams(**{**base, name: v})
            res = tangent.tangent_lambda2(tp)
            rows.append((v, res.case_id, res.lambda2, tangent.baseline_lower_bound(tp),
                         tangent.improved_lower_bound(tp, p.get("composition", "divide"))))
        return header, rows
    if target == "nonexist":
        if name != "sigma4":
            raise ValidationError("nonexist sweeps accept --param sigma4")
        sys_ = _load_system(cfg)
        if sys_.n != 4:
            raise ValidationError("nonexist sweeps need a four-species system")
        header = ["sigma4", "verdict", "h1_holds", "h2_lhs"]
        rows = []
        for v in values:
            sigma = sys_.sigma.copy()
            sigma[3] = v
            cert = nonexistence.check_nonexistence(sys_.replace(sigma=sigma), p.get("diffusions", "all"))
            rows.append((v, cert.verdict, cert.h1_holds, "" if cert.h2_lhs is None else cert.h2_lhs))
        return header, rows
    raise ValidationError(f"unknown sweep target {target!r}")


def cmd_sweep(cfg: RunConfig) -> int:
    header, rows = sweep(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([[_fmt(c) for c in r] for r in rows])
    if cfg.params.get("out"):
        Path(cfg.params["out"]).write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    log.info("%d rows", len(rows))
    return EXIT_OK


HANDLERS = {
    "equilibria": cmd_equilibria,
    "box": cmd_box,
    "bounds": cmd_bounds,
    "barrier": cmd_barrier,
    "tangent": cmd_tangent,
    "nonexist": cmd_nonexist,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig) -> int:
    if cfg.command not in HANDLERS:
        log.error("unknown command %r", cfg.command)
        return EXIT_VALIDATION
    try:
        return HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGENCE
    except NBarrierError as exc:
        log.error("%s", exc)
        return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbarrier", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def system_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--system", required=True, help="LVSystem JSON file or preset name")
        sp.add_argument("--out", help="also write the JSON result here")
        return sp

    def two_species(sp, with_d=True):
        sp.add_argument("--alpha", dest="alpha2", type=float, required=True)
        sp.add_argument("--beta", type=float, required=True)
        sp.add_argument("--k", type=float, required=True)
        sp.add_argument("--a1", type=float, required=True)
        sp.add_argument("--a2", type=float, required=True)
        sp.add_argument("--d", type=float, required=with_d, default=1.0)
        sp.add_argument("--composition", choices=tangent.COMPOSITIONS, default="divide")

    system_cmd("equilibria", "nonnegative equilibria")

    sp = system_cmd("box", "hypothesis box from hyperplane intercepts")
    sp.add_argument("--check-samples", type=int)
    sp.add_argument("--seed", type=int)

    for name, help_ in (("bounds", "speed-independent bounds"), ("barrier", "lower and upper barrier triples")):
        sp = system_cmd(name, help_)
        sp.add_argument("--alpha", type=_floats)
        if name == "bounds":
            sp.add_argument("--chi", type=int, choices=(0, 1))
            sp.add_argument("--e-minus", type=_floats)
            sp.add_argument("--e-plus", type=_floats)

    sp = sub.add_parser("tangent", help="tangent-line barrier for two species")
    two_species(sp)
    sp.add_argument("--plot", help="CSV of the curve and barrier lines")
    sp.add_argument("--check-samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")

    sp = system_cmd("nonexist", "four-species nonexistence certificate")
    sp.add_argument("--diffusions", choices=nonexistence.DIFFUSION_RANGES, default="all")
    sp.add_argument("--threshold", action="store_true", help="also bisect the sigma4 threshold")

    sp = sub.add_parser("solve", help="solve the truncated wave problem")
    sp.add_argument("--system", required=True)
    sp.add_argument("--e-minus", type=_floats, required=True)
    sp.add_argument("--e-plus", type=_floats, required=True)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--L", type=float, default=40.0)
    sp.add_argument("--h", type=float, default=0.05)
    sp.add_argument("--width", type=float, default=1.0)
    sp.add_argument("--newton-tol", type=float, default=1e-10)
    sp.add_argument("--max-iters", type=int, default=50)
    sp.add_argument("--continuation-steps", type=int, default=1)
    sp.add_argument("--out", help="profile CSV (metadata written next to it as .json)")

    sp = system_cmd("verify", "check bounds along a saved profile")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--alpha", type=_floats)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--barriers", action="store_true", help="also check q against the barrier levels")

    sp = sub.add_parser("sweep", help="tabulate results over a parameter range")
    sp.add_argument("target", choices=("tangent", "nonexist"))
    sp.add_argument("--param", required=True)
    sp.add_argument("--start", type=float, required=True)
    sp.add_argument("--stop", type=float, required=True)
    sp.add_argument("--step", type=float, required=True)
    sp.add_argument("--system")
    sp.add_argument("--diffusions", choices=nonexistence.DIFFUSION_RANGES, default="all")
    sp.add_argument("--alpha", dest="alpha2", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--a1", type=float, default=2.0)
    sp.add_argument("--a2", type=float, default=2.0)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--composition", choices=tangent.COMPOSITIONS, default="divide")
    sp.add_argument("--out")
    return ap


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    params = {k: v for k, v in vars(args).items() if k not in ("command", "system")}
    return run(RunConfig(args.command, getattr(args, "system", None), params))


if __name__ == "__main__":
    sys.exit(main())
