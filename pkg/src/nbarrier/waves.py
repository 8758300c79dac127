"""Traveling-wave profiles on a truncated line.

The wave equations are discretised with second-order central differences on
a uniform grid over [-L, L], with the end states imposed as Dirichlet data
at x = -L and x = L.  The speed theta is an input: no phase condition is
added, so on a long domain the profile is only weakly pinned in position and
comparisons should be made modulo translation.

The nonlinear system is solved by damped Newton with an analytic Jacobian,
assembled in banded form (unknowns interleaved point by point) and factored
once per iteration with LAPACK's banded LU.  Translation invariance makes the
Jacobian nearly singular on long domains; when its smallest singular value
drops below ``NULL_MODE_RTOL`` times its norm, that singular pair is removed
from the Newton step (a truncated-SVD step), which fixes the gauge without
adding a phase equation.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lapack

from .errors import ConvergenceError, LinearSolveError, ValidationError
from .model import LVSystem, enumerate_equilibria, kinetics_array, residual_array

log = logging.getLogger(__name__)

NEGATIVE_FLOOR = -1e-10
EQUILIBRIUM_TOL = 1e-8
NULL_MODE_RTOL = 1e-8


@dataclass(frozen=True)
class Grid:
    L: float
    h: float

    def __post_init__(self):
        if not (self.L > 0 and self.h > 0):
            raise ValidationError("grid needs L > 0 and h > 0")
        M = round(2 * self.L / self.h)
        if M < 4 or abs(M * self.h - 2 * self.L) > 1e-9 * self.L:
            raise ValidationError(f"h={self.h} must divide 2L={2 * self.L} into at least 4 cells")

    @property
    def M(self) -> int:
        return round(2 * self.L / self.h)

    @property
    def points(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.M + 1)

    def refined(self, factor: int) -> "Grid":
        return Grid(self.L, self.h / factor)


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    min_step: float = 2.0**-20
    continuation_steps: int = 1

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValidationError("newton_tol must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if not 0 < self.damping < 1:
            raise ValidationError("damping must lie in (0, 1)")
        if not 0 < self.min_step <= 1:
            raise ValidationError("min_step must lie in (0, 1]")
        if self.continuation_steps < 1:
            raise ValidationError("continuation_steps must be >= 1")


@dataclass(frozen=True, eq=False)
class WaveProfile:
    grid: Grid
    values: np.ndarray
    theta: float
    e_minus: np.ndarray
    e_plus: np.ndarray
    residual_norm: float = float("nan")
    iterations: int = 0
    history: tuple[float, ...] = field(default=())

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def metadata(self) -> dict:
        return {
            "theta": self.theta,
            "L": self.grid.L,
            "h": self.grid.h,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "e_minus": np.asarray(self.e_minus).tolist(),
            "e_plus": np.asarray(self.e_plus).tolist(),
        }


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def initial_guess(e_minus, e_plus, grid: Grid, width: float = 1.0, theta: float = 0.0) -> WaveProfile:
    """Logistic interpolation from e_minus (left) to e_plus (right), centred at 0."""
    if not width > 0:
        raise ValidationError("width must be > 0")
    em = np.asarray(e_minus, dtype=float)
    ep = np.asarray(e_plus, dtype=float)
    if em.shape != ep.shape or em.ndim != 1:
        raise ValidationError("end states must be vectors of equal length")
    s = _sigmoid(grid.points / width)
    values = em[:, None] + (ep - em)[:, None] * s[None, :]
    values[:, 0] = em
    values[:, -1] = ep
    return WaveProfile(grid, values, float(theta), em.copy(), ep.copy())


def _banded_jacobian(sys: LVSystem, interior: np.ndarray, h: float) -> np.ndarray:
    """Jacobian of the interior residual in ``solve_banded`` layout with l = u = n.

    Unknown (species i, interior point j) sits at row j * n + i.
    """
    n, P = interior.shape
    N = n * P
    ab = np.zeros((2 * n + 1, N))
    diff = sys.d / h**2
    adv = sys.theta / (2 * h)

    # local block: -2 d_i / h^2 delta_ik + d g_i / d u_k
    f = sys.sigma[:, None] - sys.c @ interior
    m = sys.m[:, None]
    if np.all(sys.m == 1.0):
        up, dup = interior, np.ones_like(interior)
    else:
        a = np.abs(interior)
        up = np.sign(interior) * a**m
        dup = m * a ** (m - 1)
    for i in range(n):
        for k in range(n):
            entry = -up[i] * sys.c[i, k]
            if i == k:
                entry = entry + dup[i] * f[i] - 2 * diff[i]
            # A[j*n+i, j*n+k] -> ab[n + i - k, j*n + k]
            ab[n + i - k, k::n] = entry
    # neighbour couplings: A[j*n+i, (j+1)*n+i] = diff + adv, A[j*n+i, (j-1)*n+i] = diff - adv
    for i in range(n):
        sup = np.full(P, diff[i] + adv)
        sub = np.full(P, diff[i] - adv)
        cols_up = np.arange(1, P) * n + i
        ab[0, cols_up] = sup[:-1]
        cols_dn = np.arange(0, P - 1) * n + i
        ab[2 * n, cols_dn] = sub[1:]
    return ab


def _norm(sys, x, values) -> tuple[np.ndarray, float]:
    r = residual_array(sys, x, values)
    return r, float(np.max(np.abs(r)))


class _BandedLU:
    """LU factors of a banded matrix given in ``solve_banded`` layout (l = u = bw)."""

    def __init__(self, ab: np.ndarray, bw: int):
        work = np.vstack([np.zeros((bw, ab.shape[1])), ab])
        self.bw = bw
        self.lu, self.piv, info = lapack.dgbtrf(work, bw, bw)
        if info > 0:
            raise np.linalg.LinAlgError(f"exactly singular pivot at row {info}")
        # infinity norm of the matrix, for the relative singularity test
        rows = np.zeros(ab.shape[1])
        for r in range(ab.shape[0]):
            shift = r - bw
            col = np.arange(ab.shape[1])
            ok = (col + shift >= 0) & (col + shift < ab.shape[1])
            np.add.at(rows, col[ok] + shift, np.abs(ab[r, ok]))
        self.norm = float(rows.max())

    def solve(self, b: np.ndarray, trans: int = 0) -> np.ndarray:
        x, info = lapack.dgbtrs(self.lu, self.bw, self.bw, b, self.piv, trans=trans)
        if info != 0:
            raise np.linalg.LinAlgError(f"dgbtrs failed with info={info}")
        return x

    def smallest_singular_pair(self, iters: int = 3):
        """(sigma, u, v) for the smallest singular value, by inverse iteration on J^T J."""
        N = self.lu.shape[1]
        v = np.cos(np.arange(N) * 0.7) + 1.0
        v /= np.linalg.norm(v)
        for _ in range(iters):
            v = self.solve(self.solve(v, trans=1))
            v /= np.linalg.norm(v)
        w = self.solve(v, trans=1)
        sigma = 1.0 / np.linalg.norm(w)
        return sigma, w * sigma, v


def _newton_step(ab: np.ndarray, bw: int, rhs: np.ndarray) -> np.ndarray:
    lu = _BandedLU(ab, bw)
    sigma, u0, v0 = lu.smallest_singular_pair()
    if sigma < NULL_MODE_RTOL * lu.norm:
        rhs = rhs - u0 * (u0 @ rhs)
        step = lu.solve(rhs)
        return step - v0 * (v0 @ step)
    return lu.solve(rhs)


def _check_end_states(sys: LVSystem, e_minus, e_plus):
    eq = enumerate_equilibria(sys)
    for name, e in (("e_minus", e_minus), ("e_plus", e_plus)):
        e = np.asarray(e, dtype=float)
        if e.shape != (sys.n,):
            raise ValidationError(f"{name} must have length {sys.n}")
        if not eq.contains(e, EQUILIBRIUM_TOL):
            raise ValidationError(f"{name}={e.tolist()} is not an equilibrium of the system")


def newton(sys: LVSystem, start: WaveProfile, config: SolverConfig = SolverConfig()) -> WaveProfile:
    """Damped Newton polish of ``start`` with its boundary columns held fixed."""
    x = start.grid.points
    h = start.grid.h
    values = np.array(start.values, dtype=float)
    n = values.shape[0]
    r, norm = _norm(sys, x, values)
    history = [norm]
    it = 0
    while norm > config.newton_tol:
        if it >= config.max_iters:
            last = replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))
            raise ConvergenceError(
                f"no convergence after {it} Newton iterations (residual {norm:.3e})",
                profile=last, iterations=it, norm=norm,
            )
        ab = _banded_jacobian(sys, values[:, 1:-1], h)
        rhs = -r.T.reshape(-1)
        if not np.all(np.isfinite(ab)):
            last = replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))
            raise LinearSolveError("non-finite Jacobian", profile=last, iterations=it, norm=norm)
        try:
            step = _newton_step(ab, n, rhs)
        except (np.linalg.LinAlgError, ValueError) as exc:
            last = replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))
            raise LinearSolveError(f"banded solve failed: {exc}", profile=last, iterations=it, norm=norm) from None
        step = step.reshape(-1, n).T
        t = 1.0
        while True:
            trial = values.copy()
            trial[:, 1:-1] += t * step
            r_trial, n_trial = _norm(sys, x, trial)
            if n_trial < norm:
                break
            t *= config.damping
            if t < config.min_step:
                last = replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))
                raise ConvergenceError(
                    f"line search stalled at residual {norm:.3e}", profile=last, iterations=it, norm=norm
                )
        values, r, norm = trial, r_trial, n_trial
        it += 1
        history.append(norm)
        log.debug("newton iter %d step %.3g residual %.3e", it, t, norm)

    if values.min() < NEGATIVE_FLOOR:
        last = replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))
        raise ConvergenceError(
            f"converged profile has negative values (min {values.min():.3e})",
            profile=last, iterations=it, norm=norm,
        )
    if values.min() < 0:
        values = np.maximum(values, 0.0)
        _, norm = _norm(sys, x, values)
    return replace(start, values=values, residual_norm=norm, iterations=it, history=tuple(history))


def solve_wave(
    sys: LVSystem,
    e_minus,
    e_plus,
    grid: Grid,
    config: SolverConfig = SolverConfig(),
    width: float = 1.0,
    guess: WaveProfile | None = None,
) -> WaveProfile:
    """Profile joining ``e_minus`` at x = -L to ``e_plus`` at x = L at speed ``sys.theta``.

    With ``continuation_steps > 1`` the speed is ramped linearly from 0 to
    ``sys.theta``, each stage starting from the previous solution.
    """
    _check_end_states(sys, e_minus, e_plus)
    profile = guess if guess is not None else initial_guess(e_minus, e_plus, grid, width, sys.theta)
    steps = config.continuation_steps
    for s in range(1, steps + 1):
        theta = sys.theta * s / steps
        stage = sys if s == steps else sys.replace(theta=theta)
        profile = newton(stage, replace(profile, theta=theta), config)
    return profile


def refine(profile: WaveProfile, factor: int, sys: LVSystem, config: SolverConfig = SolverConfig()) -> WaveProfile:
    """Interpolate onto a grid ``factor`` times finer and polish with Newton."""
    if int(factor) != factor or factor < 2:
        raise ValidationError("refine factor must be an integer >= 2")
    grid = profile.grid.refined(int(factor))
    x = grid.points
    values = np.vstack([np.interp(x, profile.x, row) for row in profile.values])
    start = WaveProfile(grid, values, profile.theta, profile.e_minus, profile.e_plus)
    return newton(sys.replace(theta=profile.theta), start, config)


def half_height_position(x, u, level: float | None = None) -> float:
    """Abscissa where a monotone component crosses ``level`` (default: mid-range).

    Uses a cubic spline through the samples so the crossing is located to
    fourth order rather than to the linear-interpolation error.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if level is None:
        level = 0.5 * (u[0] + u[-1])
    s = np.sign(u - level)
    idx = np.flatnonzero(s[:-1] * s[1:] <= 0)
    if idx.size == 0:
        raise ValidationError("component never crosses the requested level")
    j = int(idx[0])
    lo, hi = max(0, j - 3), min(x.size, j + 5)
    spline = CubicSpline(x[lo:hi], u[lo:hi] - level)
    roots = [r for r in spline.roots(extrapolate=False) if x[j] - 1e-12 <= r <= x[j + 1] + 1e-12]
    if not roots:
        return float(x[j] + (level - u[j]) * (x[j + 1] - x[j]) / (u[j + 1] - u[j]))
    return float(roots[0])


def domain_doubling_check(
    sys: LVSystem,
    e_minus,
    e_plus,
    L: float,
    h: float,
    core: float = 10.0,
    config: SolverConfig = SolverConfig(),
) -> float:
    """Max difference over [-core, core] between solutions on [-L, L] and [-2L, 2L].

    Both profiles are recentred on the mid-height crossing of the first
    component that changes between the end states.
    """
    a = solve_wave(sys, e_minus, e_plus, Grid(L, h), config)
    b = solve_wave(sys, e_minus, e_plus, Grid(2 * L, h), config)
    comp = int(np.argmax(np.abs(np.asarray(e_plus) - np.asarray(e_minus))))
    xa = a.x - half_height_position(a.x, a.values[comp])
    xb = b.x - half_height_position(b.x, b.values[comp])
    xs = np.linspace(-core, core, 2001)
    diffs = [np.interp(xs, xa, ra) - np.interp(xs, xb, rb) for ra, rb in zip(a.values, b.values)]
    return float(np.max(np.abs(diffs)))


def save_profile(profile: WaveProfile, csv_path, json_path=None) -> None:
    """CSV with header ``x,u1,...,un`` plus a JSON metadata sidecar."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [f"u{i + 1}" for i in range(profile.n)])
        for j, xj in enumerate(profile.x):
            w.writerow([repr(float(xj))] + [repr(float(v)) for v in profile.values[:, j]])
    if json_path is None:
        json_path = csv_path.with_suffix(".json")
    Path(json_path).write_text(json.dumps(profile.metadata(), indent=2) + "\n")


def load_profile(csv_path, json_path=None) -> WaveProfile:
    csv_path = Path(csv_path)
    if json_path is None:
        json_path = csv_path.with_suffix(".json")
    meta = json.loads(Path(json_path).read_text())
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    grid = Grid(float(meta["L"]), float(meta["h"]))
    if data.shape[0] != grid.M + 1:
        raise ValidationError(f"profile has {data.shape[0]} rows, metadata implies {grid.M + 1}")
    return WaveProfile(
        grid=grid,
        values=data[:, 1:].T.copy(),
        theta=float(meta["theta"]),
        e_minus=np.asarray(meta["e_minus"], dtype=float),
        e_plus=np.asarray(meta["e_plus"], dtype=float),
        residual_norm=float(meta.get("residual_norm", "nan")),
        iterations=int(meta.get("iterations", 0)),
    )
