"""Hypothesis boxes, speed-independent bounds, and three-hyperplane barriers.

A hypothesis box is a pair of per-species levels ``u_lower < u_upper``.  All
growth rates must be nonnegative on the inner simplex
``sum_i u_i / u_lower_i <= 1`` and nonpositive on the outer region
``sum_i u_i / u_upper_i >= 1``.  For Lotka-Volterra kinetics such a box comes
from the axis intercepts of the zero-growth hyperplanes.

Given weights ``alpha`` and diffusions ``d``, a box yields two-sided bounds on
``p = sum_i alpha_i u_i`` valid for every nonnegative traveling wave whatever
its speed, and the barrier triples that underpin those bounds.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateBoxError, DimensionError, ValidationError
from .model import LVSystem, growth_rates

SAMPLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HypothesisBox:
    u_lower: np.ndarray
    u_upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.u_lower, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(self.u_upper, dtype=float)).copy()
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionError("u_lower and u_upper must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValidationError("box entries must be finite")
        if np.any(lo <= 0):
            raise ValidationError("u_lower entries must be > 0")
        bad = np.flatnonzero(hi <= lo)
        if bad.size:
            raise DegenerateBoxError(
                f"u_upper must exceed u_lower; fails for species {[int(i) + 1 for i in bad]}"
            )
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "u_lower", lo)
        object.__setattr__(self, "u_upper", hi)

    @property
    def n(self) -> int:
        return self.u_lower.shape[0]

    def to_dict(self) -> dict:
        return {"u_lower": self.u_lower.tolist(), "u_upper": self.u_upper.tolist()}


@dataclass(frozen=True)
class Bounds:
    lambda_lower: float
    lambda_upper: float
    chi: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BarrierTriple:
    """Levels of q = sum alpha_i d_i u_i (lambda1, lambda2) and p = sum alpha_i u_i (eta)."""

    kind: str
    alpha: tuple[float, ...]
    lambda1: float
    eta: float
    lambda2: float

    def intercepts(self, d) -> dict[str, np.ndarray]:
        """Axis intercepts of the three hyperplanes, one entry per species."""
        a = np.asarray(self.alpha)
        d = np.asarray(d, dtype=float)
        return {
            "lambda1": self.lambda1 / (a * d),
            "eta": self.eta / a,
            "lambda2": self.lambda2 / (a * d),
        }

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": list(self.alpha),
            "lambda1": self.lambda1,
            "eta": self.eta,
            "lambda2": self.lambda2,
        }


def intercept_extrema(sigma, c) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest u_i-intercept over all zero-growth hyperplanes.

    Hyperplane j meets the u_i axis at ``sigma_j / c_ji``; the extrema are
    taken column by column.
    """
    sigma = np.asarray(sigma, dtype=float)
    ratios = sigma[:, None] / np.asarray(c, dtype=float)
    return ratios.min(axis=0), ratios.max(axis=0)


def lv_box(sys: LVSystem) -> HypothesisBox:
    if sys.n < 2:
        raise ValidationError("lv_box needs at least two species")
    lo, hi = intercept_extrema(sys.sigma, sys.c)
    return HypothesisBox(lo, hi)


def _positive_vector(name, v, n=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or (n is not None and v.shape[0] != n):
        raise DimensionError(f"{name} must have length {n}")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise ValidationError(f"all entries of {name} must be > 0")
    return v


def sample_simplex(rng: np.random.Generator, n_samples: int, dim: int) -> np.ndarray:
    """Uniform points of the solid simplex {x >= 0, sum x <= 1} via exponential spacings."""
    e = rng.exponential(size=(n_samples, dim + 1))
    return e[:, :dim] / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class HypothesisReport:
    holds: bool
    lower_witness: np.ndarray | None = None
    upper_witness: np.ndarray | None = None
    n_samples: int = 0

    def to_dict(self) -> dict:
        w = lambda a: None if a is None else a.tolist()  # noqa: E731
        return {
            "holds": self.holds,
            "lower_witness": w(self.lower_witness),
            "upper_witness": w(self.upper_witness),
            "n_samples": self.n_samples,
        }


def check_hypothesis_H(
    sys: LVSystem,
    box: HypothesisBox,
    n_samples: int,
    rng: np.random.Generator | int | None = None,
) -> HypothesisReport:
    """Sampled falsification of the sign conditions on a box.

    Draws ``n_samples`` points uniformly in the inner simplex (all growth
    rates must be >= 0 there) and ``n_samples`` points of the outer region
    clipped to ``[0, 2 max u_upper]^n`` (all rates must be <= 0).  Returns the
    first violating point found in each region.  Passing is evidence, not a
    proof.
    """
    if int(n_samples) < 1:
        raise ValidationError("n_samples must be >= 1")
    if box.n != sys.n:
        raise DimensionError(f"box has {box.n} species, system has {sys.n}")
    n_samples = int(n_samples)
    rng = np.random.default_rng(rng)

    inner = sample_simplex(rng, n_samples, sys.n) * box.u_lower
    f = growth_rates(sys, inner)
    bad = np.flatnonzero(np.any(f < -SAMPLE_TOL, axis=1))
    lower_witness = inner[bad[0]].copy() if bad.size else None

    top = 2.0 * float(box.u_upper.max())
    outer = np.empty((0, sys.n))
    while outer.shape[0] < n_samples:
        batch = rng.uniform(0.0, top, size=(2 * n_samples, sys.n))
        keep = batch[(batch / box.u_upper).sum(axis=1) >= 1.0]
        outer = np.vstack([outer, keep])
    outer = outer[:n_samples]
    f = growth_rates(sys, outer)
    bad = np.flatnonzero(np.any(f > SAMPLE_TOL, axis=1))
    upper_witness = outer[bad[0]].copy() if bad.size else None

    return HypothesisReport(
        holds=lower_witness is None and upper_witness is None,
        lower_witness=lower_witness,
        upper_witness=upper_witness,
        n_samples=n_samples,
    )


def chi(e_minus, e_plus, tol: float = 1e-9) -> int:
    """0 if either end state is (numerically) the origin, else 1."""
    if tol < 0:
        raise ValidationError("tol must be >= 0")
    for e in (e_minus, e_plus):
        if np.max(np.abs(np.atleast_1d(np.asarray(e, dtype=float)))) < tol:
            return 0
    return 1


def nbmp_bounds(box: HypothesisBox, d, alpha, chi: int) -> Bounds:
    """Speed-independent bounds on sum_i alpha_i u_i."""
    d = _positive_vector("d", d, box.n)
    alpha = _positive_vector("alpha", alpha, box.n)
    if chi not in (0, 1):
        raise ValidationError("chi must be 0 or 1")
    spread = d.max() / d.min()
    upper = float(np.max(alpha * box.u_upper) * spread)
    lower = float(np.min(alpha * box.u_lower) / spread) * chi
    return Bounds(lambda_lower=lower, lambda_upper=upper, chi=int(chi))


def lower_barrier(box: HypothesisBox, d, alpha) -> BarrierTriple:
    d = _positive_vector("d", d, box.n)
    alpha = _positive_vector("alpha", alpha, box.n)
    if np.all(d == d[0]):
        # hyperplanes coincide when diffusions are equal
        eta = float(np.min(alpha * box.u_lower))
        lam = d[0] * eta
        return BarrierTriple("lower", tuple(alpha.tolist()), lam, eta, lam)
    lambda2 = float(np.min(alpha * d * box.u_lower))
    eta = lambda2 / d.max()
    lambda1 = eta * d.min()
    return BarrierTriple("lower", tuple(alpha.tolist()), lambda1, eta, lambda2)


def upper_barrier(box: HypothesisBox, d, alpha) -> BarrierTriple:
    d = _positive_vector("d", d, box.n)
    alpha = _positive_vector("alpha", alpha, box.n)
    if np.all(d == d[0]):
        eta = float(np.max(alpha * box.u_upper))
        lam = d[0] * eta
        return BarrierTriple("upper", tuple(alpha.tolist()), lam, eta, lam)
    lambda2 = float(np.max(alpha * d * box.u_upper))
    eta = lambda2 / d.min()
    lambda1 = eta * d.max()
    return BarrierTriple("upper", tuple(alpha.tolist()), lambda1, eta, lambda2)


def nesting_violations(triple: BarrierTriple, box: HypothesisBox, d, rtol: float = 1e-12) -> list[str]:
    """Intercept-ordering failures of a barrier against its box (empty when nested).

    Lower kind: lambda1/(a d) <= eta/a <= lambda2/(a d) <= u_lower.
    Upper kind: the same chain reversed, ending at u_upper.
    """
    ic = triple.intercepts(d)
    chain = [ic["lambda1"], ic["eta"], ic["lambda2"]]
    if triple.kind == "lower":
        chain.append(box.u_lower)
        ok = lambda a, b: a <= b * (1 + rtol)  # noqa: E731
    else:
        chain.append(box.u_upper)
        ok = lambda a, b: a >= b * (1 - rtol)  # noqa: E731
    names = ["lambda1", "eta", "lambda2", "box"]
    out = []
    for k in range(3):
        for i in np.flatnonzero(~ok(chain[k], chain[k + 1])):
            out.append(f"species {i + 1}: {names[k]} vs {names[k + 1]}")
    return out
