"""Independent numerical checks of the bounds.

Nothing here reuses the constructions it checks: profile bounds are tested
pointwise on solver output, and the tangent level is probed by sampling the
half-plane region and evaluating the kinetics directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .barrier import BarrierTriple, Bounds
from .errors import DimensionError, InconsistencyError, ValidationError
from .tangent import (
    H,
    TwoSpeciesParams,
    baseline_lower_bound,
    improved_lower_bound,
    polyhedral_lower_bound,
)

CONTAINMENT_SLACK = 1e-12


@dataclass(frozen=True)
class Violation:
    x: float
    value: float
    bound: str

    def to_dict(self) -> dict:
        return {"x": self.x, "value": self.value, "bound": self.bound}


@dataclass(frozen=True)
class BoundsReport:
    alpha: tuple[float, ...]
    p_min: float
    p_max: float
    lambda_lower: float
    lambda_upper: float
    tol: float
    violations: tuple[Violation, ...] = ()
    q_min: float | None = None
    q_max: float | None = None
    q_violations: tuple[Violation, ...] = ()

    @property
    def pass_(self) -> bool:
        return not self.violations and not self.q_violations

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "p_min": self.p_min,
            "p_max": self.p_max,
            "lambda_lower": self.lambda_lower,
            "lambda_upper": self.lambda_upper,
            "tol": self.tol,
            "violations": [v.to_dict() for v in self.violations],
            "q_min": self.q_min,
            "q_max": self.q_max,
            "q_violations": [v.to_dict() for v in self.q_violations],
            "pass": self.pass_,
        }


def _outside(x, values, lo, hi, tol, label):
    out = []
    for j in np.flatnonzero(values < lo - tol):
        out.append(Violation(float(x[j]), float(values[j]), f"{label}_lower"))
    for j in np.flatnonzero(values > hi + tol):
        out.append(Violation(float(x[j]), float(values[j]), f"{label}_upper"))
    out.sort(key=lambda v: v.x)
    return tuple(out)


def verify_bounds(
    profile,
    alpha,
    bounds: Bounds,
    tol: float = 0.0,
    d=None,
    lower: BarrierTriple | None = None,
    upper: BarrierTriple | None = None,
) -> BoundsReport:
    """Check lambda_lower <= sum alpha_i u_i(x_j) <= lambda_upper on every grid point.

    With diffusions ``d`` and barrier triples, the diffusion-weighted sum
    q = sum alpha_i d_i u_i is also checked against the lambda1 levels.
    """
    values = np.asarray(profile.values, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (values.shape[0],):
        raise DimensionError(f"alpha has length {alpha.size}, profile has {values.shape[0]} species")
    if np.any(alpha <= 0):
        raise ValidationError("alpha entries must be > 0")
    if tol < 0:
        raise ValidationError("tol must be >= 0")
    x = np.asarray(profile.x)
    p = alpha @ values
    violations = _outside(x, p, bounds.lambda_lower, bounds.lambda_upper, tol, "p")

    q_min = q_max = None
    q_violations: tuple[Violation, ...] = ()
    if lower is not None or upper is not None:
        if d is None:
            raise ValidationError("diffusions d are required for the q check")
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if d.shape != alpha.shape:
            raise DimensionError("d and alpha lengths differ")
        q = (alpha * d) @ values
        q_min, q_max = float(q.min()), float(q.max())
        lo = lower.lambda1 if lower is not None else -np.inf
        hi = upper.lambda1 if upper is not None else np.inf
        q_violations = _outside(x, q, lo, hi, tol, "q")

    return BoundsReport(
        alpha=tuple(alpha.tolist()),
        p_min=float(p.min()),
        p_max=float(p.max()),
        lambda_lower=bounds.lambda_lower,
        lambda_upper=bounds.lambda_upper,
        tol=float(tol),
        violations=violations,
        q_min=q_min,
        q_max=q_max,
        q_violations=q_violations,
    )


@dataclass(frozen=True)
class ContainmentResult:
    contained: bool
    witness: tuple[float, float] | None = None
    min_H: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {
            "contained": self.contained,
            "witness": None if self.witness is None else list(self.witness),
            "min_H": self.min_H,
        }


def sample_triangle(rng: np.random.Generator, n: int, a, b, c) -> np.ndarray:
    """Uniform points in the triangle abc (square-root reparameterisation)."""
    r1 = np.sqrt(rng.random(n))[:, None]
    r2 = rng.random(n)[:, None]
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    return (1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c


def containment_oracle(
    lam: float,
    p: TwoSpeciesParams,
    n_samples: int = 10_000,
    seed: int | np.random.Generator | None = 0,
) -> ContainmentResult:
    """Does {alpha u + d beta v <= lam, u, v >= 0} stay inside {H >= 0}?

    Random points of the triangle are complemented by its corners and an
    even grid of ``n_samples`` points along the slanted edge, where a
    tangential crossing shows up first.  The witness is the sampled point
    with the most negative H.
    """
    if not lam > 0:
        raise ValidationError("lambda must be > 0")
    if int(n_samples) < 1:
        raise ValidationError("n_samples must be >= 1")
    n_samples = int(n_samples)
    rng = np.random.default_rng(seed)
    origin = (0.0, 0.0)
    cu = (lam / p.alpha, 0.0)
    cv = (0.0, lam / (p.d * p.beta))
    t = np.linspace(0.0, 1.0, n_samples)[:, None]
    edge = (1 - t) * np.asarray(cu) + t * np.asarray(cv)
    pts = np.vstack([np.array([origin, cu, cv]), edge, sample_triangle(rng, n_samples, origin, cu, cv)])
    h = H(pts[:, 0], pts[:, 1], p)
    j = int(np.argmin(h))
    if h[j] >= -CONTAINMENT_SLACK:
        return ContainmentResult(True, None, float(h[j]))
    return ContainmentResult(False, (float(pts[j, 0]), float(pts[j, 1])), float(h[j]))


def bisect_containment(
    p: TwoSpeciesParams,
    n_samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-7,
) -> float:
    """Largest contained level located by bisection on the sampling oracle."""
    lo = 0.0
    # (lam/alpha, 0) or (0, lam/(d beta)) leaves H >= 0 beyond this level
    hi = 1.5 * min(p.alpha, p.d * p.beta)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if containment_oracle(mid, p, n_samples, seed).contained:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class BoundComparison:
    baseline: float
    improved: float
    ratio: float
    polyhedral: float

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "improved": self.improved,
            "ratio": self.ratio,
            "polyhedral": self.polyhedral,
        }


def compare_bounds(p: TwoSpeciesParams, composition: str = "divide") -> BoundComparison:
    base = baseline_lower_bound(p)
    imp = improved_lower_bound(p, composition)
    poly = polyhedral_lower_bound(p)
    if composition == "divide" and imp < poly * (1 - 1e-12):
        raise InconsistencyError(f"tangent bound {imp} below polyhedral bound {poly}")
    return BoundComparison(base, imp, imp / base, poly)
