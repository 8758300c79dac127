"""Tangent-line barrier for the two-species bistable competition system.

The system is

    u'' + theta u' + u (1 - u - a1 v) = 0,
    d v'' + theta v' + k v (1 - a2 u - v) = 0,

with a1, a2 > 1.  For weights (alpha, beta) the combined kinetics

    H(u, v) = alpha u (1 - u - a1 v) + beta k v (1 - a2 u - v)

vanish on a hyperbola whose upper branch joins (0, 1) and (1, 0).  The
largest half-plane ``alpha u + d beta v <= lambda`` (intersected with the
first quadrant) on which H stays nonnegative sets the first barrier level.
Its boundary either passes through one of the two corners or touches the
branch tangentially; the three situations are labelled I, II and III.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistencyError, TangencyDegeneracyError, ValidationError

TANGENCY_TOL = 1e-9
DEGENERATE_LEADING = 1e-12
# roots this close to u = 0 or u = 1 are snapped onto the corner; happens when
# the line slope ties an endpoint slope to rounding
ENDPOINT_TOL = 1e-9

CASE_I, CASE_II, CASE_III = "I", "II", "III"


@dataclass(frozen=True)
class TwoSpeciesParams:
    alpha: float
    beta: float
    d: float
    k: float
    a1: float
    a2: float

    def __post_init__(self):
        for name in ("alpha", "beta", "d", "k", "a1", "a2"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0:
                raise ValidationError(f"{name} must be finite and > 0")
            object.__setattr__(self, name, val)
        if self.a1 <= 1 or self.a2 <= 1:
            raise ValidationError("bistability requires a1 > 1 and a2 > 1")

    def scaled(self, t: float) -> "TwoSpeciesParams":
        """Same kinetics with both weights multiplied by ``t``."""
        return TwoSpeciesParams(self.alpha * t, self.beta * t, self.d, self.k, self.a1, self.a2)

    def with_d(self, d: float) -> "TwoSpeciesParams":
        return TwoSpeciesParams(self.alpha, self.beta, d, self.k, self.a1, self.a2)


@dataclass(frozen=True)
class TangencyResult:
    case_id: str
    lambda2: float
    touch_point: tuple[float, float]
    aux: dict | None = None

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "lambda2": self.lambda2,
            "touch_point": list(self.touch_point),
            "aux": self.aux,
        }


def H(u, v, p: TwoSpeciesParams):
    """Weighted combined kinetics; works elementwise on arrays."""
    return p.alpha * u * (1 - u - p.a1 * v) + p.beta * p.k * v * (1 - p.a2 * u - v)


def _branch_terms(u: float, p: TwoSpeciesParams) -> tuple[float, float]:
    # b(u) and the discriminant of beta k v^2 + b v - alpha u (1 - u) = 0
    b = p.alpha * p.a1 * u + p.beta * p.k * (p.a2 * u - 1)
    disc = b * b - 4 * p.alpha * p.beta * p.k * u * (u - 1)
    return b, disc


def hyperbola_v(u: float, p: TwoSpeciesParams) -> float:
    """Height of the branch through (0, 1) and (1, 0) above abscissa ``u``."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u={u} outside [0, 1]")
    b, disc = _branch_terms(u, p)
    if disc < 0:
        raise DomainError(f"negative discriminant {disc} at u={u}")
    root = math.sqrt(disc)
    if b > 0:
        # rationalised form avoids cancellation in -b + sqrt(disc)
        return 2 * p.alpha * u * (1 - u) / (b + root)
    return (-b + root) / (2 * p.beta * p.k)


def hyperbola_slope(u: float, p: TwoSpeciesParams) -> float:
    """dv/du along the branch."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u={u} outside [0, 1]")
    b, disc = _branch_terms(u, p)
    if disc <= 0:
        raise TangencyDegeneracyError(f"zero discriminant at u={u}")
    X = p.alpha * p.a1 + p.beta * p.k * p.a2
    num = b * X - 2 * p.alpha * p.beta * p.k * (2 * u - 1)
    return (-X + num / math.sqrt(disc)) / (2 * p.beta * p.k)


def endpoint_slopes(p: TwoSpeciesParams) -> tuple[float, float]:
    """Closed-form branch slopes at (0, 1) and at (1, 0)."""
    at0 = (-p.alpha * (p.a1 - 1) - p.beta * p.k * p.a2) / (p.beta * p.k)
    at1 = -p.alpha / (p.alpha * p.a1 + p.beta * p.k * (p.a2 - 1))
    return at0, at1


def line_slope(p: TwoSpeciesParams) -> float:
    return -p.alpha / (p.d * p.beta)


def classify_case(p: TwoSpeciesParams) -> str:
    s = line_slope(p)
    at0, at1 = endpoint_slopes(p)
    if s <= at0:
        return CASE_I
    if s >= at1:
        return CASE_II
    return CASE_III


def quadratic_coefficients(p: TwoSpeciesParams) -> dict:
    """Coefficients of the squared tangency condition (N/D = G form).

    The slope condition dv/du = -alpha/(d beta) squares to

        A u^2 + 2 B u + C = G (D u^2 + E u + J).

    ``B`` is kept as the cross coefficient of (sqrt(A) u + sqrt(C))^2 halved,
    hence the explicit factor 2 in front of it.
    """
    a, b, k, d = p.alpha, p.beta, p.k, p.d
    X = a * p.a1 + b * k * p.a2
    D = X * X - 4 * a * b * k
    c0 = -b * k * X + 2 * a * b * k
    return {
        "A": D * D,
        "B": D * c0,
        "C": c0 * c0,
        "D": D,
        "E": -2 * b * k * X + 4 * a * b * k,
        "J": (b * k) ** 2,
        "G": (X - 2 * a * k / d) ** 2,
        "X": X,
    }


def _tangency_residual(u: float, p: TwoSpeciesParams) -> float:
    target = line_slope(p)
    return abs(hyperbola_slope(u, p) - target) / max(1.0, abs(target))


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        if disc > -1e-14 * b * b:
            disc = 0.0
        else:
            return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return roots


def tangent_lambda2(p: TwoSpeciesParams) -> TangencyResult:
    """Largest level lambda with {alpha u + d beta v <= lambda} inside H >= 0."""
    case = classify_case(p)
    if case == CASE_I:
        return TangencyResult(CASE_I, p.d * p.beta, (0.0, 1.0))
    if case == CASE_II:
        return TangencyResult(CASE_II, p.alpha, (1.0, 0.0))

    co = quadratic_coefficients(p)
    lead = co["A"] - co["D"] * co["G"]
    mid = 2 * co["B"] - co["E"] * co["G"]
    const = co["C"] - co["J"] * co["G"]
    if abs(lead) <= DEGENERATE_LEADING * abs(co["A"]):
        candidates = [-const / mid] if mid != 0.0 else []
    else:
        candidates = _quadratic_roots(lead, mid, const)

    admissible = []
    for u in candidates:
        if -ENDPOINT_TOL < u < 0.0:
            u = 0.0
        elif 1.0 < u < 1.0 + ENDPOINT_TOL:
            u = 1.0
        if not 0.0 <= u <= 1.0:
            continue
        v = hyperbola_v(u, p)
        if v < 0:
            continue
        res = _tangency_residual(u, p)
        if res <= TANGENCY_TOL:
            admissible.append((res, u, v))
    if not admissible:
        raise InconsistencyError(
            f"no admissible tangency root in case III for {p}", candidates=candidates
        )
    _, u, v = min(admissible)
    lam = p.alpha * u + p.d * p.beta * v
    return TangencyResult(CASE_III, lam, (u, v), dict(co))


def baseline_lower_bound(p: TwoSpeciesParams) -> float:
    """Lower bound on alpha u + beta v from the polyhedral argument."""
    return min(p.alpha / (p.a2 * p.d), p.beta / p.a1) * min(1.0, p.d**2)


def polyhedral_lambda2(p: TwoSpeciesParams) -> float:
    """First barrier level from the straight-line box (u_lower = (1/a2, 1/a1))."""
    return min(p.alpha / p.a2, p.d * p.beta / p.a1)


def barrier_levels(lambda2: float, d: float) -> tuple[float, float]:
    """(eta, lambda1) from lambda2 for diffusions (1, d)."""
    eta = lambda2 / max(1.0, d)
    return eta, eta * min(1.0, d)


COMPOSITIONS = ("divide", "reweight")


def improved_lower_bound(p: TwoSpeciesParams, composition: str = "divide") -> float:
    """Lower bound on alpha u + beta v built on the tangent barrier.

    ``"divide"`` turns the q-level lambda1 into a p-bound by dividing by the
    largest diffusion.  ``"reweight"`` instead runs the construction with
    weights (alpha, beta / d), for which q coincides with alpha u + beta v,
    and returns that lambda1 directly.
    """
    if composition == "divide":
        _, lam1 = barrier_levels(tangent_lambda2(p).lambda2, p.d)
        return lam1 / max(1.0, p.d)
    if composition == "reweight":
        q = TwoSpeciesParams(p.alpha, p.beta / p.d, p.d, p.k, p.a1, p.a2)
        _, lam1 = barrier_levels(tangent_lambda2(q).lambda2, p.d)
        return lam1
    raise ValidationError(f"composition must be one of {COMPOSITIONS}")


def polyhedral_lower_bound(p: TwoSpeciesParams) -> float:
    """The 'divide' pipeline fed with the polyhedral lambda2 instead."""
    _, lam1 = barrier_levels(polyhedral_lambda2(p), p.d)
    return lam1 / max(1.0, p.d)


def plot_rows(p: TwoSpeciesParams, n_points: int = 201) -> list[tuple[str, float, float]]:
    """Sampled curve H = 0 and the three barrier lines, as (series, u, v) rows."""
    res = tangent_lambda2(p)
    eta, lam1 = barrier_levels(res.lambda2, p.d)
    rows = []
    for u in np.linspace(0.0, 1.0, n_points):
        rows.append(("L", float(u), hyperbola_v(float(u), p)))
    lines = (
        ("lambda2", res.lambda2, p.d * p.beta),
        ("eta", eta, p.beta),
        ("lambda1", lam1, p.d * p.beta),
    )
    for name, level, vcoef in lines:
        for u in np.linspace(0.0, level / p.alpha, n_points):
            v = max(0.0, (level - p.alpha * u) / vcoef)
            rows.append((name, float(u), v))
    return rows
