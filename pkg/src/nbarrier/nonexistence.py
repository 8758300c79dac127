"""Nonexistence certificate for four-species Lotka-Volterra waves.

A wave joining (sigma_1/c_11, 0, 0, 0) to (0, sigma_2/c_22, 0, 0) with u_4 > 0
everywhere cannot exist when

  * the reduced growth rates  s_i = sigma_i - c_i4 sigma_4 / c_44  (i = 1..3)
    are all positive, and
  * the three-species lower bound of c_41 u_1 + c_42 u_2 + c_43 u_3, built
    from the reduced rates, is at least sigma_4.

A failed check proves nothing either way; the verdict is then
``"inconclusive"``, never a claim that waves exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barrier import intercept_extrema, lv_box
from .errors import DegenerateBoxError, DimensionError, ValidationError
from .model import LVSystem

CERTIFIED = "certified-nonexistent"
INCONCLUSIVE = "inconclusive"
DIFFUSION_RANGES = ("all", "first3")


@dataclass(frozen=True)
class NonexistenceCertificate:
    sigma_tilde: tuple[float, float, float]
    h1_holds: bool
    h2_lhs: float | None
    h2_rhs: float
    h2_holds: bool
    alpha_star: tuple[float, float, float]
    verdict: str

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "h1_holds": self.h1_holds,
            "sigma_tilde": list(self.sigma_tilde),
            "h2_holds": self.h2_holds,
            "h2_lhs": self.h2_lhs,
            "h2_rhs": self.h2_rhs,
            "alpha_star": list(self.alpha_star),
        }


def _reduced_lower_levels(sigma_tilde: np.ndarray, block: np.ndarray) -> np.ndarray:
    reduced = LVSystem(d=np.ones(3), sigma=sigma_tilde, c=block)
    try:
        return lv_box(reduced).u_lower
    except DegenerateBoxError:
        # equal rows: the lower levels are still well defined
        return intercept_extrema(sigma_tilde, block)[0]


def check_nonexistence(sys: LVSystem, diffusions: str = "all") -> NonexistenceCertificate:
    """Evaluate both hypotheses for a four-species system.

    ``diffusions`` selects the index range of the diffusion ratio in the
    second hypothesis: all four species (default) or only the first three.
    """
    if sys.n != 4:
        raise DimensionError(f"nonexistence check needs n = 4, got {sys.n}")
    if diffusions not in DIFFUSION_RANGES:
        raise ValidationError(f"diffusions must be one of {DIFFUSION_RANGES}")
    c = sys.c
    sigma4 = float(sys.sigma[3])
    sigma_tilde = sys.sigma[:3] - c[:3, 3] * sigma4 / c[3, 3]
    alpha_star = c[3, :3].copy()
    h1 = bool(np.all(sigma_tilde > 0))

    lhs = None
    h2 = False
    if h1:
        u_lower = _reduced_lower_levels(sigma_tilde, c[:3, :3])
        d = sys.d if diffusions == "all" else sys.d[:3]
        lhs = float(np.min(alpha_star * u_lower) * d.min() / d.max())
        h2 = lhs >= sigma4

    return NonexistenceCertificate(
        sigma_tilde=tuple(float(s) for s in sigma_tilde),
        h1_holds=h1,
        h2_lhs=lhs,
        h2_rhs=sigma4,
        h2_holds=h2,
        alpha_star=tuple(float(a) for a in alpha_star),
        verdict=CERTIFIED if h1 and h2 else INCONCLUSIVE,
    )


def sigma4_threshold(sys: LVSystem, tol: float = 1e-10, diffusions: str = "all") -> float:
    """Largest sigma_4 for which the certificate holds, by bisection.

    The value of ``sys.sigma[3]`` is ignored.  Relies on the certificate
    being monotone in sigma_4: lowering it raises the reduced rates and the
    bound while lowering the target.
    """
    if sys.n != 4:
        raise DimensionError(f"nonexistence check needs n = 4, got {sys.n}")
    c = sys.c

    def certified(s4: float) -> bool:
        sigma = sys.sigma.copy()
        sigma[3] = s4
        return check_nonexistence(sys.replace(sigma=sigma), diffusions).certified

    # reduced rates hit zero here, so nothing above can be certified
    hi = float(np.min(sys.sigma[:3] * c[3, 3] / c[:3, 3]))
    lo = 0.0
    probe = hi * 1e-12
    if not certified(probe):
        return 0.0
    lo = probe
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            lo = mid
        else:
            hi = mid
    return lo
