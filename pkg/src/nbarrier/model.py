"""Lotka-Volterra kinetics for n competing species.

The traveling-wave system handled throughout the package is

    d_i u_i'' + theta u_i' + u_i**m_i * (sigma_i - sum_j c_ij u_j) = 0,

posed on the real line.  This module holds the parameter container, the
kinetic terms, the nonnegative equilibria and the finite-difference residual
of a sampled profile.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DimensionError, UnsupportedGridError, ValidationError

DUPLICATE_TOL = 1e-9
NEGATIVE_TOL = 1e-12
SINGULAR_COND = 1e12
MAX_ENUM_SPECIES = 8


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LVSystem:
    """Parameters of the n-species competition system.

    ``c[i, j]`` is the effect of species j on the growth of species i.
    Arrays are stored read-only so instances can be shared freely.
    """

    d: np.ndarray
    sigma: np.ndarray
    c: np.ndarray
    m: np.ndarray | None = None
    theta: float = 0.0
    n: int = field(init=False)

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        n = sigma.shape[0]
        if sigma.ndim != 1 or n < 1:
            raise DimensionError("sigma must be a nonempty vector")
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        c = np.asarray(self.c, dtype=float).reshape(-1)
        m = np.ones(n) if self.m is None else np.atleast_1d(np.asarray(self.m, dtype=float))
        if d.shape != (n,):
            raise DimensionError(f"d has length {d.size}, expected {n}")
        if m.shape != (n,):
            raise DimensionError(f"m has length {m.size}, expected {n}")
        if c.size != n * n:
            raise DimensionError(f"c has {c.size} entries, expected {n}x{n}")
        c = c.reshape(n, n)
        for name, arr in (("d", d), ("sigma", sigma), ("c", c), ("m", m)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValidationError(f"all entries of {name} must be finite and > 0")
        theta = float(self.theta)
        if not np.isfinite(theta):
            raise ValidationError("theta must be finite")
        object.__setattr__(self, "d", _frozen(d))
        object.__setattr__(self, "sigma", _frozen(sigma))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "m", _frozen(m))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "n", n)

    def replace(self, **changes) -> "LVSystem":
        kw = dict(d=self.d, sigma=self.sigma, c=self.c, m=self.m, theta=self.theta)
        kw.update(changes)
        return LVSystem(**kw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d.tolist(),
            "sigma": self.sigma.tolist(),
            "c": self.c.tolist(),
            "m": self.m.tolist(),
            "theta": self.theta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LVSystem":
        try:
            sys = cls(
                d=data["d"],
                sigma=data["sigma"],
                c=data["c"],
                m=data.get("m"),
                theta=data.get("theta", 0.0),
            )
        except KeyError as exc:
            raise ValidationError(f"system JSON is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed system JSON: {exc}") from None
        if "n" in data and int(data["n"]) != sys.n:
            raise DimensionError(f"n={data['n']} but sigma has length {sys.n}")
        return sys

    def __eq__(self, other):
        if not isinstance(other, LVSystem):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def load_system(path) -> LVSystem:
    with open(path) as fh:
        return LVSystem.from_dict(json.load(fh))


def save_system(sys: LVSystem, path) -> None:
    Path(path).write_text(json.dumps(sys.to_dict(), indent=2) + "\n")


def preset_path(name: str) -> Path:
    """Location of a shipped preset, e.g. ``preset_path("may_leonard")``."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("nbarrier") / "presets" / name))


def load_preset(name: str) -> LVSystem:
    return load_system(preset_path(name))


def may_leonard(mu1: float, mu2: float, d=(1.0, 1.0, 1.0), theta: float = 0.0) -> LVSystem:
    """Cyclic three-species competition with unit growth and self-competition."""
    c = [[1.0, mu1, mu2], [mu2, 1.0, mu1], [mu1, mu2, 1.0]]
    return LVSystem(d=d, sigma=[1.0, 1.0, 1.0], c=c, theta=theta)


def as_density(u, n: int | None = None) -> np.ndarray:
    """Validate a density vector: finite, nonnegative, and of length ``n``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1:
        raise DimensionError("density must be a vector")
    if n is not None and u.shape[0] != n:
        raise DimensionError(f"density has length {u.shape[0]}, expected {n}")
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise ValidationError("densities must be finite and nonnegative")
    return _frozen(u)


def growth_rates(sys: LVSystem, u) -> np.ndarray:
    """Per-capita rates f_i(u) = sigma_i - sum_j c_ij u_j (any shape ``(..., n)``)."""
    return sys.sigma - np.asarray(u, dtype=float) @ sys.c.T


def _power(u, m):
    # odd extension keeps Newton iterates that dip below zero well defined
    if np.all(m == 1.0):
        return u
    return np.sign(u) * np.abs(u) ** m


def evaluate_kinetics(sys: LVSystem, u) -> np.ndarray:
    """Return u_i**m_i * f_i(u) for a single density vector."""
    u = as_density(u, sys.n)
    return _power(u, sys.m) * growth_rates(sys, u)


def kinetics_array(sys: LVSystem, values: np.ndarray) -> np.ndarray:
    """Kinetics evaluated column-wise on an ``(n, M)`` array without validation."""
    values = np.asarray(values, dtype=float)
    f = sys.sigma[:, None] - sys.c @ values
    return _power(values, sys.m[:, None]) * f


@dataclass(frozen=True)
class Equilibrium:
    u: np.ndarray
    support: tuple[int, ...]


@dataclass(frozen=True)
class EquilibriumSet:
    points: tuple[Equilibrium, ...]
    skipped: tuple[tuple[int, ...], ...] = ()

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_array(self) -> np.ndarray:
        return np.array([p.u for p in self.points])

    def contains(self, u, tol: float = 1e-8) -> bool:
        u = np.asarray(u, dtype=float)
        return any(np.max(np.abs(p.u - u)) < tol for p in self.points)

    def to_dict(self) -> dict:
        return {
            "points": [
                {"u": p.u.tolist(), "support": [i + 1 for i in p.support]}
                for p in self.points
            ],
            "skipped_supports": [[i + 1 for i in s] for s in self.skipped],
        }


def enumerate_equilibria(sys: LVSystem) -> EquilibriumSet:
    """All nonnegative zeros of the kinetics, found support by support.

    On a support S the nonzero components solve ``c[S, S] u_S = sigma_S``.
    Singular subsystems are skipped and listed in ``skipped``.
    """
    n = sys.n
    if n > MAX_ENUM_SPECIES:
        raise ValidationError(f"enumeration supports n <= {MAX_ENUM_SPECIES}, got {n}")
    found: list[np.ndarray] = []
    skipped = []
    for size in range(n + 1):
        for support in itertools.combinations(range(n), size):
            u = np.zeros(n)
            if support:
                idx = list(support)
                block = sys.c[np.ix_(idx, idx)]
                if np.linalg.cond(block) > SINGULAR_COND:
                    skipped.append(support)
                    continue
                u[idx] = np.linalg.solve(block, sys.sigma[idx])
                if np.any(u < -NEGATIVE_TOL):
                    continue
                u = np.maximum(u, 0.0)
            if any(np.max(np.abs(u - v)) < DUPLICATE_TOL for v in found):
                continue
            found.append(u)
    points = tuple(
        Equilibrium(_frozen(u), tuple(int(i) for i in np.flatnonzero(u > 0))) for u in found
    )
    return EquilibriumSet(points, tuple(skipped))


def _uniform_spacing(x: np.ndarray) -> float:
    if x.ndim != 1 or x.size < 3:
        raise UnsupportedGridError("grid needs at least 3 points")
    dx = np.diff(x)
    h = (x[-1] - x[0]) / (x.size - 1)
    if h <= 0 or np.max(np.abs(dx - h)) > 1e-9 * max(1.0, abs(h)):
        raise UnsupportedGridError("grid must be uniform and increasing")
    return float(h)


def residual_array(sys: LVSystem, x, values) -> np.ndarray:
    """Central-difference residual at the interior points, shape ``(n, M - 1)``."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != sys.n or values.shape[1] != x.size:
        raise DimensionError(
            f"values shape {values.shape} does not match (n={sys.n}, points={x.size})"
        )
    h = _uniform_spacing(x)
    left, mid, right = values[:, :-2], values[:, 1:-1], values[:, 2:]
    uxx = (right - 2.0 * mid + left) / h**2
    ux = (right - left) / (2.0 * h)
    return sys.d[:, None] * uxx + sys.theta * ux + kinetics_array(sys, mid)


def residual(sys: LVSystem, profile) -> tuple[np.ndarray, float]:
    """Residual of a sampled profile (anything with ``x`` and ``values``).

    Returns the interior residual array and its max absolute value.
    """
    r = residual_array(sys, profile.x, profile.values)
    return r, float(np.max(np.abs(r))) if r.size else 0.0
