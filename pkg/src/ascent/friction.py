"""Velocity-dependent resistance models and the switching-level geometry.

Two resistance laws are supported: a linear one, gamma*x, and a piecewise
quadratic one that is convex for positive velocity and concave for negative
velocity.  Both vanish at zero velocity and are strictly increasing, so the
resistance always opposes the motion.

On top of the raw model this module provides the derived quantities the
solvers need: the confinement velocities x_min < 0 < x_max of the control
system, the critical velocity x~ where the slope of the resistance equals
1/alpha, and root finding for the level function

    Phi(x) = phi(x) - x / alpha

whose level sets determine the velocities attainable at switching times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LevelError, ParamError

__all__ = [
    "LinearFriction",
    "QuadraticFriction",
    "FrictionModel",
    "VelocityBounds",
    "LevelRootSet",
    "bisect_root",
    "velocity_bounds",
    "x_tilde",
    "level_function",
    "c_range",
    "level_roots",
]


@dataclass(frozen=True)
class LinearFriction:
    """Resistance phi(x) = gamma * x with constant slope gamma > 0."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ParamError(f"gamma must be positive, got {self.gamma}")

    def phi(self, x):
        return self.gamma * x

    def dphi(self, x):
        if np.ndim(x):
            return np.full(np.shape(x), self.gamma)
        return self.gamma

    def ddphi_side(self, x, side="right"):
        return 0.0

    def kernel_params(self):
        return 0, self.gamma, 0.0


@dataclass(frozen=True)
class QuadraticFriction:
    """Piecewise-quadratic resistance with slope k at rest.

    phi(x) = b/2 x^2 + k x   for x >= 0
           = -b/2 x^2 + k x  for x < 0

    Equivalently phi(x) = (b/2) x |x| + k x, so phi' = b|x| + k > 0 on all
    of R and the curvature flips sign at x = 0 (+b on the right, -b on the
    left).
    """

    k: float
    b: float

    def __post_init__(self):
        if not self.k > 0.0:
            raise ParamError(f"k must be positive, got {self.k}")
        if not self.b > 0.0:
            raise ParamError(f"b must be positive, got {self.b}")

    def phi(self, x):
        return 0.5 * self.b * x * np.abs(x) + self.k * x

    def dphi(self, x):
        return self.b * np.abs(x) + self.k

    def ddphi_side(self, x, side="right"):
        """One-sided second derivative; the side matters only at x = 0."""
        if side not in ("left", "right"):
            raise DomainError(f"side must be 'left' or 'right', got {side!r}")
        if x > 0.0:
            return self.b
        if x < 0.0:
            return -self.b
        return self.b if side == "right" else -self.b

    def kernel_params(self):
        return 1, self.k, self.b


FrictionModel = LinearFriction | QuadraticFriction


@dataclass(frozen=True)
class VelocityBounds:
    """Confinement velocities: phi(x_min) = -g and phi(x_max) = 1 - g."""

    x_min: float
    x_max: float


@dataclass(frozen=True)
class LevelRootSet:
    """Ordered roots of Phi(x) = c on [x_min, x_max], double roots collapsed.

    ``tangent[i]`` is True when roots[i] sits at an interior extremum of Phi
    (the level just touches the graph there).
    """

    roots: tuple[float, ...]
    c: float
    tangent: tuple[bool, ...]


def bisect_root(f, lo: float, hi: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Bisection on a bracketing interval [lo, hi] with f(lo)*f(hi) <= 0.

    The interval is halved until its width falls below ``tol`` (absolute,
    plus a relative floor near large magnitudes) or ``max_iter`` splits.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol + 4.0 * np.finfo(float).eps * abs(mid):
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def velocity_bounds(model: FrictionModel, g: float) -> VelocityBounds:
    """Solve phi(x_max) = 1 - g and phi(x_min) = -g by bisection.

    Both equations have unique solutions because phi strictly increases.
    Residuals are driven to the 1e-12 level or better.
    """
    if not 0.0 < g < 1.0:
        raise ParamError(f"g must lie in (0, 1), got {g}")

    def f_max(x):
        return 1.0 - model.phi(x) - g

    def f_min(x):
        return -model.phi(x) - g

    hi = 1.0
    while f_max(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:  # pragma: no cover - phi increasing rules this out
            raise ParamError("failed to bracket x_max")
    x_max = bisect_root(f_max, 0.0, hi)

    lo = -1.0
    while f_min(lo) < 0.0:
        lo *= 2.0
        if lo < -1e12:  # pragma: no cover
            raise ParamError("failed to bracket x_min")
    x_min = bisect_root(f_min, lo, 0.0)

    return VelocityBounds(x_min=x_min, x_max=x_max)


def x_tilde(model: FrictionModel, alpha: float) -> float | None:
    """Unique positive velocity with phi'(x~) = 1/alpha, or None.

    Returns None when phi'(0) >= 1/alpha (the level function then has only
    the zero root) and always for the linear model, whose slope is constant.
    """
    if not alpha > 0.0:
        raise ParamError(f"alpha must be positive, got {alpha}")
    if isinstance(model, LinearFriction):
        return None
    if model.dphi(0.0) >= 1.0 / alpha:
        return None
    return (1.0 / alpha - model.k) / model.b


def level_function(model: FrictionModel, alpha: float, x):
    """Phi(x) = phi(x) - x/alpha; vanishes at x = 0 for every model."""
    return model.phi(x) - x / alpha


def _breakpoints(model: FrictionModel, alpha: float, bounds: VelocityBounds) -> list[float]:
    """Endpoints of the maximal intervals where Phi is strictly monotone."""
    pts = [bounds.x_min, 0.0, bounds.x_max]
    xt = x_tilde(model, alpha)
    if xt is not None:
        if bounds.x_min < -xt < 0.0:
            pts.append(-xt)
        if 0.0 < xt < bounds.x_max:
            pts.append(xt)
    return sorted(pts)


def c_range(model: FrictionModel, alpha: float, bounds: VelocityBounds) -> tuple[float, float]:
    """Extrema of Phi over [x_min, x_max].

    Phi is piecewise strictly monotone between the breakpoints, so the
    extrema are attained at breakpoints (interior critical points +-x~ or
    the interval ends).  Since Phi(0) = 0, c_min <= 0 <= c_max.
    """
    if not alpha > 0.0:
        raise ParamError(f"alpha must be positive, got {alpha}")
    vals = [level_function(model, alpha, p) for p in _breakpoints(model, alpha, bounds)]
    return min(vals), max(vals)


def level_roots(
    model: FrictionModel,
    alpha: float,
    c: float,
    bounds: VelocityBounds,
    tol: float = 1e-14,
) -> LevelRootSet:
    """All roots of Phi(x) = c on [x_min, x_max] by monotone-piece bisection.

    The pieces are delimited by {x_min, -x~, 0, x~, x_max}; on each piece
    Phi is strictly monotone so a sign change pins exactly one root.  A
    level touching Phi at an interior extremum yields a single root flagged
    tangent=True.
    """
    c_min, c_max = c_range(model, alpha, bounds)
    slack = 1e-12 * (1.0 + abs(c_min) + abs(c_max))
    if not (c_min - slack <= c <= c_max + slack):
        raise LevelError(f"level c={c} outside attainable range [{c_min}, {c_max}]")

    pts = _breakpoints(model, alpha, bounds)
    xt = x_tilde(model, alpha)
    critical = set()
    if xt is not None:
        critical = {p for p in pts if abs(abs(p) - xt) <= 1e-15 and bounds.x_min < p < bounds.x_max}

    f_vals = [level_function(model, alpha, p) - c for p in pts]
    zero_tol = 1e-11 * (1.0 + abs(c))

    found: list[tuple[float, bool]] = []
    for p, fp in zip(pts, f_vals):
        if abs(fp) <= zero_tol:
            found.append((p, p in critical))
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        fa, fb = f_vals[i], f_vals[i + 1]
        if abs(fa) <= zero_tol or abs(fb) <= zero_tol:
            continue  # endpoint root already recorded
        if fa * fb < 0.0:
            r = bisect_root(lambda x: level_function(model, alpha, x) - c, a, b, tol=tol)
            found.append((r, False))

    found.sort(key=lambda rt: rt[0])
    merged: list[tuple[float, bool]] = []
    for r, t in found:
        if merged and abs(r - merged[-1][0]) <= 1e-9 * (1.0 + abs(r)):
            merged[-1] = (merged[-1][0], merged[-1][1] or t)
        else:
            merged.append((r, t))

    return LevelRootSet(
        roots=tuple(r for r, _ in merged),
        c=c,
        tangent=tuple(t for _, t in merged),
    )
