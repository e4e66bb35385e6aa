"""Regime classification: which switching structures can satisfy the
maximum principle for a given resistance model, gravity g and multiplier
alpha.

Five candidate structures exist, named by their control sequence:

    Ia   u = (1, 0)              one switch
    Ib   u = (1, sing, 0)        thrust, singular cruise, coast
    IIa  u = (0, 1, 0)           dip first, then thrust, then coast
    IIb  u = (0, 1, sing, 0)
    III  u = (1, 0, 1, 0)        two thrust pulses

The admissible subset is decided by where alpha sits relative to the
thresholds x_max/(1-g) and -x_min/g and by how the confinement velocities
compare with the critical velocity x~ (phi'(x~) = 1/alpha).  When phi'(0)
>= 1/alpha the level function has only the zero root and only structure Ia
survives; the linear model always collapses to Ia.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParamError
from .friction import (
    FrictionModel,
    LinearFriction,
    level_roots,
    velocity_bounds,
    x_tilde,
)

__all__ = [
    "EXTREMAL_TYPES",
    "RegimeLabel",
    "CandidateSet",
    "classify",
    "has_nonzero_level_roots",
]

EXTREMAL_TYPES = ("Ia", "Ib", "IIa", "IIb", "III")

ALL_FIVE = EXTREMAL_TYPES

_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class RegimeLabel:
    """Outline-style cell label: gravity case, alpha case, optional sub-case."""

    gravity_case: str  # "I" (g < 0.5), "II" (g = 0.5), "III" (g > 0.5)
    alpha_case: int
    sub_case: str | None = None

    @property
    def text(self) -> str:
        if self.sub_case is None:
            return f"{self.gravity_case}.{self.alpha_case}"
        return f"{self.gravity_case}.{self.alpha_case}.{self.sub_case}"

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class CandidateSet:
    """Admissible structure tags plus the threshold comparisons behind them."""

    types: tuple[str, ...]
    gates: dict = field(default_factory=dict)
    boundary: bool = False

    def __contains__(self, tag: str) -> bool:
        return tag in self.types


def _near(a: float, b: float) -> bool:
    return abs(a - b) <= _BOUNDARY_RTOL * (1.0 + abs(a) + abs(b))


def classify(model: FrictionModel, g: float, alpha: float) -> tuple[RegimeLabel, CandidateSet]:
    """Decide the regime cell and admissible structure set for (model, g, alpha).

    Threshold comparisons follow the strict/non-strict pattern of the final
    search scheme; a tie within 1e-12 of any threshold sets boundary=True so
    sweeps can exclude knife-edge cells.  The one cell the scheme leaves
    ambiguous (g < 0.5 with alpha exactly at -x_min/g) is folded into alpha
    case 3, matching the section-level partition.
    """
    if not 0.0 < g < 1.0:
        raise ParamError(f"g must lie in (0, 1), got {g}")
    if not alpha > 0.0:
        raise ParamError(f"alpha must be positive, got {alpha}")

    vb = velocity_bounds(model, g)
    xt = x_tilde(model, alpha)
    a_up = vb.x_max / (1.0 - g)  # alpha threshold tied to x_max
    a_dn = -vb.x_min / g  # alpha threshold tied to x_min

    gates = {
        "x_min": vb.x_min,
        "x_max": vb.x_max,
        "x_tilde": xt,
        "xmax_over_1mg": a_up,
        "neg_xmin_over_g": a_dn,
        "alpha": alpha,
    }
    boundary = _near(alpha, a_up) or _near(alpha, a_dn)
    if xt is not None:
        boundary = boundary or _near(vb.x_max, xt) or _near(vb.x_min, -xt)

    only_ia = isinstance(model, LinearFriction) or xt is None
    gates["zero_root_only"] = only_ia

    if g < 0.5:
        gcase = "I"
        if alpha <= a_up:
            acase = 1
            if only_ia:
                sub, types = None, ("Ia",)
            elif vb.x_max <= xt:
                sub, types = "a", ("Ia",)
            elif vb.x_min > -xt:
                sub, types = "b", ("Ia", "Ib")
            elif vb.x_min < -xt:
                sub, types = "c", ("Ia", "Ib", "IIa")
            else:  # exact tie x_min == -x~
                sub, types = "b", ("Ia", "Ib")
                boundary = True
        elif alpha < a_dn:
            acase = 2
            if only_ia:
                sub, types = None, ("Ia",)
            elif vb.x_min >= -xt:
                sub, types = "a", ("Ia", "Ib")
            else:
                sub, types = "b", ("Ia", "Ib", "IIa")
        else:
            acase, sub = 3, None
            types = ("Ia",) if only_ia else ALL_FIVE
    elif g == 0.5:
        gcase = "II"
        if alpha <= 2.0 * vb.x_max:
            acase = 1
            if only_ia:
                sub, types = None, ("Ia",)
            elif vb.x_max < xt:
                sub, types = "a", ("Ia",)
            else:
                sub, types = "b", ("Ia", "Ib", "IIa")
        else:
            acase, sub = 2, None
            types = ("Ia",) if only_ia else ALL_FIVE
    else:
        gcase = "III"
        if alpha <= a_dn:
            acase = 1
            if only_ia:
                sub, types = None, ("Ia",)
            elif vb.x_max > xt:
                sub, types = "c", ("Ia", "Ib")
            elif vb.x_min >= -xt:
                sub, types = "a", ("Ia",)
            else:
                sub, types = "b", ("Ia",)
        elif alpha <= a_up:
            acase = 2
            if only_ia:
                sub, types = None, ("Ia",)
            elif vb.x_max <= xt:
                sub, types = "a", ("Ia", "IIa")
            else:
                sub, types = "b", ALL_FIVE
        else:
            acase, sub = 3, None
            types = ("Ia",) if only_ia else ALL_FIVE

    label = RegimeLabel(gravity_case=gcase, alpha_case=acase, sub_case=sub)
    return label, CandidateSet(types=tuple(types), gates=gates, boundary=boundary)


def has_nonzero_level_roots(model: FrictionModel, g: float, alpha: float) -> bool:
    """True iff Phi(x) = 0 has a root in [x_min, x_max] besides x = 0."""
    if not alpha > 0.0:
        raise ParamError(f"alpha must be positive, got {alpha}")
    vb = velocity_bounds(model, g)
    rs = level_roots(model, alpha, 0.0, vb)
    return any(abs(r) > 1e-9 for r in rs.roots)
