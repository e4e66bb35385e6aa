"""State and costate dynamics under piecewise bang/singular control laws.

State is (s, x, m): position, velocity, remaining mass.  The control u in
[0, 1] burns fuel at rate u and accelerates the vehicle against resistance
and gravity:

    ds/dt = x,    dx/dt = u - phi(x) - g,    dm/dt = -u.

The costate of the velocity solves psi' = -1 + psi * phi'(x) backward from
psi(T) = 0; its level relative to the multiplier alpha selects the control.

Integration is classical fixed-step RK4 with grid nodes placed exactly at
arc boundaries.  Boundary nodes are *duplicated* in the stored grid (one
node ends the old arc, the next opens the new one at the same time), which
keeps the piecewise-constant control exactly trapezoid-integrable.
Singular arcs are propagated in closed form: the velocity is pinned to the
arc's level, so position and mass advance linearly and the costate relaxes
exponentially toward 1/phi'(x_level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import InfeasibleSingular, ParamError, VerifierFlag
from .friction import FrictionModel

__all__ = [
    "BANG0",
    "BANG1",
    "SINGULAR",
    "ProblemParams",
    "Arc",
    "ControlLaw",
    "Trajectory",
    "singular_arc",
    "integrate_forward",
    "integrate_costate_backward",
    "hamiltonian",
    "fuel_used",
]

BANG0 = "bang0"
BANG1 = "bang1"
SINGULAR = "singular"

DEFAULT_STEPS_PER_UNIT = 2000


@dataclass(frozen=True)
class ProblemParams:
    """Gravity, horizon and mass budget of one problem instance."""

    g: float
    T: float
    m0: float
    mT: float

    def __post_init__(self):
        if not 0.0 < self.g < 1.0:
            raise ParamError(f"g must lie in (0, 1), got {self.g}")
        if not self.T > 0.0:
            raise ParamError(f"T must be positive, got {self.T}")
        if not self.m0 > 0.0:
            raise ParamError(f"m0 must be positive, got {self.m0}")
        if not 0.0 < self.mT < self.m0:
            raise ParamError(f"mT must lie in (0, m0), got {self.mT}")

    @property
    def delta_m(self) -> float:
        return self.m0 - self.mT

    @property
    def full_thrust_shortcut(self) -> bool:
        """True when the fuel budget covers the whole horizon (u = 1 is optimal)."""
        return self.delta_m >= self.T


@dataclass(frozen=True)
class Arc:
    """One interval of a control law: [t0, t1] with a fixed mode.

    ``u`` is the constant control on the arc (0, 1, or the singular value);
    singular arcs also carry the pinned velocity ``x_level``.
    """

    t0: float
    t1: float
    mode: str
    u: float
    x_level: float | None = None

    @property
    def length(self) -> float:
        return self.t1 - self.t0


def singular_arc(t0: float, t1: float, x_level: float, model: FrictionModel, g: float) -> Arc:
    """Build a singular arc holding x = x_level; u = phi(x_level) + g."""
    u = float(model.phi(x_level)) + g
    if not 0.0 <= u <= 1.0:
        raise InfeasibleSingular(f"singular control {u} outside [0, 1] at x={x_level}")
    return Arc(t0, t1, SINGULAR, u, x_level=x_level)


@dataclass(frozen=True)
class ControlLaw:
    """An exact partition of [0, T] into bang/singular arcs."""

    arcs: tuple[Arc, ...]

    def __post_init__(self):
        if not self.arcs:
            raise ParamError("control law needs at least one arc")
        if abs(self.arcs[0].t0) > 1e-12:
            raise ParamError(f"first arc must start at 0, starts at {self.arcs[0].t0}")
        for a in self.arcs:
            if not a.t1 > a.t0:
                raise ParamError(f"arc [{a.t0}, {a.t1}] has nonpositive length")
            if a.mode not in (BANG0, BANG1, SINGULAR):
                raise ParamError(f"unknown arc mode {a.mode!r}")
            if a.mode == SINGULAR and a.x_level is None:
                raise ParamError("singular arc needs x_level")
        for prev, nxt in zip(self.arcs, self.arcs[1:]):
            if abs(nxt.t0 - prev.t1) > 1e-12:
                raise ParamError(f"arcs not contiguous at t={prev.t1}")
            if nxt.mode == prev.mode:
                raise ParamError(f"adjacent arcs share mode {nxt.mode!r} at t={prev.t1}")

    @property
    def T(self) -> float:
        return self.arcs[-1].t1

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(a.t1 for a in self.arcs[:-1])


def fuel_used(law: ControlLaw) -> float:
    """Exact integral of u over [0, T]: sum of u * length over the arcs."""
    return sum(a.u * a.length for a in law.arcs)


@dataclass(frozen=True)
class Trajectory:
    """Node arrays of one integrated process (psi filled by the costate pass).

    ``arc_slices[i] = (j0, j1)`` delimits arc i's nodes as grid[j0 : j1 + 1];
    node j1 of arc i and node j0 of arc i+1 duplicate the same switch time.
    """

    grid: np.ndarray
    s: np.ndarray
    x: np.ndarray
    m: np.ndarray
    u: np.ndarray
    arc_slices: tuple[tuple[int, int], ...]
    law: ControlLaw
    params: ProblemParams
    psi: np.ndarray | None = None

    @property
    def s_T(self) -> float:
        return float(self.s[-1])

    def switch_node(self, i: int) -> int:
        """Grid index of the node that ends arc i (the i-th switch time)."""
        return self.arc_slices[i][1]

    def to_dict(self) -> dict:
        d = {
            "grid": self.grid.tolist(),
            "s": self.s.tolist(),
            "x": self.x.tolist(),
            "m": self.m.tolist(),
            "u": self.u.tolist(),
        }
        d["psi"] = self.psi.tolist() if self.psi is not None else None
        return d


def _arc_steps(length: float, steps_per_unit: float) -> int:
    return max(1, int(math.ceil(length * steps_per_unit - 1e-9)))


def integrate_forward(
    params: ProblemParams,
    model: FrictionModel,
    law: ControlLaw,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
) -> Trajectory:
    """RK4 the state over each arc from s = x = 0, m = m0.

    Bang arcs use the compiled fixed-step kernel; singular arcs advance in
    closed form with x pinned to the arc level (the incoming velocity must
    match that level, otherwise the law is inconsistent with its own state).
    """
    if abs(law.T - params.T) > 1e-9:
        raise ParamError(f"law covers [0, {law.T}], problem horizon is {params.T}")
    code, p1, p2 = model.kernel_params()

    grids, ss, xs, ms, us = [], [], [], [], []
    slices = []
    s_cur, x_cur, m_cur = 0.0, 0.0, params.m0
    node = 0
    for arc in law.arcs:
        n = _arc_steps(arc.length, steps_per_unit)
        t_nodes = np.linspace(arc.t0, arc.t1, n + 1)
        if arc.mode == SINGULAR:
            if not 0.0 <= arc.u <= 1.0:
                raise InfeasibleSingular(f"singular control {arc.u} outside [0, 1]")
            if abs(x_cur - arc.x_level) > 1e-7:
                raise VerifierFlag(
                    f"singular arc at t={arc.t0} pinned to x={arc.x_level} "
                    f"but the state arrives with x={x_cur}"
                )
            x_arc = np.full(n + 1, arc.x_level)
            s_arc = s_cur + arc.x_level * (t_nodes - arc.t0)
        else:
            s_arc, x_arc = _kernels.rk4_bang_arc(
                s_cur, x_cur, arc.length, n, arc.u, params.g, code, p1, p2
            )
        m_arc = m_cur - arc.u * (t_nodes - arc.t0)

        grids.append(t_nodes)
        ss.append(s_arc)
        xs.append(x_arc)
        ms.append(m_arc)
        us.append(np.full(n + 1, arc.u))
        slices.append((node, node + n))
        node += n + 1
        s_cur, x_cur, m_cur = float(s_arc[-1]), float(x_arc[-1]), float(m_arc[-1])

    return Trajectory(
        grid=np.concatenate(grids),
        s=np.concatenate(ss),
        x=np.concatenate(xs),
        m=np.concatenate(ms),
        u=np.concatenate(us),
        arc_slices=tuple(slices),
        law=law,
        params=params,
    )


def integrate_costate_backward(model: FrictionModel, traj: Trajectory) -> Trajectory:
    """Fill psi by integrating psi' = -1 + psi*phi'(x) back from psi(T) = 0.

    Singular arcs use the exact solution: with x pinned, the equation is
    linear with equilibrium 1/phi'(x_level), and backward integration decays
    toward it.  Raises VerifierFlag if psi fails to stay positive before T,
    which cannot happen on a correctly integrated trajectory.
    """
    code, p1, p2 = model.kernel_params()
    g = traj.params.g
    psi = np.empty_like(traj.grid)
    psi_cur = 0.0
    for arc, (j0, j1) in zip(reversed(traj.law.arcs), reversed(traj.arc_slices)):
        n = j1 - j0
        if arc.mode == SINGULAR:
            dp = float(model.dphi(arc.x_level))
            q = 1.0 / dp
            t_rel = traj.grid[j0 : j1 + 1] - arc.t1
            psi[j0 : j1 + 1] = q + (psi_cur - q) * np.exp(dp * t_rel)
        else:
            psi[j0 : j1 + 1] = _kernels.rk4_costate_arc_back(
                psi_cur, traj.x[j0 : j1 + 1], arc.length, n, arc.u, g, code, p1, p2
            )
        psi_cur = float(psi[j0])

    if np.any(psi[:-1] <= 0.0):
        t_bad = traj.grid[:-1][psi[:-1] <= 0.0][0]
        raise VerifierFlag(f"costate nonpositive before T (first at t={t_bad})")
    return replace(traj, psi=psi)


def hamiltonian(model: FrictionModel, g: float, x, psi, alpha: float, u):
    """Pontryagin function with the position/mass costates substituted:

    H = x + psi * (u - phi(x) - g) - alpha * u.
    """
    return x + psi * (u - model.phi(x) - g) - alpha * u
