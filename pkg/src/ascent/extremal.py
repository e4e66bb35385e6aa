"""Construction and verification of maximum-principle extremals.

Each candidate structure is built by shooting on its switching times (and,
where it is a free unknown, the multiplier alpha).  The residuals are the
gaps psi(t_i) - alpha at the switching times, with psi obtained from a
backward pass over the forward-integrated trajectory.  The search runs on
a coarse integration grid with a multistart seed grid, deduplicates the
roots, polishes each root on the fine grid and finally re-checks the
costate sign pattern that the structure requires:

    Ia   psi: + -        (t1 pinned by fuel, alpha read off the costate)
    Ib   psi: + 0 -      (alpha = 1/phi'(x1) from the singular condition)
    IIa  psi: - + -      (unknowns t1 and alpha, fuel pins t2)
    IIb  psi: - + 0 -    (unknowns t1, t2; alpha from the junction)
    III  psi: + - + -    (unknowns t1, t2, alpha; fuel pins t3)

`verify_mp` then scores every necessary condition on the finished product
and `scan_all` sweeps all admitted builders for one parameter set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .classify import classify
from .dynamics import (
    BANG0,
    BANG1,
    DEFAULT_STEPS_PER_UNIT,
    Arc,
    ControlLaw,
    ProblemParams,
    Trajectory,
    hamiltonian,
    integrate_costate_backward,
    integrate_forward,
    singular_arc,
)
from .errors import (
    InfeasibleSchedule,
    InfeasibleSingular,
    NoExtremalFound,
    NotAnExtremal,
    ParamError,
    VerifierFlag,
)
from .friction import FrictionModel, level_function, velocity_bounds

__all__ = [
    "Check",
    "MPReport",
    "Extremal",
    "build_type_Ia",
    "build_type_Ib",
    "build_type_IIa",
    "build_type_IIb",
    "build_type_III",
    "verify_mp",
    "scan_all",
]

SEARCH_STEPS_PER_UNIT = 120
MULTISTART = 16
DEDUP_RADIUS = 1e-6
SIGN_BAND = 1e-9
SINGULAR_BAND = 1e-8
MIN_ARC = 1e-9

_PATTERNS = {
    "Ia": "+-",
    "Ib": "+0-",
    "IIa": "-+-",
    "IIb": "-+0-",
    "III": "+-+-",
}

_INFEASIBLE = (InfeasibleSchedule, InfeasibleSingular, VerifierFlag)


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float


@dataclass(frozen=True)
class MPReport:
    """Per-condition record of the maximum-principle verifier."""

    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "value": c.value} for c in self.checks
            ],
        }


@dataclass
class Extremal:
    """A candidate solution: structure tag, multiplier, schedule, trajectory."""

    type: str
    alpha: float
    switch_times: tuple[float, ...]
    law: ControlLaw
    traj: Trajectory
    residual_norm: float
    mp_report: MPReport | None = None
    regime: str | None = None
    candidates: tuple[str, ...] = ()
    note: str = ""

    @property
    def s_T(self) -> float:
        return self.traj.s_T

    def to_dict(self, with_trajectory: bool = True) -> dict:
        d = {
            "type": self.type,
            "alpha": self.alpha,
            "switch_times": list(self.switch_times),
            "s_T": self.s_T,
            "residual_norm": self.residual_norm,
            "mp_report": self.mp_report.to_dict() if self.mp_report else None,
            "regime": self.regime,
            "candidates": list(self.candidates),
            "note": self.note,
        }
        if with_trajectory:
            d["trajectory"] = self.traj.to_dict()
        return d


# ---------------------------------------------------------------------------
# fast shooting core (no Trajectory objects; used inside Newton loops)
# ---------------------------------------------------------------------------


def _eval_switches(params, model, segs, spu):
    """One forward+backward pass over (length, u, x_level) segments.

    Returns (s_T, switch_x, switch_psi) from a single compiled sweep; the
    geometry must already be feasible (positive lengths, consistent
    singular levels).
    """
    code, p1, p2 = model.kernel_params()
    narcs = len(segs)
    lengths = np.empty(narcs)
    us = np.empty(narcs)
    xlevels = np.empty(narcs)
    ns = np.empty(narcs, dtype=np.int64)
    for i, (length, u, x_level) in enumerate(segs):
        if length < MIN_ARC:
            raise InfeasibleSchedule(f"arc length {length} too small")
        lengths[i] = length
        us[i] = u
        xlevels[i] = np.nan if x_level is None else x_level
        ns[i] = max(1, int(math.ceil(length * spu - 1e-9)))
    ok, s_T, sw_x, sw_psi = _kernels.shoot_switches(
        lengths, us, xlevels, ns, params.g, code, p1, p2
    )
    if not ok:
        raise VerifierFlag("singular arc level mismatch")
    return s_T, sw_x, sw_psi


def _damped_newton(fun, v0, lo, hi, tol=1e-11, max_iter=100, max_backtracks=30):
    """Newton with central finite differences, box clipping and backtracking.

    Returns (v, r) on convergence, None on stagnation or infeasibility.
    Seeds that only crawl (several consecutive iterations without at least
    a 30% residual drop) are abandoned early; the multistart grid provides
    redundant coverage of each basin.
    """
    v = np.clip(np.asarray(v0, dtype=float), lo, hi)
    try:
        r = np.atleast_1d(np.asarray(fun(v), dtype=float))
    except _INFEASIBLE:
        return None
    m = v.size
    slow = 0
    for _ in range(max_iter):
        nr = np.max(np.abs(r))
        if nr <= tol:
            return v, r
        J = np.empty((r.size, m))
        for j in range(m):
            h = 1e-6 * (1.0 + abs(v[j]))
            vp, vm = v.copy(), v.copy()
            vp[j] = min(v[j] + h, hi[j])
            vm[j] = max(v[j] - h, lo[j])
            if vp[j] - vm[j] < 0.25 * h:
                return None
            try:
                rp = np.atleast_1d(fun(vp))
            except _INFEASIBLE:
                rp, vp = r, v
            try:
                rm = np.atleast_1d(fun(vm))
            except _INFEASIBLE:
                rm, vm = r, v
            dv = vp[j] - vm[j]
            if dv <= 0.0:
                return None
            J[:, j] = (rp - rm) / dv
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        accepted = False
        for _ in range(max_backtracks):
            vt = np.clip(v + lam * step, lo, hi)
            try:
                rt = np.atleast_1d(fun(vt))
            except _INFEASIBLE:
                lam *= 0.5
                continue
            nrt = np.max(np.abs(rt))
            if nrt < nr * (1.0 - 1e-4 * lam) or nrt <= tol:
                v, r = vt, rt
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            return None
        slow = slow + 1 if np.max(np.abs(r)) > 0.7 * nr else 0
        if slow >= 4:
            return None
        if np.max(np.abs(v - np.clip(v + step, lo, hi))) < 1e-14 and np.max(np.abs(r)) > tol:
            return None
    return (v, r) if np.max(np.abs(r)) <= tol else None


def _secant_bisect(fun, a, b, fa, fb, tol_x=1e-13, tol_f=1e-11, max_iter=200):
    """1-D root on a sign-change bracket, secant steps safeguarded by bisection."""
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError("no sign change")
    x0, f0, x1, f1 = a, fa, b, fb
    for _ in range(max_iter):
        if abs(b - a) <= tol_x * (1.0 + abs(a) + abs(b)):
            break
        if f1 != f0:
            x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        else:
            x2 = 0.5 * (a + b)
        if not (a < x2 < b):
            x2 = 0.5 * (a + b)
        f2 = fun(x2)
        if abs(f2) <= tol_f:
            return x2
        if fa * f2 < 0.0:
            b, fb = x2, f2
        else:
            a, fa = x2, f2
        x0, f0, x1, f1 = x1, f1, x2, f2
    return 0.5 * (a + b)


def _dedup(points: list[np.ndarray], radius: float = DEDUP_RADIUS) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - q)) > radius for q in out):
            out.append(p)
    return out


def _require_feasible(params: ProblemParams):
    if not 0.0 < params.delta_m < params.T:
        raise ParamError(
            f"builders need 0 < delta_m < T, got delta_m={params.delta_m}, T={params.T}"
        )


# ---------------------------------------------------------------------------
# type Ia: u = (1, 0), switch pinned at t1 = delta_m
# ---------------------------------------------------------------------------


def build_type_Ia(
    params: ProblemParams,
    model: FrictionModel,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
) -> Extremal:
    """Bang-bang candidate; alpha is read off the costate at the switch.

    With the fuel budget covering the whole horizon the construction
    degenerates to full thrust (no switch, alpha = 0) and the usual
    necessary conditions are moot.
    """
    if params.full_thrust_shortcut:
        law = ControlLaw((Arc(0.0, params.T, BANG1, 1.0),))
        traj = integrate_costate_backward(model, integrate_forward(params, model, law, steps_per_unit))
        return Extremal(
            type="full",
            alpha=0.0,
            switch_times=(),
            law=law,
            traj=traj,
            residual_norm=0.0,
            note="full thrust",
        )
    _require_feasible(params)
    t1 = params.delta_m
    law = ControlLaw((Arc(0.0, t1, BANG1, 1.0), Arc(t1, params.T, BANG0, 0.0)))
    traj = integrate_costate_backward(model, integrate_forward(params, model, law, steps_per_unit))
    alpha = float(traj.psi[traj.switch_node(0)])
    if not _traj_pattern_ok(traj, alpha, _PATTERNS["Ia"]):
        raise NotAnExtremal("costate sign pattern rules out structure Ia here")
    return Extremal(
        type="Ia",
        alpha=alpha,
        switch_times=(t1,),
        law=law,
        traj=traj,
        residual_norm=0.0,
    )


def _traj_pattern_ok(traj: Trajectory, alpha: float, pattern: str) -> bool:
    for (j0, j1), sym in zip(traj.arc_slices, pattern):
        seg = traj.psi[j0 : j1 + 1]
        interior = seg[1:-1] if seg.size > 2 else seg
        if sym == "+":
            if interior.size and (interior - alpha).min() < -SIGN_BAND:
                return False
        elif sym == "-":
            if interior.size and (interior - alpha).max() > SIGN_BAND:
                return False
        else:
            if np.abs(seg - alpha).max() > SINGULAR_BAND:
                return False
    return True


# ---------------------------------------------------------------------------
# type Ib: u = (1, sing, 0); one unknown t1
# ---------------------------------------------------------------------------


def _ib_segments(params: ProblemParams, model: FrictionModel, t1: float, spu: float):
    """Forward data for the (1, sing, 0) structure at switch t1."""
    dm, T = params.delta_m, params.T
    if not MIN_ARC < t1 < dm - MIN_ARC:
        raise InfeasibleSchedule(f"t1={t1} incompatible with fuel budget {dm}")
    code, p1, p2 = model.kernel_params()
    n = max(1, int(math.ceil(t1 * spu - 1e-9)))
    _, x_arr = _kernels.rk4_bang_arc(0.0, 0.0, t1, n, 1.0, params.g, code, p1, p2)
    x1 = float(x_arr[-1])
    u_sing = float(model.phi(x1)) + params.g
    if not 0.0 <= u_sing <= 1.0:
        raise InfeasibleSingular(f"singular control {u_sing} outside [0, 1]")
    t2 = t1 + (params.m0 - t1 - params.mT) / (float(model.phi(x1)) + params.g)
    if not t1 + MIN_ARC < t2 < T - MIN_ARC:
        raise InfeasibleSchedule(f"t2={t2} outside ({t1}, {T})")
    segs = [(t1, 1.0, None), (t2 - t1, u_sing, x1), (T - t2, 0.0, None)]
    return segs, x1, u_sing, t2


def _ib_residual(params, model, t1, spu):
    segs, x1, _, _ = _ib_segments(params, model, t1, spu)
    alpha = 1.0 / float(model.dphi(x1))
    _, _, sw_psi = _eval_switches(params, model, segs, spu)
    return float(sw_psi[0]) - alpha


def _find_type_Ib(
    params: ProblemParams,
    model: FrictionModel,
    steps_per_unit: float,
    search_spu: float,
    multistart: int,
    t1_seed: float | None = None,
) -> list[Extremal]:
    _require_feasible(params)
    dm, T = params.delta_m, params.T
    margin = 1e-6 * max(1.0, T)
    lo, hi = margin, dm - margin
    if hi <= lo:
        return []

    def res_coarse(t1):
        return _ib_residual(params, model, t1, search_spu)

    # restrict to schedules whose singular arc ends before T
    def t2_of(t1):
        try:
            return _ib_segments(params, model, t1, search_spu)[3]
        except _INFEASIBLE:
            return np.inf

    if t2_of(lo) == np.inf:
        if t2_of(hi) == np.inf:
            return []
        a, b = lo, hi
        for _ in range(80):
            mid = 0.5 * (a + b)
            if t2_of(mid) > T - 2.0 * margin:
                a = mid
            else:
                b = mid
        lo = b

    if t1_seed is not None:
        grid = np.unique(np.clip([t1_seed - 0.05 * dm, t1_seed, t1_seed + 0.05 * dm], lo, hi))
    else:
        # include the window endpoints: roots often hide near the fuel limit,
        # where the singular arc degenerates into the bang-bang structure
        grid = np.linspace(lo, hi, multistart + 2)
    vals = []
    for t1 in grid:
        try:
            vals.append(res_coarse(t1))
        except _INFEASIBLE:
            vals.append(np.nan)
    roots = []
    for (a, fa), (b, fb) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if np.isnan(fa) or np.isnan(fb) or fa * fb > 0.0:
            continue
        roots.append(_secant_bisect(res_coarse, a, b, fa, fb))

    out = []
    for r in _dedup([np.array([r]) for r in roots]):
        t1c = float(r[0])
        # polish on the fine grid with a local bracket
        def res_fine(t1):
            return _ib_residual(params, model, t1, steps_per_unit)

        d = max(1e-5 * dm, 1e-7)
        a, b = max(lo, t1c - d), min(hi, t1c + d)
        try:
            fa, fb = res_fine(a), res_fine(b)
            for _ in range(20):
                if fa * fb <= 0.0:
                    break
                d *= 2.0
                a, b = max(lo, t1c - d), min(hi, t1c + d)
                fa, fb = res_fine(a), res_fine(b)
            if fa * fb > 0.0:
                continue
            t1f = _secant_bisect(res_fine, a, b, fa, fb)
            e = _assemble_Ib(params, model, t1f, steps_per_unit)
        except _INFEASIBLE:
            continue
        except NotAnExtremal:
            continue
        out.append(e)
    return out


def _assemble_Ib(params, model, t1, spu) -> Extremal:
    segs, x1, u_sing, t2 = _ib_segments(params, model, t1, spu)
    alpha = 1.0 / float(model.dphi(x1))
    law = ControlLaw(
        (
            Arc(0.0, t1, BANG1, 1.0),
            singular_arc(t1, t2, x1, model, params.g),
            Arc(t2, params.T, BANG0, 0.0),
        )
    )
    traj = integrate_costate_backward(model, integrate_forward(params, model, law, spu))
    res = max(
        abs(float(traj.psi[traj.switch_node(0)]) - alpha),
        abs(float(traj.psi[traj.switch_node(1)]) - alpha),
    )
    if res > 1e-8:
        raise NotAnExtremal(f"singular junction residual {res} too large")
    if not _traj_pattern_ok(traj, alpha, _PATTERNS["Ib"]):
        raise NotAnExtremal("costate sign pattern rules out structure Ib here")
    return Extremal(
        type="Ib",
        alpha=alpha,
        switch_times=(t1, t2),
        law=law,
        traj=traj,
        residual_norm=res,
    )


def build_type_Ib(
    params: ProblemParams,
    model: FrictionModel,
    t1_seed: float | None = None,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
    search_steps_per_unit: float = SEARCH_STEPS_PER_UNIT,
    multistart: int = MULTISTART,
) -> Extremal:
    """Shoot on t1 for the thrust/singular/coast structure."""
    found = _find_type_Ib(params, model, steps_per_unit, search_steps_per_unit, multistart, t1_seed)
    if not found:
        raise NotAnExtremal("no Ib residual sign change in the feasible window")
    return max(found, key=lambda e: e.s_T)


# ---------------------------------------------------------------------------
# types IIa / IIb / III: multistart Newton on 2-3 unknowns
# ---------------------------------------------------------------------------


def _iia_segments(params, v):
    t1, _ = float(v[0]), float(v[1])
    t2 = t1 + params.delta_m
    T = params.T
    if not (MIN_ARC < t1 and t2 < T - MIN_ARC):
        raise InfeasibleSchedule(f"(t1, t2)=({t1}, {t2}) outside (0, {T})")
    return [(t1, 0.0, None), (params.delta_m, 1.0, None), (T - t2, 0.0, None)], (t1, t2)


def _iib_segments(params, model, v, spu):
    t1, t2 = float(v[0]), float(v[1])
    T, dm = params.T, params.delta_m
    burn = t2 - t1
    if not (MIN_ARC < t1 < t2 < T - MIN_ARC and MIN_ARC < burn < dm - MIN_ARC):
        raise InfeasibleSchedule(f"(t1, t2)=({t1}, {t2}) infeasible")
    code, p1, p2 = model.kernel_params()
    g = params.g
    n0 = max(1, int(math.ceil(t1 * spu - 1e-9)))
    _, x_arr = _kernels.rk4_bang_arc(0.0, 0.0, t1, n0, 0.0, g, code, p1, p2)
    n1 = max(1, int(math.ceil(burn * spu - 1e-9)))
    _, x_arr = _kernels.rk4_bang_arc(0.0, float(x_arr[-1]), burn, n1, 1.0, g, code, p1, p2)
    x2 = float(x_arr[-1])
    if x2 <= 0.0:
        raise InfeasibleSingular(f"singular level x={x2} must be positive")
    u_sing = float(model.phi(x2)) + g
    if not 0.0 <= u_sing <= 1.0:
        raise InfeasibleSingular(f"singular control {u_sing} outside [0, 1]")
    t3 = t2 + (dm - burn) / u_sing
    if not t2 + MIN_ARC < t3 < T - MIN_ARC:
        raise InfeasibleSchedule(f"t3={t3} outside ({t2}, {T})")
    alpha = 1.0 / float(model.dphi(x2))
    segs = [(t1, 0.0, None), (burn, 1.0, None), (t3 - t2, u_sing, x2), (T - t3, 0.0, None)]
    return segs, alpha, (t1, t2, t3), x2, u_sing


def _iii_segments(params, v):
    t1, t2 = float(v[0]), float(v[1])
    T, dm = params.T, params.delta_m
    t3 = t2 + dm - t1
    if not (MIN_ARC < t1 < t2 - MIN_ARC and t2 < t3 - MIN_ARC and t3 < T - MIN_ARC):
        raise InfeasibleSchedule(f"(t1, t2, t3)=({t1}, {t2}, {t3}) infeasible")
    if not t1 < dm - MIN_ARC:
        raise InfeasibleSchedule(f"t1={t1} exhausts the fuel budget {dm}")
    segs = [(t1, 1.0, None), (t2 - t1, 0.0, None), (t3 - t2, 1.0, None), (T - t3, 0.0, None)]
    return segs, (t1, t2, t3)


def _multistart_newton(res_fn, seeds, lo, hi, coarse_tol=1e-9):
    roots = []
    for seed in seeds:
        got = _damped_newton(res_fn, seed, lo, hi, tol=coarse_tol, max_iter=40)
        if got is not None:
            roots.append(got[0])
    return _dedup(roots)


def _finish_candidate(build_fn, roots, fine_res_fn, lo, hi):
    """Polish coarse roots on the fine grid and assemble accepted extremals."""
    out = []
    for v in roots:
        got = _damped_newton(fine_res_fn, v, lo, hi, tol=1e-11, max_iter=20)
        if got is None:
            continue
        try:
            e = build_fn(got[0])
        except (NotAnExtremal, *_INFEASIBLE):
            continue
        out.append(e)
    return out


def _find_type_IIa(params, model, steps_per_unit, search_spu, multistart, seed=None):
    _require_feasible(params)
    T, dm = params.T, params.delta_m
    width = T - dm
    margin = 1e-6 * max(1.0, T)
    if width <= 2 * margin:
        return []
    lo = np.array([margin, 1e-12])
    hi = np.array([width - margin, np.inf])

    def residual(spu):
        def f(v):
            segs, _ = _iia_segments(params, v)
            _, _, sw_psi = _eval_switches(params, model, segs, spu)
            return sw_psi - v[1]

        return f

    if seed is not None:
        seeds = [np.asarray(seed, dtype=float)]
    else:
        seeds = []
        for j in range(multistart):
            t1 = margin + (j + 0.5) / multistart * (width - 2 * margin)
            try:
                segs, _ = _iia_segments(params, (t1, 0.0))
                _, _, sw_psi = _eval_switches(params, model, segs, search_spu)
                a0 = float(sw_psi[0])
            except _INFEASIBLE:
                continue
            seeds.append(np.array([t1, max(a0, 1e-6)]))

    roots = _multistart_newton(residual(search_spu), seeds, lo, hi)

    def assemble(v):
        t1, alpha = float(v[0]), float(v[1])
        t2 = t1 + dm
        law = ControlLaw(
            (Arc(0.0, t1, BANG0, 0.0), Arc(t1, t2, BANG1, 1.0), Arc(t2, params.T, BANG0, 0.0))
        )
        traj = integrate_costate_backward(
            model, integrate_forward(params, model, law, steps_per_unit)
        )
        res = max(
            abs(float(traj.psi[traj.switch_node(i)]) - alpha) for i in range(2)
        )
        if res > 1e-8:
            raise NotAnExtremal(f"residual {res} too large")
        if not _traj_pattern_ok(traj, alpha, _PATTERNS["IIa"]):
            raise NotAnExtremal("costate sign pattern rules out structure IIa here")
        return Extremal(
            type="IIa",
            alpha=alpha,
            switch_times=(t1, t2),
            law=law,
            traj=traj,
            residual_norm=res,
        )

    return _finish_candidate(assemble, roots, residual(steps_per_unit), lo, hi)


def build_type_IIa(
    params: ProblemParams,
    model: FrictionModel,
    seed: tuple[float, float] | None = None,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
    search_steps_per_unit: float = SEARCH_STEPS_PER_UNIT,
    multistart: int = MULTISTART,
) -> Extremal:
    """2x2 Newton on (t1, alpha) for the coast/thrust/coast structure."""
    found = _find_type_IIa(params, model, steps_per_unit, search_steps_per_unit, multistart, seed)
    if not found:
        raise NotAnExtremal("no IIa root accepted")
    return max(found, key=lambda e: e.s_T)


def _find_type_IIb(params, model, steps_per_unit, search_spu, multistart, seed=None):
    _require_feasible(params)
    T, dm = params.T, params.delta_m
    margin = 1e-6 * max(1.0, T)
    lo = np.array([margin, 2 * margin])
    hi = np.array([T - 2 * margin, T - margin])

    def residual(spu):
        def f(v):
            segs, alpha, _, _, _ = _iib_segments(params, model, v, spu)
            _, _, sw_psi = _eval_switches(params, model, segs, spu)
            return sw_psi[:2] - alpha

        return f

    if seed is not None:
        seeds = [np.asarray(seed, dtype=float)]
    else:
        seeds = []
        for i in range(multistart):
            t1 = margin + (i + 0.5) / multistart * (T - 2 * margin)
            for j in range(multistart):
                burn = (j + 0.5) / multistart * min(dm, T - t1)
                seeds.append(np.array([t1, t1 + burn]))

    roots = _multistart_newton(residual(search_spu), seeds, lo, hi)

    def assemble(v):
        _, alpha, (t1, t2, t3), x2, _ = _iib_segments(params, model, v, steps_per_unit)
        law = ControlLaw(
            (
                Arc(0.0, t1, BANG0, 0.0),
                Arc(t1, t2, BANG1, 1.0),
                singular_arc(t2, t3, x2, model, params.g),
                Arc(t3, params.T, BANG0, 0.0),
            )
        )
        traj = integrate_costate_backward(
            model, integrate_forward(params, model, law, steps_per_unit)
        )
        res = max(
            abs(float(traj.psi[traj.switch_node(i)]) - alpha) for i in range(3)
        )
        if res > 1e-8:
            raise NotAnExtremal(f"residual {res} too large")
        if not _traj_pattern_ok(traj, alpha, _PATTERNS["IIb"]):
            raise NotAnExtremal("costate sign pattern rules out structure IIb here")
        return Extremal(
            type="IIb",
            alpha=alpha,
            switch_times=(t1, t2, t3),
            law=law,
            traj=traj,
            residual_norm=res,
        )

    return _finish_candidate(assemble, roots, residual(steps_per_unit), lo, hi)


def build_type_IIb(
    params: ProblemParams,
    model: FrictionModel,
    seed: tuple[float, float] | None = None,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
    search_steps_per_unit: float = SEARCH_STEPS_PER_UNIT,
    multistart: int = MULTISTART,
) -> Extremal:
    """2x2 Newton on (t1, t2); alpha and t3 follow from the singular junction."""
    found = _find_type_IIb(params, model, steps_per_unit, search_steps_per_unit, multistart, seed)
    if not found:
        raise NotAnExtremal("no IIb root accepted")
    return max(found, key=lambda e: e.s_T)


def _find_type_III(params, model, steps_per_unit, search_spu, multistart, seed=None):
    _require_feasible(params)
    T, dm = params.T, params.delta_m
    margin = 1e-6 * max(1.0, T)
    lo = np.array([margin, 2 * margin, 1e-12])
    hi = np.array([dm - margin, T - 2 * margin, np.inf])

    def residual(spu):
        def f(v):
            segs, _ = _iii_segments(params, v)
            _, _, sw_psi = _eval_switches(params, model, segs, spu)
            return sw_psi - v[2]

        return f

    if seed is not None:
        seeds = [np.asarray(seed, dtype=float)]
    else:
        seeds = []
        for i in range(multistart):
            t1 = margin + (i + 0.5) / multistart * (dm - 2 * margin)
            hi_t2 = T - (dm - t1)
            for j in range(multistart):
                t2 = t1 + (j + 0.5) / multistart * (hi_t2 - t1 - 2 * margin)
                try:
                    segs, _ = _iii_segments(params, (t1, t2))
                    _, _, sw_psi = _eval_switches(params, model, segs, search_spu)
                    a0 = float(np.mean(sw_psi))
                except _INFEASIBLE:
                    continue
                seeds.append(np.array([t1, t2, max(a0, 1e-6)]))

    roots = _multistart_newton(residual(search_spu), seeds, lo, hi)

    def assemble(v):
        segs, (t1, t2, t3) = _iii_segments(params, v)
        alpha = float(v[2])
        law = ControlLaw(
            (
                Arc(0.0, t1, BANG1, 1.0),
                Arc(t1, t2, BANG0, 0.0),
                Arc(t2, t3, BANG1, 1.0),
                Arc(t3, params.T, BANG0, 0.0),
            )
        )
        traj = integrate_costate_backward(
            model, integrate_forward(params, model, law, steps_per_unit)
        )
        res = max(
            abs(float(traj.psi[traj.switch_node(i)]) - alpha) for i in range(3)
        )
        if res > 1e-8:
            raise NotAnExtremal(f"residual {res} too large")
        if not _traj_pattern_ok(traj, alpha, _PATTERNS["III"]):
            raise NotAnExtremal("costate sign pattern rules out structure III here")
        xs = [float(traj.x[traj.switch_node(i)]) for i in range(3)]
        if not (xs[0] > 0.0 and xs[1] < 0.0 and 0.0 < xs[2] < xs[0]):
            raise NotAnExtremal("switch velocities violate the required level layout")
        lv = [level_function(model, alpha, x) for x in xs]
        if max(lv) - min(lv) > 1e-6:
            raise NotAnExtremal("switch levels not on a common level set")
        return Extremal(
            type="III",
            alpha=alpha,
            switch_times=(t1, t2, t3),
            law=law,
            traj=traj,
            residual_norm=res,
        )

    return _finish_candidate(assemble, roots, residual(steps_per_unit), lo, hi)


def build_type_III(
    params: ProblemParams,
    model: FrictionModel,
    seed: tuple[float, float, float] | None = None,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
    search_steps_per_unit: float = SEARCH_STEPS_PER_UNIT,
    multistart: int = MULTISTART,
) -> Extremal:
    """3x3 Newton on (t1, t2, alpha) for the double-pulse structure."""
    found = _find_type_III(params, model, steps_per_unit, search_steps_per_unit, multistart, seed)
    if not found:
        raise NotAnExtremal("no III root accepted")
    return max(found, key=lambda e: e.s_T)


# ---------------------------------------------------------------------------
# verifier
# ---------------------------------------------------------------------------


def verify_mp(
    e: Extremal,
    params: ProblemParams,
    model: FrictionModel,
    tol: float = 1e-6,
) -> MPReport:
    """Score every necessary condition on a finished candidate.

    The report carries (name, passed, measured) triples; it never raises.
    ``tol`` is the band used for maximality, Hamiltonian constancy (scaled
    by 1+T) and the switch-level identity; the terminal costate, fuel and
    confinement checks have fixed tolerances.
    """
    traj = e.traj
    psi = traj.psi
    alpha = e.alpha
    checks = []

    checks.append(Check("transversality", abs(float(psi[-1])) <= 1e-8, abs(float(psi[-1]))))

    pre_T = psi[:-1]
    min_psi = float(pre_T.min()) if pre_T.size else float("nan")
    checks.append(Check("costate_positive", min_psi > 0.0, min_psi))

    checks.append(Check("alpha_positive", alpha > 0.0, alpha))

    fuel_gap = abs(float(traj.m[-1]) - params.mT)
    checks.append(Check("fuel_complementarity", fuel_gap <= 1e-9, fuel_gap))

    d = psi - alpha
    u = traj.u
    viol = np.zeros_like(d)
    push_up = (d > tol) & (u < 1.0 - 1e-9)
    viol[push_up] = d[push_up] - tol
    push_dn = (d < -tol) & (u > 1e-9)
    viol[push_dn] = -d[push_dn] - tol
    interior = (u > 1e-9) & (u < 1.0 - 1e-9)
    viol[interior] = np.maximum(viol[interior], np.abs(d[interior]) - tol)
    max_viol = float(viol.max()) if viol.size else 0.0
    checks.append(Check("maximality", max_viol <= 0.0, max(0.0, max_viol)))

    H = hamiltonian(model, params.g, traj.x, psi, alpha, u)
    h_range = float(H.max() - H.min())
    checks.append(Check("hamiltonian_constant", h_range <= tol * (1.0 + params.T), h_range))

    vb = velocity_bounds(model, params.g)
    excess = max(float(vb.x_min - traj.x.min()), float(traj.x.max() - vb.x_max), 0.0)
    checks.append(Check("confinement", excess <= 1e-9, excess))

    if e.switch_times:
        xs = [float(traj.x[traj.switch_node(i)]) for i in range(len(e.switch_times))]
        levels = [float(level_function(model, alpha, x)) for x in xs]
        spread = max(levels) - min(levels)
    else:
        spread = 0.0
    checks.append(Check("switch_levels", spread <= tol, spread))

    worst = 0.0
    arcs = traj.law.arcs
    for i in range(1, len(arcs) - 1):
        if arcs[i].mode != BANG1:
            continue
        x_in = float(traj.x[traj.switch_node(i - 1)])
        x_out = float(traj.x[traj.switch_node(i)])
        worst = max(worst, x_in, x_out + x_in)
    checks.append(Check("crossing_signs", worst <= tol, worst))

    return MPReport(checks=tuple(checks))


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def scan_all(
    params: ProblemParams,
    model: FrictionModel,
    steps_per_unit: float = DEFAULT_STEPS_PER_UNIT,
    search_steps_per_unit: float = SEARCH_STEPS_PER_UNIT,
    multistart: int = MULTISTART,
    tol: float = 1e-6,
) -> list[Extremal]:
    """Attempt every builder, verify survivors, sort by final height.

    alpha is an output of each construction, so the regime cell of every
    accepted extremal is recorded after the fact.  Only candidates whose
    full MP report passes are returned; an empty result raises
    NoExtremalFound since an optimum is known to exist.
    """
    if params.full_thrust_shortcut:
        return [build_type_Ia(params, model, steps_per_unit)]

    found: list[Extremal] = []
    try:
        found.append(build_type_Ia(params, model, steps_per_unit))
    except NotAnExtremal:
        pass
    found.extend(
        _find_type_Ib(params, model, steps_per_unit, search_steps_per_unit, multistart)
    )
    found.extend(
        _find_type_IIa(params, model, steps_per_unit, search_steps_per_unit, multistart)
    )
    found.extend(
        _find_type_IIb(params, model, steps_per_unit, search_steps_per_unit, multistart)
    )
    found.extend(
        _find_type_III(params, model, steps_per_unit, search_steps_per_unit, multistart)
    )

    verified: list[Extremal] = []
    for e in found:
        e.mp_report = verify_mp(e, params, model, tol)
        if not e.mp_report.passed:
            continue
        label, cand = classify(model, params.g, e.alpha)
        e.regime = label.text
        e.candidates = cand.types
        verified.append(e)

    unique: list[Extremal] = []
    for e in sorted(verified, key=lambda e: e.residual_norm):
        dup = False
        for u in unique:
            if u.type == e.type and len(u.switch_times) == len(e.switch_times):
                if max(
                    abs(a - b) for a, b in zip(u.switch_times, e.switch_times)
                ) < DEDUP_RADIUS:
                    dup = True
                    break
        if not dup:
            unique.append(e)

    if not unique:
        raise NoExtremalFound(
            "no structure passed verification; an optimum exists, so either the "
            "search grids are too coarse or the parameters sit on a regime boundary"
        )
    unique.sort(key=lambda e: e.s_T, reverse=True)
    return unique
