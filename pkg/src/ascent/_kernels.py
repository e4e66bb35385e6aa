"""Fixed-step RK4 integration kernels.

The shooting solvers evaluate thousands of forward/backward passes, so the
per-arc loops are compiled with numba when it is importable.  The kernels
are plain float arithmetic; the pure-Python fallback produces bit-identical
results, only slower.

Model encoding: ``code`` 0 is linear resistance (p1 = gamma), ``code`` 1 is
piecewise quadratic (p1 = k, p2 = b), with

    phi(x)  = p2/2 * x * |x| + p1 * x
    phi'(x) = p2 * |x| + p1
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _phi(x, code, p1, p2):
    if code == 0:
        return p1 * x
    return 0.5 * p2 * x * abs(x) + p1 * x


@njit(cache=True)
def _dphi(x, code, p1, p2):
    if code == 0:
        return p1
    return p2 * abs(x) + p1


@njit(cache=True)
def rk4_bang_arc(s0, x0, t_len, n, u, g, code, p1, p2):
    """Integrate (s, x) forward over one constant-control arc.

    Returns node arrays of length n+1 including both arc endpoints.
    """
    h = t_len / n
    s = np.empty(n + 1)
    x = np.empty(n + 1)
    s[0] = s0
    x[0] = x0
    for i in range(n):
        x1 = x[i]
        f1 = u - _phi(x1, code, p1, p2) - g
        x2 = x1 + 0.5 * h * f1
        f2 = u - _phi(x2, code, p1, p2) - g
        x3 = x1 + 0.5 * h * f2
        f3 = u - _phi(x3, code, p1, p2) - g
        x4 = x1 + h * f3
        f4 = u - _phi(x4, code, p1, p2) - g
        x[i + 1] = x1 + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        # ds/dt = x: the stage slopes for s are the x stage values
        s[i + 1] = s[i] + (h / 6.0) * (x1 + 2.0 * x2 + 2.0 * x3 + x[i + 1])
    return s, x


@njit(cache=True)
def rk4_costate_arc_back(psi_end, x_nodes, t_len, n, u, g, code, p1, p2):
    """Integrate psi backward over one constant-control arc.

    ``x_nodes`` are the stored forward velocities at the arc's n+1 nodes.
    Each backward step restarts the velocity retrace from the stored node
    value, so the costate stages see stage-consistent velocities and the
    pass keeps full 4th-order accuracy without backward drift.  Returns the
    psi node array of length n+1, index 0 at the arc start.
    """
    h = t_len / n
    psi = np.empty(n + 1)
    psi[n] = psi_end
    for i in range(n, 0, -1):
        x1 = x_nodes[i]
        q1 = psi[i]
        fx1 = u - _phi(x1, code, p1, p2) - g
        fq1 = -1.0 + q1 * _dphi(x1, code, p1, p2)
        x2 = x1 - 0.5 * h * fx1
        q2 = q1 - 0.5 * h * fq1
        fx2 = u - _phi(x2, code, p1, p2) - g
        fq2 = -1.0 + q2 * _dphi(x2, code, p1, p2)
        x3 = x1 - 0.5 * h * fx2
        q3 = q1 - 0.5 * h * fq2
        fx3 = u - _phi(x3, code, p1, p2) - g
        fq3 = -1.0 + q3 * _dphi(x3, code, p1, p2)
        x4 = x1 - h * fx3
        q4 = q1 - h * fq3
        fq4 = -1.0 + q4 * _dphi(x4, code, p1, p2)
        psi[i - 1] = q1 - (h / 6.0) * (fq1 + 2.0 * fq2 + 2.0 * fq3 + fq4)
    return psi


@njit(cache=True)
def rk4_piecewise_forward(h, u_cells, g, code, p1, p2):
    """Forward (s, x) pass for a piecewise-constant control, one step per cell."""
    n = u_cells.shape[0]
    s = np.empty(n + 1)
    x = np.empty(n + 1)
    s[0] = 0.0
    x[0] = 0.0
    for i in range(n):
        u = u_cells[i]
        x1 = x[i]
        f1 = u - _phi(x1, code, p1, p2) - g
        x2 = x1 + 0.5 * h * f1
        f2 = u - _phi(x2, code, p1, p2) - g
        x3 = x1 + 0.5 * h * f2
        f3 = u - _phi(x3, code, p1, p2) - g
        x4 = x1 + h * f3
        f4 = u - _phi(x4, code, p1, p2) - g
        x[i + 1] = x1 + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        s[i + 1] = s[i] + (h / 6.0) * (x1 + 2.0 * x2 + 2.0 * x3 + x[i + 1])
    return s, x


@njit(cache=True)
def rk4_piecewise_costate_back(x_nodes, h, u_cells, g, code, p1, p2):
    """Backward costate pass matching :func:`rk4_piecewise_forward`."""
    n = u_cells.shape[0]
    psi = np.empty(n + 1)
    psi[n] = 0.0
    for i in range(n, 0, -1):
        u = u_cells[i - 1]
        x1 = x_nodes[i]
        q1 = psi[i]
        fx1 = u - _phi(x1, code, p1, p2) - g
        fq1 = -1.0 + q1 * _dphi(x1, code, p1, p2)
        x2 = x1 - 0.5 * h * fx1
        q2 = q1 - 0.5 * h * fq1
        fx2 = u - _phi(x2, code, p1, p2) - g
        fq2 = -1.0 + q2 * _dphi(x2, code, p1, p2)
        x3 = x1 - 0.5 * h * fx2
        q3 = q1 - 0.5 * h * fq2
        fx3 = u - _phi(x3, code, p1, p2) - g
        fq3 = -1.0 + q3 * _dphi(x3, code, p1, p2)
        x4 = x1 - h * fx3
        q4 = q1 - h * fq3
        fq4 = -1.0 + q4 * _dphi(x4, code, p1, p2)
        psi[i - 1] = q1 - (h / 6.0) * (fq1 + 2.0 * fq2 + 2.0 * fq3 + fq4)
    return psi


@njit(cache=True)
def shoot_switches(lengths, us, xlevels, ns, g, code, p1, p2):
    """One forward+backward pass over a whole arc sequence.

    ``xlevels[a]`` is NaN for bang arcs; singular arcs hold x at their level
    and relax psi exponentially toward 1/phi'(level).  Returns

        (ok, s_T, sw_x, sw_psi)

    with the velocity and costate at the interior switch times.  ok=False
    flags a singular arc whose level does not match the incoming velocity.
    """
    narcs = lengths.shape[0]
    total = 0
    for a in range(narcs):
        total += ns[a] + 1
    xbuf = np.empty(total)
    sw_x = np.empty(narcs - 1)
    sw_psi = np.empty(narcs - 1)

    # forward sweep
    s_cur = 0.0
    x_cur = 0.0
    ok = True
    off = 0
    for a in range(narcs):
        n = ns[a]
        u = us[a]
        ln = lengths[a]
        if xlevels[a] == xlevels[a]:  # singular (not NaN)
            lev = xlevels[a]
            if abs(x_cur - lev) > 1e-7:
                ok = False
            for i in range(n + 1):
                xbuf[off + i] = lev
            s_cur += lev * ln
            x_cur = lev
        else:
            h = ln / n
            xbuf[off] = x_cur
            for i in range(n):
                x1 = xbuf[off + i]
                f1 = u - _phi(x1, code, p1, p2) - g
                x2 = x1 + 0.5 * h * f1
                f2 = u - _phi(x2, code, p1, p2) - g
                x3 = x1 + 0.5 * h * f2
                f3 = u - _phi(x3, code, p1, p2) - g
                x4 = x1 + h * f3
                f4 = u - _phi(x4, code, p1, p2) - g
                xn = x1 + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
                xbuf[off + i + 1] = xn
                s_cur += (h / 6.0) * (x1 + 2.0 * x2 + 2.0 * x3 + xn)
            x_cur = xbuf[off + n]
        if a < narcs - 1:
            sw_x[a] = x_cur
        off += n + 1

    # backward costate sweep
    psi_cur = 0.0
    off = total
    for a in range(narcs - 1, -1, -1):
        n = ns[a]
        u = us[a]
        ln = lengths[a]
        off -= n + 1
        if xlevels[a] == xlevels[a]:
            dp = _dphi(xlevels[a], code, p1, p2)
            q = 1.0 / dp
            psi_cur = q + (psi_cur - q) * np.exp(-dp * ln)
        else:
            h = ln / n
            for i in range(n, 0, -1):
                x1 = xbuf[off + i]
                q1 = psi_cur
                fx1 = u - _phi(x1, code, p1, p2) - g
                fq1 = -1.0 + q1 * _dphi(x1, code, p1, p2)
                x2 = x1 - 0.5 * h * fx1
                q2 = q1 - 0.5 * h * fq1
                fx2 = u - _phi(x2, code, p1, p2) - g
                fq2 = -1.0 + q2 * _dphi(x2, code, p1, p2)
                x3 = x1 - 0.5 * h * fx2
                q3 = q1 - 0.5 * h * fq2
                fx3 = u - _phi(x3, code, p1, p2) - g
                fq3 = -1.0 + q3 * _dphi(x3, code, p1, p2)
                x4 = x1 - h * fx3
                q4 = q1 - h * fq3
                fq4 = -1.0 + q4 * _dphi(x4, code, p1, p2)
                psi_cur = q1 - (h / 6.0) * (fq1 + 2.0 * fq2 + 2.0 * fq3 + fq4)
        if a > 0:
            sw_psi[a - 1] = psi_cur

    return ok, s_cur, sw_x, sw_psi


def warm_up():
    """Trigger JIT compilation of the kernels (cached across processes)."""
    u = np.full(4, 0.5)
    _, xa = rk4_bang_arc(0.0, 0.0, 0.1, 4, 1.0, 0.3, 1, 0.5, 1.0)
    rk4_costate_arc_back(0.0, xa, 0.1, 4, 1.0, 0.3, 1, 0.5, 1.0)
    _, xn = rk4_piecewise_forward(0.025, u, 0.3, 0, 1.0, 0.0)
    rk4_piecewise_costate_back(xn, 0.025, u, 0.3, 0, 1.0, 0.0)
    shoot_switches(
        np.array([0.1, 0.1]),
        np.array([1.0, 0.0]),
        np.array([np.nan, np.nan]),
        np.array([4, 4]),
        0.3,
        1,
        0.5,
        1.0,
    )
