"""Limited-memory BFGS with a strong-Wolfe line search.

Hand-rolled so the solve pipeline has no optimizer dependency and fully
deterministic behavior. Memory 10, c1 = 1e-4, c2 = 0.9, with an Armijo
backtracking fallback for objectives whose gradient is only piecewise
smooth (the finite-difference planarity metrics).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
MEMORY = 10


@dataclass
class MinimizeResult:
    x: np.ndarray
    value: float
    grad_inf: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)  # objective value per accepted iterate


def _zoom(fn, x, d, phi0, dphi0, a_lo, a_hi, phi_lo, max_iters=30):
    """Nocedal-Wright zoom: find alpha in [a_lo, a_hi] meeting strong Wolfe."""
    for _ in range(max_iters):
        a = 0.5 * (a_lo + a_hi)
        f, g = fn(x + a * d)
        dphi = float(g @ d)
        if f > phi0 + WOLFE_C1 * a * dphi0 or f >= phi_lo:
            a_hi = a
        else:
            if abs(dphi) <= -WOLFE_C2 * dphi0:
                return a, f, g
            if dphi * (a_hi - a_lo) >= 0:
                a_hi = a_lo
            a_lo, phi_lo = a, f
        if abs(a_hi - a_lo) < 1e-16:
            break
    f, g = fn(x + a_lo * d)
    if f < phi0 + WOLFE_C1 * a_lo * dphi0 or f < phi0:
        return a_lo, f, g
    return None


def _line_search_wolfe(fn, x, f0, g0, d):
    dphi0 = float(g0 @ d)
    if dphi0 >= 0:
        return None
    a_prev, phi_prev = 0.0, f0
    a = 1.0
    g_prev = g0
    for i in range(20):
        f, g = fn(x + a * d)
        dphi = float(g @ d)
        if f > f0 + WOLFE_C1 * a * dphi0 or (i > 0 and f >= phi_prev):
            return _zoom(fn, x, d, f0, dphi0, a_prev, a, phi_prev)
        if abs(dphi) <= -WOLFE_C2 * dphi0:
            return a, f, g
        if dphi >= 0:
            return _zoom(fn, x, d, f0, dphi0, a, a_prev, f)
        a_prev, phi_prev, g_prev = a, f, g
        a *= 2.0
    return None


def _line_search_armijo(fn, x, f0, g0, d):
    """Backtracking: sufficient decrease only. Used when Wolfe fails, which
    happens for the non-smooth alternative metrics."""
    dphi0 = float(g0 @ d)
    if dphi0 >= 0:
        return None
    a = 1.0
    for _ in range(50):
        f, g = fn(x + a * d)
        if f <= f0 + WOLFE_C1 * a * dphi0:
            return a, f, g
        a *= 0.5
    return None


def minimize(fn, x0, *, max_iters: int = 2000, tol_grad: float = 1e-12,
             tol_energy: float = 1e-16, memory: int = MEMORY,
             callback=None) -> MinimizeResult:
    """Minimize fn: x -> (value, gradient). Stops when the gradient inf-norm
    drops below tol_grad, the per-step decrease drops below tol_energy, or
    the line search stalls (reported as converged with zero decrease)."""
    x = np.array(x0, dtype=float)
    if x.size == 0:
        return MinimizeResult(x, fn(x)[0], 0.0, 0, True, [fn(x)[0]])
    f, g = fn(x)
    f = float(f)
    trace = [f]
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        g_inf = float(np.abs(g).max())
        if g_inf <= tol_grad:
            converged = True
            it -= 1
            break

        # Two-loop recursion for d = -H g.
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        if y_list:
            ys = float(s_list[-1] @ y_list[-1])
            yy = float(y_list[-1] @ y_list[-1])
            q *= ys / yy
        for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        d = -q
        steepest = False
        if float(d @ g) >= 0:
            # Curvature information went bad: restart from steepest descent.
            s_list.clear()
            y_list.clear()
            rho_list.clear()
            d = -g
            steepest = True

        res = _line_search_wolfe(fn, x, f, g, d)
        if res is None:
            res = _line_search_armijo(fn, x, f, g, d)
        if res is None and not steepest:
            s_list.clear()
            y_list.clear()
            rho_list.clear()
            d = -g
            res = _line_search_wolfe(fn, x, f, g, d)
            if res is None:
                res = _line_search_armijo(fn, x, f, g, d)
        if res is None:
            # No descent found in any direction we tried: stalled at (numerical)
            # stationarity. Zero decrease satisfies the energy tolerance.
            converged = True
            it -= 1
            break
        a, f_new, g_new = res
        s = a * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)) and sy > 0:
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        decrease = f - float(f_new)
        x = x + a * d
        f, g = float(f_new), g_new
        trace.append(f)
        if callback is not None:
            callback(it, x, f, float(np.abs(g).max()))
        if 0 <= decrease <= tol_energy:
            converged = True
            break
    return MinimizeResult(x, f, float(np.abs(g).max()), it, converged, trace)
