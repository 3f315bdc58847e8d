"""Limited-memory BFGS with a strong-Wolfe line search.

Two-loop recursion over the last 10 curvature pairs; the line search is
the classic bracket-and-zoom procedure with sufficient-decrease constant
1e-4 and curvature constant 0.9. The evaluation budget counts every
(f, grad) point evaluation, line-search trials included, so a maxfun cap
translates directly into simulator calls.
"""

from collections import deque

import numpy as np

from .result import OptResult, iteration_record

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9


class _Budget(Exception):
    pass


class _Evaluator:
    """Counts point evaluations, tracks the best seen, enforces the cap."""

    def __init__(self, f, grad, maxfun):
        self.f = f
        self.grad = grad
        self.maxfun = maxfun
        self.evals = 0
        self.best_x = None
        self.best_f = np.inf

    def __call__(self, x):
        if self.evals >= self.maxfun:
            raise _Budget()
        fx = float(self.f(x))
        gx = np.asarray(self.grad(x), dtype=np.float64)
        self.evals += 1
        if not np.isfinite(fx) or not np.all(np.isfinite(gx)):
            raise FloatingPointError(f"non-finite objective or gradient at x = {x}")
        if fx < self.best_f:
            self.best_f = fx
            self.best_x = np.array(x, copy=True)
        return fx, gx


def _interpolate(lo, hi):
    # Bisection is robust and, combined with the Wolfe tests, sufficient
    # here; trial points stay strictly inside the bracket.
    return 0.5 * (lo + hi)


def _zoom(ev, x, d, phi0, dphi0, a_lo, phi_lo, a_hi, phi_hi, max_iter=30):
    for _ in range(max_iter):
        a = _interpolate(a_lo, a_hi)
        fx, gx = ev(x + a * d)
        dphi = float(gx @ d)
        if fx > phi0 + WOLFE_C1 * a * dphi0 or fx >= phi_lo:
            a_hi, phi_hi = a, fx
        else:
            if abs(dphi) <= -WOLFE_C2 * dphi0:
                return a, fx, gx
            if dphi * (a_hi - a_lo) >= 0:
                a_hi, phi_hi = a_lo, phi_lo
            a_lo, phi_lo = a, fx
        if abs(a_hi - a_lo) < 1e-14:
            break
    fx, gx = ev(x + a_lo * d)
    return a_lo, fx, gx


def _line_search(ev, x, fx, gx, d, max_iter=20):
    """Strong-Wolfe step along d; returns (alpha, f, grad) or None."""
    phi0 = fx
    dphi0 = float(gx @ d)
    if dphi0 >= 0:
        return None
    a_prev, phi_prev = 0.0, phi0
    a = 1.0
    for i in range(max_iter):
        f_a, g_a = ev(x + a * d)
        dphi = float(g_a @ d)
        if f_a > phi0 + WOLFE_C1 * a * dphi0 or (i > 0 and f_a >= phi_prev):
            return _zoom(ev, x, d, phi0, dphi0, a_prev, phi_prev, a, f_a)
        if abs(dphi) <= -WOLFE_C2 * dphi0:
            return a, f_a, g_a
        if dphi >= 0:
            return _zoom(ev, x, d, phi0, dphi0, a, f_a, a_prev, phi_prev)
        a_prev, phi_prev = a, f_a
        a *= 2.0
    return None


def _two_loop(g, s_list, y_list, rho_list):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def lbfgs_minimize(f, grad, x0, maxfun: int = 100, memory: int = 10,
                   gtol: float = 1e-8, logger=None, phase: str = "lbfgs",
                   iter_offset: int = 0) -> OptResult:
    """Minimize f from x0 under an evaluation budget.

    grad is a separate callable (finite differences in the workflows);
    both are evaluated together at every trial point. Terminates on the
    budget, on gradient norm below gtol, or when the line search cannot
    make progress.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    ev = _Evaluator(f, grad, maxfun)
    history = []
    termination = "maxfun"
    try:
        fx, gx = ev(x)
        s_list, y_list, rho_list = deque(maxlen=memory), deque(maxlen=memory), deque(maxlen=memory)
        iteration = 0
        while True:
            if np.linalg.norm(gx) < gtol:
                termination = "gtol"
                break
            d = -_two_loop(gx, s_list, y_list, rho_list)
            if d @ gx >= 0:
                d = -gx
            step = _line_search(ev, x, fx, gx, d)
            if step is None:
                termination = "line_search"
                break
            a, f_new, g_new = step
            x_new = x + a * d
            s = x_new - x
            y = g_new - gx
            sy = float(s @ y)
            if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
                s_list.append(s)
                y_list.append(y)
                rho_list.append(1.0 / sy)
            x, fx, gx = x_new, f_new, g_new
            iteration += 1
            record = iteration_record(
                iter_offset + iteration, phase, ev.evals, [x], [fx], ev.best_f, None
            )
            history.append(record)
            if logger is not None:
                logger.write(record)
    except _Budget:
        termination = "maxfun"
    best_x = ev.best_x if ev.best_x is not None else x
    return OptResult(np.asarray(best_x), ev.best_f, ev.evals, termination, history)
