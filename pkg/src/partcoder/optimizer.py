"""Batch minimizers: L-BFGS with a strong-Wolfe line search, plus a
fixed-step gradient-descent fallback.

The L-BFGS direction comes from the standard two-loop recursion over a short
(s, y) history with gamma = s.y / y.y initial scaling. Steps must satisfy the
strong Wolfe conditions; the line search brackets and then zooms with cubic
interpolation, falling back to plain Armijo backtracking once before giving
up. Everything is deterministic: same objective, start point and config give
a bitwise identical trace.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OptimizationError


class Mode(enum.Enum):
    LBFGS = "lbfgs"
    FIXED_STEP_GD = "fixed-step-gd"


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    LINE_SEARCH_FAILURE = "line-search-failure"


@dataclass(frozen=True)
class OptimizerConfig:
    memory: int = 20
    max_iterations: int = 400
    tolerance: float = 1e-9
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    mode: Mode = Mode.LBFGS
    eta: float = 0.1                  # fixed-step learning rate
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.memory < 1:
            raise ConfigError("memory must be >= 1")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.tolerance <= 0.0:
            raise ConfigError("tolerance must be > 0")
        if not (0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0):
            raise ConfigError("require 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.mode is Mode.FIXED_STEP_GD and self.eta <= 0.0:
            raise ConfigError("eta must be > 0 for fixed-step descent")


@dataclass
class OptimizerReport:
    final_cost: float
    iterations_used: int
    gradient_norm: float
    cost_trace: list = field(default_factory=list)
    termination: Termination = Termination.CONVERGED
    evaluations: int = 0


def _rel_change(f_old, f_new):
    return abs(f_old - f_new) / max(1.0, abs(f_old))


class _CountedObjective:
    def __init__(self, objective):
        self.objective = objective
        self.evaluations = 0

    def __call__(self, x):
        self.evaluations += 1
        f, g = self.objective(x)
        return float(f), np.asarray(g, dtype=np.float64)


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db).

    Returns None when the interpolation is degenerate or lands outside (a, b).
    """
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    radicand = d1 * d1 - da * db
    if radicand < 0.0:
        return None
    d2 = np.sign(b - a) * np.sqrt(radicand)
    denom = db - da + 2.0 * d2
    if denom == 0.0:
        return None
    t = b - (b - a) * (db + d2 - d1) / denom
    lo, hi = min(a, b), max(a, b)
    if not np.isfinite(t) or t <= lo or t >= hi:
        return None
    return t


def _zoom(phi, a_lo, f_lo, d_lo, a_hi, f_hi, d_hi, f0, d0, c1, c2, max_steps=30):
    """Strong-Wolfe zoom stage on a bracketing interval."""
    for _ in range(max_steps):
        a_j = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
        width = abs(a_hi - a_lo)
        lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
        if a_j is None or a_j < lo + 0.1 * width or a_j > hi - 0.1 * width:
            a_j = 0.5 * (a_lo + a_hi)
        f_j, d_j, g_j = phi(a_j)
        if f_j > f0 + c1 * a_j * d0 or f_j >= f_lo:
            a_hi, f_hi, d_hi = a_j, f_j, d_j
        else:
            if abs(d_j) <= -c2 * d0:
                return a_j, f_j, g_j
            if d_j * (a_hi - a_lo) >= 0.0:
                a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
            a_lo, f_lo, d_lo = a_j, f_j, d_j
        if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_hi)):
            break
    return None


def _wolfe_line_search(obj, x, f0, g0, d, alpha0, c1, c2, max_expand=20):
    """Find alpha satisfying the strong Wolfe conditions along d.

    Returns (alpha, f_new, g_new) or None on failure. obj is the counted
    objective; phi caches the gradient of its last evaluation.
    """
    d0 = float(np.dot(g0, d))
    if d0 >= 0.0:
        return None

    def phi(a):
        f, g = obj(x + a * d)
        return f, float(np.dot(g, d)), g

    a_prev, f_prev, d_prev = 0.0, f0, d0
    a_i = alpha0
    for i in range(max_expand):
        f_i, d_i, g_i = phi(a_i)
        if not np.isfinite(f_i):
            # step overshot into a non-finite region; treat as a bracket
            result = _zoom(phi, a_prev, f_prev, d_prev, a_i, np.inf, 0.0,
                           f0, d0, c1, c2)
            return result
        if f_i > f0 + c1 * a_i * d0 or (i > 0 and f_i >= f_prev):
            return _zoom(phi, a_prev, f_prev, d_prev, a_i, f_i, d_i,
                         f0, d0, c1, c2)
        if abs(d_i) <= -c2 * d0:
            return a_i, f_i, g_i
        if d_i >= 0.0:
            return _zoom(phi, a_i, f_i, d_i, a_prev, f_prev, d_prev,
                         f0, d0, c1, c2)
        a_prev, f_prev, d_prev = a_i, f_i, d_i
        a_i = min(2.0 * a_i, 1e10)
    return None


def _armijo_backtrack(obj, x, f0, g0, d, c1, max_halvings=30):
    """Plain Armijo backtracking, used once as a last resort."""
    d0 = float(np.dot(g0, d))
    if d0 >= 0.0:
        return None
    alpha = 1.0
    for _ in range(max_halvings):
        f_new, g_new = obj(x + alpha * d)
        if np.isfinite(f_new) and f_new <= f0 + c1 * alpha * d0:
            return alpha, f_new, g_new
        alpha *= 0.5
    return None


def _two_loop_direction(g, s_hist, y_hist, rho_hist):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        gamma = float(np.dot(s, y)) / float(np.dot(y, y))
        q *= gamma
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += s * (a - b)
    return -q


def minimize(objective, x0, cfg=None, callback=None):
    """Minimize objective(x) -> (cost, grad) from x0.

    Dispatches on cfg.mode. For L-BFGS every accepted step satisfies the
    strong Wolfe conditions; terminates when the relative cost change or the
    infinity norm of the gradient drops below cfg.tolerance, at the iteration
    cap, or on an irrecoverable line search (best iterate returned).

    callback, when given, is invoked per iteration with
    (iteration, x, cost, grad, direction) before the step is taken.

    Returns (x_star, OptimizerReport).
    """
    cfg = cfg or OptimizerConfig()
    if cfg.mode is Mode.FIXED_STEP_GD:
        return fixed_step_descent(objective, x0, cfg, callback=callback)

    obj = _CountedObjective(objective)
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = obj(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError("objective is not finite at the start point")

    trace = [f]
    s_hist, y_hist, rho_hist = [], [], []
    termination = Termination.MAX_ITERATIONS
    iterations = 0

    if float(np.max(np.abs(g))) < cfg.tolerance:
        termination = Termination.CONVERGED
    else:
        for it in range(1, cfg.max_iterations + 1):
            d = _two_loop_direction(g, s_hist, y_hist, rho_hist)
            if float(np.dot(g, d)) >= 0.0:
                # defective curvature history; restart from steepest descent
                s_hist, y_hist, rho_hist = [], [], []
                d = -g
            if callback is not None:
                callback(it, x, f, g, d)

            alpha0 = 1.0 if s_hist else min(1.0, 1.0 / float(np.sum(np.abs(g))))
            found = _wolfe_line_search(obj, x, f, g, d, alpha0,
                                       cfg.wolfe_c1, cfg.wolfe_c2)
            if found is None:
                found = _armijo_backtrack(obj, x, f, g, d, cfg.wolfe_c1)
            if found is None:
                termination = Termination.LINE_SEARCH_FAILURE
                iterations = it - 1
                break

            alpha, f_new, g_new = found
            step = alpha * d
            s = step
            y = g_new - g
            sy = float(np.dot(s, y))
            if sy > 1e-10:
                s_hist.append(s)
                y_hist.append(y)
                rho_hist.append(1.0 / sy)
                if len(s_hist) > cfg.memory:
                    s_hist.pop(0)
                    y_hist.pop(0)
                    rho_hist.pop(0)

            x = x + step
            f_old, f = f, f_new
            g = g_new
            trace.append(f)
            iterations = it

            if _rel_change(f_old, f) < cfg.tolerance or \
                    float(np.max(np.abs(g))) < cfg.tolerance:
                termination = Termination.CONVERGED
                break
            if cfg.max_evaluations is not None and \
                    obj.evaluations >= cfg.max_evaluations:
                termination = Termination.MAX_ITERATIONS
                break

    report = OptimizerReport(
        final_cost=f,
        iterations_used=iterations,
        gradient_norm=float(np.max(np.abs(g))),
        cost_trace=trace,
        termination=termination,
        evaluations=obj.evaluations,
    )
    return x, report


def fixed_step_descent(objective, x0, cfg, callback=None):
    """Plain gradient descent x <- x - eta * grad, with a divergence guard.

    Aborts with OptimizationError after 10 consecutive cost increases.
    """
    if cfg.mode is not Mode.FIXED_STEP_GD:
        raise ConfigError("fixed_step_descent requires mode=FIXED_STEP_GD")
    obj = _CountedObjective(objective)
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = obj(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError("objective is not finite at the start point")

    trace = [f]
    termination = Termination.MAX_ITERATIONS
    iterations = 0
    increases = 0

    if float(np.max(np.abs(g))) < cfg.tolerance:
        termination = Termination.CONVERGED
    else:
        for it in range(1, cfg.max_iterations + 1):
            if callback is not None:
                callback(it, x, f, g, -g)
            x = x - cfg.eta * g
            f_old, (f, g) = f, obj(x)
            trace.append(f)
            iterations = it
            if not np.isfinite(f):
                raise OptimizationError(
                    f"objective became non-finite at iteration {it}"
                )
            increases = increases + 1 if f > f_old else 0
            if increases >= 10:
                raise OptimizationError(
                    f"diverging: cost increased for {increases} consecutive "
                    f"steps (eta={cfg.eta}, last cost {f:.6g})"
                )
            if _rel_change(f_old, f) < cfg.tolerance or \
                    float(np.max(np.abs(g))) < cfg.tolerance:
                termination = Termination.CONVERGED
                break

    report = OptimizerReport(
        final_cost=f,
        iterations_used=iterations,
        gradient_norm=float(np.max(np.abs(g))),
        cost_trace=trace,
        termination=termination,
        evaluations=obj.evaluations,
    )
    return x, report
