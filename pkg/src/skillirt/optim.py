"""Limited-memory BFGS for smooth unconstrained objectives.

Search directions come from the standard two-loop recursion over the last
``history_size`` curvature pairs; steps are accepted by a backtracking line
search on the Armijo condition with safeguarded quadratic interpolation.
A pair ``(s, y)`` is stored only when ``s.y > 1e-10 |s| |y|``, which keeps the
implicit inverse Hessian positive definite.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60
# predicted decrease, relative to |f|, too small to resolve in floating point
NOISE_FLOOR = 1e-11

GRADIENT_TOL = "gradient_tol"
OBJECTIVE_TOL = "objective_tol"
MAX_ITER = "max_iter"


class OptimizationError(RuntimeError):
    pass


class NonFiniteObjectiveError(OptimizationError):
    def __init__(self, iteration: int):
        super().__init__(f"objective or gradient not finite at iteration {iteration}")
        self.iteration = iteration


class LineSearchError(OptimizationError):
    def __init__(self, iteration: int):
        super().__init__(f"line search found no decrease at iteration {iteration}")
        self.iteration = iteration


@dataclass
class LBFGSOutcome:
    x: np.ndarray
    converged: bool
    iterations: int
    final_objective: float
    final_gradient_norm: float
    termination_reason: str
    objective_trace: list[float] = field(default_factory=list, repr=False)


def _two_loop(g, pairs, gamma):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * s.dot(q)
        alphas.append(a)
        q -= a * y
    q *= gamma
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * y.dot(q)
        q += (a - b) * s
    return -q


def minimize_lbfgs(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    *,
    max_iterations: int = 500,
    gradient_tolerance: float = 1e-5,
    objective_relative_tolerance: float = 1e-9,
    history_size: int = 10,
) -> LBFGSOutcome:
    """Minimise ``fun`` (returning value and gradient) from ``x0``.

    Stops when the gradient's infinity norm is at most ``gradient_tolerance``,
    when an accepted step lowers the objective by a relative amount
    ``(f_old - f_new) / max(|f_old|, |f_new|, 1)`` of at most
    ``objective_relative_tolerance``, or after ``max_iterations`` steps.
    Accepted objective values never increase.
    """
    if max_iterations < 1 or history_size < 1:
        raise ValueError("max_iterations and history_size must be >= 1")
    if not (gradient_tolerance > 0 and objective_relative_tolerance > 0):
        raise ValueError("tolerances must be positive")

    x = np.array(x0, dtype=np.float64)
    f, g = fun(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise NonFiniteObjectiveError(0)
    trace = [f]
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0

    def done(it, reason):
        return LBFGSOutcome(x, reason != MAX_ITER, it, f, gnorm, reason, trace)

    if gnorm <= gradient_tolerance:
        return done(0, GRADIENT_TOL)

    pairs: deque = deque(maxlen=history_size)
    for it in range(1, max_iterations + 1):
        restarted = False
        while True:
            if pairs:
                s, y, rho = pairs[-1]
                d = _two_loop(g, pairs, 1.0 / (rho * y.dot(y)))
            else:
                d = -g / max(1.0, float(np.linalg.norm(g)))
            gd = float(g.dot(d))
            if gd >= 0:
                pairs.clear()
                d = -g / max(1.0, float(np.linalg.norm(g)))
                gd = float(g.dot(d))

            step = 1.0
            accepted = False
            saw_finite = False
            for _ in range(MAX_BACKTRACKS):
                xn = x + step * d
                if np.array_equal(xn, x):
                    break
                fn, gn = fun(xn)
                if np.isfinite(fn) and np.all(np.isfinite(gn)):
                    saw_finite = True
                    if fn <= f + ARMIJO_C1 * step * gd:
                        accepted = True
                        break
                    denom = 2.0 * (fn - f - gd * step)
                    trial = -gd * step * step / denom if denom > 0 else 0.5 * step
                    step = min(max(trial, 0.1 * step), 0.5 * step)
                else:
                    step *= 0.5
            if accepted:
                break
            if not saw_finite:
                raise NonFiniteObjectiveError(it)
            if pairs and not restarted:
                log.debug("iteration %d: line search failed, dropping curvature memory", it)
                pairs.clear()
                restarted = True
                continue
            if -gd <= NOISE_FLOOR * max(1.0, abs(f)):
                # the best possible decrease is below rounding noise
                return done(it - 1, OBJECTIVE_TOL)
            raise LineSearchError(it)

        s = xn - x
        yv = gn - g
        sy = float(s.dot(yv))
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            pairs.append((s, yv, 1.0 / sy))
        rel = (f - fn) / max(abs(f), abs(fn), 1.0)
        x, f, g = xn, fn, gn
        trace.append(f)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= gradient_tolerance:
            return done(it, GRADIENT_TOL)
        if rel <= objective_relative_tolerance:
            return done(it, OBJECTIVE_TOL)
    return done(max_iterations, MAX_ITER)
