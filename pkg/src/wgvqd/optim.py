"""BFGS with a strong-Wolfe line search.

The line search is the bracketing/zoom scheme with safeguarded cubic
interpolation (Nocedal & Wright, Algorithms 3.5 and 3.6).
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class Status(str, enum.Enum):
    GRAD_CONVERGED = "GradConverged"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILED = "LineSearchFailed"


@dataclass(frozen=True)
class OptimizerConfig:
    grad_tol: float = 1e-8
    max_iters: int = 1000
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_linesearch_steps: int = 40
    initial_step: float = 1.0

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1 or self.max_linesearch_steps < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    cost: float
    grad_norm: float
    step: float


@dataclass
class OptimizationTrace:
    records: list = field(default_factory=list)
    status: Status = Status.MAX_ITERS
    n_fev: int = 0
    n_gev: int = 0

    @property
    def costs(self):
        return np.array([r.cost for r in self.records])

    @property
    def iterations(self):
        return max(len(self.records) - 1, 0)


class LineSearchError(RuntimeError):
    pass


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimiser of the cubic through (a, fa, ga) and (b, fb, gb), or None."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0 or not np.isfinite(disc):
        return None
    d2 = np.copysign(np.sqrt(disc), b - a)
    denom = gb - ga + 2.0 * d2
    if denom == 0:
        return None
    x = b - (b - a) * (gb + d2 - d1) / denom
    return x if np.isfinite(x) else None


def strong_wolfe(phi, phi0, dphi0, cfg, alpha1=1.0, alpha_max=1e10):
    """Step length satisfying the strong Wolfe conditions.

    Parameters
    ----------
    phi : callable
        ``alpha -> (value, directional derivative)``.
    phi0, dphi0 : float
        Value and slope at zero; ``dphi0`` must be negative.

    Returns
    -------
    alpha, value, extra
        ``extra`` is whatever ``phi`` returned as a third element at the
        accepted step, so callers can reuse gradients.
    """
    if not dphi0 < 0:
        raise LineSearchError("not a descent direction")
    c1, c2 = cfg.wolfe_c1, cfg.wolfe_c2
    budget = [cfg.max_linesearch_steps]

    def evaluate(alpha):
        if budget[0] <= 0:
            raise LineSearchError("line search step budget exhausted")
        budget[0] -= 1
        return phi(alpha)

    def zoom(lo, f_lo, g_lo, hi, f_hi, g_hi):
        for _ in range(cfg.max_linesearch_steps):
            width = hi - lo
            trial = _cubic_min(lo, f_lo, g_lo, hi, f_hi, g_hi)
            # keep the trial well inside the bracket, else bisect
            if trial is None or not (min(lo, hi) + 0.1 * abs(width)
                                     <= trial <= max(lo, hi) - 0.1 * abs(width)):
                trial = lo + 0.5 * width
            f_t, g_t, extra = evaluate(trial)
            if f_t > phi0 + c1 * trial * dphi0 or f_t >= f_lo:
                hi, f_hi, g_hi = trial, f_t, g_t
            else:
                if abs(g_t) <= -c2 * dphi0:
                    return trial, f_t, extra
                if g_t * (hi - lo) >= 0:
                    hi, f_hi, g_hi = lo, f_lo, g_lo
                lo, f_lo, g_lo = trial, f_t, g_t
            if abs(hi - lo) <= 1e-16 * max(1.0, abs(lo)):
                break
        raise LineSearchError("zoom failed to locate a Wolfe point")

    prev, f_prev, g_prev = 0.0, phi0, dphi0
    alpha = alpha1
    first = True
    while True:
        f_a, g_a, extra = evaluate(alpha)
        if not np.isfinite(f_a):
            # back off from a non-finite region
            alpha = 0.5 * (prev + alpha)
            continue
        if f_a > phi0 + c1 * alpha * dphi0 or (not first and f_a >= f_prev):
            return zoom(prev, f_prev, g_prev, alpha, f_a, g_a)
        if abs(g_a) <= -c2 * dphi0:
            return alpha, f_a, extra
        if g_a >= 0:
            return zoom(alpha, f_a, g_a, prev, f_prev, g_prev)
        prev, f_prev, g_prev = alpha, f_a, g_a
        alpha = min(2.0 * alpha, alpha_max)
        first = False


def minimize(f, g, x0, cfg=None, callback=None):
    """Minimise ``f`` with BFGS.

    Parameters
    ----------
    f, g : callable
        Cost and gradient of a parameter vector.
    x0 : array_like
    cfg : OptimizerConfig, optional
    callback : callable, optional
        Called with each accepted :class:`IterationRecord`.

    Returns
    -------
    x, fx, trace
        Best point, its cost, and the :class:`OptimizationTrace`.
    """
    cfg = cfg or OptimizerConfig()
    x = np.array(x0, dtype=float).ravel()
    trace = OptimizationTrace()
    fx = float(f(x))
    gx = np.asarray(g(x), dtype=float).ravel()
    trace.n_fev += 1
    trace.n_gev += 1
    if not np.isfinite(fx) or not np.all(np.isfinite(gx)):
        raise ValueError("cost or gradient is not finite at the starting point")

    dim = x.size
    h = np.eye(dim)
    fresh_h = True

    def record(it, step):
        rec = IterationRecord(it, fx, float(np.max(np.abs(gx))) if dim else 0.0, step)
        trace.records.append(rec)
        if callback is not None:
            callback(rec)

    record(0, 0.0)
    for it in range(1, cfg.max_iters + 1):
        if np.max(np.abs(gx)) <= cfg.grad_tol:
            trace.status = Status.GRAD_CONVERGED
            return x, fx, trace
        p = -h @ gx
        dphi0 = float(gx @ p)
        if not dphi0 < 0:
            # lost positive definiteness through round-off
            h = np.eye(dim)
            fresh_h = True
            p = -gx
            dphi0 = float(gx @ p)

        def phi(alpha, x=x, p=p):
            xt = x + alpha * p
            ft = float(f(xt))
            gt = np.asarray(g(xt), dtype=float).ravel()
            trace.n_fev += 1
            trace.n_gev += 1
            return ft, float(gt @ p), gt

        try:
            alpha, f_new, g_new = strong_wolfe(phi, fx, dphi0, cfg, cfg.initial_step)
        except LineSearchError as exc:
            if not fresh_h:
                logger.debug("line search failed (%s); resetting inverse Hessian", exc)
                h = np.eye(dim)
                fresh_h = True
                continue
            trace.status = Status.LINE_SEARCH_FAILED
            return x, fx, trace

        s = alpha * p
        y = g_new - gx
        x = x + s
        fx = f_new
        gx = g_new
        ys = float(y @ s)
        if ys > 1e-10 * np.linalg.norm(y) * np.linalg.norm(s):
            if fresh_h:
                h = np.eye(dim) * (ys / float(y @ y))
                fresh_h = False
            rho = 1.0 / ys
            hy = h @ y
            h = (h - rho * (np.outer(s, hy) + np.outer(hy, s))
                 + (rho * rho * float(y @ hy) + rho) * np.outer(s, s))
        record(it, alpha)

    trace.status = (Status.GRAD_CONVERGED if np.max(np.abs(gx)) <= cfg.grad_tol
                    else Status.MAX_ITERS)
    return x, fx, trace
