"""Bracketed golden-section search over a positive scale variable.

Both optimisation variables of the bounds (the contact point t and the
Gaussian parameter mu) are positive and scale-like, so the search runs in
log(x): a bracket is found by geometric expansion from ``x_init`` and then
narrowed by golden-section steps until its log-width is below ``rel_tol``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError, NonFiniteError

__all__ = ["OptimResult", "maximize", "minimize"]

log = logging.getLogger(__name__)

_GOLD = 0.5 * (1.0 + math.sqrt(5.0))
_INV_GOLD = 1.0 / _GOLD
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class OptimResult:
    x_star: float
    f_star: float
    evaluations: int
    converged: bool
    bracket: tuple[float, float]
    unimodal: bool = True


class _Counted:
    """Objective in log-space, counting calls and rejecting non-finite values."""

    def __init__(self, f, sign):
        self.f = f
        self.sign = sign
        self.calls = 0

    def __call__(self, s):
        self.calls += 1
        value = self.f(math.exp(s))
        if not math.isfinite(value):
            raise NonFiniteError(f"objective is {value} at x={math.exp(s):.6g}")
        return self.sign * value


def _bracket(fn, s0, step, max_decades):
    """Find a < b < c with fn(b) >= fn(a), fn(c); fn is maximised."""
    limit = max_decades * _LN10
    a, b = s0 - step, s0
    fa, fb = fn(a), fn(b)
    c = s0 + step
    fc = fn(c)
    if fb >= fa and fb >= fc:
        return (a, fa), (b, fb), (c, fc)
    if fa > fc:
        # walk left: relabel so that the walk always goes from a through b to c
        a, fa, c, fc = c, fc, a, fa
    # now fc > fb: expand towards c
    a, fa, b, fb = b, fb, c, fc
    while True:
        c = b + _GOLD * (b - a)
        if abs(c - s0) > limit:
            raise BracketError(
                f"no interior extremum within {max_decades} decades of x={math.exp(s0):.6g}"
            )
        fc = fn(c)
        if fc <= fb:
            break
        a, fa, b, fb = b, fb, c, fc
    if a > c:
        a, fa, c, fc = c, fc, a, fa
    return (a, fa), (b, fb), (c, fc)


def _golden(fn, a, b, c, fb, tol):
    """Golden-section refinement of a bracket (a, b, c), maximising fn."""
    x0, x3 = a, c
    if abs(c - b) > abs(b - a):
        x1, f1 = b, fb
        x2 = b + (1.0 - _INV_GOLD) * (c - b)
        f2 = fn(x2)
    else:
        x2, f2 = b, fb
        x1 = b - (1.0 - _INV_GOLD) * (b - a)
        f1 = fn(x1)
    while abs(x3 - x0) > tol:
        if f2 > f1:
            x0, x1, x2 = x1, x2, _INV_GOLD * x2 + (1.0 - _INV_GOLD) * x3
            f1, f2 = f2, fn(x2)
        else:
            x3, x2, x1 = x2, x1, _INV_GOLD * x1 + (1.0 - _INV_GOLD) * x0
            f2, f1 = f1, fn(x1)
    if f1 >= f2:
        return x0, x1, f1, x3
    return x0, x2, f2, x3


def _is_unimodal(values, noise):
    """True if values rise then fall (up to ``noise``), i.e. one interior hump."""
    diffs = np.diff(values)
    peak = int(np.argmax(values))
    return bool(np.all(diffs[:peak] >= -noise) and np.all(diffs[peak:] <= noise))


def _search(f, x_init, rel_tol, sign, max_decades, step, audit):
    x_init = float(x_init)
    if not (math.isfinite(x_init) and x_init > 0):
        raise DomainError(f"x_init must be positive, got {x_init!r}")
    if not rel_tol > 0:
        raise DomainError("rel_tol must be positive")
    fn = _Counted(f, sign)
    (a, _), (b, fb), (c, _) = _bracket(fn, math.log(x_init), step, max_decades)
    lo, s_star, f_best, hi = _golden(fn, a, b, c, fb, rel_tol)

    unimodal = True
    converged = lo < s_star < hi
    if audit:
        noise = 1e-12 * max(abs(f_best), 1e-300)
        for s in (s_star - 10 * rel_tol, s_star + 10 * rel_tol):
            if fn(s) > f_best + noise:
                converged = False
        grid = np.linspace(s_star - 0.5 * _LN10, s_star + 0.5 * _LN10, 64)
        unimodal = _is_unimodal(np.array([fn(s) for s in grid]), noise)
        if not unimodal:
            log.warning("objective looks multimodal near x=%.6g", math.exp(s_star))
    return OptimResult(
        x_star=math.exp(s_star),
        f_star=sign * f_best,
        evaluations=fn.calls,
        converged=converged,
        bracket=(math.exp(lo), math.exp(hi)),
        unimodal=unimodal,
    )


def maximize(f, x_init, rel_tol=1e-10, max_decades=100, step=0.5, audit=True):
    """Maximise ``f`` over x > 0 starting from ``x_init``.

    Parameters
    ----------
    f : callable
        Objective, finite on (0, inf) and assumed unimodal.
    x_init : float
        Starting point of the geometric bracket search.
    rel_tol : float
        Final bracket width in log(x), i.e. relative width in x.
    max_decades : float
        How far (in decades, each direction) the bracket search may walk.
    step : float
        Initial bracket half-width in log(x).
    audit : bool
        Run the local optimality and unimodality audits.

    Raises
    ------
    BracketError
        If ``f`` keeps increasing over the whole search range.
    NonFiniteError
        If ``f`` returns nan or inf.
    """
    return _search(f, x_init, rel_tol, 1.0, max_decades, step, audit)


def minimize(f, x_init, rel_tol=1e-10, max_decades=100, step=0.5, audit=True):
    """Minimise ``f`` over x > 0; mirror image of :func:`maximize`."""
    return _search(f, x_init, rel_tol, -1.0, max_decades, step, audit)
