"""Pair potentials of the form V(r) = g(r^2) and their tangent lines.

For convex, increasing g the line ``a(t) + b(t) s`` tangent to g at s = t
lies below g everywhere, so ``a(t) + b(t) r^2`` is a shifted oscillator
under V(r). The power family ``c sgn(q) r^q`` is the concrete instance used
throughout; arbitrary g may be supplied together with its derivative.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConvexityError, DomainError

__all__ = [
    "PotentialSpec",
    "TangentLine",
    "audit_convexity",
    "custom_potential",
    "parse_potential",
    "power_law",
    "tangent_at",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Transformation g with explicit derivative; V(r) = g(r^2)."""

    g: Callable[[float], float] = field(repr=False)
    g_prime: Callable[[float], float] = field(repr=False)
    kind: str = "custom"
    c: float | None = None
    q: float | None = None
    label: str = "custom"

    @property
    def is_power_law(self):
        return self.kind == "power"

    @property
    def is_linear(self):
        """True for the oscillator c r^2, where every tangent is g itself."""
        return self.is_power_law and self.q == 2

    @property
    def convex(self):
        """Known convexity for power laws; None for custom specs (audit instead)."""
        if self.is_power_law:
            return self.q >= 2
        return None

    def potential(self, r):
        return self.g(r * r)

    def descriptor(self):
        if self.is_power_law:
            return f"power:c={self.c!r},q={self.q!r}"
        return self.label


@dataclass(frozen=True)
class TangentLine:
    """Line a + b s touching g at s = t."""

    t: float
    a: float
    b: float

    def __call__(self, s):
        return self.a + self.b * s


def power_law(c, q):
    """Potential V(r) = c sgn(q) r^q, i.e. g(t) = c sgn(q) t^(q/2).

    g is increasing for every q != 0 and convex exactly when q >= 2.
    """
    c = float(c)
    q = float(q)
    if not (math.isfinite(c) and c > 0):
        raise DomainError(f"coupling c must be positive, got {c!r}")
    if not math.isfinite(q) or q == 0:
        raise DomainError(f"exponent q must be finite and nonzero, got {q!r}")
    sign = math.copysign(1.0, q)
    half = 0.5 * q

    def g(t):
        return c * sign * t**half

    def g_prime(t):
        return c * sign * half * t ** (half - 1.0)

    return PotentialSpec(g=g, g_prime=g_prime, kind="power", c=c, q=q, label=f"power:c={c!r},q={q!r}")


def custom_potential(g, g_prime, label="custom", audit=True):
    """Wrap a user transformation; optionally run the convexity audit right away."""
    spec = PotentialSpec(g=g, g_prime=g_prime, label=label)
    if audit:
        audit_convexity(spec, strict=True)
    return spec


def tangent_at(spec, t):
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"contact point t must be positive, got {t!r}")
    slope = spec.g_prime(t)
    return TangentLine(t=t, a=spec.g(t) - t * slope, b=slope)


def audit_convexity(spec, t_min=1e-4, t_max=1e4, samples=400, strict=False):
    """Sampled check that g' > 0 and g'' >= 0 on a log grid.

    Returns True when the checks pass. With ``strict=True`` a failure raises
    :class:`ConvexityError` instead. Passing is evidence, not proof.
    """
    t = np.geomspace(t_min, t_max, samples)
    g = np.array([spec.g(v) for v in t])
    gp = np.array([spec.g_prime(v) for v in t])
    problems = []
    if not np.all(np.isfinite(g)) or not np.all(np.isfinite(gp)):
        problems.append("non-finite values")
    elif np.any(gp <= 0):
        problems.append(f"g' <= 0 at t={t[np.argmax(gp <= 0)]:.3g}")
    else:
        scale = np.maximum(np.abs(gp[1:]), np.abs(gp[:-1]))
        if np.any(np.diff(gp) < -1e-10 * scale):
            problems.append("g' decreases (g'' < 0)")
        # secant slopes of g must not decrease either
        secant = np.diff(g) / np.diff(t)
        if np.any(np.diff(secant) < -1e-8 * np.abs(secant[1:])):
            problems.append("secant slopes of g decrease")
    if problems and strict:
        raise ConvexityError(f"{spec.descriptor()}: " + "; ".join(problems))
    return not problems


_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_POWER_RE = re.compile(rf"^power:c=(?P<c>{_NUMBER}),q=(?P<q>{_NUMBER})$")


def parse_potential(text):
    """Parse ``power:c=<real>,q=<real>``; q may be a fraction such as 5/2."""
    match = _POWER_RE.match(text.replace(" ", ""))
    if not match:
        raise DomainError(f"unrecognised potential {text!r}; expected power:c=<real>,q=<real>")
    c, q = (float(Fraction(match[k])) if "/" in match[k] else float(match[k]) for k in ("c", "q"))
    return power_law(c, q)
