"""Lower and upper bounds on the N-boson ground-state energy.

All bounds act on the boson-reduced one-body problem

    beta sqrt(m^2 + lam p^2) + (coupling) r^2,
    beta = N, lam = (N - 1) / N, gam = N (N - 1),

whose ground energy follows from the kernel e(m) by scaling. Lower bounds
use the oscillator kernel directly (c r^2) or through tangent lines of a
convex g (envelope bound, maximised over the contact point t). Upper bounds
use a Gaussian trial state for the power family c sgn(q) r^q, minimised over
the Gaussian parameter mu. At m = 0 both sides have closed forms in the
first Airy zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import default_kernel
from .errors import BoundsError, BracketError, DomainError
from .optimize import OptimResult, maximize, minimize
from .potentials import audit_convexity, tangent_at
from .special import AIRY_FIRST_ZERO, gamma, scaled_exp_k1

__all__ = [
    "BoundPair",
    "BoundResult",
    "CouplingCheck",
    "CurveRow",
    "EnergyCurve",
    "SystemParams",
    "bounds_for",
    "check_coulomb_validity",
    "lower_bound_envelope",
    "lower_bound_oscillator",
    "scaled_one_body",
    "sweep_curve",
    "ultra_bounds",
    "upper_bound_variational",
]

log = logging.getLogger(__name__)

DEFAULT_OPT_TOL = 1e-10
_ORDER_SLACK = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Particle number and mass; the reduction constants are derived."""

    N: int
    m: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        if not (math.isfinite(self.m) and self.m >= 0):
            raise DomainError(f"m must be finite and >= 0, got {self.m!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "m", float(self.m))

    @property
    def beta(self):
        return float(self.N)

    @property
    def lam(self):
        return (self.N - 1) / self.N

    @property
    def gamma(self):
        return float(self.N * (self.N - 1))


@dataclass(frozen=True)
class BoundResult:
    kind: str  # "lower" | "upper"
    value: float
    optimizer: float | None = None
    diagnostics: OptimResult | None = None
    method: str = ""


@dataclass(frozen=True)
class BoundPair:
    """Matched bounds; either side may be None when no formula applies."""

    lower: BoundResult | None
    upper: BoundResult | None

    @property
    def midpoint(self):
        return 0.5 * (self.lower.value + self.upper.value)

    @property
    def spread(self):
        """(upper - lower) / midpoint."""
        return (self.upper.value - self.lower.value) / self.midpoint

    @property
    def gap_percent(self):
        return 100.0 * self.spread

    @property
    def midpoint_error_percent(self):
        """Largest relative error of the midpoint as an energy estimate, in %."""
        return 50.0 * self.spread


@dataclass(frozen=True)
class CouplingCheck:
    valid: bool
    margin: float


@dataclass(frozen=True)
class CurveRow:
    m: float
    lower: float | None
    upper: float | None
    status: str = "ok"

    @property
    def gap_percent(self):
        if self.lower is None or self.upper is None:
            return None
        return 100.0 * (self.upper - self.lower) / (0.5 * (self.upper + self.lower))


@dataclass(frozen=True)
class EnergyCurve:
    N: int
    potential: str
    rows: tuple[CurveRow, ...] = field(default_factory=tuple)

    @property
    def complete(self):
        return all(r.status == "ok" for r in self.rows)

    def gap_non_increasing(self, slack=1e-9):
        """Sampled check that the relative gap does not grow with m."""
        gaps = [r.gap_percent for r in self.rows if r.gap_percent is not None]
        return all(b <= a * (1 + slack) + 1e-12 for a, b in zip(gaps, gaps[1:]))


def _kernel(kernel):
    return default_kernel() if kernel is None else kernel


def scaled_one_body(m, beta, coupling, kernel=None):
    """Ground energy of beta sqrt(m^2 + p^2 lam) + G r^2, with G = gam*lam*coupling passed in.

    Equals (beta^2 G)^(1/3) e(m (beta / G)^(1/3)); at m = 0 this is
    (beta^2 G)^(1/3) e(0), so no 0/0 arises.
    """
    if not (beta > 0 and coupling > 0):
        raise DomainError("scale factors must be positive")
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m!r}")
    k = _kernel(kernel)
    nu = m * (beta / coupling) ** (1.0 / 3.0)
    return (beta * beta * coupling) ** (1.0 / 3.0) * k(nu)


def lower_bound_oscillator(p, c, kernel=None):
    """Lower bound for V(r) = c r^2 from the reduced one-body oscillator."""
    if not c > 0:
        raise DomainError(f"coupling c must be positive, got {c!r}")
    value = scaled_one_body(p.m, p.beta, p.gamma * p.lam * c, kernel)
    return BoundResult("lower", value, method="oscillator")


def _envelope_objective(p, spec, kernel):
    half_gamma = 0.5 * p.gamma

    def objective(t):
        line = tangent_at(spec, t)
        return scaled_one_body(p.m, p.beta, p.gamma * p.lam * line.b, kernel) + half_gamma * line.a

    return objective


def _require_convex(spec):
    known = spec.convex
    if known is False:
        raise DomainError(f"{spec.descriptor()}: lower bound requires convex g (q >= 2)")
    if known is None:
        audit_convexity(spec, strict=True)


def lower_bound_envelope(p, spec, kernel=None, opt_tol=DEFAULT_OPT_TOL, t_init=1.0):
    """Envelope lower bound for convex, increasing g, maximised over the contact point t."""
    _require_convex(spec)
    k = _kernel(kernel)
    res = maximize(_envelope_objective(p, spec, k), t_init, rel_tol=opt_tol)
    return BoundResult("lower", res.f_star, optimizer=res.x_star, diagnostics=res, method="envelope")


def check_coulomb_validity(p, c):
    """Existence condition (c/2) sqrt(N(N-1)/2) < 1 for the q = -1 upper bound."""
    if not c > 0:
        raise DomainError(f"coupling c must be positive, got {c!r}")
    strength = 0.5 * c * math.sqrt(p.N * (p.N - 1) / 2.0)
    margin = 1.0 - strength
    return CouplingCheck(valid=margin > 0, margin=margin)


def _variational_objective(p, c, q):
    beta, lam, gam, m = p.beta, p.lam, p.gamma, p.m
    sign = math.copysign(1.0, q)
    kin = beta * m / math.sqrt(2.0 * math.pi)
    pot = sign * c * gam / math.sqrt(math.pi) * gamma(0.5 * (3.0 + q))
    root_lam = math.sqrt(lam)

    def objective(mu):
        return kin * mu * scaled_exp_k1(0.25 * mu * mu) + pot * (mu * root_lam / m) ** q

    return objective


def upper_bound_variational(p, c, q, opt_tol=DEFAULT_OPT_TOL):
    """Gaussian-trial upper bound for V(r) = c sgn(q) r^q, minimised over mu.

    Requires m > 0 and q >= -1. Raises :class:`BracketError` when the
    minimum does not exist (q = -1 beyond the critical coupling).
    """
    if not p.m > 0:
        raise DomainError("the variational bound needs m > 0; use ultra_bounds at m = 0")
    if not c > 0:
        raise DomainError(f"coupling c must be positive, got {c!r}")
    if not q >= -1:
        raise DomainError(f"q must be >= -1, got {q!r}")
    if q == 0:
        raise DomainError("q = 0 is a constant potential")
    mu_init = p.m / (1.0 + p.m) ** 0.25
    try:
        res = minimize(_variational_objective(p, c, q), mu_init, rel_tol=opt_tol)
    except BracketError as exc:
        if q == -1:
            check = check_coulomb_validity(p, c)
            raise BracketError(
                f"no minimum: coupling condition (c/2)sqrt(N(N-1)/2) < 1 fails, "
                f"margin {check.margin:.6g}"
            ) from exc
        raise
    return BoundResult("upper", res.f_star, optimizer=res.x_star, diagnostics=res, method="gaussian")


def ultra_bounds(N, c, q):
    """Closed-form (lower, upper) at m = 0 for V(r) = c r^q, q >= 2."""
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N!r}")
    if not c > 0:
        raise DomainError(f"coupling c must be positive, got {c!r}")
    if not q >= 2:
        raise DomainError(f"closed-form bounds need q >= 2, got {q!r}")
    prefactor = (
        (0.5 * c * q) ** (1.0 / (1.0 + q))
        * (1.0 + 1.0 / q)
        * (N * (N - 1)) ** ((2.0 + q) / (2.0 * (1.0 + q)))
        * 2.0 ** (3.0 * q / (2.0 * (1.0 + q)))
    )
    lower = prefactor * (AIRY_FIRST_ZERO / 3.0) ** (3.0 * q / (2.0 * (1.0 + q)))
    upper = prefactor / math.sqrt(math.pi) * (2.0 * gamma(0.5 * (3.0 + q))) ** (1.0 / (1.0 + q))
    return lower, upper


def _relabel(exc, side):
    return type(exc)(f"{side} bound: {exc}")


def bounds_for(p, spec, kernel=None, tol=DEFAULT_OPT_TOL):
    """Dispatch to the applicable lower and upper bound formulas.

    - m = 0, power law with q >= 2: closed forms.
    - lower: oscillator kernel for q = 2, envelope for other convex g,
      none for power laws with q < 2.
    - upper: Gaussian trial for power laws (q >= -1), none for custom g.
    """
    if p.m == 0 and spec.is_power_law and spec.q >= 2:
        lo, up = ultra_bounds(p.N, spec.c, spec.q)
        return BoundPair(BoundResult("lower", lo, method="ultra"), BoundResult("upper", up, method="ultra"))

    lower = upper = None
    try:
        if spec.is_linear:
            lower = lower_bound_oscillator(p, spec.c, kernel)
        elif spec.convex is not False:
            lower = lower_bound_envelope(p, spec, kernel, opt_tol=tol)
    except BoundsError as exc:
        raise _relabel(exc, "lower") from exc
    if spec.is_power_law:
        if p.m == 0:
            raise DomainError("upper bound at m = 0 needs q >= 2")
        try:
            upper = upper_bound_variational(p, spec.c, spec.q, opt_tol=tol)
        except BoundsError as exc:
            raise _relabel(exc, "upper") from exc
    if lower is not None and upper is not None:
        if lower.value > upper.value * (1 + _ORDER_SLACK) + _ORDER_SLACK:
            raise BoundsError(f"lower bound {lower.value!r} exceeds upper bound {upper.value!r}")
    return BoundPair(lower, upper)


def sweep_curve(N, spec, kernel=None, m_grid=(0.0,), tol=DEFAULT_OPT_TOL):
    """Bounds for one N along an increasing mass grid; row failures are recorded."""
    grid = np.asarray(m_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("m_grid must be strictly increasing")
    k = _kernel(kernel)
    rows = []
    for m in grid:
        try:
            pair = bounds_for(SystemParams(N, float(m)), spec, k, tol)
        except BoundsError as exc:
            log.warning("N=%d m=%g: %s", N, m, exc)
            rows.append(CurveRow(float(m), None, None, status=f"error: {exc}"))
            continue
        rows.append(
            CurveRow(
                float(m),
                pair.lower.value if pair.lower else None,
                pair.upper.value if pair.upper else None,
            )
        )
    curve = EnergyCurve(N=int(N), potential=spec.descriptor(), rows=tuple(rows))
    if spec.is_power_law and not curve.gap_non_increasing():
        log.warning("N=%d %s: relative gap grows somewhere along m", N, spec.descriptor())
    return curve
