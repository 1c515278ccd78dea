"""One-body oscillator kernel e(m).

e(m) is the ground-state energy of sqrt(m^2 + p^2) + r^2. In momentum space
this is the Schrodinger problem -Laplacian + sqrt(m^2 + r^2), whose s-wave
reduction is

    -u''(r) + sqrt(m^2 + r^2) u(r) = e u(r),    u(0) = 0.

The solver works with the excitation eps = e - m and the cancellation-free
potential w(r) = r^2 / (sqrt(m^2 + r^2) + m). Numerov outward shooting
provides the node count (bracketing) and the end-point amplitude (Brent
refinement); two grid resolutions are combined by Richardson extrapolation.

Tabulated values are wrapped in :class:`KernelFunction`, a monotone cubic
Hermite interpolant of e(m) - m whose node slopes come from the
Feynman-Hellmann derivative de/dm = <m / sqrt(m^2 + r^2)>.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numba import njit
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import ConfigurationError, ConvergenceError, DomainError
from .special import AIRY_FIRST_ZERO

__all__ = [
    "EigensolveConfig",
    "EigenSolution",
    "KernelFunction",
    "build_kernel",
    "default_kernel",
    "default_mass_grid",
    "kernel_eval",
    "load_kernel",
    "nonrelativistic_energy",
    "save_kernel",
    "solve_e",
    "solve_state",
]

log = logging.getLogger(__name__)

CACHE_FORMAT = "salpeter-kernel v1"

# Leading relativistic correction: e - m = 3/sqrt(2m) - 15/(16 m^2) + O(m^-7/2).
_NR_SECOND_ORDER = -15.0 / 16.0
_RICHARDSON_ORDER = 4  # Numerov global error is O(h^4)


@njit(cache=True)
def _shoot(eps, m, h, n):
    """Numerov outward integration; returns (sign changes, u(r_max))."""
    h12 = h * h / 12.0
    u0 = 0.0
    u1 = h
    r = h
    f0 = 1.0 + h12 * eps
    f1 = 1.0 - h12 * (r * r / (math.sqrt(m * m + r * r) + m) - eps)
    nodes = 0
    for i in range(2, n + 1):
        r = i * h
        f2 = 1.0 - h12 * (r * r / (math.sqrt(m * m + r * r) + m) - eps)
        u2 = ((12.0 - 10.0 * f1) * u1 - f0 * u0) / f2
        if (u2 < 0.0) != (u1 < 0.0):
            nodes += 1
        if abs(u2) > 1e250:
            u2 *= 1e-250
            u1 *= 1e-250
        u0 = u1
        u1 = u2
        f0 = f1
        f1 = f2
    return nodes, u1


@njit(cache=True)
def _wavefunction(eps, m, h, n):
    h12 = h * h / 12.0
    u = np.zeros(n + 1)
    u[1] = h
    f0 = 1.0 + h12 * eps
    r = h
    f1 = 1.0 - h12 * (r * r / (math.sqrt(m * m + r * r) + m) - eps)
    for i in range(2, n + 1):
        r = i * h
        f2 = 1.0 - h12 * (r * r / (math.sqrt(m * m + r * r) + m) - eps)
        u[i] = ((12.0 - 10.0 * f1) * u[i - 1] - f0 * u[i - 2]) / f2
        f0 = f1
        f1 = f2
    return u


@dataclass(frozen=True)
class EigensolveConfig:
    """Discretization settings for :func:`solve_e`.

    ``r_max=None`` selects the mass-dependent radius ``12 + 4 m^(1/3)``.
    """

    r_max: float | None = None
    grid_points: int = 20000
    tol_energy: float = 1e-8
    max_bisections: int = 200
    tail_threshold: float = 1e-6
    max_refinements: int = 3

    def __post_init__(self):
        if self.r_max is not None and not self.r_max > 0:
            raise ConfigurationError(f"r_max must be positive, got {self.r_max}")
        if self.grid_points < 1000:
            raise ConfigurationError("grid_points must be at least 1000")
        if not self.tol_energy > 0:
            raise ConfigurationError("tol_energy must be positive")
        if self.max_bisections < 1:
            raise ConfigurationError("max_bisections must be positive")

    def radius(self, m):
        if self.r_max is not None:
            return float(self.r_max)
        return 12.0 + 4.0 * m ** (1.0 / 3.0)

    def digest(self):
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EigenSolution:
    """Ground state of the reduced radial problem at one mass."""

    m: float
    energy: float
    error: float
    slope: float
    r_max: float
    grid_points: int
    nodes: int


def nonrelativistic_energy(m):
    """Large-mass asymptote m + 3 / sqrt(2 m)."""
    return m + 3.0 / math.sqrt(2.0 * m)


def _check_mass(m):
    m = float(m)
    if not math.isfinite(m) or m < 0.0:
        raise DomainError(f"mass must be finite and >= 0, got {m!r}")
    return m


def _ground_excitation(m, r_max, n, max_bisections):
    h = r_max / n
    lo = 0.0
    hi = AIRY_FIRST_ZERO if m == 0.0 else min(AIRY_FIRST_ZERO, 3.0 / math.sqrt(2.0 * m))
    hi *= 1.01
    steps = 0
    nodes_hi = _shoot(hi, m, h, n)[0]
    while nodes_hi == 0:
        lo, hi = hi, 2.0 * hi
        nodes_hi = _shoot(hi, m, h, n)[0]
        steps += 1
        if steps > max_bisections:
            raise ConvergenceError(f"could not bracket ground state at m={m}")
    while nodes_hi > 1:
        mid = 0.5 * (lo + hi)
        nodes_mid = _shoot(mid, m, h, n)[0]
        if nodes_mid == 0:
            lo = mid
        else:
            hi, nodes_hi = mid, nodes_mid
        steps += 1
        if steps > max_bisections:
            raise ConvergenceError(f"node-count bisection failed at m={m}")
    eps, info = brentq(
        lambda x: _shoot(x, m, h, n)[1],
        lo,
        hi,
        xtol=1e-15,
        rtol=4 * np.finfo(float).eps,
        maxiter=max_bisections,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise ConvergenceError(f"eigenvalue refinement failed at m={m}: {info.flag}")
    return eps


def _tail_amplitude(eps, m, r_max):
    """WKB decay factor exp(-int sqrt(w - eps) dr) from the turning point to r_max."""
    r = np.linspace(0.0, r_max, 4001)
    kappa2 = r * r / (np.hypot(m, r) + m) - eps if m > 0 else r - eps
    if kappa2[-1] <= 0.0:
        return 1.0
    kappa = np.sqrt(np.clip(kappa2, 0.0, None))
    kappa[r < r[np.argmax(kappa2 > 0)]] = 0.0
    return math.exp(-simpson(kappa, x=r))


def _inspect_state(eps, m, r_max, n):
    """Interior node count and Feynman-Hellmann slope de/dm of the ground state.

    Outward integration picks up the growing solution past the decay region,
    so the eigenfunction is cut at the first minimum of |u| after its peak.
    """
    h = r_max / n
    u = _wavefunction(eps, m, h, n)
    slope_sign = np.diff(np.abs(u))
    falling = np.nonzero(slope_sign < 0)[0]
    peak = int(falling[0]) if falling.size else n
    rising = np.nonzero(slope_sign[peak:] > 0)[0]
    cut = peak + int(rising[0]) + 1 if rising.size else n + 1
    u = u[:cut]
    body = u[1:][np.abs(u[1:]) > 1e-6 * abs(u[peak])]
    nodes = int(np.count_nonzero(np.diff(np.sign(body))))
    r = h * np.arange(cut)
    if m == 0.0:
        return nodes, 0.0
    dens = u * u
    slope = simpson(dens * (m / np.sqrt(m * m + r * r)), x=r) / simpson(dens, x=r)
    return nodes, float(slope)


def solve_state(m, cfg=None):
    """Solve the reduced radial problem at mass ``m``; see :func:`solve_e`."""
    m = _check_mass(m)
    cfg = cfg or EigensolveConfig()
    r_max = cfg.radius(m)
    n = cfg.grid_points
    eps_guess = AIRY_FIRST_ZERO if m == 0.0 else min(AIRY_FIRST_ZERO, 3.0 / math.sqrt(2.0 * m))
    tail = _tail_amplitude(eps_guess, m, r_max)
    if tail > cfg.tail_threshold:
        raise ConfigurationError(
            f"r_max={r_max:g} too small at m={m:g}: estimated boundary amplitude {tail:.2e}"
        )
    coarse = _ground_excitation(m, r_max, n // 2, cfg.max_bisections)
    for _ in range(cfg.max_refinements + 1):
        fine = _ground_excitation(m, r_max, n, cfg.max_bisections)
        correction = (fine - coarse) / (2**_RICHARDSON_ORDER - 1)
        error = abs(correction) + 64 * np.finfo(float).eps * (m + fine)
        if error <= cfg.tol_energy:
            break
        coarse, n = fine, 2 * n
    else:
        raise ConvergenceError(
            f"e({m:g}) did not reach tol_energy={cfg.tol_energy:g} (estimate {error:.2e})"
        )
    eps = fine + correction
    nodes, slope = _inspect_state(fine, m, r_max, n)
    return EigenSolution(
        m=m,
        energy=m + eps,
        error=float(error),
        slope=slope,
        r_max=r_max,
        grid_points=n,
        nodes=nodes,
    )


def solve_e(m, cfg=None):
    """Lowest eigenvalue e(m) of -u'' + sqrt(m^2 + r^2) u = e u, u(0) = 0.

    Parameters
    ----------
    m : float
        Particle mass, m >= 0.
    cfg : EigensolveConfig, optional
        Discretization settings; defaults give an absolute error near 1e-11.

    Raises
    ------
    DomainError
        If ``m`` is negative or not finite.
    ConvergenceError
        If the ground state cannot be bracketed or refined.
    ConfigurationError
        If the eigenfunction has not decayed well before ``r_max``.
    """
    return solve_state(m, cfg).energy


def default_mass_grid():
    return np.concatenate(([0.0], np.geomspace(0.01, 1e4, 29)))


@dataclass(frozen=True)
class KernelFunction:
    """Tabulated e(m) with a shape-preserving interpolant.

    d(m) = e(m) - m is interpolated by cubic Hermite segments in the
    variable x = log(1 + m), using the exact node slopes; in x the large-mass
    decay 3/sqrt(2m) is nearly exponential and needs few nodes. Above the
    last node the asymptotic form ``m + 3/sqrt(2m) - 15/(16 m^2) + B m^(-7/2)``
    is used, with B fixed by continuity at the last node.
    """

    masses: np.ndarray
    energies: np.ndarray
    slopes: np.ndarray
    errors: np.ndarray
    config: EigensolveConfig = field(default_factory=EigensolveConfig)
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)
    _tail_coef: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arrays = {}
        for name in ("masses", "energies", "slopes", "errors"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        m = arrays["masses"]
        if m.ndim != 1 or m.size < 2:
            raise DomainError("a kernel needs at least two mass nodes")
        if np.any(np.diff(m) <= 0) or m[0] < 0:
            raise DomainError("mass nodes must be non-negative and strictly increasing")
        d = arrays["energies"] - m
        spline = CubicHermiteSpline(
            np.log1p(m), d, (arrays["slopes"] - 1.0) * (1.0 + m), extrapolate=False
        )
        object.__setattr__(self, "_spline", spline)
        m_last, d_last = m[-1], d[-1]
        if m_last > 0:
            resid = d_last - 3.0 / math.sqrt(2.0 * m_last) - _NR_SECOND_ORDER / m_last**2
            tail_coef = resid * m_last**3.5
        else:
            tail_coef = 0.0
        object.__setattr__(self, "_tail_coef", tail_coef)

    @property
    def m_max(self):
        return float(self.masses[-1])

    def is_extrapolated(self, m):
        return np.asarray(m) > self.m_max

    def _tail(self, m):
        return m + 3.0 / np.sqrt(2.0 * m) + _NR_SECOND_ORDER / m**2 + self._tail_coef / m**3.5

    def __call__(self, m):
        m_arr = np.asarray(m, dtype=float)
        if np.any(~np.isfinite(m_arr)) or np.any(m_arr < 0):
            raise DomainError("kernel arguments must be finite and >= 0")
        inside = m_arr <= self.m_max
        out = np.empty_like(m_arr)
        out[inside] = m_arr[inside] + self._spline(np.log1p(m_arr[inside]))
        outside = ~inside
        if np.any(outside):
            out[outside] = self._tail(m_arr[outside])
        if out.ndim == 0:
            return float(out)
        return out

    def monotonicity_audit(self, samples=1000):
        """True if e(m) increases and e(m) - m decreases on a dense sample."""
        m = np.unique(
            np.concatenate(
                (np.linspace(0, self.m_max, samples), np.geomspace(1e-6, 4 * self.m_max, samples))
            )
        )
        e = self(m)
        return bool(np.all(np.diff(e) > 0) and np.all(np.diff(e - m) < 0))


def _segment(sa, sb):
    """Hermite data (x0, x1, d0, d1, s0, s1) of one interval in x = log(1 + m)."""
    return (
        math.log1p(sa.m),
        math.log1p(sb.m),
        sa.energy - sa.m,
        sb.energy - sb.m,
        (sa.slope - 1.0) * (1.0 + sa.m),
        (sb.slope - 1.0) * (1.0 + sb.m),
    )


def _hermite_midpoint(x0, x1, d0, d1, s0, s1):
    return 0.5 * (d0 + d1) + 0.125 * (x1 - x0) * (s0 - s1)


def _segment_monotone(x0, x1, d0, d1, s0, s1):
    """d decreasing (Fritsch-Carlson) and e = expm1(x) + d increasing on the segment."""
    h = x1 - x0
    secant = (d1 - d0) / h
    if not secant < 0.0:
        return False
    a, b = s0 / secant, s1 / secant
    if min(a, b) < 0.0 or a * a + b * b > 9.0:
        return False
    # e'(m) = 1 + p'(x) exp(-x) >= 0, checked on a dense sample of the segment;
    # equality is allowed for e'(0) = 0.
    t = np.linspace(0.0, 1.0, 65)
    dp_dt = (6 * t * t - 6 * t) * (d0 - d1) + h * ((3 * t * t - 4 * t + 1) * s0 + (3 * t * t - 2 * t) * s1)
    de_dm = 1.0 + dp_dt / h * np.exp(-(x0 + h * t))
    return bool(np.all(de_dm >= -1e-12) and np.all(de_dm[1:] > 0.0))


def build_kernel(m_grid=None, cfg=None, max_nodes=2000):
    """Tabulate e(m) on ``m_grid`` and refine until the interpolant is verified.

    Every interval of the final table has been checked by an extra solve at
    its midpoint (in log(1 + m)). Intervals whose interpolation error exceeds
    ``10 * cfg.tol_energy``, or whose cubic is not provably monotone (e(m)
    increasing, e(m) - m decreasing), are split at that midpoint, so the
    returned table holds the requested nodes plus any inserted ones.
    """
    cfg = cfg or EigensolveConfig()
    grid = default_mass_grid() if m_grid is None else np.asarray(m_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("m_grid needs at least two nodes")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise DomainError("m_grid must be non-negative and strictly increasing")

    states = {float(m): solve_state(m, cfg) for m in grid}
    pending = [(float(a), float(b)) for a, b in zip(grid[:-1], grid[1:])]
    limit = 10.0 * cfg.tol_energy
    checks = 0
    while pending:
        a, b = pending.pop()
        mid = math.expm1(0.5 * (math.log1p(a) + math.log1p(b)))
        if not a < mid < b:
            raise ConvergenceError(f"kernel interval [{a!r}, {b!r}] cannot be split further")
        seg = _segment(states[a], states[b])
        sm = solve_state(mid, cfg)
        checks += 1
        accurate = abs(_hermite_midpoint(*seg) - (sm.energy - mid)) <= limit
        if accurate and _segment_monotone(*seg):
            continue
        if len(states) >= max_nodes:
            raise ConvergenceError("kernel refinement exceeded max_nodes")
        states[mid] = sm
        pending.extend([(a, mid), (mid, b)])

    ms = sorted(states)
    log.debug("kernel: %d nodes, %d midpoint checks, m <= %g", len(ms), checks, ms[-1])
    return KernelFunction(
        masses=np.array(ms),
        energies=np.array([states[m].energy for m in ms]),
        slopes=np.array([states[m].slope for m in ms]),
        errors=np.array([states[m].error for m in ms]),
        config=cfg,
    )


def kernel_eval(k, m):
    """Evaluate e(m) from a kernel table (asymptotic tail above the table)."""
    return k(m)


@lru_cache(maxsize=4)
def default_kernel(cfg=None):
    """Kernel on :func:`default_mass_grid`, built once per process."""
    return build_kernel(default_mass_grid(), cfg)


def save_kernel(k, path):
    """Write ``k`` as a versioned text table; values round-trip bit-exactly."""
    lines = [
        f"# {CACHE_FORMAT}",
        f"# config-hash {k.config.digest()}",
        f"# config {json.dumps(dataclasses.asdict(k.config), sort_keys=True)}",
        "# m e(m) err de/dm",
    ]
    for row in zip(k.masses, k.energies, k.errors, k.slopes):
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_kernel(path):
    """Read a table written by :func:`save_kernel`."""
    text = Path(path).read_text().splitlines()
    if not text or text[0] != f"# {CACHE_FORMAT}":
        raise ConfigurationError(f"{path}: not a {CACHE_FORMAT} file")
    header = {}
    rows = []
    for line in text[1:]:
        if line.startswith("#"):
            key, _, value = line[2:].partition(" ")
            header[key] = value
        elif line.strip():
            rows.append(line.split())
    try:
        cfg = EigensolveConfig(**json.loads(header["config"]))
        table = np.array(rows, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}: malformed kernel table ({exc})") from exc
    if cfg.digest() != header.get("config-hash"):
        raise ConfigurationError(f"{path}: config hash mismatch")
    if table.ndim != 2 or table.shape[1] != 4:
        raise ConfigurationError(f"{path}: expected four columns per row")
    return KernelFunction(
        masses=table[:, 0],
        energies=table[:, 1],
        errors=table[:, 2],
        slopes=table[:, 3],
        config=cfg,
    )
