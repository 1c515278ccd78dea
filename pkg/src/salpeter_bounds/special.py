"""Special functions needed by the bound formulas.

Only what the bounds need is provided: the modified Bessel function of the
second kind of order one (plain and exponentially scaled), the gamma
function on x > 0, and the magnitude of the first zero of Ai.

K1 is evaluated with its ascending series for z <= 2 and with Steed's
continued fraction (Temme's CF2) above that. Both branches reach close to
machine precision; see tests/test_special.py for the quadrature oracle.
"""

import math

from .errors import ConvergenceError, DomainError

__all__ = [
    "AIRY_FIRST_ZERO",
    "airy_first_zero",
    "bessel_k1",
    "gamma",
    "scaled_exp_k1",
]

#: Magnitude of the first zero of Ai, i.e. Ai(-AIRY_FIRST_ZERO) = 0.
AIRY_FIRST_ZERO = 2.33810741046

_EULER_GAMMA = 0.5772156649015329
_SERIES_SWITCH = 2.0
_EPS = 1e-17
_MAX_TERMS = 10000


def _check_positive(z, name="z"):
    z = float(z)
    if not math.isfinite(z) or z <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {z!r}")
    return z


def _k1_series(z):
    # K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1) + psi(k+2)] (z^2/4)^k / (k! (k+1)!)
    y = 0.25 * z * z
    term = 1.0  # (z^2/4)^k / (k! (k+1)!)
    psi1 = -_EULER_GAMMA  # psi(k+1)
    psi2 = 1.0 - _EULER_GAMMA  # psi(k+2)
    i1_sum = term
    psi_sum = (psi1 + psi2) * term
    for k in range(1, _MAX_TERMS):
        term *= y / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        i1_sum += term
        psi_sum += (psi1 + psi2) * term
        if term < _EPS * i1_sum:
            break
    i1 = 0.5 * z * i1_sum
    return 1.0 / z + math.log(0.5 * z) * i1 - 0.25 * z * psi_sum


def _k1e_continued_fraction(x):
    """exp(x) K1(x) for x >= 2 via Steed's algorithm for CF2 (order 0 -> 1)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAX_TERMS):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise ConvergenceError(f"K1 continued fraction did not converge at x={x}")
    h *= a1
    k0e = math.sqrt(math.pi / (2.0 * x)) / s
    return k0e * (x + 0.5 - h) / x


def bessel_k1(z):
    """Modified Bessel function of the second kind, K1(z), for real z > 0.

    Underflows to zero for z beyond roughly 705; use :func:`scaled_exp_k1`
    there.
    """
    z = _check_positive(z)
    if z <= _SERIES_SWITCH:
        return _k1_series(z)
    return _k1e_continued_fraction(z) * math.exp(-z)


def scaled_exp_k1(z):
    """Return exp(z) * K1(z) without overflow or underflow.

    Tends to 1/z for z -> 0 and to sqrt(pi / (2 z)) for z -> infinity.
    """
    z = _check_positive(z)
    if z <= _SERIES_SWITCH:
        return math.exp(z) * _k1_series(z)
    return _k1e_continued_fraction(z)


def gamma(x):
    """Gamma function for x > 0 (delegates to :func:`math.gamma`)."""
    x = _check_positive(x, "x")
    return math.gamma(x)


def airy_first_zero():
    """Magnitude z0 of the first zero of the Airy function, Ai(-z0) = 0."""
    return AIRY_FIRST_ZERO
