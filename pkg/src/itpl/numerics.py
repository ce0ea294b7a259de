"""Shared complex-plane numerical kernels.

Branch convention used across the package: the complex plane is cut along
the non-positive imaginary axis and arguments are normalised to the window
[-pi/2, 3*pi/2).  Under this convention arg(i) = pi/2, arg(-1) = pi,
arg(-i) = -pi/2, and in particular arg(-2*pi*i) = -pi/2, which is what makes
the prefactor (-2*pi*i)**(-s) come out as i**s * (2*pi)**(-s) with
i**s = exp(i*pi*s/2).  Every non-integer power in the package goes through
`branch_pow` so the convention lives in exactly one place.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PoleError",
    "DomainError",
    "AccuracyError",
    "EvalResult",
    "branch_arg",
    "branch_log",
    "branch_pow",
    "gamma_complex",
    "reciprocal_gamma",
    "upper_incomplete_gamma",
    "exp_power_upper_integral",
    "gamma_factor",
    "gamma_factor_tuple",
    "reciprocal_gamma_factor",
    "reciprocal_gamma_factor_tuple",
    "binomial_complex",
    "integrate_adaptive",
    "geometric_power_tail",
    "power_log_tail",
    "dirichlet_power_tail",
]

TWO_PI = 2.0 * math.pi


class PoleError(ValueError):
    """Requested value sits on (or numerically at) a pole."""


class DomainError(ValueError):
    """Input outside the domain a routine is specified for."""


class AccuracyError(RuntimeError):
    """Could not certify the requested tolerance.

    Carries the best available estimate so callers can decide whether to
    degrade gracefully instead of dying.
    """

    def __init__(self, message: str, best: "EvalResult | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class EvalResult:
    """A numerical value together with an absolute error estimate."""

    value: complex
    err_abs: float
    terms_used: int = 0

    def agrees_with(self, other: "EvalResult", slack: float = 1.0) -> bool:
        gap = abs(self.value - other.value)
        return gap <= slack * (self.err_abs + other.err_abs)


# ---------------------------------------------------------------------------
# branch-cut aware elementary functions
# ---------------------------------------------------------------------------

def branch_arg(z: complex) -> float:
    """Argument of z normalised to [-pi/2, 3*pi/2)."""
    z = complex(z)
    if z == 0:
        raise DomainError("argument of zero is undefined")
    a = math.atan2(z.imag, z.real)  # principal (-pi, pi]
    if a < -0.5 * math.pi:
        a += TWO_PI
    return a


def branch_log(z: complex) -> complex:
    """log z with the cut along the non-positive imaginary axis."""
    z = complex(z)
    if z == 0:
        raise DomainError("log of zero")
    return complex(math.log(abs(z)), branch_arg(z))


def branch_pow(z: complex, s: complex) -> complex:
    """z**s under the package branch convention.

    Integer exponents short-circuit to exact repeated multiplication so
    that e.g. (-1)**2 is exactly 1 regardless of the cut.
    """
    z = complex(z)
    s = complex(s)
    if s.imag == 0.0 and s.real == int(s.real) and abs(s.real) <= 64:
        n = int(s.real)
        if z == 0:
            if n > 0:
                return 0j
            raise DomainError("0 raised to a non-positive power")
        return complex(z ** n)
    if z == 0:
        if s.real > 0:
            return 0j
        raise DomainError("0 raised to a power with non-positive real part")
    return cmath.exp(s * branch_log(z))


# ---------------------------------------------------------------------------
# gamma and friends
# ---------------------------------------------------------------------------

# Lanczos approximation, g = 7, 9 coefficients.  Relative error is a few
# units of 1e-15 over the right half-plane, which is all we need once the
# reflection formula handles Re s < 1/2.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_int(s: complex, tol: float = 1e-12) -> bool:
    return (
        abs(s.imag) < tol
        and s.real <= 0.5
        and abs(s.real - round(s.real)) < tol
    )


def gamma_complex(s: complex) -> complex:
    """Gamma(s) for complex s (Lanczos + reflection)."""
    s = complex(s)
    if _is_nonpositive_int(s):
        raise PoleError(f"gamma pole at s = {s}")
    if s.real < 0.5:
        # reflection: Gamma(s) = pi / (sin(pi s) * Gamma(1 - s))
        return math.pi / (cmath.sin(math.pi * s) * gamma_complex(1.0 - s))
    z = s - 1.0
    x = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        x += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(TWO_PI) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def reciprocal_gamma(s: complex) -> complex:
    """1/Gamma(s), entire in s (zeros at non-positive integers)."""
    s = complex(s)
    if _is_nonpositive_int(s):
        return 0j
    if s.real < 0.5:
        return cmath.sin(math.pi * s) * gamma_complex(1.0 - s) / math.pi
    return 1.0 / gamma_complex(s)


def _upper_gamma_cf(s: complex, x: float, max_iter: int = 400) -> complex:
    # Modified Lentz on the standard continued fraction
    #   Gamma(s,x) = e^{-x} x^s / (x+1-s - 1(1-s)/(x+3-s - 2(2-s)/(...)))
    tiny = 1e-300
    b = x + 1.0 - s
    if b == 0:
        b = tiny
    f = b
    c = f
    d = 0j
    for k in range(1, max_iter + 1):
        a = -k * (k - s)
        b = b + 2.0
        d = b + a * d
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if abs(delta - 1.0) < 1e-16:
            return cmath.exp(-x + s * math.log(x)) / f
    raise AccuracyError(
        f"incomplete gamma continued fraction stalled at s={s}, x={x}",
        best=EvalResult(cmath.exp(-x + s * math.log(x)) / f, abs(f) * 1e-10, max_iter),
    )


def _lower_gamma_series(s: complex, x: float, max_iter: int = 500) -> complex:
    # gamma(s,x) = x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    for n in range(1, max_iter + 1):
        term *= x / (s + n)
        total += term
        if abs(term) < 1e-17 * abs(total):
            return cmath.exp(-x + s * math.log(x)) * total
    raise AccuracyError(
        f"lower incomplete gamma series stalled at s={s}, x={x}",
        best=EvalResult(cmath.exp(-x + s * math.log(x)) * total, abs(total) * 1e-10, max_iter),
    )


def _exp_integral_e1(x: float) -> float:
    # E1(x) for small x via the convergent series
    #   E1(x) = -euler_gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
    total = -0.5772156649015328606 - math.log(x)
    term = 1.0
    for k in range(1, 300):
        term *= -x / k
        inc = -term / k
        total += inc
        if abs(inc) < 1e-18 * max(abs(total), 1.0):
            break
    return total


def _upper_gamma_nonpositive_int(n: int, x: float) -> complex:
    # Gamma(-n, x) = ((-1)^n / n!) [ E1(x) - e^{-x} sum_{j=0}^{n-1} (-1)^j j! x^{-j-1} ]
    acc = _exp_integral_e1(x)
    partial = 0.0
    fact = 1.0
    for j in range(n):
        partial += ((-1) ** j) * fact * x ** (-j - 1)
        fact *= j + 1
    acc -= math.exp(-x) * partial
    return complex(((-1) ** n) * acc / math.factorial(n))


def upper_incomplete_gamma(s: complex, x: float) -> complex:
    """Gamma(s, x) = integral_x^inf e^{-t} t^{s-1} dt for complex s, real x > 0.

    Continued fraction for x >= max(4, Re s + 4), else Gamma(s) minus the
    lower series.  s at a non-positive integer takes a dedicated E1-based
    path (the function is entire in s even though Gamma(s) is not); s very
    close to but not at such an integer loses digits to cancellation.
    """
    s = complex(s)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"upper_incomplete_gamma needs real x > 0, got {x}")
    if x >= 4.0 and x >= s.real + 4.0:
        return _upper_gamma_cf(s, x)
    if _is_nonpositive_int(s):
        return _upper_gamma_nonpositive_int(-int(round(s.real)), x)
    return gamma_complex(s) - _lower_gamma_series(s, x)


def exp_power_upper_integral(kappa: float, w: complex, t0: float) -> complex:
    """integral_{t0}^inf e^{-kappa t} t^{w-1} dt = kappa^{-w} Gamma(w, kappa*t0)."""
    if kappa <= 0 or t0 <= 0:
        raise DomainError("exp_power_upper_integral needs kappa > 0, t0 > 0")
    return branch_pow(kappa, -w) * upper_incomplete_gamma(w, kappa * t0)


def gamma_factor_tuple(args: Sequence[complex]) -> complex:
    """(-1)^k Gamma(x_1) ... Gamma(x_k) for args = (x_1, ..., x_k); 1 if empty."""
    out: complex = complex((-1) ** len(args))
    for x in args:
        out *= gamma_complex(x)
    return out


def reciprocal_gamma_factor_tuple(args: Sequence[complex]) -> complex:
    """1 / gamma_factor_tuple(args), entire in each argument."""
    out: complex = complex((-1) ** len(args))
    for x in args:
        out *= reciprocal_gamma(x)
    return out


def gamma_factor(s: complex, alphas: Sequence[int] = ()) -> complex:
    """Signed gamma product (-1)^n Gamma(s) Gamma(a_2) ... Gamma(a_n).

    `alphas` holds the trailing arguments (a_2, ..., a_n), so n is
    1 + len(alphas).  With no trailing arguments this is just -Gamma(s).
    """
    return gamma_factor_tuple((s, *alphas))


def reciprocal_gamma_factor(s: complex, alphas: Sequence[int] = ()) -> complex:
    """1 / gamma_factor(s, alphas), entire in s."""
    return reciprocal_gamma_factor_tuple((s, *alphas))


def binomial_complex(x: complex, j: int) -> complex:
    """Generalised binomial coefficient C(x, j) = x(x-1)...(x-j+1)/j!.

    j must be a non-negative integer.  When x is given exactly as an
    integer the product is carried out in exact rationals before the final
    conversion, so small integer cases are exact.
    """
    if j < 0 or j != int(j):
        raise DomainError(f"binomial_complex needs integer j >= 0, got {j}")
    j = int(j)
    if j == 0:
        return 1.0 + 0j
    x = complex(x)
    if x.imag == 0.0 and x.real == int(x.real):
        num = Fraction(1)
        n = int(x.real)
        for i in range(j):
            num *= Fraction(n - i)
        return complex(num / math.factorial(j))
    out = 1.0 + 0j
    for i in range(j):
        out *= (x - i) / (i + 1)
    return out


# ---------------------------------------------------------------------------
# adaptive quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl_panel(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> complex:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(f(mid + half * _GL_NODES), dtype=complex)
    return complex(half * np.dot(_GL_WEIGHTS, vals))


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_panels: int = 4000,
) -> EvalResult:
    """Adaptive Gauss-Legendre integration of a vectorised callable on [a, b].

    Bisects panels until the |whole - two halves| estimate meets the local
    share of `tol`.  Raises AccuracyError (carrying the best estimate) if
    the panel budget runs out before the tolerance is met.
    """
    if a == b:
        return EvalResult(0j, 0.0, 0)
    total_len = abs(b - a)
    value = 0j
    err = 0.0
    abs_accum = 0.0
    panels = 0
    failed = False
    stack = [(float(a), float(b), _gl_panel(f, a, b))]
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl_panel(f, lo, mid)
        right = _gl_panel(f, mid, hi)
        panels += 1
        est = abs(whole - (left + right))
        local_tol = tol * abs(hi - lo) / total_len
        tiny = abs(hi - lo) < 1e-13 * total_len
        if est <= max(local_tol, 1e-16 * abs(left + right)) or tiny:
            value += left + right
            err += est
            abs_accum += abs(left) + abs(right)
        elif panels >= max_panels:
            value += left + right
            err += est
            abs_accum += abs(left) + abs(right)
            failed = True
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    err += 5e-16 * abs_accum  # roundoff floor for the accumulated panel sums
    result = EvalResult(value, err, panels * 30)
    if failed:
        raise AccuracyError(
            f"integrate_adaptive hit the {max_panels}-panel budget on [{a}, {b}]",
            best=result,
        )
    return result


# ---------------------------------------------------------------------------
# truncation tail bounds
# ---------------------------------------------------------------------------

def geometric_power_tail(C: float, P: float, x: float, start: int) -> float:
    """Upper bound for C * sum_{m >= start} m^P x^m with 0 <= x < 1.

    Ratio test: successive terms shrink by at least ((start+1)/start)^P * x,
    so the tail is dominated by a geometric series once that ratio is below
    one; returns inf when it is not (caller should push `start` further out).
    """
    if not 0.0 <= x < 1.0:
        return math.inf
    if x == 0.0 or C == 0.0:
        return 0.0
    if start < 1:
        raise DomainError("geometric_power_tail needs start >= 1")
    ratio = ((start + 1.0) / start) ** P * x
    if ratio >= 1.0:
        return math.inf
    lead = C * math.exp(P * math.log(start) + start * math.log(x))
    return lead / (1.0 - ratio)


def power_log_tail(K: float, P: float, kappa: float, x: float, start: int) -> float:
    """Upper bound for K * sum_{m >= start} m^P (1 + ln m)^kappa x^m.

    The logarithm is absorbed into the power via
    (1 + ln m)^kappa <= (eps * e^(1-eps))^(-kappa) * m^(eps*kappa),
    valid for every m >= 1 and 0 < eps <= 1, after which the plain
    geometric-power bound applies.
    """
    if kappa < 0:
        raise DomainError("power_log_tail needs kappa >= 0")
    if kappa == 0:
        return geometric_power_tail(K, P, x, start)
    eps = min(0.5, 1.0 / (1.0 + math.log(start + 1.0)))
    absorb = (eps * math.exp(1.0 - eps)) ** (-kappa)
    return geometric_power_tail(K * absorb, P + eps * kappa, x, start)


def _log_power_integral(L: float, p: float, kappa: int) -> float:
    # int_L^inf t^-p (1 + ln t)^kappa dt by repeated integration by parts
    if p <= 1.0:
        return math.inf
    value = L ** (1.0 - p) * (1.0 + math.log(L)) ** kappa / (p - 1.0)
    if kappa > 0:
        value += kappa / (p - 1.0) * _log_power_integral(L, p, kappa - 1)
    return value


def dirichlet_power_tail(K: float, P: float, kappa: float, sigma: float,
                         start: int) -> float:
    """Upper bound for K * sum_{m > start} m^(P - sigma) (1 + ln m)^kappa.

    Needs sigma - P > 1 for convergence and the summand decreasing from
    `start` on (true once kappa <= (sigma - P) * (1 + ln start)); returns
    inf otherwise.
    """
    if kappa < 0:
        raise DomainError("dirichlet_power_tail needs kappa >= 0")
    p = sigma - P
    if p <= 1.0:
        return math.inf
    if kappa > p * (1.0 + math.log(max(start, 1))):
        return math.inf
    ik = int(math.ceil(kappa))
    return K * _log_power_integral(float(max(start, 1)), p, ik)
