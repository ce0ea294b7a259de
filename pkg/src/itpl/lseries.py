"""Nested Hecke L-series built from cusp form coefficients.

The value attached to forms f_1, ..., f_n, exponents (alpha_2, ..., alpha_n)
and a complex argument s is

    (-2 pi i)^(-(s + alpha_2 + ... + alpha_n))
      * sum over m_1 > m_2 > ... > m_n >= 1 of
        c1(m_1 - m_2) ... cn(m_n) / (m_1^s m_2^alpha_2 ... m_n^alpha_n)

computed by the convolution recurrence in `chains` and summed directly;
that is what `multiple_L_series` does, and it refuses arguments left of the
convergence bound.  `multiple_L_continued` extends the same function to the
rest of the plane: it integrates the associated Fourier series along a
vertical path and multiplies by the reciprocal of the full gamma factor in
one piece, so the poles of that factor come out as zeros of the reciprocal
instead of special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import TailProfile, chain_coefficients, chain_profile
from .forms import QExpansion, RegionError
from .numerics import (
    TWO_PI,
    AccuracyError,
    DomainError,
    EvalResult,
    branch_pow,
    dirichlet_power_tail,
    reciprocal_gamma_factor,
)

__all__ = [
    "LArgument",
    "convergence_bound",
    "multiple_L_series",
    "multiple_L_continued",
]


@dataclass(frozen=True)
class LArgument:
    """Argument bundle (s; alpha_2..alpha_n; f_1..f_n) for the nested series."""

    s: complex
    alphas: tuple
    forms: tuple

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        object.__setattr__(self, "forms", tuple(self.forms))
        if len(self.forms) < 1:
            raise DomainError("need at least one form")
        if len(self.alphas) != len(self.forms) - 1:
            raise DomainError(
                f"{len(self.forms)} forms need {len(self.forms) - 1} inner "
                f"exponents, got {len(self.alphas)}"
            )
        if any(a < 1 for a in self.alphas):
            raise DomainError("inner exponents must be positive integers")
        if not all(isinstance(f, QExpansion) for f in self.forms):
            raise DomainError("forms must be QExpansion instances")

    @property
    def n(self) -> int:
        return len(self.forms)

    @property
    def alpha_sum(self) -> int:
        return sum(self.alphas)


def convergence_bound(forms) -> float:
    """Abscissa right of which the direct nested sum converges absolutely.

    Sum of the coefficient growth exponents, plus one per convolution
    layer, plus one for the final Dirichlet sum.
    """
    forms = tuple(forms)
    if not forms:
        raise DomainError("need at least one form")
    return sum(f.growth_exponent for f in forms) + (len(forms) - 1) + 1.0


def _prefactor(arg: LArgument) -> complex:
    return branch_pow(-TWO_PI * 1j, -(arg.s + arg.alpha_sum))


def multiple_L_series(arg: LArgument, *, terms: int | None = None,
                      tol: float | None = None) -> EvalResult:
    """Direct sum of the nested series; only valid right of the bound.

    Exactly one way to control the cut-off: pass `terms` to sum that many
    coefficients and get the corresponding tail bound in err_abs, or pass
    `tol` to let the tail bound pick the cut-off (AccuracyError with the
    best value if the stored coefficients cannot reach it).  With neither,
    every stored coefficient up to 4096 is used.
    """
    bound = convergence_bound(arg.forms)
    if arg.s.real <= bound:
        raise RegionError(
            f"Re s = {arg.s.real:g} is not right of the convergence bound "
            f"{bound:g}; use multiple_L_continued there"
        )
    if terms is not None and tol is not None:
        raise DomainError("pass terms or tol, not both")
    profile = chain_profile(
        [TailProfile.of_form(f) for f in arg.forms], arg.alphas
    )
    available = min(f.length for f in arg.forms)
    pref = _prefactor(arg)
    sigma = arg.s.real

    def tail(after: int) -> float:
        return abs(pref) * dirichlet_power_tail(
            profile.K, profile.P, profile.kappa, sigma, after
        )

    if tol is not None:
        L = 64
        while L < available and tail(L) > tol:
            L *= 2
        L = min(L, available)
    elif terms is not None:
        if terms < 1:
            raise DomainError("terms must be positive")
        if terms > available:
            raise DomainError(
                f"asked for {terms} terms but the forms store only {available} "
                "coefficients"
            )
        L = terms
    else:
        L = min(4096, available)

    a = chain_coefficients([f.coefficients for f in arg.forms], arg.alphas, L)
    ms = np.arange(1, L + 1, dtype=float)
    with np.errstate(under="ignore"):
        powers = np.exp(-arg.s * np.log(ms))
        total = complex(np.dot(a[1:], powers))
        abs_accum = float(np.dot(np.abs(a[1:]), np.abs(powers)))
    err = tail(L) + abs(pref) * 5e-16 * abs_accum
    result = EvalResult(pref * total, err, L)
    if tol is not None and tail(L) > tol:
        raise AccuracyError(
            f"tail bound {tail(L):.3g} after {L} terms misses tol {tol:.3g}",
            best=result,
        )
    return result


def multiple_L_continued(arg: LArgument, *, path=None,
                         tol: float = 1e-10) -> EvalResult:
    """The nested L-function anywhere: vertical-line integral representation.

    The associated Fourier series is integrated along the vertical path and
    the whole reciprocal gamma factor multiplies the result, in one piece,
    so every pole of the gamma factor shows up as a zero of the reciprocal
    rather than a special case.  Agrees with multiple_L_series right of the
    bound and continues it elsewhere.
    """
    from .iterated import VerticalPathSpec, eichler_fourier_series, mellin_vertical

    if path is None:
        path = VerticalPathSpec(tol=tol)
    series = eichler_fourier_series(arg.forms, arg.alphas, kind="integrand")
    integral = mellin_vertical(series, arg.s, path)
    recg = reciprocal_gamma_factor(arg.s, arg.alphas)
    return EvalResult(
        recg * integral.value, abs(recg) * integral.err_abs, integral.terms_used
    )
