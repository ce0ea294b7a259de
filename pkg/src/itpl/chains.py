"""Convolution chains for nested Dirichlet series.

The coefficients of the nested series attached to forms f_1, ..., f_n with
inner exponents (alpha_2, ..., alpha_n) are

    a(m_1) = sum over m_1 > m_2 > ... > m_n >= 1 of
             c1(m_1 - m_2) c2(m_2 - m_3) ... cn(m_n)
             * m_2^(-alpha_2) ... m_n^(-alpha_n)

which the routines here build bottom-up: the innermost layer is weighted by
its power, convolved with the next coefficient list, weighted again, and so
on.  Convolutions are direct (no FFT) so each output coefficient is a plain
multiply-accumulate and stays accurate near cancellation.

TailProfile tracks bounds of the shape |a(m)| <= K m^P (1 + ln m)^kappa
through the same recursion, which is what every truncation estimate
downstream leans on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np

from .numerics import DomainError

__all__ = ["TailProfile", "chain_coefficients", "chain_profile"]


@dataclass(frozen=True)
class TailProfile:
    """Coefficient bound |a(m)| <= K * m^P * (1 + ln m)^kappa for all m >= 1."""

    K: float
    P: float
    kappa: float = 0.0

    def __post_init__(self):
        if self.K < 0 or self.kappa < 0:
            raise DomainError("TailProfile needs K >= 0 and kappa >= 0")

    @classmethod
    def of_form(cls, form) -> "TailProfile":
        """Profile of anything carrying growth_constant / growth_exponent."""
        return cls(form.growth_constant, form.growth_exponent, 0.0)

    def bound(self, m: int) -> float:
        return self.K * m ** self.P * (1.0 + math.log(m)) ** self.kappa

    def shifted(self, alpha: float) -> "TailProfile":
        """Profile after dividing coefficients by m^alpha."""
        return TailProfile(self.K, self.P - alpha, self.kappa)


def _weighted(arr: np.ndarray, alpha: int) -> np.ndarray:
    out = arr.copy()
    m = np.arange(len(arr), dtype=float)
    m[0] = 1.0
    out *= m ** float(-alpha)
    out[0] = 0.0
    return out


def _convolve_1based(c: np.ndarray, w: np.ndarray, count: int) -> np.ndarray:
    """(c * w)(m) = sum_{j + j' = m} c_j w_j' on 1-based arrays."""
    out = np.zeros(count + 1, dtype=complex)
    if count >= 2:
        full = np.convolve(c[1:count], w[1:count])
        out[2:] = full[: count - 1]
    return out


def _pad(arr, count: int) -> np.ndarray:
    a = np.asarray(arr, dtype=complex).ravel()
    if len(a) < count + 1:
        a = np.concatenate([a, np.zeros(count + 1 - len(a), dtype=complex)])
    a = a[: count + 1].copy()
    a[0] = 0.0
    return a


def chain_coefficients(coeff_arrays: Sequence, inner_alphas: Sequence[int],
                       count: int) -> np.ndarray:
    """First `count` coefficients a(1..count) of the nested series (1-based).

    `coeff_arrays` holds the 1-based coefficient lists of f_1, ..., f_n and
    `inner_alphas` the exponents (alpha_2, ..., alpha_n) attached to
    f_2, ..., f_n.  Entries beyond each stored list are treated as zero, so
    pass lists at least `count` long when the tail matters.
    """
    n = len(coeff_arrays)
    if n < 1:
        raise DomainError("need at least one coefficient list")
    if len(inner_alphas) != n - 1:
        raise DomainError(
            f"got {n} coefficient lists but {len(inner_alphas)} inner exponents; "
            "expected one exponent per list after the first"
        )
    if count < 1:
        raise DomainError("count must be at least 1")
    if any(int(a) != a or a < 1 for a in inner_alphas):
        raise DomainError("inner exponents must be positive integers")
    padded = [_pad(c, count) for c in coeff_arrays]
    if n == 1:
        return padded[0]
    w = _weighted(padded[-1], int(inner_alphas[-1]))
    for r in range(n - 2, 0, -1):
        w = _weighted(
            _convolve_1based(padded[r], w, count), int(inner_alphas[r - 1])
        )
    return _convolve_1based(padded[0], w, count)


def _partial_sum_profile(p: TailProfile) -> tuple[float, float, float]:
    """(factor, P, kappa) with sum_{m'<=m} of p's bound <= factor m^P (1+ln m)^kappa."""
    if p.P > -1.0:
        return (1.0 + 1.0 / (p.P + 1.0)) * p.K, p.P + 1.0, p.kappa
    if p.P == -1.0:
        return p.K, 0.0, p.kappa + 1.0
    # convergent sum: absorb the log into the power, then compare with zeta
    if p.kappa == 0.0:
        total = 1.0 + 1.0 / (-p.P - 1.0)
        return p.K * total, 0.0, 0.0
    eps = min(0.5, (-p.P - 1.0) / (2.0 * p.kappa))
    absorb = (eps * math.exp(1.0 - eps)) ** (-p.kappa)
    shifted = p.P + eps * p.kappa
    total = absorb * (1.0 + 1.0 / (-shifted - 1.0))
    return p.K * total, 0.0, 0.0


def _combine(outer: TailProfile, inner: TailProfile) -> TailProfile:
    """Profile of the 1-based convolution of `outer` against `inner`.

    Uses j^P <= m^P on the outer factor (hence needs outer.P >= 0, true for
    every cusp form profile) and a closed-form partial-sum bound on the
    inner one.
    """
    if outer.P < 0:
        raise DomainError("outer profile must have a non-negative exponent")
    factor, P, kappa = _partial_sum_profile(inner)
    return TailProfile(outer.K * factor, outer.P + P, outer.kappa + kappa)


def chain_profile(profiles: Sequence[TailProfile],
                  inner_alphas: Sequence[int]) -> TailProfile:
    """Tail profile of chain_coefficients for forms with the given profiles.

    Valid for every m (not only a stored range) as long as each input
    profile is, since only partial-sum and term-count bounds enter.
    """
    n = len(profiles)
    if len(inner_alphas) != n - 1:
        raise DomainError("need one inner exponent per profile after the first")
    if n == 1:
        return profiles[0]
    prof = profiles[-1].shifted(float(inner_alphas[-1]))
    for r in range(n - 2, 0, -1):
        prof = _combine(profiles[r], prof).shifted(float(inner_alphas[r - 1]))
    return _combine(profiles[0], prof)
