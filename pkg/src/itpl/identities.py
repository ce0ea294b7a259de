"""Identity layer tying the integral and series objects together.

Everything here is organised around residuals: each identity is exposed
as a function that evaluates both sides with machinery from the other
modules and returns the difference together with the error budget the
evaluations carried.  Callers decide what to make of a residual; nothing
in this module rounds one down to a verdict.

Contents:

* index enumeration and exact binomial bookkeeping shared by the shift
  identities (``enumerate_shift_indices``, ``gamma_binomial_residual``);
* the link between kernel exponents and form weights (``weight_link``,
  ``alphas_from_weights``, ``matched_instances``);
* binomial shift combinations rebuilding the vertical transform from
  L-values and the other way round (``shift_combination``,
  ``duality_combination``);
* pointwise recombination of the two integrand families and its exact
  integer matrix form (``integrand_combination``,
  ``integrand_shift_matrices``);
* slash actions and modularity residuals of the nested integrals
  (``slash_action``, ``modularity_residual``);
* completed vertical transforms and their reflection identities, plain
  and twisted (``lambda_transform``, ``lambda_completed``,
  ``functional_equation_residual``, ``twisted_completed``,
  ``twisted_residual``).

A note on the reflections.  The completed transform of the nested
integral converges at neither end of the path, so it is defined by
splitting the path at a reflection-symmetric point, subtracting the
polynomial part at the top, and folding the bottom half onto the top
half through the reflection of the integrand.  Built that way, the
reflection residual measures branch bookkeeping and rounding rather
than analytic content.  The content checks live alongside: the same
transform evaluated by two-sided quadrature without any fold
(``method="quadrature"``), the half-transform against direct quadrature
of the series, and the pointwise reflection of the integral object
through ``modularity_residual``, which never folds anything.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .forms import (
    DirichletCharacter,
    FourierSeries,
    QExpansion,
    twist_series,
)
from .iterated import (
    INF_BASE,
    CostGuardError,
    PathGrid,
    VerticalPathSpec,
    _branch_pow_nodes,
    _cusp_flip_bound,
    _cusp_peak,
    _decay_constant,
    _forms_on_grid,
    _vertical_ts,
    eichler_fourier_series,
    eichler_integral_direct,
    eichler_integrand_eval,
    mellin_vertical,
    mellin_vertical_quadrature,
    period_integral_direct,
    period_integrand_eval,
)
from .lseries import LArgument, multiple_L_continued
from .numerics import (
    TWO_PI,
    DomainError,
    EvalResult,
    PoleError,
    binomial_complex,
    branch_pow,
    gamma_complex,
    gamma_factor,
    reciprocal_gamma_factor,
    upper_incomplete_gamma,
)

__all__ = [
    "ConfigurationError",
    "WeightLink",
    "alphas_from_weights",
    "duality_combination",
    "enumerate_shift_indices",
    "functional_equation_residual",
    "gamma_binomial_residual",
    "integrand_combination",
    "integrand_shift_matrices",
    "lambda_completed",
    "lambda_transform",
    "make_l_evaluator",
    "make_period_evaluator",
    "matched_instances",
    "modularity_residual",
    "shift_combination",
    "slash_action",
    "twisted_completed",
    "twisted_eichler_value",
    "twisted_residual",
    "twisted_tilde_series",
    "weight_link",
]


class ConfigurationError(ValueError):
    """An identity was requested with inputs it is not defined for."""


# ---------------------------------------------------------------------------
# shift index enumeration and the weight link
# ---------------------------------------------------------------------------

def _check_inner(alphas, what: str) -> tuple:
    alphas = tuple(alphas)
    for a in alphas:
        if int(a) != a or a < 1:
            raise DomainError(f"{what}: inner exponents must be positive integers")
    return tuple(int(a) for a in alphas)


def enumerate_shift_indices(alphas, kind: str = "chained") -> tuple:
    """All admissible shift tuples (j_2, ..., j_n) for the inner exponents.

    kind="chained" bounds each entry by the exponent plus the entry to its
    right (0 <= j_r < alpha_r + j_{r+1}, with j_{n+1} = 0); kind="plain"
    bounds each entry by its own exponent (0 <= j_r < alpha_r).  Tuples
    come out with the rightmost index varying slowest, so the order is
    deterministic and lexicographic when read right to left.
    """
    alphas = _check_inner(alphas, "enumerate_shift_indices")
    if kind not in ("chained", "plain"):
        raise DomainError(f"kind must be 'chained' or 'plain', got {kind!r}")
    out: list[tuple] = [()]
    for a in reversed(alphas):
        grown = []
        for suffix in out:
            bound = a + (suffix[0] if (kind == "chained" and suffix) else 0)
            for j in range(bound):
                grown.append((j,) + suffix)
        out = grown
    return tuple(out)


def _shifted(alphas: tuple, j: tuple) -> tuple:
    """Exponent tuple after the shift: alpha_r - j_r + j_{r+1}."""
    jj = tuple(j) + (0,)
    return tuple(alphas[i] - jj[i] + jj[i + 1] for i in range(len(alphas)))


@dataclass(frozen=True)
class WeightLink:
    """Kernel exponents together with the form weights they pair with."""

    alphas: tuple
    weights: tuple


def weight_link(alphas) -> WeightLink:
    """Weights k_r = alpha_r + alpha_{r+1} (with a trailing exponent of 1)."""
    alphas = _check_inner(alphas, "weight_link")
    if not alphas:
        raise DomainError("weight_link needs at least one exponent")
    ext = alphas + (1,)
    return WeightLink(alphas, tuple(ext[i] + ext[i + 1] for i in range(len(alphas))))


def alphas_from_weights(weights) -> WeightLink:
    """Invert the weight link; exact, and errors out if no exponents fit."""
    weights = tuple(int(k) for k in weights)
    if not weights:
        raise DomainError("alphas_from_weights needs at least one weight")
    n = len(weights)
    alphas = []
    for r in range(1, n + 1):
        a = (-1) ** (n - r + 1) + sum(
            (-1) ** (j - r) * weights[j - 1] for j in range(r, n + 1)
        )
        alphas.append(a)
    if any(a < 1 for a in alphas):
        raise DomainError(f"weights {weights} do not link to positive exponents")
    return WeightLink(tuple(alphas), weights)


def matched_instances(forms: Sequence[QExpansion], max_n: int = 2) -> list:
    """(alphas, forms) pairs whose weights satisfy the link, up to depth max_n.

    Depth one admits every form; depth two admits ordered pairs whose
    first weight is at least the second.  The list is deterministic in
    the order the forms were given.
    """
    forms = tuple(forms)
    out = []
    for f in forms:
        if f.weight >= 2:
            out.append(((f.weight - 1,), (f,)))
    if max_n >= 2:
        for f1 in forms:
            for f2 in forms:
                if f1.weight >= f2.weight:
                    link = alphas_from_weights((f1.weight, f2.weight))
                    out.append((link.alphas, (f1, f2)))
    return out


# ---------------------------------------------------------------------------
# the gamma-binomial exchange
# ---------------------------------------------------------------------------

def gamma_binomial_residual(s, alphas, j) -> complex:
    """Residual of the exchange between shifted and plain gamma factors.

    Left side: the chained binomial weights times the gamma factor at the
    shifted arguments.  Right side: the unshifted gamma factor times the
    complex binomial in j_2 and the remaining integer binomials.  Exact
    cancellation at j = 0; raises PoleError when either gamma factor
    sits on a pole.
    """
    s = complex(s)
    alphas = _check_inner(alphas, "gamma_binomial_residual")
    j = tuple(int(x) for x in j)
    if len(j) != len(alphas):
        raise DomainError("need one shift index per inner exponent")
    jj = j + (0,)
    for i, a in enumerate(alphas):
        if not 0 <= j[i] < a + jj[i + 1]:
            raise DomainError(
                f"index {j[i]} outside the chained range for exponent {a}"
            )
    j2 = j[0] if j else 0
    lhs = gamma_factor(s + j2, _shifted(alphas, j))
    for i, a in enumerate(alphas):
        lhs *= comb(a + jj[i + 1] - 1, j[i])
    rhs = gamma_factor(s, alphas) * binomial_complex(s + j2 - 1, j2)
    for i in range(1, len(alphas)):
        rhs *= comb(alphas[i - 1] + j[i] - 1, j[i])
    return lhs - rhs


# ---------------------------------------------------------------------------
# shift combinations between the transform and the L-values
# ---------------------------------------------------------------------------

def _coerce_eval(x) -> EvalResult:
    if isinstance(x, EvalResult):
        return x
    return EvalResult(complex(x), 0.0)


def make_l_evaluator(forms, *, tol: float = 1e-10, path=None) -> Callable:
    """Evaluator (s, alphas) -> nested L-value via the continued route.

    The continued route is used unconditionally because shifted arguments
    routinely leave the half-plane where the direct sum converges.
    """
    forms = tuple(forms)

    def ev(s: complex, alphas: tuple) -> EvalResult:
        return multiple_L_continued(LArgument(s, alphas, forms), path=path, tol=tol)

    return ev


def make_period_evaluator(forms, *, path=None) -> Callable:
    """Evaluator (s, alphas) -> iterated period integral, by nested quadrature."""
    forms = tuple(forms)

    def ev(s: complex, alphas: tuple) -> EvalResult:
        return period_integral_direct(forms, (s,) + tuple(alphas), path)

    return ev


def shift_combination(kind: str, s, alphas, forms, evaluator: Callable) -> EvalResult:
    """Binomial combination of shifted evaluations, scaled by a gamma factor.

    kind="period_from_l" runs over chained indices with the complex
    binomial in (s + j_2 - 1, j_2) and multiplies the sum by the signed
    gamma factor: fed with L-values it reproduces the iterated period
    integral.  kind="l_from_period" runs over plain indices with
    alternating integer binomials and divides by the same gamma factor:
    fed with period-integral values it reproduces the L-value.  All
    integer coefficients are exact; the complex binomial is exact for
    integer s as well.
    """
    s = complex(s)
    alphas = _check_inner(alphas, "shift_combination")
    forms = tuple(forms)
    if len(forms) != len(alphas) + 1:
        raise DomainError(
            f"{len(alphas)} inner exponents go with {len(alphas) + 1} forms, "
            f"got {len(forms)}"
        )
    if kind == "period_from_l":
        indices = enumerate_shift_indices(alphas, "chained")
    elif kind == "l_from_period":
        indices = enumerate_shift_indices(alphas, "plain")
    else:
        raise DomainError(
            f"kind must be 'period_from_l' or 'l_from_period', got {kind!r}"
        )
    total = 0j
    err = 0.0
    absum = 0.0
    for j in indices:
        j2 = j[0] if j else 0
        if kind == "period_from_l":
            coef = binomial_complex(s + j2 - 1, j2)
            for i in range(1, len(alphas)):
                coef *= comb(alphas[i - 1] + j[i] - 1, j[i])
        else:
            coef = 1.0 + 0j
            for i, a in enumerate(alphas):
                coef *= (-1) ** j[i] * comb(a - 1, j[i])
        part = _coerce_eval(evaluator(s + j2, _shifted(alphas, j)))
        total += coef * part.value
        err += abs(coef) * part.err_abs
        absum += abs(coef * part.value)
    if kind == "period_from_l":
        scale = gamma_factor(s, alphas)
    else:
        scale = reciprocal_gamma_factor(s, alphas)
    return EvalResult(
        scale * total, abs(scale) * (err + 1e-15 * absum), len(indices)
    )


def duality_combination(kind: str, alphas, forms, evaluator: Callable) -> EvalResult:
    """The shift combination specialised to s = alpha_1.

    ``alphas`` here is the full exponent tuple; its head becomes the
    evaluation point and its tail the inner exponents.
    """
    alphas = _check_inner(alphas, "duality_combination")
    if not alphas:
        raise DomainError("duality_combination needs the full exponent tuple")
    return shift_combination(kind, complex(alphas[0]), alphas[1:], forms, evaluator)


# ---------------------------------------------------------------------------
# pointwise recombination of the two integrand families
# ---------------------------------------------------------------------------

def integrand_combination(kind: str, z, a, alphas, forms,
                          path: VerticalPathSpec | None = None) -> EvalResult:
    """Rebuild one integrand family from shifted members of the other.

    kind="from_eichler" combines coupled-kernel integrands with chained
    binomial weights and powers of z; the result matches the plain
    power-kernel integrand at z.  kind="from_period" combines power-kernel
    integrands with alternating plain weights; the result matches the
    coupled-kernel integrand.  With a single form both collapse to the
    bare form value.
    """
    alphas = _check_inner(alphas, "integrand_combination")
    forms = tuple(forms)
    if len(forms) != len(alphas) + 1:
        raise DomainError(
            f"{len(alphas)} inner exponents go with {len(alphas) + 1} forms, "
            f"got {len(forms)}"
        )
    z = complex(z)
    if kind == "from_eichler":
        indices = enumerate_shift_indices(alphas, "chained")
        evalf = eichler_integrand_eval
    elif kind == "from_period":
        indices = enumerate_shift_indices(alphas, "plain")
        evalf = period_integrand_eval
    else:
        raise DomainError(
            f"kind must be 'from_eichler' or 'from_period', got {kind!r}"
        )
    total = 0j
    err = 0.0
    for j in indices:
        jj = j + (0,)
        j2 = j[0] if j else 0
        coef = 1
        for i, al in enumerate(alphas):
            if kind == "from_eichler":
                coef *= comb(al + jj[i + 1] - 1, j[i])
            else:
                coef *= (-1) ** j[i] * comb(al - 1, j[i])
        weight = coef * z ** j2
        part = evalf(forms, _shifted(alphas, j), z, a, path)
        total += weight * part.value
        err += abs(weight) * part.err_abs
    return EvalResult(total, err, len(indices))


def integrand_shift_matrices(alphas) -> tuple:
    """Exact integer matrices of both recombinations on one grade.

    The basis consists of pairs (shifted exponent tuple, power of z)
    whose entries sum to the grade of ``alphas``; both recombinations
    preserve that sum.  Returns (basis, from_eichler, from_period) with
    the matrices as integer object arrays indexed [target, source]; the
    two compose to the identity in both orders.
    """
    alphas = _check_inner(alphas, "integrand_shift_matrices")
    if not alphas:
        basis = (((), 0),)
        one = np.array([[1]], dtype=object)
        return basis, one, one

    grade = sum(alphas)
    m = len(alphas)

    def tuples_summing(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(1, total - parts + 2):
            for rest in tuples_summing(total - head, parts - 1):
                yield (head,) + rest

    basis = []
    for p in range(grade - m + 1):
        for beta in tuples_summing(grade - p, m):
            basis.append((beta, p))
    basis.sort()
    index = {el: i for i, el in enumerate(basis)}

    size = len(basis)
    from_eichler = np.zeros((size, size), dtype=object)
    from_period = np.zeros((size, size), dtype=object)
    for (beta, p), src in index.items():
        for j in enumerate_shift_indices(beta, "chained"):
            jj = j + (0,)
            coef = 1
            for i, b in enumerate(beta):
                coef *= comb(b + jj[i + 1] - 1, j[i])
            tgt = index[(_shifted(beta, j), p + j[0])]
            from_eichler[tgt, src] += coef
        for j in enumerate_shift_indices(beta, "plain"):
            coef = 1
            for i, b in enumerate(beta):
                coef *= (-1) ** j[i] * comb(b - 1, j[i])
            tgt = index[(_shifted(beta, j), p + j[0])]
            from_period[tgt, src] += coef
    return tuple(basis), from_eichler, from_period


# ---------------------------------------------------------------------------
# slash actions and modularity residuals
# ---------------------------------------------------------------------------

def _as_matrix(gamma) -> tuple:
    arr = np.asarray(gamma, dtype=float)
    if arr.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {arr.shape}")
    a, b, c, d = (float(x) for x in arr.ravel())
    det = a * d - b * c
    if det <= 0.0:
        raise DomainError(f"matrix determinant must be positive, got {det:g}")
    return a, b, c, d, det


def _apply_mobius(mat: tuple, z):
    a, b, c, d, _ = mat
    if z == INF_BASE:
        num, den = complex(a), complex(c)
    else:
        z = complex(z)
        num, den = a * z + b, c * z + d
    if den == 0:
        return INF_BASE
    w = num / den
    if abs(w.imag) < 1e-13:
        if abs(w.real) < 1e-13:
            return 0j
        raise DomainError(
            f"image base {w.real:g} is a cusp this package does not integrate from"
        )
    if w.imag < 0:
        raise DomainError("image base fell into the lower half-plane")
    return w


def _inverse_matrix(mat: tuple) -> tuple:
    a, b, c, d, det = mat
    # the overall 1/det drops out of the fractional-linear action
    return d, -b, -c, a, det


def slash_action(g: Callable, k, gamma, z) -> complex:
    """(g |_k gamma)(z): determinant and cocycle factors times g(gamma z).

    ``g`` is any callable on the upper half-plane; powers use the package
    branch, and integer exponents short-circuit to exact products, so the
    identity matrix acts as the identity to the last bit.
    """
    mat = _as_matrix(gamma)
    a, b, c, d, det = mat
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("slash actions are evaluated on the upper half-plane")
    k = complex(k)
    if k.imag == 0 and k.real == int(k.real):
        k = int(k.real)
    w = (a * z + b) / (c * z + d)
    return (
        branch_pow(det, k / 2 if isinstance(k, int) else k / 2.0)
        * branch_pow(c * z + d, -k)
        * g(w)
    )


def _slashed_form(form: QExpansion, k: int, mat: tuple) -> complex:
    """Multiplier lambda with f |_k gamma = lambda f, when one is known."""
    a, b, c, d, det = mat
    entries = (a, b, c, d)
    if b == 0 and c == 0 and a == d:
        return branch_pow(det, k / 2.0) * branch_pow(a, -k)
    integral = all(abs(x - round(x)) < 1e-12 for x in entries)
    if integral and abs(det - 1.0) < 1e-12:
        if form.level == 1 or round(c) % form.level == 0:
            return 1.0 + 0j
    if (
        form.level > 1
        and a == 0 and d == 0
        and abs(b + 1.0) < 1e-12
        and abs(c - form.level) < 1e-12
    ):
        if form.fricke_eigenvalue is None:
            raise ConfigurationError(
                f"{form.label}: reflection eigenvalue unknown, cannot slash"
            )
        return complex(form.fricke_eigenvalue)
    raise ConfigurationError(
        f"no closed form for the weight-{k} action of {entries} on {form.label}"
    )


def modularity_residual(kind: str, gamma, a, z, alphas, forms,
                        path: VerticalPathSpec | None = None) -> EvalResult:
    """Residual of the transformation law of the nested integral objects.

    kind="integral" slashes the coupled nested integral in weight
    1 - alpha_1; kind="integrand" slashes the level-1 integrand in weight
    alpha_1 + 1.  The compared side evaluates the same object with the
    base moved through the inverse matrix and every form replaced by its
    slash, which must have a known closed form (level one under integer
    unimodular matrices, or the level reflection).  Form weights must
    match the weight link of the exponents.
    """
    forms = tuple(forms)
    alphas = _check_inner(alphas, "modularity_residual")
    if len(alphas) != len(forms):
        raise DomainError("need one exponent per form")
    link = weight_link(alphas)
    for f, k in zip(forms, link.weights):
        if f.weight != k:
            raise ConfigurationError(
                f"{f.label} has weight {f.weight}, the exponents need {k}"
            )
    mat = _as_matrix(gamma)
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("evaluation point must lie in the upper half-plane")
    if kind == "integral":
        w = 1 - alphas[0]

        def evalf(zz, base):
            return eichler_integral_direct(forms, alphas, zz, base, path)

    elif kind == "integrand":
        w = alphas[0] + 1

        def evalf(zz, base):
            return eichler_integrand_eval(forms, alphas[1:], zz, base, path)

    else:
        raise DomainError(f"kind must be 'integral' or 'integrand', got {kind!r}")

    mult = 1.0 + 0j
    for f, k in zip(forms, link.weights):
        mult *= _slashed_form(f, k, mat)

    ma, mb, mc, md, det = mat
    gz = (ma * z + mb) / (mc * z + md)
    lhs = evalf(gz, a)
    lhs_scale = branch_pow(det, w / 2.0) * branch_pow(mc * z + md, -w)
    rhs = evalf(z, _apply_mobius(_inverse_matrix(mat), a))
    residual = lhs_scale * lhs.value - mult * rhs.value
    err = abs(lhs_scale) * lhs.err_abs + abs(mult) * rhs.err_abs
    return EvalResult(residual, err, lhs.terms_used + rhs.terms_used)


# ---------------------------------------------------------------------------
# completed transforms and reflection identities
# ---------------------------------------------------------------------------

def lambda_transform(g: Callable, s, path: VerticalPathSpec | None = None, *,
                     cusp_decay: tuple | None = None) -> EvalResult:
    """Completed vertical transform of a black-box integrand by quadrature.

    Only meaningful when g decays at both ends of the path; the error
    budget goes infinite otherwise (see mellin_vertical_quadrature).
    """
    return mellin_vertical_quadrature(g, s, path, cusp_decay=cusp_decay)


def _axis_poly_coeffs(series: FourierSeries, alpha1: int, t_base: float) -> tuple:
    """Polynomial carried by moving the integral base down from i*infinity.

    ``series`` is the integrand itself (the form, or its twist).  The
    coefficient of z^j is C(alpha1-1, j) (-1)^j times the moment integral
    of the series against w^(alpha1-1-j) from i*infinity down to the base
    height, summed termwise through incomplete gammas.  Returns
    (coefficients, absolute scale) for error budgets.
    """
    per = series.period
    kap1 = TWO_PI / per
    lmax = min(series.length, int((80.0 + 2.0 * alpha1) / (kap1 * t_base)) + 1)
    B = series.prefactor * series.coefficients[1:lmax + 1]
    kaps = kap1 * np.arange(1, lmax + 1)
    poly = np.zeros(alpha1, dtype=complex)
    scale = 0.0
    for j in range(alpha1):
        nu = alpha1 - 1 - j
        tot = 0j
        atot = 0.0
        for l in range(lmax):
            if B[l] == 0:
                continue
            term = B[l] * kaps[l] ** (-(nu + 1.0)) * upper_incomplete_gamma(
                nu + 1.0, kaps[l] * t_base
            )
            tot += term
            atot += abs(term)
        poly[j] = comb(alpha1 - 1, j) * (-1) ** j * (-(1j ** (nu + 1))) * tot
        scale += comb(alpha1 - 1, j) * atot
    return poly, scale


def _form_series(form: QExpansion) -> FourierSeries:
    """The bare q-expansion of a form as a period-one Fourier series."""
    return FourierSeries(
        period=1.0,
        coefficients=form.coefficients.copy(),
        growth=(form.growth_constant, form.growth_exponent, 0.0),
    )


def _axis_half_transform(series: FourierSeries, poly: np.ndarray, sigma,
                         t0: float) -> tuple:
    """(value, err) of the upper-half transform of (series - polynomial).

    The series piece is summed termwise through incomplete gammas from
    height t0 upward; the polynomial piece integrates each power along
    the rest of the vertical path in closed form, continued in sigma.
    """
    sigma = complex(sigma)
    per = series.period
    kap1 = TWO_PI / per
    i_pow = cmath.exp(0.5j * math.pi * sigma)
    lmax = min(series.length, int((80.0 + 2.0 * abs(sigma)) / (kap1 * t0)) + 1)
    val = 0j
    absum = 0.0
    for l in range(1, lmax + 1):
        b = series.prefactor * series.coefficients[l]
        if b == 0:
            continue
        term = -i_pow * b * branch_pow(kap1 * l, -sigma) * upper_incomplete_gamma(
            sigma, kap1 * l * t0
        )
        val += term
        absum += abs(term)
    tail = 0.0
    if lmax < series.length:
        nxt = np.max(np.abs(series.prefactor * series.coefficients[lmax + 1:]))
        x = kap1 * (lmax + 1) * t0
        tail = (
            2.0 * float(nxt) * abs(i_pow) * x ** (sigma.real - 1.0)
            * math.exp(-x) / kap1 / (1.0 - math.exp(-kap1 * t0))
        )
    z0 = 1j * t0
    for j, pj in enumerate(poly):
        den = sigma + j
        if abs(den) < 1e-12:
            raise PoleError(
                f"completed transform has a pole at exponent {sigma:.6g} (index {j})"
            )
        term = -pj * branch_pow(z0, den) / den
        val += term
        absum += abs(term)
    return val, 1e-15 * absum + tail


def _reflection_factor(alpha1: int, N: int, eps_prod: complex, s: complex) -> complex:
    """(-1)^(alpha1 - 1 + s) N^((1 - alpha1)/2 - s) times the eigenvalue."""
    return (
        branch_pow(-1.0, alpha1 - 1 + s)
        * branch_pow(float(N), (1 - alpha1) / 2.0 - s)
        * eps_prod
    )


def _require_link(forms, alphas, what: str) -> None:
    link = weight_link(alphas)
    for f, k in zip(forms, link.weights):
        if f.weight != k:
            raise ConfigurationError(
                f"{what}: {f.label} has weight {f.weight}, the exponents need {k}"
            )
    if any(a % 2 == 0 for a in alphas):
        raise ConfigurationError(
            f"{what}: the reflection argument needs odd exponents (even weights)"
        )


def _lambda_closed(form: QExpansion, alpha1: int, s: complex) -> EvalResult:
    """Completed transform of the depth-one nested integral, termwise.

    Splits the path at the reflection-fixed height, expands both halves
    termwise, and folds the lower half through the reflection of the
    integral, whose eigenvalue the form must carry.
    """
    if form.fricke_eigenvalue is None:
        raise ConfigurationError(
            f"{form.label}: reflection eigenvalue unknown, cannot complete"
        )
    _require_link((form,), (alpha1,), "lambda_completed")
    N = form.level
    t0 = 1.0 / math.sqrt(N)
    series = eichler_fourier_series([form], (alpha1,), kind="integral")
    poly, pscale = _axis_poly_coeffs(_form_series(form), alpha1, t0)
    a_s, e_s = _axis_half_transform(series, poly, s, t0)
    s_ref = 1 - alpha1 - s
    a_r, e_r = _axis_half_transform(series, poly, s_ref, t0)
    fold = (
        form.fricke_eigenvalue
        * branch_pow(float(N), (1 - alpha1) / 2.0 - s)
        * branch_pow(-1.0, s)
    )
    value = a_s + fold * a_r
    err = e_s + abs(fold) * e_r + 1e-15 * pscale * (1.0 + abs(fold))
    return EvalResult(value, err, series.length)


def _tilde_families(forms, alphas, grid: PathGrid, *,
                    suffixes: bool = False) -> tuple:
    """Moment integrals of the nested integrand along a grid.

    Inner kernels are always accumulated from the grid start (the base
    point of the nested integral).  The outer families are prefixes from
    the start by default; with suffixes=True they are integrals from each
    node to the grid end, accumulated from that end so that small tails
    are not computed as differences of large totals.

    Returns (list of family arrays for the outer moments 0..alpha_1-1,
    list of endpoint totals, cap of the inner factor).
    """
    n = len(forms)
    fv = _forms_on_grid(forms, grid)
    nodes = grid.nodes
    K_next = np.ones_like(nodes)
    for r in range(n, 1, -1):
        ar = alphas[r - 1]
        fams = [grid.prefix(fv[r - 1] * nodes ** p * K_next) for p in range(ar)]
        K_next = np.zeros_like(nodes)
        for nu in range(ar):
            K_next += comb(ar - 1, nu) * (-nodes) ** (ar - 1 - nu) * fams[nu]
    cap = float(np.max(np.abs(K_next)))
    rev = PathGrid(list(reversed(grid.edges))) if suffixes else None
    families = []
    totals = []
    for nu in range(alphas[0]):
        g = fv[0] * nodes ** nu * K_next
        totals.append(grid.integrate(g))
        if suffixes:
            families.append(-rev.prefix(g[::-1, ::-1])[::-1, ::-1])
        else:
            families.append(grid.prefix(g))
    return families, totals, cap


def _two_sided_value(forms, alphas, s, t0: float, up: PathGrid,
                     dn: PathGrid) -> tuple:
    """One evaluation of the two-sided regularised transform.

    Returns (value, absolute-sum proxy, cap of the inner factors).
    """
    a1 = alphas[0]
    z0 = 1j * t0
    binoms = [comb(a1 - 1, nu) for nu in range(a1)]

    suf_up, tot_up, cap_up = _tilde_families(forms, alphas, up, suffixes=True)
    nodes_up = up.nodes
    remainder = np.zeros_like(nodes_up)
    for nu in range(a1):
        remainder -= binoms[nu] * (-nodes_up) ** (a1 - 1 - nu) * suf_up[nu]
    pow_up = _branch_pow_nodes(nodes_up, s - 1)
    q_top = -up.integrate(remainder * pow_up)
    absum = up.integrate_abs(remainder * pow_up)

    poly_term = 0j
    for j in range(a1):
        den = s + j
        if abs(den) < 1e-12:
            raise PoleError(
                f"completed transform has a pole at exponent {s:.6g} (index {j})"
            )
        pj = binoms[a1 - 1 - j] * (-1) ** j * tot_up[a1 - 1 - j]
        poly_term += pj * branch_pow(z0, s + j) / den
        absum += abs(pj * branch_pow(z0, s + j) / den)

    # Toward the cusp the integral approaches a degree a1-1 polynomial in z
    # (kernel powers of z carry the cusp-end moments), so the bottom half
    # gets the same polynomial subtraction as the top, this time built from
    # the down-grid totals.
    suf_dn, tot_dn, cap_dn = _tilde_families(forms, alphas, dn, suffixes=True)
    nodes_dn = dn.nodes
    remainder_dn = np.zeros_like(nodes_dn)
    for nu in range(a1):
        remainder_dn -= binoms[nu] * (-nodes_dn) ** (a1 - 1 - nu) * suf_dn[nu]
    pow_dn = _branch_pow_nodes(nodes_dn, s - 1)
    q_bot = dn.integrate(remainder_dn * pow_dn)
    absum += dn.integrate_abs(remainder_dn * pow_dn)

    const_term = 0j
    for j in range(a1):
        qj = binoms[a1 - 1 - j] * (-1) ** j * tot_dn[a1 - 1 - j]
        const_term -= qj * branch_pow(z0, s + j) / (s + j)
        absum += abs(qj * branch_pow(z0, s + j) / (s + j))

    value = q_top + poly_term + q_bot + const_term
    return value, absum, max(cap_up, cap_dn)


def _lambda_two_sided(forms, alphas, s, path: VerticalPathSpec) -> EvalResult:
    """Completed transform by quadrature on both sides of the split height.

    Independent of any reflection: the top polynomial part comes from the
    endpoint moments of the same grid, the bottom constant from the
    integral's own limit toward the cusp.
    """
    s = complex(s)
    N = forms[0].level
    if any(f.level != N for f in forms):
        raise ConfigurationError("all forms must share one level")
    t0 = 1.0 / math.sqrt(N)
    t_hi = max(path.T, t0 + 4.0)
    t_lo = min(path.eps, t0 / 2.0)
    up = PathGrid([complex(0.0, t) for t in _vertical_ts(t0, t_hi)])
    dn = PathGrid([complex(0.0, t) for t in reversed(_vertical_ts(t_lo, t0))])
    v0, _, _ = _two_sided_value(forms, alphas, s, t0, up, dn)
    v1, absum, cap = _two_sided_value(
        forms, alphas, s, t0, up.refined(), dn.refined()
    )
    err = abs(v1 - v0) + 5e-16 * absum + 1e-15 * abs(v1)
    # dropped tail above the truncation height
    sig = s.real
    g_top = (
        _decay_constant(forms[0], t_hi) * math.exp(-TWO_PI * t_hi)
        * (2.0 * t_hi) ** (alphas[0] - 1) * max(cap, 1.0)
        * t_hi ** max(sig - 1.0, 0.0)
    )
    from .iterated import _top_tail

    err += _top_tail(g_top, sum(alphas) + max(sig - 1.0, 0.0), t_hi)
    # dropped strip below the cusp cut-off
    flip = _cusp_flip_bound(forms[0])
    if flip is None:
        err = math.inf
    else:
        A, k, Nt = flip
        err += (
            2.0 * t_lo * _cusp_peak(A, k, Nt, sig, t_lo)
            * max(cap, 1.0) * 2.0 ** (alphas[0] - 1)
        )
    return EvalResult(v1, err, 2 * (up.node_count + dn.node_count))


def lambda_completed(forms, alphas, s, *, path: VerticalPathSpec | None = None,
                     method: str = "auto") -> EvalResult:
    """Completed vertical transform of the nested integral based at i/sqrt(N).

    The transform converges at neither end of the path, so it is defined
    by regularisation: the polynomial the integral approaches at the top
    is subtracted and integrated in closed form, and the limit value at
    the cusp likewise.  method="closed" (depth one only) does everything
    termwise and folds the bottom half through the reflection;
    method="quadrature" (depth up to two) samples the integral directly
    and never uses the reflection, which makes the two methods
    independent checks of one another.  method="auto" picks "closed" at
    depth one and "quadrature" at depth two.
    """
    forms = tuple(forms)
    alphas = _check_inner(alphas, "lambda_completed")
    if len(alphas) != len(forms):
        raise DomainError("need one exponent per form")
    if len(forms) > 2:
        raise CostGuardError(
            f"completed transforms are budgeted for depth <= 2, got {len(forms)}"
        )
    path = path or VerticalPathSpec()
    s = complex(s)
    if method == "auto":
        method = "closed" if len(forms) == 1 else "quadrature"
    if method == "closed":
        if len(forms) != 1:
            raise DomainError("method='closed' handles depth one only")
        return _lambda_closed(forms[0], alphas[0], s)
    if method == "quadrature":
        return _lambda_two_sided(forms, alphas, s, path)
    raise DomainError(f"method must be 'auto', 'closed' or 'quadrature', got {method!r}")


def functional_equation_residual(alphas, forms, s, *, N: int | None = None,
                                 path: VerticalPathSpec | None = None,
                                 method: str = "auto") -> EvalResult:
    """Residual of the reflection identity of the completed transform.

    Compares the transform at s against the reflection factor times the
    transform at 1 - alpha_1 - s.  Needs every form to carry its
    reflection eigenvalue, weights matching the weight link (which forces
    odd exponents), and depth at most two.
    """
    forms = tuple(forms)
    alphas = _check_inner(alphas, "functional_equation_residual")
    if len(alphas) != len(forms):
        raise DomainError("need one exponent per form")
    if len(forms) > 2:
        raise CostGuardError(
            f"the reflection residual is budgeted for depth <= 2, got {len(forms)}"
        )
    level = forms[0].level
    if any(f.level != level for f in forms):
        raise ConfigurationError("all forms must share one level")
    if N is None:
        N = level
    elif N != level:
        raise ConfigurationError(f"level mismatch: forms have {level}, N = {N}")
    eps_prod = 1.0 + 0j
    for f in forms:
        if f.fricke_eigenvalue is None:
            raise ConfigurationError(
                f"{f.label}: reflection eigenvalue unknown, cannot reflect"
            )
        eps_prod *= f.fricke_eigenvalue
    _require_link(forms, alphas, "functional_equation_residual")
    s = complex(s)
    lam_s = lambda_completed(forms, alphas, s, path=path, method=method)
    lam_r = lambda_completed(forms, alphas, 1 - alphas[0] - s, path=path,
                             method=method)
    factor = _reflection_factor(alphas[0], N, eps_prod, s)
    residual = lam_s.value - factor * lam_r.value
    err = lam_s.err_abs + abs(factor) * lam_r.err_abs
    return EvalResult(residual, err, lam_s.terms_used + lam_r.terms_used)


# ---------------------------------------------------------------------------
# twisted completed transforms
# ---------------------------------------------------------------------------

def _check_twist_setup(form: QExpansion, alpha1: int, chi: DirichletCharacter,
                       what: str) -> None:
    if form.weight != alpha1 + 1:
        raise ConfigurationError(
            f"{what}: exponent {alpha1} pairs with weight {alpha1 + 1}, "
            f"form has {form.weight}"
        )
    if alpha1 % 2 == 0:
        raise ConfigurationError(f"{what}: the reflection needs an odd exponent")
    N = form.level
    M = chi.modulus
    if M % N != 0 or not 1 <= M // N <= N:
        raise ConfigurationError(
            f"{what}: modulus {M} is not N*c with c in 1..{N} for level {N}"
        )


def twisted_tilde_series(form: QExpansion, alpha1: int,
                         chi: DirichletCharacter) -> FourierSeries:
    """Fourier series of the nested integral of the twisted form from i*inf.

    The twist has period M, so frequencies step by 1/M and each
    coefficient picks up (2 pi l / M)^(-alpha1); the prefactor carries the
    gamma factor and phase of the kernel integration.
    """
    alpha1 = int(alpha1)
    if alpha1 < 1:
        raise DomainError("exponent must be a positive integer")
    tw = twist_series(form, chi)
    M = tw.period
    L = tw.length
    coeffs = tw.coefficients.copy()
    ls = np.arange(1, L + 1, dtype=float)
    coeffs[1:] = coeffs[1:] * ls ** (-float(alpha1))
    pref = (
        tw.prefactor
        * (-(1j ** alpha1))
        * gamma_complex(alpha1)
        * (TWO_PI / M) ** (-float(alpha1))
    )
    growth = None
    if tw.growth is not None:
        K, P, kap = tw.growth
        growth = (K, P - alpha1, kap)
    return FourierSeries(period=M, coefficients=coeffs, prefactor=pref,
                         growth=growth)


def twisted_eichler_value(form: QExpansion, alpha1: int, chi: DirichletCharacter,
                          z, base_point) -> complex:
    """The twisted nested integral from an axis base point, by series.

    Value of the integral from the base to z of the twisted form against
    the coupled kernel: the series from i*infinity minus the polynomial
    that moves the base down the axis.
    """
    base = complex(base_point)
    if base.real != 0.0 or base.imag <= 0.0:
        raise ConfigurationError(
            "base point must lie on the positive imaginary axis"
        )
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("evaluation point must lie in the upper half-plane")
    series = twisted_tilde_series(form, alpha1, chi)
    poly, _ = _axis_poly_coeffs(twist_series(form, chi), int(alpha1), base.imag)
    val = complex(series.evaluate(z))
    for j, pj in enumerate(poly):
        val -= pj * z ** j
    return val


def twisted_completed(form: QExpansion, alpha1: int, chi: DirichletCharacter,
                      s, base_point, *, path=None) -> EvalResult:
    """Completed transform of the twisted nested integral based at i.

    The path splits at height one, the fixed point of the reflection
    z -> -1/z, and the bottom half folds onto the top half of the
    conjugate twist; that demands the base point i, the only axis point
    the reflection fixes.
    """
    alpha1 = int(alpha1)
    if base_point is None:
        raise ConfigurationError(
            "twisted transforms need an explicit base point; the reflection "
            "argument fixes base i"
        )
    base = complex(base_point)
    if abs(base - 1j) > 1e-12:
        raise ConfigurationError(
            f"the reflection only fixes base i, got {base_point}"
        )
    _check_twist_setup(form, alpha1, chi, "twisted_completed")
    s = complex(s)
    kappa = complex(chi(-1))
    series = twisted_tilde_series(form, alpha1, chi)
    poly, pscale = _axis_poly_coeffs(twist_series(form, chi), alpha1, 1.0)
    a_s, e_s = _axis_half_transform(series, poly, s, 1.0)
    bar = chi.conjugate()
    series_bar = twisted_tilde_series(form, alpha1, bar)
    poly_bar, pscale_bar = _axis_poly_coeffs(twist_series(form, bar), alpha1, 1.0)
    s_ref = 1 - alpha1 - s
    a_r, e_r = _axis_half_transform(series_bar, poly_bar, s_ref, 1.0)
    fold = kappa * branch_pow(-1.0, s)
    value = a_s + fold * a_r
    err = e_s + abs(fold) * e_r + 1e-15 * (pscale + pscale_bar)
    return EvalResult(value, err, series.length)


def twisted_residual(alphas, forms, chis, s, base_point, *, path=None) -> EvalResult:
    """Residual of the reflection identity of the twisted completed transform.

    Compares the transform of the twisted object at s against
    (-1)^s chi(-1) times the transform of the conjugate twist at
    1 - alpha_1 - s.  The base point must be given explicitly (use i);
    depth one only.
    """
    forms = tuple(forms)
    alphas = _check_inner(alphas, "twisted_residual")
    chis = tuple(chis)
    if len(alphas) != len(forms) or len(chis) != len(forms):
        raise DomainError("need one exponent and one character per form")
    if len(forms) != 1:
        raise ConfigurationError(
            "the twisted reflection is implemented for a single form"
        )
    if base_point is None:
        raise ConfigurationError(
            "twisted transforms need an explicit base point; the reflection "
            "argument fixes base i"
        )
    s = complex(s)
    form, alpha1, chi = forms[0], alphas[0], chis[0]
    kappa = complex(chi(-1))
    lam_s = twisted_completed(form, alpha1, chi, s, base_point, path=path)
    lam_r = twisted_completed(form, alpha1, chi.conjugate(), 1 - alpha1 - s,
                              base_point, path=path)
    factor = branch_pow(-1.0, s) * kappa
    residual = lam_s.value - factor * lam_r.value
    err = lam_s.err_abs + abs(factor) * lam_r.err_abs
    return EvalResult(residual, err, lam_s.terms_used + lam_r.terms_used)
