"""Iterated integrals of cusp forms along piecewise-vertical paths.

Two families of nested integrals show up, differing only in their kernels:

* period type: each level carries an uncoupled power kernel z_r^(s_r - 1),
  integrated from i*infinity down to 0;
* antiderivative (tilde) type: level r couples to the previous variable
  through (z_r - z_{r-1})^(alpha_r - 1) with positive integer exponents,
  integrated from a base point a to a moving endpoint z.

Both are evaluated by quadrature on a shared panel grid: every level is a
cumulative (prefix) integral of form values times kernel factors, so one
pass per level suffices.  The coupled kernels are expanded binomially into
per-level families W_r(.; p); the outer form's exponential decay keeps that
expansion numerically safe at the heights where the powers get large.

The same objects have Fourier expansions with coefficients given by the
convolution chains in `chains`; `eichler_fourier_series` builds those, and
`mellin_vertical` integrates such a series against z^(s-1) along the
imaginary axis, which is what analytic continuation of the nested L-series
runs on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chains import TailProfile, chain_coefficients, chain_profile
from .forms import FourierSeries, QExpansion, evaluate_form_batch
from .numerics import (
    _GL_NODES,
    _GL_WEIGHTS,
    TWO_PI,
    AccuracyError,
    DomainError,
    EvalResult,
    branch_pow,
    exp_power_upper_integral,
    gamma_complex,
    gamma_factor_tuple,
    integrate_adaptive,
    power_log_tail,
    upper_incomplete_gamma,
)

__all__ = [
    "CostGuardError",
    "INF_BASE",
    "VerticalPathSpec",
    "PathGrid",
    "antiderivative_word_integral",
    "eichler_fourier_series",
    "eichler_integral_direct",
    "eichler_integrand_eval",
    "mellin_vertical",
    "mellin_vertical_quadrature",
    "period_integral_direct",
    "period_integrand_eval",
]

INF_BASE = complex(0.0, math.inf)


class CostGuardError(RuntimeError):
    """The requested computation exceeds the depth this package budgets for."""


@dataclass(frozen=True)
class VerticalPathSpec:
    """Path parameters: truncate i*infinity at height T, stop above 0 at eps."""

    T: float = 12.0
    eps: float = 0.05
    tol: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0 < self.T):
            raise DomainError(
                f"need 0 < eps < 1 < T, got eps={self.eps}, T={self.T}"
            )
        if self.tol <= 0.0:
            raise DomainError("tol must be positive")


# ---------------------------------------------------------------------------
# panel grids with prefix integration
# ---------------------------------------------------------------------------

def _partial_integration_matrix() -> np.ndarray:
    """S with (S v)_i = integral of v's interpolant from -1 to node i.

    Built in the Legendre basis: the 15-point rule reads off coefficients of
    polynomials up to degree 14 exactly, and antiderivatives of P_k are
    (P_{k+1} - P_{k-1}) / (2k + 1), which vanish at -1.
    """
    from numpy.polynomial import legendre

    x = _GL_NODES
    P = np.zeros((16, 15))
    for k in range(16):
        c = np.zeros(k + 1)
        c[k] = 1.0
        P[k] = legendre.legval(x, c)
    coeff_of_values = (
        ((2.0 * np.arange(15) + 1.0) / 2.0)[:, None] * P[:15] * _GL_WEIGHTS[None, :]
    )
    anti = np.zeros((15, 15))
    anti[:, 0] = x + 1.0
    for k in range(1, 15):
        anti[:, k] = (P[k + 1] - P[k - 1]) / (2.0 * k + 1.0)
    return anti @ coeff_of_values


_PARTIAL = _partial_integration_matrix()


class PathGrid:
    """Gauss-Legendre panels along a piecewise-straight path.

    Holds the flattened node array and exposes whole-path integration plus
    prefix integration (cumulative from the start of the path to every
    node), which is what stacks iterated integrals in a single pass.
    """

    def __init__(self, edges: Sequence[complex]):
        edges = np.asarray(edges, dtype=complex)
        if len(edges) < 2:
            raise DomainError("a path needs at least two edges")
        starts = edges[:-1]
        ends = edges[1:]
        self.edges = edges
        self.jac = (ends - starts) / 2.0
        mids = (ends + starts) / 2.0
        self.nodes = mids[:, None] + self.jac[:, None] * _GL_NODES[None, :]

    @property
    def node_count(self) -> int:
        return self.nodes.size

    def refined(self) -> "PathGrid":
        """The grid with every panel split in half."""
        e = self.edges
        mids = (e[:-1] + e[1:]) / 2.0
        out = np.empty(2 * len(e) - 1, dtype=complex)
        out[0::2] = e
        out[1::2] = mids
        return PathGrid(out)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.jac * (values @ _GL_WEIGHTS)))

    def integrate_abs(self, values: np.ndarray) -> float:
        return float(np.sum(np.abs(self.jac) * (np.abs(values) @ _GL_WEIGHTS)))

    def prefix(self, values: np.ndarray) -> np.ndarray:
        """Cumulative integral from the path start to every node."""
        panel = self.jac * (values @ _GL_WEIGHTS)
        offsets = np.concatenate([[0.0 + 0.0j], np.cumsum(panel)[:-1]])
        return offsets[:, None] + self.jac[:, None] * (values @ _PARTIAL.T)


def _vertical_ts(t_lo: float, t_hi: float) -> list[float]:
    """Panel edge heights, graded so panel width tracks the height."""
    ts = [t_lo]
    t = t_lo
    while t < t_hi - 1e-12:
        t = min(t + max(min(0.5, 0.45 * t), 1e-4), t_hi)
        ts.append(t)
    return ts


def _horizontal_xs(x_lo: float, x_hi: float, height: float) -> list[float]:
    width = max(min(0.5, 0.45 * height), 1e-4)
    count = max(1, int(math.ceil(abs(x_hi - x_lo) / width)))
    return list(np.linspace(x_lo, x_hi, count + 1))


def _append(edges: list, more: Sequence[complex]) -> None:
    for p in more:
        if not edges or abs(p - edges[-1]) > 1e-14:
            edges.append(p)


def _path_edges(a: complex, z: complex, spec: VerticalPathSpec) -> tuple:
    """Panel edges from a to z plus which cusp tails were truncated."""
    edges: list[complex] = []
    top_height = None
    cusp_eps = None
    if a == INF_BASE:
        t_hi = max(spec.T, z.imag + 2.0)
        ts = _vertical_ts(z.imag, t_hi)
        _append(edges, [complex(z.real, t) for t in reversed(ts)])
        top_height = t_hi
    elif a == 0:
        cusp_eps = spec.eps
        if z.imag <= spec.eps:
            raise DomainError(
                f"endpoint height {z.imag:g} is inside the cusp cut-off {spec.eps:g}"
            )
        if z.real == 0.0:
            _append(edges, [complex(0.0, t) for t in _vertical_ts(spec.eps, z.imag)])
        else:
            H = max(1.0, z.imag)
            _append(edges, [complex(0.0, t) for t in _vertical_ts(spec.eps, H)])
            _append(edges, [complex(x, H) for x in _horizontal_xs(0.0, z.real, H)])
            _append(
                edges,
                [complex(z.real, t) for t in reversed(_vertical_ts(z.imag, H))],
            )
    else:
        H = max(1.0, a.imag, z.imag)
        _append(edges, [complex(a.real, t) for t in _vertical_ts(a.imag, H)])
        _append(edges, [complex(x, H) for x in _horizontal_xs(a.real, z.real, H)])
        _append(edges, [complex(z.real, t) for t in reversed(_vertical_ts(z.imag, H))])
    return edges, top_height, cusp_eps


def _validate_base(a) -> complex:
    if a == INF_BASE:
        return INF_BASE
    a = complex(a)
    if a == 0:
        return 0j
    if a.imag <= 0:
        raise DomainError(
            "base must be i*infinity (INF_BASE), the cusp 0, or a point with Im > 0"
        )
    return a


def _branch_pow_nodes(nodes: np.ndarray, s: complex) -> np.ndarray:
    """nodes**s elementwise on the package branch (cut on -i axis)."""
    s = complex(s)
    if s.imag == 0.0 and s.real == int(s.real) and abs(s.real) <= 64:
        return nodes ** int(s.real)
    ang = np.angle(nodes)
    ang = np.where(ang < -math.pi / 2.0, ang + TWO_PI, ang)
    logs = np.log(np.abs(nodes)) + 1j * ang
    return np.exp(s * logs)


# ---------------------------------------------------------------------------
# shared tail bounds
# ---------------------------------------------------------------------------

def _decay_constant(form: QExpansion, y0: float) -> float:
    """K with |f(iy)| <= K exp(-2 pi y) for y >= y0 (from the stored range)."""
    m = np.arange(1, form.length + 1)
    with np.errstate(under="ignore"):
        K = float(np.dot(np.abs(form.coefficients[1:]), np.exp(-TWO_PI * y0 * (m - 1))))
    return K


def _cusp_flip_bound(form: QExpansion) -> tuple | None:
    """(A, k, Ntilde) with |f(it)| <= A t^-k exp(-2 pi/(Ntilde t)), t <= 1."""
    if form.level == 1:
        return (_decay_constant(form, 1.0), form.weight, 1)
    if form.fricke_eigenvalue is None:
        return None
    N = form.level
    return (
        N ** (-form.weight / 2.0) * _decay_constant(form, 1.0 / N),
        form.weight,
        N,
    )


def _cusp_peak(A: float, k: float, Ntilde: float, power: float, eps: float) -> float:
    """max over 0 < t <= eps of A t^power t^-k exp(-2 pi/(Ntilde t))."""
    drop = k - power  # t^-drop against the essential decay
    if drop > 0:
        t_star = min(eps, TWO_PI / (Ntilde * drop))
    else:
        t_star = eps
    return A * math.exp(
        -drop * math.log(t_star) - TWO_PI / (Ntilde * t_star)
    )


def _top_tail(g_top: float, growth_power: float, t_hi: float) -> float:
    """Bound for the dropped [t_hi, inf) piece of an integrand that decays
    at least like exp(-2 pi (t - t_hi)) (t / t_hi)^growth_power."""
    q = max(growth_power, 0.0)
    integral = exp_power_upper_integral(TWO_PI, q + 1.0, t_hi)
    return g_top * math.exp(TWO_PI * t_hi - q * math.log(t_hi)) * abs(integral)


# ---------------------------------------------------------------------------
# direct iterated quadrature
# ---------------------------------------------------------------------------

def _forms_on_grid(forms: Sequence[QExpansion], grid: PathGrid) -> list:
    return [evaluate_form_batch(f, grid.nodes) for f in forms]


def _coupled_value(forms, alphas, z, grid) -> tuple:
    """(value, abs integral, low-end inner cap) of the tilde-type integral."""
    n = len(forms)
    fv = _forms_on_grid(forms, grid)
    nodes = grid.nodes
    K_next = np.ones_like(nodes)
    for r in range(n, 1, -1):
        ar = alphas[r - 1]
        fams = [
            grid.prefix(fv[r - 1] * nodes ** p * K_next) for p in range(ar)
        ]
        K_next = np.zeros_like(nodes)
        for nu in range(ar):
            K_next += (
                math.comb(ar - 1, nu) * (-nodes) ** (ar - 1 - nu) * fams[nu]
            )
    integrand = fv[0] * (nodes - z) ** (alphas[0] - 1) * K_next
    inner_cap = float(np.max(np.abs(K_next)))
    return grid.integrate(integrand), grid.integrate_abs(integrand), inner_cap


def _uncoupled_value(forms, exponents, grid) -> tuple:
    """Same for the period-type integral (power kernels, no coupling)."""
    n = len(forms)
    fv = _forms_on_grid(forms, grid)
    nodes = grid.nodes
    K_next = np.ones_like(nodes)
    for r in range(n, 1, -1):
        K_next = grid.prefix(fv[r - 1] * _branch_pow_nodes(nodes, exponents[r - 1] - 1) * K_next)
    integrand = fv[0] * _branch_pow_nodes(nodes, exponents[0] - 1) * K_next
    inner_cap = float(np.max(np.abs(K_next)))
    return grid.integrate(integrand), grid.integrate_abs(integrand), inner_cap


def _refine_pair(builder: Callable[[PathGrid], tuple], grid: PathGrid) -> tuple:
    v0, _, _ = builder(grid)
    fine = grid.refined()
    v1, absint, cap = builder(fine)
    return v1, abs(v1 - v0) + 1e-15 * abs(v1), absint, cap, fine


def _check_alphas(alphas, count: int, what: str) -> tuple:
    alphas = tuple(alphas)
    if len(alphas) != count:
        raise DomainError(f"{what}: expected {count} exponents, got {len(alphas)}")
    for a in alphas:
        if int(a) != a or a < 1:
            raise DomainError(f"{what}: exponents must be positive integers")
    return tuple(int(a) for a in alphas)


def eichler_integral_direct(forms, alphas, z, a=INF_BASE,
                            path: VerticalPathSpec | None = None) -> EvalResult:
    """Quadrature value of the coupled-kernel nested integral from a to z.

    Kernels are (z_r - z_{r-1})^(alpha_r - 1) with z_0 = z; the base may be
    INF_BASE, the cusp 0, or any point of the upper half-plane.  At z == a
    the value is exactly 0.
    """
    forms = tuple(forms)
    alphas = _check_alphas(alphas, len(forms), "eichler_integral_direct")
    path = path or VerticalPathSpec()
    a = _validate_base(a)
    z = complex(z)
    if z == a:
        return EvalResult(0j, 0.0, 0)
    if z.imag <= 0:
        raise DomainError("endpoint must lie in the upper half-plane")
    edges, top_height, cusp_eps = _path_edges(a, z, path)
    grid = PathGrid(edges)
    value, quad_err, absint, inner_cap, fine = _refine_pair(
        lambda g: _coupled_value(forms, alphas, z, g), grid
    )
    err = quad_err + 5e-16 * absint
    if top_height is not None:
        g_top = float(np.max(np.abs(
            _forms_on_grid(forms[:1], PathGrid(fine.edges[:2]))[0]
        ))) * (top_height + abs(z)) ** (alphas[0] - 1) * max(inner_cap, 1.0)
        err += _top_tail(g_top, sum(alphas), top_height)
    if cusp_eps is not None:
        flip = _cusp_flip_bound(forms[0])
        if flip is None:
            err = math.inf
        else:
            A, k, Nt = flip
            err += (
                2.0 * len(forms) * cusp_eps
                * _cusp_peak(A, k, Nt, 0.0, cusp_eps)
                * (abs(z) + cusp_eps) ** (alphas[0] - 1)
                * max(inner_cap, 1.0)
            )
    return EvalResult(value, err, fine.node_count)


def period_integral_direct(forms, exponents,
                           path: VerticalPathSpec | None = None) -> EvalResult:
    """Quadrature value of the power-kernel nested integral from i*inf to 0.

    Kernels are z_r^(s_r - 1); the first exponent may be any complex
    number, and the whole path is the imaginary axis truncated to
    [eps, max(T, ...)] with both cusp tails bounded into err_abs.
    Guarded to at most three nested levels.
    """
    forms = tuple(forms)
    if len(forms) > 3:
        raise CostGuardError(
            f"period-type quadrature is budgeted for up to 3 levels, got {len(forms)}"
        )
    exponents = tuple(complex(s) for s in exponents)
    if len(exponents) != len(forms):
        raise DomainError("need one exponent per form")
    path = path or VerticalPathSpec()
    t_hi = max(path.T, 2.0)
    edges = [complex(0.0, t) for t in reversed(_vertical_ts(path.eps, t_hi))]
    grid = PathGrid(edges)
    value, quad_err, absint, inner_cap, fine = _refine_pair(
        lambda g: _uncoupled_value(forms, exponents, g), grid
    )
    err = quad_err + 5e-16 * absint
    sigma1 = exponents[0].real
    im_fold = math.exp(math.pi * sum(abs(s.imag) for s in exponents) / 2.0)
    g_top = (
        _decay_constant(forms[0], t_hi)
        * math.exp(-TWO_PI * t_hi)
        * t_hi ** max(sigma1 - 1.0, 0.0)
        * im_fold
        * max(inner_cap, 1.0)
    )
    err += _top_tail(g_top, sum(max(s.real - 1.0, 0.0) for s in exponents), t_hi)
    flip = _cusp_flip_bound(forms[0])
    if flip is None:
        err = math.inf
    else:
        A, k, Nt = flip
        err += (
            2.0 * len(forms) * path.eps
            * _cusp_peak(A, k, Nt, sigma1 - 1.0, path.eps)
            * im_fold
            * max(inner_cap, 1.0)
        )
    return EvalResult(value, err, fine.node_count)


def eichler_integrand_eval(forms, inner_alphas, z, a=INF_BASE,
                           path: VerticalPathSpec | None = None) -> EvalResult:
    """f_1(z) times the coupled nested integral of the remaining forms.

    The level-2 kernel couples to z itself: this is the integrand whose
    Mellin transform produces the nested L-series.  With a single form the
    value is just f_1(z).
    """
    forms = tuple(forms)
    inner_alphas = _check_alphas(inner_alphas, len(forms) - 1, "eichler_integrand_eval")
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("evaluation point must lie in the upper half-plane")
    outer = evaluate_form_batch(forms[0], np.array([[z]]))[0, 0]
    if len(forms) == 1:
        return EvalResult(outer, 5e-16 * abs(outer), 1)
    inner = eichler_integral_direct(forms[1:], inner_alphas, z, a, path)
    return EvalResult(
        outer * inner.value, abs(outer) * inner.err_abs, inner.terms_used
    )


def period_integrand_eval(forms, inner_alphas, z, a=INF_BASE,
                          path: VerticalPathSpec | None = None) -> EvalResult:
    """f_1(z) times the power-kernel nested integral of the remaining forms."""
    forms = tuple(forms)
    inner_alphas = _check_alphas(inner_alphas, len(forms) - 1, "period_integrand_eval")
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("evaluation point must lie in the upper half-plane")
    outer = evaluate_form_batch(forms[0], np.array([[z]]))[0, 0]
    if len(forms) == 1:
        return EvalResult(outer, 5e-16 * abs(outer), 1)
    a = _validate_base(a)
    if z == a:
        return EvalResult(0j, 0.0, 0)
    path = path or VerticalPathSpec()
    edges, top_height, cusp_eps = _path_edges(a, z, path)
    grid = PathGrid(edges)
    exps = inner_alphas
    value, quad_err, absint, inner_cap, fine = _refine_pair(
        lambda g: _uncoupled_value(forms[1:], exps, g), grid
    )
    err = quad_err + 5e-16 * absint
    if top_height is not None:
        g_top = _decay_constant(forms[1], top_height) * math.exp(
            -TWO_PI * top_height
        ) * top_height ** (exps[0] - 1) * max(inner_cap, 1.0)
        err += _top_tail(g_top, sum(e - 1 for e in exps), top_height)
    if cusp_eps is not None:
        flip = _cusp_flip_bound(forms[1])
        if flip is None:
            err = math.inf
        else:
            A, k, Nt = flip
            err += (
                2.0 * len(forms) * cusp_eps
                * _cusp_peak(A, k, Nt, exps[0] - 1.0, cusp_eps)
                * max(inner_cap, 1.0)
            )
    return EvalResult(
        outer * value, abs(outer) * err, fine.node_count
    )


# ---------------------------------------------------------------------------
# Fourier series of the same objects
# ---------------------------------------------------------------------------

def _integrand_cusp_decay(forms, inner_alphas) -> tuple | None:
    """(A, k, Ntilde) bound for |f_1(it) * inner(it)| as t -> 0."""
    head = _cusp_flip_bound(forms[0])
    if head is None:
        return None
    A1, k1, Nt = head
    n = len(forms)
    if n == 1:
        return (A1, k1, Nt)
    cap = 2.0 ** (inner_alphas[0] - 1)
    for r in range(2, n + 1):
        ar = inner_alphas[r - 2]
        e_r = (ar - 1) + (inner_alphas[r - 1] - 1 if r < n else 0)
        flip = _cusp_flip_bound(forms[r - 1])
        if flip is None:
            return None
        A, k, N2 = flip
        low = 2.0 ** e_r * _cusp_peak(A, k, N2, 0.0, 1.0)
        high = (
            _decay_constant(forms[r - 1], 1.0)
            * 2.0 ** e_r
            * abs(exp_power_upper_integral(TWO_PI, e_r + 1.0, 1.0))
        )
        cap *= low + high
    return (A1 * cap, k1, Nt)


def eichler_fourier_series(forms, alphas, *, kind: str = "integrand",
                           count: int | None = None) -> FourierSeries:
    """Fourier expansion of the nested integral or of its level-1 integrand.

    kind="integral" wants the full exponent tuple (alpha_1..alpha_n) and
    returns the expansion of the coupled nested integral from i*infinity;
    kind="integrand" wants (alpha_2..alpha_n) and returns the expansion of
    f_1 times the inner integral, the function whose vertical Mellin
    transform carries the L-series.  Coefficients come from the convolution
    chains; the prefactor collects the gamma factor of the exponents over
    (-2 pi i) to their sum.
    """
    forms = tuple(forms)
    if not forms:
        raise DomainError("need at least one form")
    if kind == "integral":
        alphas = _check_alphas(alphas, len(forms), "eichler_fourier_series")
        inner = alphas[1:]
    elif kind == "integrand":
        alphas = _check_alphas(alphas, len(forms) - 1, "eichler_fourier_series")
        inner = alphas
    else:
        raise DomainError(f"kind must be 'integral' or 'integrand', got {kind!r}")
    if count is None:
        count = min(f.length for f in forms)
    coeffs = chain_coefficients([f.coefficients for f in forms], inner, count)
    prof = chain_profile([TailProfile.of_form(f) for f in forms], inner)
    cusp = None
    if kind == "integral":
        ms = np.arange(1, count + 1, dtype=float)
        coeffs[1:] /= ms ** float(alphas[0])
        prof = prof.shifted(float(alphas[0]))
    else:
        cusp = _integrand_cusp_decay(forms, inner)
    pref = gamma_factor_tuple(alphas) * branch_pow(-TWO_PI * 1j, -float(sum(alphas)))
    return FourierSeries(
        period=1.0,
        coefficients=coeffs,
        prefactor=pref,
        growth=(prof.K, prof.P, prof.kappa),
        cusp_decay=cusp,
    )


# ---------------------------------------------------------------------------
# vertical Mellin transform
# ---------------------------------------------------------------------------

def _abs_series_sum(series: FourierSeries, t: float) -> float:
    """sum of |prefactor b_l| e^(-2 pi l t / period): the cancellation scale."""
    L = series.length
    ls = np.arange(1, L + 1)
    with np.errstate(under="ignore"):
        total = float(
            np.dot(np.abs(series.coefficients[1:]), np.exp(-TWO_PI * t / series.period * ls))
        )
    return abs(series.prefactor) * total


def _power_integral(sigma: float, lo: float, hi: float) -> float:
    """integral of t^(sigma-1) dt over [lo, hi]."""
    if sigma == 0.0:
        return math.log(hi / lo)
    return (hi ** sigma - lo ** sigma) / sigma


def mellin_vertical(series: FourierSeries, s, path: VerticalPathSpec | None = None) -> EvalResult:
    """integral from i*infinity to 0 of series(z) * z^(s-1) dz.

    Three pieces: [1, inf) is summed termwise through upper incomplete
    gammas; [eps, 1] is adaptive quadrature of the series; (0, eps) is
    computed termwise when the series is an exact finite polynomial and
    Re s > 0, and otherwise only bounded into err_abs, using the declared
    cusp decay when the series carries one.  The quadrature cut-off eps is
    raised automatically when float cancellation in the series would drown
    the requested tolerance; that can only tighten the result because the
    cusp bound absorbs the abandoned strip.
    """
    s = complex(s)
    path = path or VerticalPathSpec()
    per = series.period
    sigma = s.real
    kappa1 = TWO_PI / per
    i_pow_s = cmath.exp(1j * math.pi * s / 2.0)
    L_full = series.length

    # termwise cut-off for the outer piece
    if series.growth is None:
        L = L_full
        tail_a = 0.0
    else:
        K, P, kap = series.growth
        L = max(8, int(per * max(4.0, 2.0 * abs(s - 1.0) + 2.0, sigma + 2.0) / TWO_PI) + 1)

        def outer_tail(after: int) -> float:
            # |kappa_l^-s Gamma(s, kappa_l)| <= 2 kappa_l^-1 e^-kappa_l once
            # kappa_l clears max(4, 2|s-1|+2), which the floor on L ensures.
            return power_log_tail(
                2.0 * abs(series.prefactor) * K / kappa1, P - 1.0, kap,
                math.exp(-kappa1), after,
            )

        while L < L_full and outer_tail(L + 1) > path.tol / 10.0:
            L = min(2 * L, L_full)
        tail_a = outer_tail(L + 1)

    ls = np.arange(1, L + 1)
    kappas = kappa1 * ls
    value_a = 0j
    abs_a = 0.0
    for l in range(1, L + 1):
        b = series.coefficients[l]
        if b == 0:
            continue
        term = (
            -i_pow_s
            * series.prefactor
            * b
            * branch_pow(kappas[l - 1], -s)
            * upper_incomplete_gamma(s, kappas[l - 1])
        )
        value_a += term
        abs_a += abs(term)

    # quadrature strip: raise eps if cancellation would poison it
    eps = path.eps
    if series.cusp_decay is not None:
        while eps < 0.5 and _abs_series_sum(series, eps) * 1e-15 > path.tol / 10.0:
            eps *= 1.5

    phase = cmath.exp(1j * math.pi * (s - 1.0) / 2.0)

    def strip_integrand(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        vals = series.evaluate(1j * t)
        return vals * np.exp((s - 1.0) * np.log(t)) * phase

    try:
        quad = integrate_adaptive(strip_integrand, eps, 1.0, tol=path.tol / 3.0,
                                  max_panels=2000)
    except AccuracyError as exc:
        quad = exc.best
    value_b = -1j * quad.value
    err_b = quad.err_abs
    err_b += _abs_series_sum(series, eps) * 5e-16 * _power_integral(sigma, eps, 1.0)
    err_b += series.tail_bound(eps, L_full) * abs(_power_integral(sigma, eps, 1.0))

    # inner piece
    value_c = 0j
    err_c = 0.0
    if series.growth is None and sigma > 0:
        g_s = gamma_complex(s)
        for l in range(1, L_full + 1):
            b = series.coefficients[l]
            if b == 0:
                continue
            kl = kappa1 * l
            term = (
                -i_pow_s * series.prefactor * b * branch_pow(kl, -s)
                * (g_s - upper_incomplete_gamma(s, kl * eps))
            )
            value_c += term
            err_c += 5e-15 * abs(term) + 1e-16 * abs(g_s) * abs(
                series.prefactor * b
            ) * kl ** (-sigma)
    elif series.cusp_decay is not None:
        A, k, Nt = series.cusp_decay
        err_c = eps * _cusp_peak(A, k, Nt, sigma - 1.0, eps)
    else:
        err_c = math.inf

    value = value_a + value_b + value_c
    err = tail_a + 5e-16 * abs_a + err_b + err_c
    return EvalResult(value, err, int(L) + quad.terms_used)


def mellin_vertical_quadrature(g: Callable, s, path: VerticalPathSpec | None = None,
                               *, cusp_decay: tuple | None = None) -> EvalResult:
    """Cross-check route: the same transform by quadrature of a callable.

    `g` must accept an array of upper half-plane points.  The [T, inf) tail
    is bounded from the sampled magnitude at iT assuming exp(-2 pi t) decay
    and the (0, eps) piece from `cusp_decay` when given (else it is only
    correct for integrands negligible below eps, and err_abs says so).
    """
    s = complex(s)
    path = path or VerticalPathSpec()
    sigma = s.real
    phase = cmath.exp(1j * math.pi * (s - 1.0) / 2.0)

    def integrand(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(g(1j * t)) * np.exp((s - 1.0) * np.log(t)) * phase

    try:
        quad = integrate_adaptive(integrand, path.eps, path.T, tol=path.tol / 2.0,
                                  max_panels=4000)
    except AccuracyError as exc:
        quad = exc.best
    g_top = abs(complex(np.asarray(g(np.array([1j * path.T]))).ravel()[0]))
    amp = math.exp(math.pi * abs(s.imag) / 2.0)
    err = quad.err_abs + _top_tail(
        g_top * amp * path.T ** (sigma - 1.0),
        sigma - 1.0,
        path.T,
    )
    if cusp_decay is not None:
        A, k, Nt = cusp_decay
        err += path.eps * _cusp_peak(A, k, Nt, sigma - 1.0, path.eps)
    elif sigma > 0:
        # estimate, not a bound: assumes |g| stays within 4x of g(i eps) below
        g_low = abs(complex(np.asarray(g(np.array([1j * path.eps]))).ravel()[0]))
        err += 4.0 * g_low * path.eps ** sigma / sigma
    else:
        err = math.inf
    return EvalResult(-1j * quad.value, err, quad.terms_used)


# ---------------------------------------------------------------------------
# antiderivative words
# ---------------------------------------------------------------------------

def antiderivative_word_integral(forms, alphas, z, a=INF_BASE,
                                 path: VerticalPathSpec | None = None) -> EvalResult:
    """The coupled nested integral computed as a word of 1-forms.

    The word (dz)^(alpha_1 - 1) (f_1 dz) ... (dz)^(alpha_n - 1) (f_n dz) is
    integrated letter by letter (innermost first, each step one prefix
    pass), then scaled by (-1)^(sum alpha) times the gamma factor of the
    exponent tuple.  Agreement with eichler_integral_direct is a structural
    check, since the two routes share nothing past the grid.
    """
    forms = tuple(forms)
    alphas = _check_alphas(alphas, len(forms), "antiderivative_word_integral")
    total = sum(alphas)
    if total > 6:
        raise CostGuardError(
            f"word integration is budgeted for exponent sum <= 6, got {total}"
        )
    path = path or VerticalPathSpec()
    a = _validate_base(a)
    z = complex(z)
    if z == a:
        return EvalResult(0j, 0.0, 0)
    if z.imag <= 0:
        raise DomainError("endpoint must lie in the upper half-plane")
    edges, top_height, cusp_eps = _path_edges(a, z, path)

    def word_value(grid: PathGrid) -> tuple:
        fv = _forms_on_grid(forms, grid)
        letters = []
        for r in range(len(forms), 0, -1):
            letters.append(("f", r - 1))
            letters.extend([("dz", None)] * (alphas[r - 1] - 1))
        running = None
        absint = 0.0
        for idx, (kind, which) in enumerate(letters):
            if kind == "f":
                g = fv[which] if running is None else fv[which] * running
            else:
                g = running
            if idx == len(letters) - 1:
                absint = grid.integrate_abs(g)
                return grid.integrate(g), absint, float(np.max(np.abs(g)))
            running = grid.prefix(g)

    grid = PathGrid(edges)
    v0, _, _ = word_value(grid)
    fine = grid.refined()
    v1, absint, g_cap = word_value(fine)
    err = abs(v1 - v0) + 1e-15 * abs(v1) + 5e-16 * absint
    if top_height is not None:
        err += _top_tail(
            _decay_constant(forms[-1], top_height) * math.exp(-TWO_PI * top_height),
            float(total),
            top_height,
        ) * (1.0 + top_height) ** total
    if cusp_eps is not None:
        flip = _cusp_flip_bound(forms[-1])
        if flip is None:
            err = math.inf
        else:
            A, k, Nt = flip
            err += (
                2.0 * total * cusp_eps * _cusp_peak(A, k, Nt, 0.0, cusp_eps)
                * max(g_cap, 1.0)
            )
    scale = (-1.0) ** total * gamma_factor_tuple(alphas)
    return EvalResult(scale * v1, abs(scale) * err, fine.node_count)
