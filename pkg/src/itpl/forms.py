"""Cusp form data: exact q-expansions, evaluation, characters, twists.

Built-in forms are generated exactly (integer arithmetic throughout) from
eta-product and Eisenstein expansions:

* ``delta``     weight 12, level 1, the discriminant form
* ``delta_e4``  weight 16, level 1 (delta times E4, the eigenform there)
* ``delta_e6``  weight 18, level 1 (delta times E6, the eigenform there)

A level-11 weight-2 form, eta(z)^2 eta(11z)^2, is available through
``eta_product_level11`` and is meant to travel as a coefficient file (see
``dump_form`` / ``load_coefficients``) rather than as a named built-in.

Growth data: every QExpansion carries (C, M) with |c_m| <= C m^M over the
stored range, which feeds all truncation bounds downstream.  Built-ins use
M = weight/2 + 1/4 with C computed from the data at construction; since the
built-ins are normalised eigenforms, the Deligne bound
|c_m| <= d(m) m^{(k-1)/2} makes that C valid for every m, not just the
stored range.  Ingested forms without declared growth get M from a least
squares fit of log|c_m| inflated by 1/4, and C again from the data.
"""

from __future__ import annotations

import cmath
import json
import math
from importlib import resources
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np

from .numerics import (
    AccuracyError,
    DomainError,
    EvalResult,
    geometric_power_tail,
    power_log_tail,
)

__all__ = [
    "RegionError",
    "ValidationError",
    "QExpansion",
    "FourierSeries",
    "DirichletCharacter",
    "builtin_form",
    "builtin_names",
    "eta_product_level11",
    "load_coefficients",
    "packaged_form",
    "parse_coefficients",
    "dump_form",
    "evaluate_form",
    "evaluate_form_batch",
    "magnitude_bound",
    "legendre_character",
    "trivial_character",
    "twist_pointwise",
    "twist_series",
]


class RegionError(ValueError):
    """The point cannot be reached with the available modular transformations."""


class ValidationError(ValueError):
    """Coefficient data failed schema or sanity checks."""


# ---------------------------------------------------------------------------
# exact polynomial arithmetic (Kronecker substitution on big integers)
# ---------------------------------------------------------------------------

def _pack(coeffs: Sequence[int], nbytes: int) -> "gmpy2.mpz":
    buf = bytearray(nbytes * len(coeffs))
    for i, c in enumerate(coeffs):
        if c:
            buf[i * nbytes:(i + 1) * nbytes] = int(c).to_bytes(nbytes, "little")
    return gmpy2.mpz(int.from_bytes(bytes(buf), "little"))


def _unpack(total: "gmpy2.mpz", nbytes: int, length: int) -> list[int]:
    needed = max(int(total).bit_length() // 8 + 1, nbytes * length) + 16
    raw = int(total).to_bytes(needed, "little")
    return [
        int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little")
        for i in range(length)
    ]


def _poly_mul(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    """Exact truncated product of integer coefficient lists (index = exponent)."""
    a = list(a[:length])
    b = list(b[:length])
    amax = max((abs(x) for x in a), default=0)
    bmax = max((abs(x) for x in b), default=0)
    if amax == 0 or bmax == 0:
        return [0] * length
    digit_bound = amax * bmax * min(len(a), len(b))
    nbytes = digit_bound.bit_length() // 8 + 2
    ap = [x if x > 0 else 0 for x in a]
    am = [-x if x < 0 else 0 for x in a]
    bp = [x if x > 0 else 0 for x in b]
    bm = [-x if x < 0 else 0 for x in b]
    pos = _pack(ap, nbytes) * _pack(bp, nbytes) + _pack(am, nbytes) * _pack(bm, nbytes)
    neg = _pack(ap, nbytes) * _pack(bm, nbytes) + _pack(am, nbytes) * _pack(bp, nbytes)
    plus = _unpack(pos, nbytes, length)
    minus = _unpack(neg, nbytes, length)
    return [p - m for p, m in zip(plus, minus)]


def _eta_coeffs(length: int) -> list[int]:
    # prod (1 - q^n) via the pentagonal number theorem; index = exponent
    out = [0] * length
    out[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= length and g2 >= length:
            break
        s = -1 if k % 2 else 1
        if g1 < length:
            out[g1] = s
        if g2 < length:
            out[g2] = s
        k += 1
    return out


def _eta_cubed_coeffs(length: int) -> list[int]:
    # prod (1 - q^n)^3 = sum_j (-1)^j (2j+1) q^{j(j+1)/2}
    out = [0] * length
    j = 0
    while j * (j + 1) // 2 < length:
        out[j * (j + 1) // 2] = (2 * j + 1) * (-1 if j % 2 else 1)
        j += 1
    return out


def _divisor_power_sums(power: int, length: int) -> list[int]:
    sig = [0] * (length + 1)
    for d in range(1, length + 1):
        dp = d ** power
        for m in range(d, length + 1, d):
            sig[m] += dp
    return sig


def _eisenstein_coeffs(weight: int, length: int) -> list[int]:
    if weight == 4:
        scale, power = 240, 3
    elif weight == 6:
        scale, power = -504, 5
    else:
        raise DomainError(f"only E4 and E6 are wired up, not E{weight}")
    sig = _divisor_power_sums(power, length - 1)
    out = [0] * length
    out[0] = 1
    for n in range(1, length):
        out[n] = scale * sig[n]
    return out


@lru_cache(maxsize=None)
def _exact_coefficients(name: str, length: int) -> tuple[int, ...]:
    """c_1..c_length of the named exact expansion."""
    if name == "delta":
        e3 = _eta_cubed_coeffs(length)
        e6 = _poly_mul(e3, e3, length)
        e12 = _poly_mul(e6, e6, length)
        e24 = _poly_mul(e12, e12, length)
        return tuple(e24[:length])  # c_m = coeff of q^{m-1} in eta^24
    if name in ("delta_e4", "delta_e6"):
        tau = _exact_coefficients("delta", length)
        dpoly = [0] + list(tau)  # exponents 0..length
        epoly = _eisenstein_coeffs(4 if name == "delta_e4" else 6, length + 1)
        prod = _poly_mul(dpoly, epoly, length + 1)
        return tuple(prod[1:length + 1])
    if name == "level11":
        eta = _eta_coeffs(length)
        sq = _poly_mul(eta, eta, length)
        dil = [0] * length
        for i in range(0, length, 11):
            dil[i] = sq[i // 11]
        prod = _poly_mul(sq, dil, length)
        return tuple(prod[:length])  # c_m = coeff of q^{m-1} in the eta product
    raise ValidationError(f"unknown exact expansion {name!r}")


# ---------------------------------------------------------------------------
# form containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QExpansion:
    """A cusp form known through its q-expansion.

    ``coefficients`` is complex128 and 1-based: coefficients[m] = c_m,
    entry 0 is zero.  ``exact`` carries the same data as exact integers
    when the source provides them.  ``fricke_eigenvalue`` may be None for
    ingested forms without Fricke data; evaluation below the flip
    threshold then raises RegionError for level > 1.
    """

    label: str
    weight: int
    level: int
    fricke_eigenvalue: int | None
    coefficients: np.ndarray
    exact: tuple | None
    growth_exponent: float
    growth_constant: float

    @property
    def length(self) -> int:
        return len(self.coefficients) - 1

    def __repr__(self):
        eps = "?" if self.fricke_eigenvalue is None else f"{self.fricke_eigenvalue:+d}"
        return (
            f"QExpansion({self.label!r}, weight={self.weight}, level={self.level}, "
            f"eps={eps}, {self.length} coefficients)"
        )


def _growth_constant_from_data(coeffs: np.ndarray, exponent: float) -> float:
    """Smallest C with |c_m| <= C m^exponent over the stored range."""
    ms = np.arange(1, len(coeffs), dtype=float)
    with np.errstate(divide="ignore", under="ignore"):
        ratios = np.abs(coeffs[1:]) / ms ** exponent
    return float(max(np.max(ratios), 1e-300))


_BUILTINS = {
    # name: (weight, level, fricke eigenvalue)
    "delta": (12, 1, 1),
    "delta_e4": (16, 1, 1),
    "delta_e6": (18, 1, 1),
}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def _assemble_exact(label: str, key: str, weight: int, level: int, eps: int,
                    length: int) -> QExpansion:
    if length < 1:
        raise ValidationError("length must be at least 1")
    exact = _exact_coefficients(key, length)
    arr = np.zeros(length + 1, dtype=complex)
    arr[1:] = [float(c) for c in exact]
    exponent = weight / 2.0 + 0.25
    return QExpansion(
        label=label,
        weight=weight,
        level=level,
        fricke_eigenvalue=eps,
        coefficients=arr,
        exact=exact,
        growth_exponent=exponent,
        growth_constant=_growth_constant_from_data(arr, exponent),
    )


def builtin_form(name: str, length: int = 4096) -> QExpansion:
    """Generate a built-in eigenform with c_1..c_length computed exactly."""
    if name not in _BUILTINS:
        raise ValidationError(
            f"unknown form {name!r}; built-ins are {', '.join(_BUILTINS)}"
        )
    weight, level, eps = _BUILTINS[name]
    return _assemble_exact(name, name, weight, level, eps, length)


def eta_product_level11(length: int = 2048) -> QExpansion:
    """The weight-2 level-11 form eta(z)^2 eta(11z)^2, expanded exactly.

    This is the generator behind the level-11 coefficient file; the package
    treats level > 1 forms as ingested data, so tests and the CLI read the
    file rather than calling this directly.
    """
    return _assemble_exact("eta11", "level11", 2, 11, -1, length)


# ---------------------------------------------------------------------------
# coefficient files
# ---------------------------------------------------------------------------

def _parse_entry(c, index: int, where: str) -> complex:
    if isinstance(c, bool):
        raise ValidationError(f"{where}: coefficient {index} is a boolean")
    if isinstance(c, int):
        return complex(c)
    if isinstance(c, str):
        try:
            return complex(float(c))
        except ValueError:
            raise ValidationError(
                f"{where}: coefficient {index} is not a decimal string: {c!r}"
            ) from None
    if isinstance(c, list):
        if len(c) != 2 or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in c):
            raise ValidationError(
                f"{where}: coefficient {index} must be a two-element [re, im] pair"
            )
        return complex(float(c[0]), float(c[1]))
    raise ValidationError(
        f"{where}: coefficient {index} must be an integer, a decimal string, "
        f"or an [re, im] pair, got {type(c).__name__}"
    )


def _fit_growth_exponent(coeffs: np.ndarray) -> float:
    """Least squares slope of log|c_m| against log m, inflated by 1/4."""
    mags = np.abs(coeffs[1:])
    ms = np.arange(1, len(coeffs), dtype=float)
    mask = mags > 0
    if mask.sum() < 2:
        return 0.25
    x = np.log(ms[mask])
    y = np.log(mags[mask])
    slope = np.polyfit(x, y, 1)[0]
    return float(max(slope, 0.0) + 0.25)


def parse_coefficients(data: dict, where: str = "<data>") -> QExpansion:
    """Build a QExpansion from parsed JSON, validating the schema.

    Required fields: label (string), weight (int), level (int),
    coefficients (non-empty array; entries are integers, decimal strings,
    or [re, im] pairs; index 0 of the array is c_1).  Optional: fricke
    (+1 or -1) and declared growth_exponent / growth_constant, which are
    checked against the data when present and fitted from it when absent.
    """
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: top level must be an object")
    for key in ("label", "weight", "level", "coefficients"):
        if key not in data:
            raise ValidationError(f"{where}: missing field {key!r}")
    label = data["label"]
    weight = data["weight"]
    level = data["level"]
    coeffs = data["coefficients"]
    if not isinstance(label, str) or not label:
        raise ValidationError(f"{where}: label must be a non-empty string")
    if isinstance(weight, bool) or not isinstance(weight, int) or weight < 1:
        raise ValidationError(f"{where}: weight must be a positive integer")
    if isinstance(level, bool) or not isinstance(level, int) or level < 1:
        raise ValidationError(f"{where}: level must be a positive integer")
    eps = data.get("fricke")
    if eps is not None and eps not in (1, -1):
        raise ValidationError(f"{where}: fricke must be +1 or -1 when present")
    if not isinstance(coeffs, list) or len(coeffs) == 0:
        raise ValidationError(f"{where}: coefficients must be a non-empty array")
    vals = [_parse_entry(c, i + 1, where) for i, c in enumerate(coeffs)]
    if any(not (math.isfinite(v.real) and math.isfinite(v.imag)) for v in vals):
        raise ValidationError(f"{where}: coefficients must be finite")
    arr = np.zeros(len(vals) + 1, dtype=complex)
    arr[1:] = vals
    exact = (
        tuple(int(c) for c in coeffs)
        if all(isinstance(c, int) and not isinstance(c, bool) for c in coeffs)
        else None
    )
    if "growth_exponent" in data or "growth_constant" in data:
        if not ("growth_exponent" in data and "growth_constant" in data):
            raise ValidationError(
                f"{where}: growth_exponent and growth_constant go together"
            )
        growth_m = float(data["growth_exponent"])
        growth_c = float(data["growth_constant"])
        if growth_c <= 0:
            raise ValidationError(f"{where}: growth_constant must be positive")
        ms = np.arange(1, len(vals) + 1, dtype=float)
        if np.any(np.abs(arr[1:]) > growth_c * ms ** growth_m * (1 + 1e-12)):
            raise ValidationError(
                f"{where}: coefficients violate the declared growth bound"
            )
    else:
        growth_m = _fit_growth_exponent(arr)
        growth_c = _growth_constant_from_data(arr, growth_m)
    return QExpansion(
        label=label,
        weight=weight,
        level=level,
        fricke_eigenvalue=eps,
        coefficients=arr,
        exact=exact,
        growth_exponent=growth_m,
        growth_constant=growth_c,
    )


def packaged_form(name: str = "level11_weight2") -> QExpansion:
    """Load a coefficient file that ships inside the package."""
    ref = resources.files("itpl") / "data" / f"{name}.json"
    if not ref.is_file():
        raise FileNotFoundError(f"no packaged coefficient file {name!r}")
    with resources.as_file(ref) as path:
        return load_coefficients(path)


def load_coefficients(path) -> QExpansion:
    """Load a form from a coefficient JSON file."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}"
            ) from exc
    return parse_coefficients(data, where=str(path))


def dump_form(form: QExpansion, path) -> None:
    """Write a form to the coefficient JSON schema load_coefficients reads."""
    if form.exact is not None:
        coeffs = list(form.exact)
    else:
        coeffs = []
        for c in form.coefficients[1:]:
            c = complex(c)
            if c.imag == 0.0:
                coeffs.append(repr(c.real))
            else:
                coeffs.append([c.real, c.imag])
    payload = {
        "label": form.label,
        "weight": form.weight,
        "level": form.level,
        "coefficients": coeffs,
    }
    if form.fricke_eigenvalue is not None:
        payload["fricke"] = form.fricke_eigenvalue
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _terms_needed(C: float, M: float, x: float, target: float, available: int) -> int:
    m = 8
    while m <= available:
        if geometric_power_tail(C, M, x, m + 1) <= target:
            return m
        m *= 2
    if geometric_power_tail(C, M, x, available + 1) <= target:
        return available
    raise AccuracyError(
        f"need more than {available} coefficients to hit tail target {target:g} "
        f"at |q| = {x:g}"
    )


def _qseries_value(form: QExpansion, z: complex, tol: float) -> tuple[complex, float]:
    """Plain q-series sum at z plus the truncation tail bound."""
    y = z.imag
    x = math.exp(-2.0 * math.pi * y)
    target = tol * x  # relative to the leading-term scale
    terms = _terms_needed(form.growth_constant, form.growth_exponent, x, target, form.length)
    m = np.arange(1, terms + 1)
    with np.errstate(under="ignore"):
        phases = np.exp(2j * math.pi * m * z)
        val = complex(np.dot(form.coefficients[1:terms + 1], phases))
        abssum = float(np.dot(np.abs(form.coefficients[1:terms + 1]), np.abs(phases)))
    tail = geometric_power_tail(form.growth_constant, form.growth_exponent, x, terms + 1)
    return val, tail + 5e-16 * abssum


def _evaluate_one(form: QExpansion, z: complex, flip_threshold: float,
                  tol: float) -> tuple[complex, float]:
    if z.imag <= 0:
        raise DomainError(f"evaluate_form needs Im z > 0, got {z}")
    fac = 1.0 + 0j
    w = z
    if form.level == 1:
        for _ in range(128):
            w = complex(w.real - round(w.real), w.imag)
            if abs(w) >= 1.0 - 1e-12:
                break
            fac *= w ** (-form.weight)
            w = -1.0 / w
        else:  # pragma: no cover - the reduction always terminates
            raise RegionError(f"fundamental-domain reduction did not settle for {z}")
    else:
        w = complex(z.real - round(z.real), z.imag)
        if w.imag < flip_threshold:
            if form.fricke_eigenvalue is None:
                raise RegionError(
                    f"{form.label}: Im {z.imag:.6g} is below the flip threshold and "
                    "the form carries no Fricke eigenvalue to flip with"
                )
            flipped = -1.0 / (form.level * w)
            if flipped.imag < flip_threshold:
                raise RegionError(
                    f"{form.label}: Im {z.imag:.6g} is below the flip threshold and the "
                    f"Fricke image Im {flipped.imag:.6g} still is; no path to the "
                    "convergent region"
                )
            fac = (
                form.fricke_eigenvalue
                * form.level ** (-form.weight / 2.0)
                * w ** (-form.weight)
            )
            w = flipped
    val, err = _qseries_value(form, w, tol)
    return fac * val, abs(fac) * err


def evaluate_form(form: QExpansion, z: complex, *, flip_threshold: float = 0.2,
                  tol: float = 1e-15) -> EvalResult:
    """Evaluate the form at a point of the upper half-plane.

    Level 1 points are moved to the fundamental domain by T-shifts and
    S-flips with the automorphy factor accumulated along the way.  Level
    N > 1 points below `flip_threshold` get one Fricke flip
    z -> -1/(N z); if that still lands below the threshold (or no Fricke
    eigenvalue is known) a RegionError explains that the point is out of
    reach.  err_abs covers the series truncation tail.
    """
    val, err = _evaluate_one(form, complex(z), flip_threshold, tol)
    return EvalResult(val, err)


def evaluate_form_batch(form: QExpansion, zs, *, flip_threshold: float = 0.2,
                        tol: float = 1e-15) -> np.ndarray:
    """Values of the form on an array of points (errors dropped)."""
    arr = np.asarray(zs)
    flat = [
        _evaluate_one(form, complex(v), flip_threshold, tol)[0] for v in arr.ravel()
    ]
    return np.array(flat, dtype=complex).reshape(arr.shape)


def magnitude_bound(form: QExpansion, y: float) -> float:
    """Rigorous upper bound for |f(iy)| (in fact for sup_x |f(x + iy)|)."""
    if y <= 0:
        raise DomainError("magnitude_bound needs y > 0")
    x = math.exp(-2.0 * math.pi * y)
    L = form.length
    tail = geometric_power_tail(form.growth_constant, form.growth_exponent, x, L + 1)
    with np.errstate(under="ignore"):
        partial = float(
            np.dot(
                np.abs(form.coefficients[1:]),
                np.exp(-2.0 * math.pi * y * np.arange(1, L + 1)),
            )
        )
    if tail <= 1e-6 * (partial + 1e-300) or tail < 1e-300:
        return partial + tail
    # too few coefficients for a direct bound this deep: flip toward i*infinity
    if form.level == 1:
        return y ** (-form.weight) * magnitude_bound(form, 1.0 / y)
    if form.fricke_eigenvalue is None:
        raise AccuracyError(
            f"{form.label}: cannot bound |f| at y = {y:g} without Fricke data"
        )
    return (
        form.level ** (-form.weight / 2.0)
        * y ** (-form.weight)
        * magnitude_bound(form, 1.0 / (form.level * y))
    )


# ---------------------------------------------------------------------------
# Fourier series with general period (twists, integrand series)
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FourierSeries:
    """prefactor * sum_{l >= 1} b_l exp(2 pi i l z / period), b_l = coefficients[l].

    ``growth`` optionally carries (K, P, kappa) with
    |b_l| <= K l^P (1 + ln l)^kappa for every l, which downstream code uses
    for truncation tail bounds.  ``cusp_decay`` optionally carries
    (A, k, Ntilde) certifying |g(it)| <= A t^(-k) exp(-2 pi / (Ntilde t))
    for 0 < t <= 1; series summation cannot see that decay (the terms
    cancel), so consumers that integrate toward 0 need it spelled out.
    """

    period: float
    coefficients: np.ndarray
    prefactor: complex = 1.0 + 0j
    growth: tuple | None = None
    cusp_decay: tuple | None = None

    @property
    def length(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, z, terms: int | None = None):
        """Evaluate at a scalar or array of points with Im z > 0."""
        L = self.length if terms is None else min(terms, self.length)
        arr = np.asarray(z, dtype=complex)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr).ravel()
        if np.any(pts.imag <= 0):
            raise DomainError("FourierSeries.evaluate needs Im z > 0")
        ls = np.arange(1, L + 1)
        out = np.empty(len(pts), dtype=complex)
        step = max(1, 2_000_000 // max(L, 1))
        with np.errstate(under="ignore"):
            for lo in range(0, len(pts), step):
                block = pts[lo:lo + step]
                phases = np.exp(
                    (2j * math.pi / self.period) * np.multiply.outer(block, ls)
                )
                out[lo:lo + step] = phases @ self.coefficients[1:L + 1]
        out *= self.prefactor
        if scalar:
            return complex(out[0])
        return out.reshape(arr.shape)

    def tail_bound(self, y: float, start: int | None = None) -> float:
        """Bound on the dropped terms |sum_{l > start} b_l q^l| at height y."""
        if self.growth is None:
            return 0.0 if (start or self.length) >= self.length else math.inf
        K, P, kappa = self.growth
        first = (start if start is not None else self.length) + 1
        x = math.exp(-2.0 * math.pi * y / self.period)
        return abs(self.prefactor) * power_log_tail(K, P, kappa, x, first)


# ---------------------------------------------------------------------------
# Dirichlet characters and twists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character stored by its value table on 0..modulus-1."""

    modulus: int
    values: tuple

    def __call__(self, n: int) -> complex:
        return self.values[n % self.modulus]

    @property
    def parity(self) -> int:
        """chi(-1): +1 for even characters, -1 for odd ones."""
        return int(round(complex(self.values[(-1) % self.modulus]).real))

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus, tuple(complex(v).conjugate() for v in self.values)
        )

    def gauss_sum(self, shift: int = 1) -> complex:
        """sum_m chi(m) exp(2 pi i m shift / modulus)."""
        M = self.modulus
        return complex(
            sum(
                self.values[m] * cmath.exp(2j * math.pi * m * shift / M)
                for m in range(M)
            )
        )


def trivial_character(modulus: int = 1) -> DirichletCharacter:
    if modulus < 1:
        raise ValidationError("modulus must be positive")
    if modulus == 1:
        return DirichletCharacter(1, (1,))
    vals = tuple(1 if math.gcd(r, modulus) == 1 else 0 for r in range(modulus))
    return DirichletCharacter(modulus, vals)


def legendre_character(p: int) -> DirichletCharacter:
    """The quadratic character mod an odd prime p."""
    if p < 3 or any(p % d == 0 for d in range(2, int(math.isqrt(p)) + 1)):
        raise ValidationError(f"{p} is not an odd prime")
    vals = [0] * p
    for m in range(1, p):
        vals[m] = 1 if pow(m, (p - 1) // 2, p) == 1 else -1
    return DirichletCharacter(p, tuple(vals))


def twist_pointwise(form: QExpansion, chi: DirichletCharacter, z: complex,
                    *, tol: float = 1e-15) -> EvalResult:
    """The twisted combination f^chi(z) = sum_{m=1}^{M} chi(m) f((z + m)/M).

    Evaluated literally as M calls to evaluate_form; err_abs is the sum of
    the component errors.  For the trivial character mod 1 this is f(z + 1)
    which equals f(z) by periodicity.
    """
    M = chi.modulus
    z = complex(z)
    total = 0j
    err = 0.0
    for m in range(1, M + 1):
        w = chi(m)
        if w == 0:
            continue
        part = evaluate_form(form, (z + m) / M, tol=tol)
        total += w * part.value
        err += abs(w) * part.err_abs
    return EvalResult(total, err)


def twist_series(form: QExpansion, chi: DirichletCharacter) -> FourierSeries:
    """Fourier series of f^chi: period M with coefficients c_l * S_l.

    S_l = sum_m chi(m) e^{2 pi i l m / M} is the character sum that falls
    out of regrouping the defining sum of twist_pointwise term by term;
    the two routes agreeing is one of the package's cross-checks.
    """
    M = chi.modulus
    L = form.length
    dft = np.array(
        [
            sum(chi.values[m] * cmath.exp(2j * math.pi * l * m / M) for m in range(M))
            for l in range(M)
        ],
        dtype=complex,
    )
    b = np.zeros(L + 1, dtype=complex)
    ls = np.arange(1, L + 1)
    b[1:] = form.coefficients[1:] * dft[ls % M]
    smax = float(np.max(np.abs(dft))) if M > 1 else 1.0
    return FourierSeries(
        period=float(M),
        coefficients=b,
        prefactor=1.0 + 0j,
        growth=(form.growth_constant * smax, form.growth_exponent, 0.0),
    )
