"""Command-line interface: single values, table sweeps, verification suites.

Every command prints one JSON report to stdout with the shape

    {"command": ..., "inputs": {...}, "results": [...], "wall_time_ms": ...}

where each result row carries a value as an [re, im] pair and its absolute
error bound.  Rows produced by a verification suite additionally carry the
residual that was compared against the threshold and the outcome of that
comparison.  Reports for identical invocations are byte-identical apart
from wall_time_ms.

Exit codes: 0 success (all comparisons passed), 1 verification failure,
2 usage, configuration, or data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .forms import (QExpansion, RegionError, ValidationError, builtin_form,
                    legendre_character, load_coefficients)
from .identities import (ConfigurationError, duality_combination,
                         functional_equation_residual, integrand_combination,
                         integrand_shift_matrices, lambda_completed,
                         make_l_evaluator, make_period_evaluator,
                         modularity_residual, shift_combination,
                         twisted_residual)
from .iterated import (INF_BASE, CostGuardError, antiderivative_word_integral,
                       eichler_fourier_series, eichler_integral_direct,
                       eichler_integrand_eval, period_integral_direct,
                       period_integrand_eval)
from .lseries import (LArgument, multiple_L_continued, multiple_L_series,
                      reciprocal_gamma_factor)
from .numerics import (AccuracyError, DomainError, PoleError, branch_pow)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_TOL = 1e-8
MAX_DIRECT_DEPTH = 3

_CONFIG_ERRORS = (ConfigurationError, CostGuardError, RegionError,
                  ValidationError, DomainError, PoleError, AccuracyError)

SUITE_NAMES = ("mellin", "shifts", "duality", "integrands", "fourier",
               "continuation", "word", "modularity", "functional-eq",
               "twisted", "all")

VALUE_KINDS = ("lseries", "lcontinued", "period", "tilde")


class UsageError(ValueError):
    """Bad command-line input that argparse alone cannot catch."""


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _cplx(value) -> list:
    z = complex(value)
    return [z.real, z.imag]


@dataclass
class ResultRow:
    label: str
    value: complex
    err_abs: float
    residual: float | None = None
    passed: bool | None = None

    def to_json(self) -> dict:
        out = {"label": self.label, "value": _cplx(self.value),
               "err_abs": float(self.err_abs)}
        if self.residual is not None:
            out["residual"] = float(self.residual)
            out["pass"] = bool(self.passed)
        return out


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def emit(self, started: float) -> None:
        doc = {"command": self.command, "inputs": self.inputs,
               "results": [r.to_json() for r in self.results]}
        if self.skipped:
            doc["skipped"] = self.skipped
        doc["wall_time_ms"] = int(round(1000.0 * (time.perf_counter() - started)))
        print(json.dumps(doc, indent=2))

    def all_passed(self) -> bool:
        return all(r.passed for r in self.results if r.passed is not None)


def _parse_complex(text: str) -> complex:
    """Parse `a+bi` with no interior spaces; plain reals are accepted."""
    cleaned = text.strip()
    if not cleaned or any(c.isspace() for c in cleaned):
        raise UsageError(f"cannot parse complex number {text!r}")
    try:
        return complex(cleaned.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def _parse_base(text: str):
    if text.strip().lower() in ("inf", "infinity", "i*inf"):
        return INF_BASE
    return _parse_complex(text)


def _parse_alphas(text: str | None) -> tuple:
    if text is None or text.strip() == "":
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse exponent list {text!r}") from None


def _resolve_forms(names: str) -> tuple:
    return tuple(builtin_form(p.strip()) for p in names.split(","))


def _default_tol() -> float:
    raw = os.environ.get("ITPL_DEFAULT_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"ITPL_DEFAULT_TOL is not a number: {raw!r}") from None


# ---------------------------------------------------------------------------
# coeffs
# ---------------------------------------------------------------------------

def cmd_coeffs(args) -> int:
    started = time.perf_counter()
    if args.count <= 0:
        raise UsageError("--count must be a positive integer")
    if (args.form is None) == (args.file is None):
        raise UsageError("exactly one of --form or --file is required")
    if args.form is not None:
        form = builtin_form(args.form, max(args.count, 16))
        source = {"form": args.form}
    else:
        form = load_coefficients(Path(args.file))
        source = {"file": args.file, "label": form.label}
        if args.count >= len(form.coefficients):
            raise UsageError(
                f"file provides {len(form.coefficients) - 1} coefficients, "
                f"{args.count} requested")
    inputs = dict(source)
    inputs.update({"count": args.count, "level": form.level,
                   "weight": form.weight})
    report = RunReport("coeffs", inputs)
    for m in range(1, args.count + 1):
        report.results.append(ResultRow(f"c_{m}", form.coefficients[m], 0.0))
    report.emit(started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# value
# ---------------------------------------------------------------------------

def _evaluate_point(kind: str, forms: tuple, alphas: tuple, s, z, base, tol):
    n = len(forms)
    if kind in ("lseries", "lcontinued", "period") and len(alphas) != n - 1:
        raise UsageError(
            f"kind {kind!r} takes the inner exponents: expected {n - 1} "
            f"values, got {len(alphas)}")
    if kind == "tilde" and len(alphas) != n:
        raise UsageError(
            f"kind 'tilde' takes one exponent per form: expected {n} "
            f"values, got {len(alphas)}")
    if kind == "lseries":
        return multiple_L_series(LArgument(s, alphas, forms), tol=tol)
    if kind == "lcontinued":
        return multiple_L_continued(LArgument(s, alphas, forms), tol=tol)
    if kind == "period":
        return period_integral_direct(forms, (s,) + alphas)
    return eichler_integral_direct(forms, alphas, z, base)


def cmd_value(args) -> int:
    started = time.perf_counter()
    names = [p.strip() for p in args.forms.split(",")]
    if args.kind in ("period", "tilde") and len(names) > MAX_DIRECT_DEPTH:
        raise CostGuardError(
            f"direct integration supports up to {MAX_DIRECT_DEPTH} forms, "
            f"got {len(names)}")
    forms = _resolve_forms(args.forms)
    alphas = _parse_alphas(args.alphas)
    tol = args.tol if args.tol is not None else _default_tol()
    s = _parse_complex(args.s) if args.s is not None else None
    z = _parse_complex(args.z) if args.z is not None else None
    base = _parse_base(args.base)
    if args.kind == "tilde":
        if z is None:
            raise UsageError("kind 'tilde' requires --z")
    elif s is None:
        raise UsageError(f"kind {args.kind!r} requires --s")

    out = _evaluate_point(args.kind, forms, alphas, s, z, base, tol)
    inputs = {"kind": args.kind, "forms": names, "alphas": list(alphas),
              "tol": tol}
    if s is not None:
        inputs["s"] = _cplx(s)
    if z is not None:
        inputs["z"] = _cplx(z)
        inputs["base"] = "inf" if base is INF_BASE else _cplx(base)
    report = RunReport("value", inputs)
    report.results.append(ResultRow(args.kind, out.value, out.err_abs))
    report.emit(started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------

def cmd_table(args) -> int:
    started = time.perf_counter()
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    forms = _resolve_forms(args.forms)
    alphas = _parse_alphas(args.alphas)
    tol = args.tol if args.tol is not None else _default_tol()
    s0 = _parse_complex(args.s_start)
    s1 = _parse_complex(args.s_end)
    if args.steps == 1:
        points = [s0]
    else:
        ts = np.linspace(0.0, 1.0, args.steps)
        points = [s0 + (s1 - s0) * float(t) for t in ts]

    records = []
    for s in points:
        if args.kind == "tilde":
            out = _evaluate_point(args.kind, forms, alphas, None, s,
                                  INF_BASE, tol)
        else:
            out = _evaluate_point(args.kind, forms, alphas, s, None,
                                  INF_BASE, tol)
        records.append({"re_s": s.real, "im_s": s.imag,
                        "re_val": complex(out.value).real,
                        "im_val": complex(out.value).imag,
                        "err_abs": float(out.err_abs)})

    path = Path(args.out)
    try:
        if args.format == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.DictWriter(
                    fh, fieldnames=["re_s", "im_s", "re_val", "im_val",
                                    "err_abs"])
                writer.writeheader()
                writer.writerows(records)
        else:
            path.write_text(json.dumps(records, indent=2) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None

    inputs = {"kind": args.kind, "forms": args.forms.split(","),
              "alphas": list(alphas), "s_start": _cplx(s0), "s_end": _cplx(s1),
              "steps": args.steps, "out": args.out, "format": args.format,
              "tol": tol}
    report = RunReport("table", inputs)
    for rec in records:
        report.results.append(ResultRow(
            f"s={rec['re_s']:g}{rec['im_s']:+g}i",
            complex(rec["re_val"], rec["im_val"]), rec["err_abs"]))
    report.emit(started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _relative(diff, want) -> float:
    return abs(diff) / max(1.0, abs(want))


def _row(label, got_value, err_abs, want, tol) -> ResultRow:
    residual = _relative(got_value - want, want)
    return ResultRow(label, got_value, float(err_abs), residual,
                     residual <= tol)


def _suite_mellin(tol, rng):
    # one instance pins the branch convention itself; the rest compare the
    # vertical quadrature against gamma times the continued L-value
    rows = [ResultRow("branch convention (-1)^(1/2)", branch_pow(-1.0, 0.5),
                      0.0, abs(branch_pow(-1.0, 0.5) - 1j),
                      abs(branch_pow(-1.0, 0.5) - 1j) <= tol)]
    delta = builtin_form("delta")
    for s in (6.0, 8.5, 11.0):
        got = period_integral_direct([delta], (s,))
        lval = multiple_L_continued(LArgument(s, (), (delta,)))
        want = -math.gamma(s) * lval.value
        rows.append(_row(f"mellin s={s:g}", got.value, got.err_abs, want, tol))
    return rows


def _suite_shifts(tol, rng):
    delta = builtin_form("delta")
    forms = (delta, delta)
    rows = []
    for alpha2 in (1, 2):
        got = shift_combination("period_from_l", 16.0, (alpha2,), forms,
                                make_l_evaluator(forms))
        want = period_integral_direct(forms, (16.0, alpha2))
        rows.append(_row(f"period from L-values, inner={alpha2}", got.value,
                         got.err_abs, want.value, tol))
    back = shift_combination("l_from_period", 2.5, (2,), forms,
                             make_period_evaluator(forms))
    want = multiple_L_continued(LArgument(2.5, (2,), forms))
    rows.append(_row("L-value from periods, s=2.5", back.value, back.err_abs,
                     want.value, tol))
    return rows


def _suite_duality(tol, rng):
    delta = builtin_form("delta")
    forms = (delta, delta)
    got = duality_combination("period_from_l", (12, 1), forms,
                              make_l_evaluator(forms))
    want = period_integral_direct(forms, (12.0, 1))
    rows = [_row("duality, period side", got.value, got.err_abs,
                 want.value, tol)]
    back = duality_combination("l_from_period", (12, 1), forms,
                               make_period_evaluator(forms))
    lw = multiple_L_continued(LArgument(12.0, (1,), forms))
    rows.append(_row("duality, L side", back.value, back.err_abs,
                     lw.value, tol))
    return rows


def _suite_integrands(tol, rng):
    delta = builtin_form("delta")
    forms = (delta, delta)
    rows = []
    for i in range(3):
        z = complex(rng.uniform(-0.8, 0.8), rng.uniform(0.5, 2.5))
        a = complex(rng.uniform(-0.8, 0.8), rng.uniform(0.5, 2.5))
        fe = integrand_combination("from_eichler", z, a, (2,), forms)
        pe = period_integrand_eval(forms, (2,), z, a)
        rows.append(_row(f"recombine toward period kind, point {i + 1}",
                         fe.value, fe.err_abs, pe.value, tol))
        fp = integrand_combination("from_period", z, a, (2,), forms)
        ee = eichler_integrand_eval(forms, (2,), z, a)
        rows.append(_row(f"recombine toward nested kind, point {i + 1}",
                         fp.value, fp.err_abs, ee.value, tol))
    worst = 0.0
    count = 0
    for total in range(1, 5):
        for alphas in _small_tuples(total):
            basis, m1, m2 = integrand_shift_matrices(alphas)
            eye = np.eye(len(basis), dtype=object)
            gap = (m1 @ m2 != eye).sum() + (m2 @ m1 != eye).sum()
            worst = max(worst, float(gap))
            count += 1
    rows.append(ResultRow(f"shift matrices invert exactly ({count} tuples)",
                          complex(worst), 0.0, worst, worst <= tol))
    return rows


def _small_tuples(total):
    out = [(total,)]
    for first in range(1, total):
        for rest in _small_tuples(total - first):
            out.append((first,) + rest)
    return out


def _suite_fourier(tol, rng):
    delta = builtin_form("delta")
    rows = []
    for alphas, forms in (((11,), (delta,)), ((1, 11), (delta, delta))):
        series = eichler_fourier_series(forms, alphas, kind="integral")
        for i in range(2):
            z = complex(rng.uniform(-0.4, 0.4), rng.uniform(0.8, 2.0))
            want = eichler_integral_direct(forms, alphas, z)
            got = series.evaluate(z)
            rows.append(_row(f"series vs quadrature, depth {len(alphas)}, "
                             f"point {i + 1}", got, series.tail_bound(z.imag),
                             want.value, tol))
        z = complex(0.2, 1.1)
        per = abs(series.evaluate(z + 1.0) - series.evaluate(z))
        rows.append(ResultRow(f"periodicity, depth {len(alphas)}",
                              complex(per), 0.0, per, per <= tol))
    return rows


def _suite_continuation(tol, rng):
    delta = builtin_form("delta")
    rows = []
    for alphas, forms, s in (((), (delta,), 16.0), ((2,), (delta, delta), 16.0)):
        ser = multiple_L_series(LArgument(s, alphas, forms))
        cont = multiple_L_continued(LArgument(s, alphas, forms))
        rows.append(_row(f"overlap with series, depth {len(forms)}",
                         cont.value, cont.err_abs, ser.value, tol))
    for s in (0.5, -1.5):
        cont = multiple_L_continued(LArgument(s, (), (delta,)))
        lam = lambda_completed((delta,), (11,), s - 11.0, method="quadrature")
        want = lam.value * reciprocal_gamma_factor(s - 11.0, (11,))
        rows.append(_row(f"continued value vs completed transform, s={s:g}",
                         cont.value, cont.err_abs, want, tol))
    return rows


def _suite_word(tol, rng):
    delta = builtin_form("delta")
    e4 = builtin_form("delta_e4")
    z = complex(0.3, 1.4)
    rows = []
    for alphas, forms in (((3,), (delta,)), ((1, 2), (delta, delta)),
                          ((2, 2), (delta, e4))):
        got = antiderivative_word_integral(forms, alphas, z)
        want = eichler_integral_direct(forms, alphas, z)
        rows.append(_row(f"word expansion, exponents {list(alphas)}",
                         got.value, got.err_abs, want.value, tol))
    return rows


def _suite_modularity(tol, rng):
    delta = builtin_form("delta")
    s_mat = ((0.0, -1.0), (1.0, 0.0))
    rows = []
    res = modularity_residual("integral", s_mat, INF_BASE, 2j, (11,), (delta,))
    rows.append(ResultRow("inversion, depth one", res.value, res.err_abs,
                          abs(res.value), abs(res.value) <= tol))
    res = modularity_residual("integral", s_mat, 1j, 1.3 + 0.9j, (1, 11),
                              (delta, delta))
    rows.append(ResultRow("inversion, depth two", res.value, res.err_abs,
                          abs(res.value), abs(res.value) <= tol))
    res = modularity_residual("integrand", s_mat, INF_BASE, 2j, (11,), (delta,))
    rows.append(ResultRow("integrand transform, depth one", res.value,
                          res.err_abs, abs(res.value), abs(res.value) <= tol))
    return rows


def _suite_functional_eq(tol, rng):
    delta = builtin_form("delta")
    rows = []
    for s in (2.0, 3.0):
        res = functional_equation_residual((11,), (delta,), s)
        rows.append(ResultRow(f"reflection, depth one, s={s:g}", res.value,
                              res.err_abs, abs(res.value),
                              abs(res.value) <= tol))
    res = functional_equation_residual((1, 11), (delta, delta), 2.0)
    rows.append(ResultRow("reflection, depth two, s=2", res.value,
                          res.err_abs, abs(res.value), abs(res.value) <= tol))
    return rows


def _suite_twisted(tol, rng, data_file, base_point):
    form = load_coefficients(Path(data_file))
    chi = legendre_character(form.level)
    rows = []
    for s in (1.5, 0.5):
        res = twisted_residual((1,), (form,), (chi,), s, base_point)
        rows.append(ResultRow(f"twisted reflection, s={s:g}", res.value,
                              res.err_abs, abs(res.value),
                              abs(res.value) <= tol))
    return rows


_PLAIN_SUITES = {
    "mellin": _suite_mellin,
    "shifts": _suite_shifts,
    "duality": _suite_duality,
    "integrands": _suite_integrands,
    "fourier": _suite_fourier,
    "continuation": _suite_continuation,
    "word": _suite_word,
    "modularity": _suite_modularity,
    "functional-eq": _suite_functional_eq,
}


def cmd_verify(args) -> int:
    started = time.perf_counter()
    tol = args.tol if args.tol is not None else _default_tol()
    rng = np.random.default_rng(args.seed)
    wants_twisted = args.suite in ("twisted", "all")
    if args.suite == "twisted" and (args.file is None or
                                    args.base_point is None):
        raise ConfigurationError(
            "the twisted suite requires --file and --base-point")

    inputs = {"suite": args.suite, "tol": tol, "seed": args.seed}
    if args.file is not None:
        inputs["file"] = args.file
    if args.base_point is not None:
        inputs["base_point"] = _cplx(_parse_complex(args.base_point))
    report = RunReport("verify", inputs)

    if args.suite == "all":
        names = [n for n in SUITE_NAMES if n not in ("twisted", "all")]
    elif args.suite == "twisted":
        names = []
    else:
        names = [args.suite]
    for name in names:
        for row in _PLAIN_SUITES[name](tol, rng):
            row.label = f"{name}: {row.label}"
            report.results.append(row)

    if wants_twisted:
        if args.file is not None and args.base_point is not None:
            base = _parse_complex(args.base_point)
            for row in _suite_twisted(tol, rng, args.file, base):
                row.label = f"twisted: {row.label}"
                report.results.append(row)
        else:
            report.skipped.append(
                "twisted: needs --file and --base-point")

    report.emit(started)
    return EXIT_OK if report.all_passed() else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itpl",
        description="Multiple L-functions and iterated period integrals of "
                    "cusp forms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="print Fourier coefficients")
    p.add_argument("--form", help="builtin form name")
    p.add_argument("--file", help="coefficient file (JSON)")
    p.add_argument("--count", type=int, required=True,
                   help="number of leading coefficients")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("value", help="evaluate a single quantity")
    p.add_argument("--kind", choices=VALUE_KINDS, required=True)
    p.add_argument("--forms", required=True,
                   help="comma-separated builtin form names")
    p.add_argument("--alphas", default=None,
                   help="comma-separated integer exponents (inner exponents "
                        "for L-series and periods, all exponents for tilde)")
    p.add_argument("--s", default=None, help="argument, as a+bi")
    p.add_argument("--z", default=None,
                   help="evaluation point for --kind tilde, as a+bi")
    p.add_argument("--base", default="inf",
                   help="base point for --kind tilde (a+bi or 'inf')")
    p.add_argument("--tol", type=float, default=None,
                   help="target tolerance (default ITPL_DEFAULT_TOL or 1e-8)")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITE_NAMES, required=True)
    p.add_argument("--tol", type=float, default=None,
                   help="pass threshold (default ITPL_DEFAULT_TOL or 1e-8)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized test points")
    p.add_argument("--file", default=None,
                   help="coefficient file for the twisted suite")
    p.add_argument("--base-point", default=None,
                   help="base point for the twisted suite, as a+bi")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="sweep a segment and write a table")
    p.add_argument("--kind", choices=VALUE_KINDS, required=True)
    p.add_argument("--forms", required=True)
    p.add_argument("--alphas", default=None)
    p.add_argument("--s-start", required=True, help="segment start, as a+bi")
    p.add_argument("--s-end", required=True, help="segment end, as a+bi")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_table)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _CONFIG_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
