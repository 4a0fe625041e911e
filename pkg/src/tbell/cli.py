"""Command-line interface.

Subcommands:
  evaluate  correlators, Bell value and channel predicates for a scenario file
  optimize  multi-start search over a channel class
  scan      parameter sweeps (werner mixing weight, canonical middle channel)
  verify    verification suites with a per-check pass/fail table

Exit codes: 0 success, 1 input error, 2 verification failure.  Reports are
byte-identical for identical flags and seed; the TBELL_SEED environment
variable supplies the seed only when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .channels import (
    is_cptp,
    is_entanglement_breaking,
    is_unital,
    is_unitary,
)
from .optimize import (
    ChannelClass,
    InvalidSpec,
    OptimizationSpec,
    TSIRELSON_BOUND,
    campaign_report,
    optimize_bell,
    scan_canonical_e,
    scan_werner,
    verify_cq_alice_tsirelson,
    verify_ebt_bias,
    verify_table1,
)
from .reports import to_csv, to_json
from .scenario import (
    bell_value,
    correlations_closed_form,
    correlations_indivisible,
    correlations_oracle,
    hadamard_three_step,
    is_divisible,
)
from .serialize import ScenarioFormatError, load_document

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

_SUITES = ("table1", "appendix-c", "werner", "ebt-bias", "hadamard", "all")


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; the exit-code contract
    # reserves 2 for verification failures, so flag errors map to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pe = sub.add_parser("evaluate", help="evaluate a scenario or conditioned-process file")
    pe.add_argument("scenario", help="path to the JSON document")
    pe.add_argument(
        "--oracle",
        action="store_true",
        help="add enumeration-oracle correlators and their deviation from the closed form",
    )
    pe.add_argument("--format", choices=("json", "csv"), default="json")
    pe.add_argument("--output", help="write the report to this file instead of stdout")

    po = sub.add_parser("optimize", help="multi-start search over a channel class")
    po.add_argument(
        "--class",
        dest="channel_class",
        required=True,
        choices=[c.value for c in ChannelClass],
    )
    po.add_argument("--bias", default="0", help="fixed |v| in [0, 1], or 'free'")
    po.add_argument("--restarts", type=int, default=64)
    po.add_argument("--max-iters", type=int, default=2000)
    po.add_argument("--seed", type=int, default=None)
    po.add_argument("--tol", type=float, default=1e-8)
    po.add_argument("--constraint", choices=("exact", "sampled"), default="exact")
    po.add_argument(
        "--directions", type=int, default=256, help="sampled-positivity direction count"
    )
    po.add_argument("--parametrization", choices=("extremal", "ginibre"), default="extremal")
    po.add_argument("--theta", type=float, default=0.0, help="canonical-e middle channel angle")
    po.add_argument("--phi", type=float, default=0.0, help="canonical-e middle channel angle")
    po.add_argument("--format", choices=("json", "csv"), default="json")
    po.add_argument("--output")

    ps = sub.add_parser("scan", help="parameter sweeps")
    ps.add_argument("--what", required=True, choices=("werner", "canonical"))
    ps.add_argument("--from", dest="start", type=float, default=0.0)
    ps.add_argument("--to", dest="stop", type=float, default=1.0)
    ps.add_argument("--steps", type=int, default=101)
    margin = math.asin(math.sqrt(0.1))
    ps.add_argument("--theta-from", type=float, default=margin)
    ps.add_argument("--theta-to", type=float, default=math.pi - margin)
    ps.add_argument("--theta-steps", type=int, default=9)
    ps.add_argument("--phi-from", type=float, default=margin)
    ps.add_argument("--phi-to", type=float, default=math.pi - margin)
    ps.add_argument("--phi-steps", type=int, default=9)
    ps.add_argument("--restarts", type=int, default=None)
    ps.add_argument("--max-iters", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--format", choices=("json", "csv"), default="json")
    ps.add_argument("--output")

    pv = sub.add_parser("verify", help="verification suites")
    pv.add_argument("--suite", required=True, choices=_SUITES)
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--restarts", type=int, default=None)
    pv.add_argument("--format", choices=("text", "json", "csv"), default="text")
    pv.add_argument("--output")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TBELL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _InputError(f"TBELL_SEED must be an integer, got {env!r}") from None
    return 0


def _emit(text: str, output) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _channel_predicates(chan) -> dict:
    return {
        "cptp": True,
        "unital": is_unital(chan),
        "unitary": is_unitary(chan),
        "entanglement_breaking": is_entanglement_breaking(chan),
    }


def _correlations_obj(c) -> dict:
    return {"e13": c.e13, "e14": c.e14, "e23": c.e23, "e24": c.e24}


def cmd_evaluate(args) -> int:
    try:
        kind, doc = load_document(args.scenario)
    except FileNotFoundError:
        raise _InputError(f"{args.scenario}: no such file") from None
    except json.JSONDecodeError as err:
        raise _InputError(f"{args.scenario}:{err.lineno}:{err.colno}: {err.msg}") from None
    except ScenarioFormatError as err:
        raise _InputError(f"{args.scenario}: {err}") from None

    if kind == "scenario":
        named = (
            ("lambda_A", doc.lambda_a),
            ("lambda_E", doc.lambda_e),
            ("lambda_B", doc.lambda_b),
        )
    else:
        named = (
            ("lambda_31", doc.process.lambda_31),
            ("lambda_41", doc.process.lambda_41),
            ("lambda_32", doc.process.lambda_32),
            ("lambda_42", doc.process.lambda_42),
        )
    for name, chan in named:
        if not is_cptp(chan):
            raise _InputError(f"{args.scenario}: {name} fails CPTP")

    if kind == "scenario":
        closed = correlations_closed_form(doc)
        report = {
            "kind": "scenario",
            "correlations": _correlations_obj(closed),
            "bell": bell_value(closed),
            "channels": {name: _channel_predicates(chan) for name, chan in named},
        }
        if args.oracle:
            oracle = correlations_oracle(doc)
            report["oracle"] = _correlations_obj(oracle)
            report["max_deviation_from_closed_form"] = max(
                abs(getattr(closed, f) - getattr(oracle, f)) for f in ("e13", "e14", "e23", "e24")
            )
    else:
        correlations = correlations_indivisible(doc.process, doc.v, doc.a1, doc.a2, doc.b1, doc.b2)
        verdict = is_divisible(doc.process)
        report = {
            "kind": "process",
            "correlations": _correlations_obj(correlations),
            "bell": bell_value(correlations),
            "channels": {name: _channel_predicates(chan) for name, chan in named},
            "divisibility": {
                "divisible": verdict.divisible,
                "residual": verdict.residual,
                "factor_residual": verdict.factor_residual,
                "consistency_residual": verdict.consistency_residual,
                "factor_is_cptp": verdict.factor_is_cptp,
            },
        }

    if args.format == "json":
        _emit(to_json(report), args.output)
    else:
        header = ["kind", "e13", "e14", "e23", "e24", "bell"]
        row = [report["kind"]] + [report["correlations"][k] for k in ("e13", "e14", "e23", "e24")]
        row.append(report["bell"])
        for name, _ in named:
            for pred in ("cptp", "unital", "unitary", "entanglement_breaking"):
                header.append(f"{name}_{pred}")
                row.append(report["channels"][name][pred])
        if kind == "process":
            header += ["divisible", "residual"]
            row += [report["divisibility"]["divisible"], report["divisibility"]["residual"]]
        elif args.oracle:
            header.append("max_deviation_from_closed_form")
            row.append(report["max_deviation_from_closed_form"])
        _emit(to_csv(header, [row]), args.output)
    return EXIT_OK


def _parse_bias(text: str):
    if text == "free":
        return None
    try:
        value = float(text)
    except ValueError:
        raise _InputError(f"--bias must be a number in [0, 1] or 'free', got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise _InputError("--bias must lie in [0, 1]")
    return value


def cmd_optimize(args) -> int:
    spec = OptimizationSpec(
        channel_class=ChannelClass(args.channel_class),
        bias=_parse_bias(args.bias),
        restarts=args.restarts,
        max_iters=args.max_iters,
        seed=_resolve_seed(args),
        convergence_tol=args.tol,
        constraint_mode={"exact": "exact_cptp", "sampled": "sampled_positivity"}[args.constraint],
        positivity_directions=args.directions,
        cptp_parametrization=args.parametrization,
        canonical_theta=args.theta,
        canonical_phi=args.phi,
    )
    try:
        result = optimize_bell(spec)
    except InvalidSpec as err:
        raise _InputError(str(err)) from None
    report = campaign_report(result)
    if args.format == "json":
        _emit(to_json(report), args.output)
    else:
        header = [
            "class",
            "bias_mode",
            "target",
            "best_value",
            "audit_cptp",
            "restart",
            "seed",
            "value",
            "iters",
            "converged",
        ]
        rows = [
            [
                report["class"],
                report["bias_mode"],
                report["target"],
                report["best_value"],
                report["audit_cptp"],
                index,
                entry["seed"],
                entry["value"],
                entry["iters"],
                entry["converged"],
            ]
            for index, entry in enumerate(report["per_restart"])
        ]
        _emit(to_csv(header, rows), args.output)
    return EXIT_OK


def cmd_scan(args) -> int:
    seed = _resolve_seed(args)
    if args.what == "werner":
        if args.steps < 1:
            raise _InputError("--steps must be >= 1")
        if not (0.0 <= args.start <= args.stop <= 1.0):
            raise _InputError("werner scan needs 0 <= from <= to <= 1")
        grid = np.linspace(args.start, args.stop, args.steps)
        points = scan_werner(
            grid,
            seed=seed,
            restarts=args.restarts if args.restarts is not None else 4,
            max_iters=args.max_iters if args.max_iters is not None else 600,
        )
        rows = [
            {
                "p": pt.p,
                "bell_fixed_settings": pt.bell_fixed_settings,
                "max_bell": pt.max_bell,
                "is_ebt": pt.is_ebt,
            }
            for pt in points
        ]
        report = {"what": "werner", "seed": seed, "rows": rows}
        header = ["p", "bell_fixed_settings", "max_bell", "is_ebt"]
    else:
        for name, steps in (("theta", args.theta_steps), ("phi", args.phi_steps)):
            if steps < 1:
                raise _InputError(f"--{name}-steps must be >= 1")
        theta_grid = np.linspace(args.theta_from, args.theta_to, args.theta_steps)
        phi_grid = np.linspace(args.phi_from, args.phi_to, args.phi_steps)
        points = scan_canonical_e(
            theta_grid,
            phi_grid,
            restarts=args.restarts if args.restarts is not None else 8,
            seed=seed,
            max_iters=args.max_iters if args.max_iters is not None else 1200,
        )
        rows = [
            {
                "theta": pt.theta,
                "phi": pt.phi,
                "max_bell": pt.max_bell,
                "nonunitary_by_margin": pt.nonunitary_by_margin,
                "below_tsirelson": pt.below_tsirelson,
            }
            for pt in points
        ]
        report = {"what": "canonical", "seed": seed, "rows": rows}
        header = ["theta", "phi", "max_bell", "nonunitary_by_margin", "below_tsirelson"]
    if args.format == "json":
        _emit(to_json(report), args.output)
    else:
        _emit(to_csv(header, [[row[k] for k in header] for row in rows]), args.output)
    return EXIT_OK


def _check(name: str, value, target: str, passed: bool) -> dict:
    return {"check": name, "value": value, "target": target, "passed": bool(passed)}


def _suite_hadamard(seed: int, restarts) -> tuple[list[dict], dict]:
    e12, e23, e13 = hadamard_three_step()
    checks = [
        _check("hadamard e12", e12, "|value| <= 1e-12", abs(e12) <= 1e-12),
        _check("hadamard e23", e23, "|value| <= 1e-12", abs(e23) <= 1e-12),
        _check("hadamard e13", e13, "|value - 1| <= 1e-12", abs(e13 - 1.0) <= 1e-12),
    ]
    return checks, {}


def _suite_ebt_bias(seed: int, restarts) -> tuple[list[dict], dict]:
    magnitudes = [i / 5.0 for i in range(6)]
    points = verify_ebt_bias(magnitudes, seed=seed)
    checks = []
    for pt in points:
        checks.append(
            _check(
                f"ebt-bias |v|={pt.magnitude:g}",
                pt.attained,
                "matches 2*sqrt(1+|v|^2) within 1e-9",
                abs(pt.attained - pt.target) <= 1e-9,
            )
        )
    values = [pt.attained for pt in points]
    checks.append(
        _check(
            "ebt-bias monotone",
            values[-1] - values[0],
            "attained values non-decreasing in |v|",
            all(b >= a - 1e-12 for a, b in zip(values, values[1:])),
        )
    )
    checks.append(
        _check(
            "ebt-bias endpoint",
            values[-1],
            "2*sqrt(2) within 1e-9",
            abs(values[-1] - TSIRELSON_BOUND) <= 1e-9,
        )
    )
    cq_value = verify_cq_alice_tsirelson(seed=seed)
    checks.append(
        _check(
            "cq-alice tsirelson",
            cq_value,
            "2*sqrt(2) within 1e-9",
            abs(cq_value - TSIRELSON_BOUND) <= 1e-9,
        )
    )
    details = {
        "points": [
            {"magnitude": pt.magnitude, "attained": pt.attained, "target": pt.target}
            for pt in points
        ]
    }
    return checks, details


def _suite_werner(seed: int, restarts) -> tuple[list[dict], dict]:
    grid = np.linspace(0.0, 1.0, 101)
    points = scan_werner(
        grid, seed=seed, restarts=restarts if restarts is not None else 2, max_iters=500
    )
    linearity = max(abs(pt.bell_fixed_settings - TSIRELSON_BOUND * pt.p) for pt in points)
    flip_ok = all(pt.is_ebt == (pt.p <= 1.0 / 3.0 + 1e-9) for pt in points)
    window = [pt for pt in points if 1.0 / 3.0 + 1e-9 < pt.p < 1.0 / math.sqrt(2.0)]
    window_ok = all(
        (not pt.is_ebt) and pt.bell_fixed_settings < 2.0 for pt in window
    ) and bool(window)
    checks = [
        _check("werner linearity", linearity, "max |bell - 2*sqrt(2)*p| <= 1e-12", linearity <= 1e-12),
        _check("werner ebt flip", "p = 1/3", "entanglement breaking iff p <= 1/3", flip_ok),
        _check(
            "werner window",
            len(window),
            "1/3 < p < 1/sqrt(2): entanglement preserved yet bell < 2",
            window_ok,
        ),
    ]
    for target_p in (0.0, 0.5, 1.0):
        pt = min(points, key=lambda q: abs(q.p - target_p))
        checks.append(
            _check(
                f"werner optimized p={target_p:g}",
                pt.max_bell,
                "matches 2*sqrt(2)*p within 1e-4",
                abs(pt.max_bell - TSIRELSON_BOUND * pt.p) <= 1e-4,
            )
        )
    details = {
        "rows": [
            {
                "p": pt.p,
                "bell_fixed_settings": pt.bell_fixed_settings,
                "max_bell": pt.max_bell,
                "is_ebt": pt.is_ebt,
            }
            for pt in points
        ]
    }
    return checks, details


def _suite_appendix_c(seed: int, restarts) -> tuple[list[dict], dict]:
    margin = math.asin(math.sqrt(0.1))
    grid = np.linspace(margin, math.pi - margin, 9)
    points = scan_canonical_e(
        grid, grid, restarts=restarts if restarts is not None else 8, seed=seed, max_iters=1200
    )
    worst = max(pt.max_bell for pt in points)
    checks = [
        _check(
            "canonical margin grid",
            len(points),
            "all grid channels non-unitary by margin >= 0.1",
            all(pt.nonunitary_by_margin for pt in points),
        ),
        _check(
            "canonical strictly below ceiling",
            worst,
            "max_bell < 2*sqrt(2) - 1e-3 on the whole grid",
            all(pt.below_tsirelson for pt in points),
        ),
    ]
    identity_point = scan_canonical_e(
        [0.0], [0.0], restarts=16, seed=_derived_suite_seed(seed), max_iters=1500
    )[0]
    checks.append(
        _check(
            "canonical identity attains ceiling",
            identity_point.max_bell,
            "2*sqrt(2) within 1e-4",
            abs(identity_point.max_bell - TSIRELSON_BOUND) <= 1e-4,
        )
    )
    details = {
        "rows": [
            {
                "theta": pt.theta,
                "phi": pt.phi,
                "max_bell": pt.max_bell,
                "nonunitary_by_margin": pt.nonunitary_by_margin,
                "below_tsirelson": pt.below_tsirelson,
            }
            for pt in points
        ]
    }
    return checks, details


def _derived_suite_seed(seed: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(7,)).generate_state(1, dtype=np.uint64)[0])


def _suite_table1(seed: int, restarts) -> tuple[list[dict], dict]:
    report = verify_table1(seed=seed, restarts=restarts if restarts is not None else 64)
    checks = []
    for cell in report.cells:
        if cell.note:
            checks.append(
                _check(f"table1 {cell.row}/{cell.column}", cell.note, "noted, not optimized", True)
            )
            continue
        checks.append(
            _check(
                f"table1 {cell.row}/{cell.column}",
                cell.best_value,
                f"attains {cell.target:.7g} (-1e-3/+1e-6)"
                if cell.row != "indivisible"
                else f"attains {cell.target:.7g} (-1e-6/+1e-6)",
                cell.passed,
            )
        )
    details = {
        "cells": [
            {
                "row": cell.row,
                "column": cell.column,
                "class": cell.channel_class,
                "bias_mode": cell.bias_mode,
                "target": cell.target,
                "best_value": cell.best_value,
                "audit_cptp": cell.audit_cptp,
                "passed": cell.passed,
                "note": cell.note,
            }
            for cell in report.cells
        ]
    }
    return checks, details


_SUITE_RUNNERS = {
    "hadamard": _suite_hadamard,
    "ebt-bias": _suite_ebt_bias,
    "werner": _suite_werner,
    "appendix-c": _suite_appendix_c,
    "table1": _suite_table1,
}


def _format_check_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    names = list(_SUITE_RUNNERS) if args.suite == "all" else [args.suite]
    checks: list[dict] = []
    details: dict = {}
    for name in names:
        suite_checks, suite_details = _SUITE_RUNNERS[name](seed, args.restarts)
        checks.extend(suite_checks)
        if suite_details:
            details[name] = suite_details
    passed = all(c["passed"] for c in checks)

    if args.format == "json":
        report = {
            "suite": args.suite,
            "seed": seed,
            "checks": checks,
            "passed": passed,
        }
        report["details"] = details
        _emit(to_json(report), args.output)
    elif args.format == "csv":
        header = ["check", "value", "target", "passed"]
        rows = [[c["check"], c["value"], c["target"], c["passed"]] for c in checks]
        _emit(to_csv(header, rows), args.output)
    else:
        width = max(len(c["check"]) for c in checks)
        lines = [f"suite: {args.suite} (seed {seed})"]
        for c in checks:
            status = "pass" if c["passed"] else "FAIL"
            lines.append(
                f"  {c['check']:<{width}}  {_format_check_value(c['value']):>22}  "
                f"{c['target']:<52}  {status}"
            )
        lines.append(f"result: {'PASS' if passed else 'FAIL'}")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if passed else EXIT_VERIFY


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_INPUT
    try:
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        if args.command == "scan":
            return cmd_scan(args)
        return cmd_verify(args)
    except _InputError as err:
        sys.stderr.write(f"tbell: error: {err}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
