# src/galgeo/cli/commands.py
import argparse
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List

import numpy as np

from src.galgeo.base import (
    ArgumentSpecError,
    EvaluationDomainError,
    ExpressionParseError,
    InvariantDriftError,
    SamplingExhaustedError,
    SingularCoframeError,
    SystemFileError,
)
from src.galgeo.config import settings
from src.galgeo.geodesy.development import check_curve_development, develop
from src.galgeo.geodesy.integrator import integrate_geodesic
from src.galgeo.geometry.connection import (
    build_connection,
    chern_connection,
    deviation_eigenvalues,
    extract_invariants,
    verify_structure_equations,
)
from src.galgeo.geometry.jetconn import appendix_cross_check
from src.galgeo.cli.loader import load_system_file
from src.galgeo.cli.output import write_table
from src.galgeo.cli.points import coordinate_names, parse_grid, parse_point, parse_points
from src.galgeo.symbolic.expr import ChartPoint
from src.galgeo.utils.sampling import sample_points
from src.galgeo.utils.tensors import tensor_labels

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_BLOWUP = 3

INPUT_ERRORS = (SystemFileError, ExpressionParseError, ArgumentSpecError, SamplingExhaustedError)


def _coordinates(point: ChartPoint) -> Dict[str, float]:
    return dict(zip(coordinate_names(point.n), point.as_array().tolist()))


def _workers(args: argparse.Namespace) -> int:
    return max(1, getattr(args, "workers", None) or settings.workers)


# ===== check =====
def cmd_check(args: argparse.Namespace) -> int:
    try:
        document = load_system_file(args.file)
        conn = build_connection(document.system, document.normalization)
        points = sample_for_check(conn, document.n, args.points, args.seed)
    except INPUT_ERRORS as exc:
        logger.error("%s", exc)
        logger.debug("input error", exc_info=True)
        return EXIT_INPUT_ERROR

    tol = args.tol
    report = verify_structure_equations(conn, points, tol, workers=_workers(args))
    rows: List[Dict[str, Any]] = [
        {"equation": name, "max_residual": value, "tolerance": tol, "passed": value <= tol}
        for name, value in report.residuals.items()
    ]
    rows.append({"equation": "curvature_R", "max_residual": report.curvature_norm, "tolerance": None, "passed": None})
    passed = report.passed
    if report.points_failed:
        logger.warning("%d points skipped after evaluation errors", report.points_failed)

    if args.appendix:
        appendix = appendix_cross_check(document.system, conn, points, tol)
        rows += [
            {"equation": f"appendix:{name}", "max_residual": value, "tolerance": tol, "passed": value <= tol}
            for name, value in appendix.residuals.items()
        ]
        rows += [
            {"equation": f"appendix:{name}", "max_residual": value, "tolerance": None, "passed": None}
            for name, value in appendix.info.items()
        ]
        passed = passed and appendix.passed

    write_table(rows, args.format)
    logger.info("check %s: %s", document.name or args.file, "passed" if passed else "FAILED")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def sample_for_check(conn, n: int, count: int, seed: int) -> List[ChartPoint]:
    return sample_points(conn.coefficient_expressions(), n, count, seed)


# ===== invariants =====
def cmd_invariants(args: argparse.Namespace) -> int:
    try:
        document = load_system_file(args.file)
        n = document.n
        if args.grid:
            points = parse_grid(args.grid, n)
        elif args.at:
            points = parse_points(args.at, n)
        else:
            raise ArgumentSpecError("give --at or --grid")
        conn = chern_connection(document.system) if args.chern else build_connection(
            document.system, document.normalization
        )
    except INPUT_ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_INPUT_ERROR

    labels = (
        tensor_labels("D", n, 2) + tensor_labels("Q", n, 3) + tensor_labels("P", n, 2) + tensor_labels("Ttors", n, 3)
    )

    def row(point: ChartPoint) -> Dict[str, Any]:
        out: Dict[str, Any] = _coordinates(point)
        try:
            invariants = extract_invariants(conn, point)
        except (EvaluationDomainError, SingularCoframeError) as exc:
            out.update({label: math.nan for label in labels})
            if args.deviation:
                out.update({f"eig[{k + 1}]_{part}": math.nan for k in range(n) for part in ("re", "im")})
            out["status"] = f"error: {exc}"
            return out
        out.update(invariants.entries())
        if args.deviation:
            values = deviation_eigenvalues(invariants)
            for k, value in enumerate(values):
                out[f"eig[{k + 1}]_re"] = float(np.real(value))
                out[f"eig[{k + 1}]_im"] = float(np.imag(value))
        out["status"] = "ok"
        return out

    # warm the cached curvature forms before fanning out
    _ = conn.curvature_forms
    with ThreadPoolExecutor(max_workers=_workers(args)) as executor:
        rows = list(executor.map(row, points))

    flagged = sum(1 for r in rows if r["status"] != "ok")
    if flagged:
        logger.warning("%d of %d rows flagged with evaluation errors", flagged, len(rows))
    write_table(rows, args.format)
    return EXIT_OK


# ===== geodesic =====
def cmd_geodesic(args: argparse.Namespace) -> int:
    try:
        document = load_system_file(args.file)
        n = document.n
        init = parse_point(args.init, n)
        if not args.step > 0.0:
            raise ArgumentSpecError(f"--step must be positive, got {args.step}")
        if args.end < init.t:
            raise ArgumentSpecError(f"--end {args.end} lies before the initial time {init.t}")
        curve = integrate_geodesic(document.system, init, args.end, args.step)
    except INPUT_ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_INPUT_ERROR
    except EvaluationDomainError as exc:
        logger.error("initial point outside the domain of the system: %s", exc)
        return EXIT_INPUT_ERROR

    names = coordinate_names(n)
    rows: List[Dict[str, Any]] = []
    for k in range(len(curve)):
        row: Dict[str, Any] = {"s": float(curve.s[k])}
        row.update(dict(zip(names, curve.points[k].tolist())))
        row["flag"] = ""
        rows.append(row)
    if curve.truncated:
        rows[-1]["flag"] = curve.status

    summary = None
    passed = True
    if args.develop:
        conn = build_connection(document.system, document.normalization)
        try:
            development = develop(conn, curve)
        except (InvariantDriftError, EvaluationDomainError) as exc:
            logger.error("development failed: %s", exc)
            write_table(rows, args.format)
            return EXIT_BLOWUP
        for row, point in zip(rows, development.model_points):
            row.update({f"dev_{name}": value for name, value in zip(names, point.as_array().tolist())})
        if len(curve) >= 3:
            verdict = check_curve_development(conn, curve, args.tol, development=development)
            passed = verdict.passed
            summary = {
                "straight_line_residual": verdict.straight_line.max_violation,
                "max_omega_pullback": verdict.max_omega_pullback,
                "max_phi_pullback": verdict.max_phi_pullback,
                "tolerance": args.tol,
                "passed": verdict.passed,
            }
        else:
            logger.warning("too few samples (%d) for a straight-line verdict", len(curve))

    write_table(rows, args.format, summary=summary)
    if curve.truncated:
        logger.warning("geodesic truncated (%s): %s", curve.status, curve.message)
        return EXIT_BLOWUP
    return EXIT_OK if passed else EXIT_CHECK_FAILED
