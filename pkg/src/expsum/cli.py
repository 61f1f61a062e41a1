"""Command-line front end: ``expsum {check,solve,count,plot,validate}``.

Exit codes: 0 pass, 1 check failure, 2 parse or usage error, 3 budget
exhausted or an unresolvable zero on a contour.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .analytic import (CertificationError, ZeroOnBoundary, count_zeros, locate_zeros, rouche_certificate,
                       strip_bounds, validate_certificate)
from .closedness import check_free_and_rotund, powers_problem_from_expsum
from .core import (SCHEMA, EmptyAfterMerge, ExpSum, ProblemFormatError, Rectangle, ZeroCertificate, fmt_real,
                   merge_terms, normalize, parse_problem, problem_to_json)
from .pipeline import BudgetExhausted, ConstructiveParams, enumerate_zeros, solve_constructive

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    tol: float = 1e-9
    engine: str = "analytic"
    rect: Rectangle | None = None
    count: int | None = None
    seed: int = 0
    output_path: str | None = None


@dataclass
class Problem:
    original: ExpSum    # merged, unshifted
    normalized: ExpSum


def load_problem(path: str) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFormatError(f"cannot read problem file: {exc.strerror}", path) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    _, raw = parse_problem(data)
    try:
        original = merge_terms(raw)
        normalized, _ = normalize(raw)
    except EmptyAfterMerge as exc:
        raise ProblemFormatError(str(exc), "terms") from None
    return Problem(original, normalized)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(obj, out: str | None) -> None:
    text = dumps(obj)
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def _rect_arg(text: str) -> Rectangle:
    try:
        return Rectangle.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    prob = load_problem(args.problem)
    if prob.normalized.is_single_term:
        report = {"schema": SCHEMA, "pass": False, "reason": "single term"}
        emit(report, args.out)
        return EXIT_CHECK
    rep = check_free_and_rotund(powers_problem_from_expsum(prob.normalized))
    emit({"schema": SCHEMA, **rep.to_json()}, args.out)
    return EXIT_OK if rep.passed else EXIT_CHECK


def _recertify(f: ExpSum, cert: ZeroCertificate, tol: float) -> ZeroCertificate:
    """The same disk, certified on the original (unshifted) input."""
    return rouche_certificate(f, cert.center, cert.radius, tol=tol, expected=cert.winding)


def _constructive(prob: Problem, count: int, tol: float, check_ok: bool):
    certs, traces = [], []
    k = 0
    while len(certs) < count and k < 4 * count + 10:
        params = ConstructiveParams(tol=tol, start_index=k)
        cert, trace = solve_constructive(prob.normalized, params, require_free_and_rotund=check_ok)
        k += 1
        traces.append(trace.to_json())
        if all(abs(cert.z_star - c.z_star) > 1e-6 for c in certs):
            certs.append(_recertify(prob.original, cert, tol))
    if len(certs) < count:
        raise BudgetExhausted(f"constructive engine found only {len(certs)} distinct zeros")
    certs.sort(key=lambda c: (abs(c.z_star.imag), c.z_star.imag < 0, c.z_star.real))
    return certs, traces


def _match_distance(f: ExpSum, certs: list[ZeroCertificate], tol: float) -> float:
    worst = 0.0
    for c in certs:
        z = c.z_star
        near = locate_zeros(f, Rectangle(z.real - 0.25, z.real + 0.25, z.imag - 0.25, z.imag + 0.25), tol)
        worst = max(worst, min((abs(n.z_star - z) for n in near), default=math.inf))
    return worst


def cmd_solve(args) -> int:
    prob = load_problem(args.problem)
    cfg = RunConfig(args.tol, args.engine, args.rect, args.count, args.seed, args.out)
    if prob.normalized.is_single_term:
        emit({"schema": SCHEMA, "zeros": [], "note": "a single exponential term has no zeros"}, cfg.output_path)
        return EXIT_OK
    rep = check_free_and_rotund(powers_problem_from_expsum(prob.normalized))
    out: dict = {"schema": SCHEMA, "problem": problem_to_json(prob.original), "engine": cfg.engine,
                 "tol": fmt_real(cfg.tol), "seed": cfg.seed, "check": rep.to_json()}
    if cfg.engine in ("constructive", "both"):
        if not rep.passed:
            emit(out, cfg.output_path)
            sys.stderr.write("expsum: problem is not free and rotund; constructive engine refused\n")
            return EXIT_CHECK
        if cfg.count is None:
            raise UsageError("the constructive engine needs --count")
    traces = None
    try:
        if cfg.engine == "constructive":
            zeros, traces = _constructive(prob, cfg.count, cfg.tol, True)
        else:
            if cfg.rect is not None:
                zeros = locate_zeros(prob.original, cfg.rect, cfg.tol)
            else:
                zeros = enumerate_zeros(prob.original, cfg.count, tol=cfg.tol)
            if cfg.engine == "both":
                cons, traces = _constructive(prob, cfg.count, cfg.tol, True)
                out["constructive_zeros"] = [c.to_json() for c in cons]
                out["match_distance"] = fmt_real(_match_distance(prob.original, cons, cfg.tol))
    except BudgetExhausted as exc:
        partial = exc.trace.to_json() if exc.trace is not None else None
        out["error"] = str(exc)
        out["trace"] = partial
        if args.trace:
            Path(args.trace).write_text(dumps(partial))
        emit(out, cfg.output_path)
        return EXIT_BUDGET
    out["zeros"] = [c.to_json() for c in zeros]
    if traces is not None:
        out["trace"] = traces
        if args.trace:
            Path(args.trace).write_text(dumps(traces))
    emit(out, cfg.output_path)
    return EXIT_OK


def cmd_count(args) -> int:
    prob = load_problem(args.problem)
    f = prob.original
    n = 0 if f.is_single_term else count_zeros(f, args.rect)
    sys.stdout.write(f"{n}\n")
    if args.out:
        Path(args.out).write_text(dumps({"schema": SCHEMA, "count": n, "rect": _rect_json(args.rect)}))
    return EXIT_OK


def _rect_json(r: Rectangle) -> list[str]:
    return [fmt_real(v) for v in (r.x_min, r.x_max, r.y_min, r.y_max)]


def _svg(certs: list[ZeroCertificate], rect: Rectangle, strip) -> str:
    w, h, pad = 480.0, 640.0, 40.0
    x0, x1 = min(rect.x_min, strip.x_min - 0.5), max(rect.x_max, strip.x_max + 0.5)
    y0, y1 = rect.y_min, rect.y_max

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def py(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect x="0" y="0" width="{w:.0f}" height="{h:.0f}" fill="white"/>',
        f'<rect x="{px(x0):.2f}" y="{py(y1):.2f}" width="{px(x1) - px(x0):.2f}" height="{py(y0) - py(y1):.2f}" '
        'fill="none" stroke="#888"/>',
    ]
    for x in (strip.x_min, strip.x_max):
        parts.append(f'<line x1="{px(x):.2f}" y1="{py(y0):.2f}" x2="{px(x):.2f}" y2="{py(y1):.2f}" '
                     'stroke="#c33" stroke-dasharray="4 3"/>')
    for c in certs:
        parts.append(f'<circle cx="{px(c.z_star.real):.2f}" cy="{py(c.z_star.imag):.2f}" r="3" fill="#236"/>')
    parts.append(f'<text x="{pad:.0f}" y="{pad / 2:.0f}" font-size="12" font-family="sans-serif">'
                 f'{len(certs)} zeros; strip [{strip.x_min:.4g}, {strip.x_max:.4g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args) -> int:
    prob = load_problem(args.problem)
    f = prob.original
    out_dir = Path(args.out or ".")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise PermissionError(str(out_dir))
    except OSError as exc:
        sys.stderr.write(f"expsum: cannot write to {out_dir}: {exc}\n")
        return EXIT_PARSE
    if f.is_single_term:
        certs, strip = [], None
    else:
        certs = locate_zeros(f, args.rect, args.tol)
        strip = strip_bounds(f)
    try:
        with open(out_dir / "zeros.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["re", "im", "residual", "radius"])
            for c in certs:
                wr.writerow([fmt_real(c.z_star.real), fmt_real(c.z_star.imag), fmt_real(c.residual), fmt_real(c.radius)])
        if strip is not None:
            (out_dir / "zeros.svg").write_text(_svg(certs, args.rect, strip))
    except OSError as exc:
        sys.stderr.write(f"expsum: cannot write to {out_dir}: {exc}\n")
        return EXIT_PARSE
    sys.stdout.write(f"{len(certs)}\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    prob = load_problem(args.problem)
    try:
        data = json.loads(Path(args.result).read_text())
        certs = [ZeroCertificate.from_json(z) for z in data["zeros"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"unreadable result file: {exc}", args.result) from None
    tol = float(data.get("tol", args.tol))
    results = [validate_certificate(prob.original, c, tol) for c in certs]
    emit({"schema": SCHEMA, "valid": results, "pass": all(results)}, args.out)
    return EXIT_OK if all(results) else EXIT_CHECK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expsum", description="Certified zeros of exponential sums.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rect_required=False):
        sp.add_argument("problem", help="problem JSON file")
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output path")
        if rect_required:
            sp.add_argument("--rect", type=_rect_arg, required=True, metavar="XMIN,XMAX,YMIN,YMAX")

    sp = sub.add_parser("check", help="free-and-rotund checks")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("solve", help="certified zeros")
    common(sp)
    sp.add_argument("--engine", choices=("analytic", "constructive", "both"), default="analytic")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--count", type=int)
    g.add_argument("--rect", type=_rect_arg, metavar="XMIN,XMAX,YMIN,YMAX")
    sp.add_argument("--trace", help="write the constructive trace JSON here")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("count", help="number of zeros in a rectangle")
    common(sp, rect_required=True)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("plot", help="zeros.csv and zeros.svg for a rectangle")
    common(sp, rect_required=True)
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("validate", help="re-certify a solve result")
    common(sp)
    sp.add_argument("result", help="result JSON from solve")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if getattr(args, "count", None) is not None and args.count < 1:
        sys.stderr.write("expsum: --count must be >= 1\n")
        return EXIT_PARSE
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        sys.stderr.write(f"expsum: parse error at {exc}\n" if exc.where else f"expsum: parse error: {exc}\n")
        return EXIT_PARSE
    except UsageError as exc:
        sys.stderr.write(f"expsum: {exc}\n")
        return EXIT_PARSE
    except (ZeroOnBoundary, BudgetExhausted, CertificationError) as exc:
        sys.stderr.write(f"expsum: {exc}\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
