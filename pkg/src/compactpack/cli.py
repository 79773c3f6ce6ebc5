"""Command-line entry point: ``compactpack <group> <command> ...``.

Every invocation prints exactly one report.  Exit status is 0 for pass or
info, 1 for a checked failure and 2 for usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import fixtures
from .angle_core import AngleSymbol, DomainError, Realizer, gradient, realize
from .codes import CodeParseError, CodeValidationError, downarrow_codeset, is_fundamental, parse_codes, serialize_codes
from .packing import InvalidPacking, SpherePacking, codes_of, fundamental_subset, radii_of, verify_compact_2d
from .solver import (
    VERIFIED,
    CoronaSystem,
    CoronaWord,
    bootstrap_harness,
    candidates_csv,
    enumerate_two_size_candidates,
    solve_corona_two_size,
    uniqueness_harness,
)
from .spherical import (
    LabeledSphericalTriangulation,
    TriangulationError,
    build_darts_triangulation,
    build_split_meridian_octahedron,
    center_in_interior,
    compare_edges,
    in_Q,
    in_W,
)
from .svg import packing_svg

EXIT = {"pass": 0, "info": 0, "fail": 1, "error": 2}


class UsageError(Exception):
    pass


@dataclass
class CommandReport:
    command: str
    outcome: str = "info"
    inputs_digest: str = ""
    seed: int | None = None
    metrics: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "outcome": self.outcome,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "metrics": self.metrics,
            "artifacts": self.artifacts,
            "details": self.details,
        }

    def emit(self, fmt: str, stream=None):
        stream = stream or sys.stdout
        if fmt == "json":
            stream.write(json.dumps(self.to_json(), indent=1, default=_jsonable) + "\n")
            return
        for line in self.lines:
            stream.write(f"{line}\n")
        stream.write(f"[{self.outcome}] {self.command}")
        if self.inputs_digest:
            stream.write(f" inputs={self.inputs_digest[:16]}")
        if self.seed is not None:
            stream.write(f" seed={self.seed}")
        stream.write("\n")


def _jsonable(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return str(x)


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part if isinstance(part, bytes) else str(part).encode())
        h.update(b"\0")
    return h.hexdigest()


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return fixtures.fixture_path(path).read_text(encoding="utf-8")


def _realizer(text: str) -> Realizer:
    try:
        return Realizer(tuple(float(x) for x in text.split(",")))
    except ValueError as exc:
        raise UsageError(f"bad realizer {text!r}: {exc}") from None


# -- angles ---------------------------------------------------------------------------


def cmd_angles(args, rep: CommandReport):
    rho = _realizer(args.rho)
    symbol = AngleSymbol(args.c, args.a, args.b)
    rep.inputs_digest = _digest(args.op, symbol, rho.values)
    value = realize(symbol, rho)
    rep.metrics["value"] = value
    if args.op == "eval":
        rep.lines.append(f"{symbol} = {value:.12f}")
        return
    grad = gradient(symbol, rho)
    rep.metrics["gradient"] = {str(k): v for k, v in grad.items()}
    rep.lines.append(f"{symbol} = {value:.12f}")
    rep.lines += [f"d/d{k} = {v:.12f}" for k, v in grad.items()]
    if args.check_fd:
        worst = 0.0
        for j in range(rho.n):
            h = 1e-6 * rho(j)
            up, dn = list(rho.values), list(rho.values)
            up[j] += h
            dn[j] -= h
            fd = (realize(symbol, Realizer(tuple(up))) - realize(symbol, Realizer(tuple(dn)))) / (2 * h)
            err = abs(fd - grad[j]) / max(abs(fd), 1e-12) if abs(fd) > 1e-9 or abs(grad[j]) > 1e-9 else 0.0
            worst = max(worst, err)
        rep.metrics["max_relative_fd_error"] = worst
        rep.outcome = "pass" if worst <= 1e-5 else "fail"
        rep.lines.append(f"finite-difference check: max relative error {worst:.2e}")


# -- codes -----------------------------------------------------------------------------


def cmd_codes(args, rep: CommandReport):
    text = _read_text(args.file)
    rep.inputs_digest = _digest(text)
    C = parse_codes(text)
    rep.metrics["codes"] = len(C)
    if args.op == "check-fundamental":
        verdict = is_fundamental(C)
        rep.outcome = "pass" if verdict else "fail"
        rep.details["certificate"] = {
            "missing_centers": sorted(verdict.missing_centers),
            "extra_centers": sorted(verdict.extra_centers),
            "violating_set": None if verdict.violating_set is None else sorted(verdict.violating_set),
        }
        rep.lines.append(f"{C}: {verdict.describe()}")
    else:
        Ck = downarrow_codeset(C, args.k)
        rep.details["result"] = serialize_codes(Ck)
        rep.metrics["fundamental"] = bool(is_fundamental(Ck))
        rep.lines.append(str(Ck))
        rep.outcome = "info"


# -- packing ----------------------------------------------------------------------------


def _load_packing(name: str):
    text = _read_text(name)
    try:
        return SpherePacking.from_json(json.loads(text)), text
    except json.JSONDecodeError as exc:
        raise UsageError(f"{name}: not a JSON packing ({exc})") from None


def cmd_packing(args, rep: CommandReport):
    p, text = _load_packing(args.file)
    rep.inputs_digest = _digest(text)
    rep.metrics["spheres"] = len(p)
    rep.metrics["radii"] = radii_of(p)
    if args.op == "verify":
        report = verify_compact_2d(p)
        rep.outcome = "pass" if report else "fail"
        rep.details["failures"] = report.failures
        rep.lines.append(report.describe())
        if report:
            rep.metrics["triangles"] = len(report.complex.triangles)
    elif args.op == "codes":
        report = verify_compact_2d(p)
        if not report:
            rep.outcome = "fail"
            rep.details["failures"] = report.failures
            rep.lines.append(report.describe())
            return
        C = codes_of(p)
        rep.details["codes"] = sorted(str(c) for c in C)
        rep.lines.append(f"codes: {C}")
        if C.n >= 2:
            sub = fundamental_subset(p, C)
            rep.details["fundamental_subset"] = sorted(str(c) for c in sub)
            rep.lines.append(f"fundamental subset: {sub} (fundamental)")
        else:
            rep.lines.append("fundamental subset: undefined (n >= 2 required)")
        rep.outcome = "pass"
    else:
        svg = packing_svg(p)
        out = Path(args.out or (Path(args.file).stem + ".svg"))
        out.write_text(svg, encoding="utf-8")
        rep.artifacts["svg"] = str(out)
        rep.lines.append(f"wrote {out}")


# -- solve -------------------------------------------------------------------------------


def cmd_solve(args, rep: CommandReport):
    if args.op == "corona":
        w = CoronaWord.parse(args.word, args.center)
        rep.inputs_digest = _digest(w)
        res = solve_corona_two_size(w)
        rep.metrics["roots"] = list(res.roots)
        rep.metrics["degenerate"] = res.degenerate
        if res.degenerate:
            rep.lines.append(f"{w}: DEGENERATE (angle sum is 2pi for every radius)")
        else:
            rep.lines += [f"{w}: r = {r:.15f}" for r in res.roots] or [f"{w}: no root"]
    elif args.op == "system":
        text = _read_text(args.file)
        rep.inputs_digest = _digest(text)
        rep.seed = args.seed
        C = parse_codes(text)
        report = uniqueness_harness(C, starts=args.starts, seed=args.seed)
        rep.details.update(report.to_json())
        rep.outcome = {"pass": "pass", "fail": "fail", "inconclusive": "info"}[report.outcome]
        if report.realizer is not None:
            rep.lines.append("realizer: " + ", ".join(f"{v:.12f}" for v in report.realizer.values))
            system = CoronaSystem.from_codeset(C)
            rep.metrics["residual_checks"] = [str(w) for w in system.checks]
        rep.lines.append(f"{report.successes}/{report.runs} starts converged, spread {report.spread:.2e}")
        rep.metrics["check_residual"] = report.check_residual
    else:
        t0 = time.perf_counter()
        verified = fixtures.verified_two_size()
        cands = enumerate_two_size_candidates(args.max_len, verified)
        table = candidates_csv(cands)
        rep.inputs_digest = _digest(args.max_len, [v for _, v in verified])
        rep.metrics["candidates"] = len(cands)
        rep.metrics["verified"] = sum(c.tier == VERIFIED for c in cands)
        rep.metrics["runtime_s"] = time.perf_counter() - t0
        rep.details["table"] = [
            {"word": c.words[0], "words": c.words, "root": c.radius, "residual": c.residual, "tier": c.tier, "fixture": c.fixture}
            for c in cands
        ]
        if args.csv:
            Path(args.csv).write_text(table, encoding="utf-8")
            rep.artifacts["csv"] = args.csv
        rep.lines.append(table.rstrip("\n"))
        rep.lines.append(f"VERIFIED rows: {rep.metrics['verified']}")


# -- sphere --------------------------------------------------------------------------------


def _load_triangulation(name: str):
    text = _read_text(name)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{name}: not JSON ({exc})") from None
    if "triangulation" in doc:
        doc = doc["triangulation"]
    elif "artifacts" in doc and "triangulation" in doc.get("details", {}):
        doc = doc["details"]["triangulation"]
    elif "details" in doc and "triangulation" in doc["details"]:
        doc = doc["details"]["triangulation"]
    return LabeledSphericalTriangulation.from_json(doc), text


def cmd_sphere(args, rep: CommandReport):
    if args.op == "check-q":
        P, text = _load_triangulation(args.file)
        rho = _realizer(args.rho)
        rep.inputs_digest = _digest(text, rho.values)
        res = in_Q(P, rho)
        rep.outcome = "pass" if res else "fail"
        rep.metrics["worst_excess"] = res.worst_excess
        rep.lines.append("in Q" if res else f"not in Q: {res.reason}")
    elif args.op == "check-w":
        P, text = _load_triangulation(args.file)
        rep.inputs_digest = _digest(text)
        res = in_W(P)
        rep.outcome = "pass" if res else "fail"
        rep.lines.append("in W" if res else f"not in W: {res.reason}")
        rep.metrics["center_in_interior"] = center_in_interior(P)
    elif args.op == "demo-darts":
        rep.inputs_digest = _digest(args.k, args.phi)
        P0 = build_darts_triangulation(args.k, 0.0)
        P1 = build_darts_triangulation(args.k, args.phi)
        cmp = compare_edges(P0, P1, {i: i for i in range(P0.n_vertices)})
        rep.metrics.update(grow=len(cmp.grow), shrink=len(cmp.shrink), equal=len(cmp.equal))
        rep.details["triangulation"] = P1.to_json()
        one_sided = bool(cmp.grow) and not cmp.shrink
        rep.outcome = "pass" if one_sided else "fail"
        rep.lines.append(f"grow={len(cmp.grow)} shrink={len(cmp.shrink)} equal={len(cmp.equal)}")
    else:
        rep.inputs_digest = _digest(args.delta)
        P = build_split_meridian_octahedron(args.delta)
        res = in_W(P)
        rep.details["triangulation"] = P.to_json()
        rep.metrics["valid"] = True
        rep.metrics["in_W"] = bool(res)
        rep.outcome = "info"
        rep.lines.append(f"valid triangulation; in W: {bool(res)} ({res.reason})")


# -- harness ----------------------------------------------------------------------------------


def _bootstrap_sets():
    from .codes import codes_from_words
    from .packing import canonical_realizer

    sets = []
    for name, _ in fixtures.verified_two_size():
        p = fixtures.load_fixture(name)
        sets.append((fundamental_subset(p), canonical_realizer(p)))
    fig = codes_from_words(5, fixtures.FIGURE4_WORDS[:4])
    three = downarrow_codeset(fig, 3)
    sets.append((three, None))
    return sets


def cmd_harness(args, rep: CommandReport):
    rep.seed = args.seed
    if args.op == "bootstrap":
        rep.inputs_digest = _digest(args.seed, args.count)
        if args.count == 0:
            rep.outcome = "info"
            rep.details.update(instances=0, failures=[])
            rep.lines.append("no instances requested (vacuous pass)")
            return
        t0 = time.perf_counter()
        result = bootstrap_harness(_bootstrap_sets(), args.count, args.seed)
        rep.metrics["runtime_s"] = time.perf_counter() - t0
        rep.details.update(result)
        rep.metrics["instances"] = result["instances"]
        rep.metrics["failures"] = len(result["failures"])
        ok = not result["failures"] and result["instances"] == args.count
        rep.outcome = "pass" if ok else "fail"
        rep.lines.append(f"{result['instances']} instances, {len(result['failures'])} conclusion failures")
    else:
        text = _read_text(args.file)
        rep.inputs_digest = _digest(text, args.seed, args.starts)
        C = parse_codes(text)
        report = uniqueness_harness(C, starts=args.starts, seed=args.seed)
        rep.details.update(report.to_json())
        rep.outcome = {"pass": "pass", "fail": "fail", "inconclusive": "info"}[report.outcome]
        if report.realizer is not None:
            rep.lines.append("realizer: " + ", ".join(f"{v:.12f}" for v in report.realizer.values))
        rep.lines.append(f"{report.successes}/{report.runs} starts agree within {report.spread:.2e}")


# -- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compactpack", description="Compact sphere packing toolkit")
    ap.add_argument("--format", choices=["text", "json"], default="text", help="report format")
    groups = ap.add_subparsers(dest="group", required=True)

    g = groups.add_parser("angles", help="realize angle symbols")
    g.add_argument("op", choices=["eval", "grad"])
    g.add_argument("--c", type=int, required=True, help="vertex label")
    g.add_argument("--a", type=int, required=True, help="first flank label")
    g.add_argument("--b", type=int, required=True, help="second flank label")
    g.add_argument("--rho", required=True, help="comma-separated radii by label")
    g.add_argument("--check-fd", action="store_true", help="compare the gradient with finite differences")

    g = groups.add_parser("codes", help="code-set operations")
    g.add_argument("op", choices=["check-fundamental", "down"])
    g.add_argument("file")
    g.add_argument("--k", type=int, default=None)

    g = groups.add_parser("packing", help="packing verification and codes")
    g.add_argument("op", choices=["verify", "codes", "svg"])
    g.add_argument("file", help="packing JSON path or fixture name")
    g.add_argument("--out", "-o", default=None)

    g = groups.add_parser("solve", help="corona solvers")
    g.add_argument("op", choices=["corona", "system", "enumerate"])
    g.add_argument("--word", default=None)
    g.add_argument("--center", type=int, default=0)
    g.add_argument("--file", default=None)
    g.add_argument("--starts", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-len", type=int, default=12)
    g.add_argument("--csv", default=None)

    g = groups.add_parser("sphere", help="spherical triangulations")
    g.add_argument("op", choices=["check-q", "check-w", "demo-darts", "demo-splitmeridian"])
    g.add_argument("file", nargs="?", default=None, help="triangulation JSON, fixture name or - for stdin")
    g.add_argument("--rho", default=None)
    g.add_argument("--k", type=int, default=6)
    g.add_argument("--phi", type=float, default=0.05)
    g.add_argument("--delta", type=float, default=0.1)

    g = groups.add_parser("harness", help="randomized property harnesses")
    g.add_argument("op", choices=["bootstrap", "uniqueness"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=10000)
    g.add_argument("--file", default=None)
    g.add_argument("--starts", type=int, default=20)
    return ap


def _check_args(args):
    need = {
        ("codes", "down"): ["k"],
        ("solve", "corona"): ["word"],
        ("solve", "system"): ["file"],
        ("sphere", "check-q"): ["file", "rho"],
        ("sphere", "check-w"): ["file"],
        ("harness", "uniqueness"): ["file"],
    }
    for name in need.get((args.group, args.op), []):
        if getattr(args, name) is None:
            raise UsageError(f"{args.group} {args.op} needs --{name.replace('_', '-')}" if name != "file" else f"{args.group} {args.op} needs a file")
    if args.group == "harness" and args.op == "bootstrap" and args.count < 0:
        raise UsageError("--count must be non-negative")


COMMANDS = {
    "angles": cmd_angles,
    "codes": cmd_codes,
    "packing": cmd_packing,
    "solve": cmd_solve,
    "sphere": cmd_sphere,
    "harness": cmd_harness,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = CommandReport(f"{args.group} {args.op}")
    t0 = time.perf_counter()
    try:
        _check_args(args)
        COMMANDS[args.group](args, rep)
    except (UsageError, CodeParseError, CodeValidationError, DomainError, TriangulationError,
            InvalidPacking, FileNotFoundError, json.JSONDecodeError) as exc:
        rep.outcome = "error"
        rep.details["error"] = f"{type(exc).__name__}: {exc}"
        rep.lines.append(f"error: {exc}")
    except ValueError as exc:  # precondition failures from the library
        rep.outcome = "error"
        rep.details["error"] = f"{type(exc).__name__}: {exc}"
        rep.lines.append(f"error: {exc}")
    rep.metrics.setdefault("elapsed_s", time.perf_counter() - t0)
    rep.emit(args.format)
    return EXIT[rep.outcome]


if __name__ == "__main__":
    sys.exit(main())
