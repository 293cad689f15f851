"""Command-line front end.

Every command prints one report (JSON or text) on stdout.  Exit status is 0
when every verdict passes, 1 when some verdict fails and 2 on usage or input
errors.  Reports depend only on the input bytes and the flags, so repeated
runs are byte-identical; wall-clock timing is added only with ``--timing``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from .branching import (
    BranchingError,
    BundleSystem,
    cycle_collapse_system,
    cycle_composite,
    cycle_separating_system,
    discretize,
    exitless_witness,
    standard_construction,
    system_from_json,
    system_to_json,
    verify_axioms,
)
from .graph import (
    DirectedCycle,
    Graph,
    GraphError,
    connected_components,
    has_condition_L,
    is_P_simple,
    load_graph,
    sinks,
)
from .intervals import MapError
from .levels import check_auxiliar, classify_ppp, decompose
from .operators import IndexOperator
from .permutative import (
    CertificateError,
    PlanError,
    RepError,
    check_permutative,
    execute_plan,
    extract_branching_system,
    gbpb_hypotheses,
    gbpb_plan,
    rep_from_json,
    verify_intertwine,
)
from .report import Report
from .representation import check_nonzero, verify_ck


class UsageError(Exception):
    """Bad arguments or unreadable input (exit status 2)."""


class Outcome:
    """Collects verdict reports and result data for one command."""

    def __init__(self, command: str, inputs: list[tuple[str, bytes]]):
        self.command = command
        self.inputs = [
            {"file": os.path.basename(name), "sha256": hashlib.sha256(data).hexdigest()} for name, data in inputs
        ]
        self.reports: list[Report] = []
        self.result: dict = {}
        self.notes: list[str] = []
        self.negative: list[str] = []  # verdicts that are answers, not checks, but still count as failure
        self.timing: dict[str, float] = {}

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports) and not self.negative

    def to_json(self, timing: bool) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "status": "pass" if self.ok else "fail",
            "verdicts": [r.to_json() for r in self.reports],
            "result": self.result,
        }
        if self.negative:
            out["negative"] = list(self.negative)
        if self.notes:
            out["notes"] = list(self.notes)
        if timing:
            out["timing"] = {k: round(v, 6) for k, v in self.timing.items()}
        return out


def _text(doc: dict) -> str:
    lines = [f"{doc['command']}: {doc['status']}"]
    for inp in doc["inputs"]:
        lines.append(f"input {inp['file']} sha256={inp['sha256']}")
    for rep in doc["verdicts"]:
        lines.append(f"{rep['subject']}: {rep['status']}")
        for c in rep["checks"]:
            extra = f" {c['detail']}" if "detail" in c else ""
            wit = f" witness={json.dumps(c['witness'], sort_keys=True)}" if "witness" in c else ""
            lines.append(f"  [{c['status']}] {c['name']}{extra}{wit}")
        for n in rep["notes"]:
            lines.append(f"  note: {n}")
    for n in doc.get("negative", []):
        lines.append(f"negative: {n}")
    for key, value in doc["result"].items():
        lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
    for n in doc.get("notes", []):
        lines.append(f"note: {n}")
    for key, value in doc.get("timing", {}).items():
        lines.append(f"time {key}: {value:.6f}s")
    return "\n".join(lines) + "\n"


# ---- input ------------------------------------------------------------------


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _json(path: str, data: bytes) -> dict:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path} must hold a JSON object")
    return doc


def _graph(args, data: bytes) -> Graph:
    g = load_graph(data.decode("utf-8", errors="replace"))
    if args.truncate is not None:
        g = g.with_truncation(args.truncate)
    return g


def _write(path: str, doc: dict) -> None:
    try:
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _cycle_arg(g: Graph, spec: str | None) -> DirectedCycle | None:
    if spec is None:
        return None
    edges = [e for e in spec.split(",") if e]
    for e in edges:
        if not g.has_edge(e):
            raise UsageError(f"--cycle names unknown edge {e!r}")
    alpha = DirectedCycle.canonical(g, edges)
    if not alpha.is_cycle_of(g):
        raise UsageError(f"--cycle {spec} is not a directed cycle")
    return alpha


def _unitary_json(U: IndexOperator) -> list:
    return [[i, [w.phase.numerator, w.phase.denominator]] for i, (_, w) in sorted(U.mapping.items())]


# ---- commands ---------------------------------------------------------------


def cmd_analyze(args, out: Outcome, data: bytes) -> None:
    g = _graph(args, data)
    lv = has_condition_L(g)
    ps = is_P_simple(g)
    comps = connected_components(g)
    out.result = {
        "vertices": len(g.vertices),
        "edges": len(g.edge_ids),
        "sinks": sorted(sinks(g)),
        "row_finite": not g.infinite_families,
        "infinite_emitters": sorted(g.infinite_families),
        "condition_L": {
            "holds": lv.holds,
            **({"witness": list(lv.witness.edges)} if lv.witness is not None else {}),
        },
        "P_simple": {
            "holds": ps.holds,
            **({"reason": ps.reason} if ps.reason else {}),
            **({"witness": ps.witness.to_json()} if ps.witness is not None else {}),
        },
        **comps.to_json(),
    }
    if not g.vertices:
        out.notes.append("empty graph: every property holds vacuously")


def cmd_levels(args, out: Outcome, data: bytes) -> None:
    g = _graph(args, data)
    d = decompose(g)
    c = classify_ppp(g, d)
    if args.command == "levels":
        out.result["decomposition"] = d.to_json()
    out.result["classification"] = c.to_json()
    out.reports.append(check_auxiliar(g, d))


def cmd_branching(args, out: Outcome, data: bytes) -> None:
    g = _graph(args, data)
    if args.mode == "standard":
        if args.cycle is not None:
            raise UsageError("--cycle only applies to the cycle modes")
        b = standard_construction(g)
    else:
        alpha = _cycle_arg(g, args.cycle)
        if alpha is None:
            alpha = exitless_witness(g)
        build = cycle_collapse_system if args.mode == "cycle-collapse" else cycle_separating_system
        b = build(g, alpha)
        comp = cycle_composite(b, alpha)
        out.result["cycle"] = list(alpha.edges)
        out.result["composite"] = comp.to_json()
        out.result["composite_is_identity"] = comp.is_identity
    out.reports.append(verify_axioms(b))
    doc = system_to_json(b)
    if args.out:
        _write(args.out, doc)
        out.result["system_file"] = os.path.basename(args.out)
    else:
        out.result["system"] = doc


def cmd_verify_ck(args, out: Outcome, data: bytes) -> None:
    try:
        b = system_from_json(_json(args.system, data))
    except (MapError, TypeError) as exc:
        raise BranchingError(f"malformed system document: {exc}") from None
    if args.discretize is not None:
        if not isinstance(b, BundleSystem):
            raise UsageError("--discretize needs a bundle system")
        b = discretize(b, max_points=args.discretize)
        out.result["discrete_points"] = len(b.index)
    out.reports.append(verify_ck(b))
    if args.nonzero:
        out.reports.append(check_nonzero(b, seed=args.seed or 0))


def cmd_permutative(args, out: Outcome, data: bytes) -> None:
    r = rep_from_json(_json(args.rep, data))
    out.result["indices"] = len(r.index)
    if args.action in ("check", "extract"):
        cert = check_permutative(r)
        out.result["certificate"] = cert.to_json()
        if not cert.permutative:
            out.negative.append("representation is not permutative")
            return
        if args.action == "extract":
            b, U = extract_branching_system(r, cert)
            out.reports.append(verify_axioms(b))
            out.reports.append(verify_intertwine(r, b, U))
            extracted = {"system": system_to_json(b), "unitary": _unitary_json(U)}
            if args.out:
                _write(args.out, extracted)
                out.result["system_file"] = os.path.basename(args.out)
            else:
                out.result.update(extracted)
        return
    out.reports.append(gbpb_hypotheses(r.graph))
    p = gbpb_plan(r.graph, strategy=args.strategy)
    out.result["plan"] = p.to_json()
    if args.action == "run":
        cert = execute_plan(p, r, seed=args.seed)
        out.result["certificate"] = cert.to_json()


COMMANDS = {
    "analyze": cmd_analyze,
    "levels": cmd_levels,
    "classify": cmd_levels,
    "branching": cmd_branching,
    "verify-ck": cmd_verify_ck,
    "permutative": cmd_permutative,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=None, help="seed for free choices")
    common.add_argument("--truncate", type=int, default=None, help="override every infinite-family truncation")
    common.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-identity)")

    parser = argparse.ArgumentParser(prog="branchsys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("analyze", "sinks, row-finiteness, condition (L), P-simplicity, components"),
        ("levels", "level decomposition, classification and the auxiliary clauses"),
        ("classify", "classification and the auxiliary clauses"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("graph")

    p = sub.add_parser("branching", parents=[common], help="build a branching system and verify its axioms")
    p.add_argument("graph")
    p.add_argument("--mode", choices=("standard", "cycle-collapse", "cycle-separate"), default="standard")
    p.add_argument("--cycle", help="comma-separated edges of an exitless cycle (default: least one)")
    p.add_argument("--out", help="write the system JSON here instead of embedding it")

    p = sub.add_parser("verify-ck", parents=[common], help="check the Cuntz-Krieger relations of a system")
    p.add_argument("system")
    p.add_argument("--discretize", type=int, metavar="N", help="check on an orbit window of at most N points")
    p.add_argument("--nonzero", action="store_true", help="also run the nonvanishing checks")

    p = sub.add_parser("permutative", parents=[common], help="permutativity of a basis-map representation")
    p.add_argument("rep")
    p.add_argument("--action", choices=("check", "extract", "plan", "run"), default="check")
    p.add_argument("--strategy", choices=("auto", "levels", "cycle"), default="auto")
    p.add_argument("--out", help="extract: write the system and unitary here")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.truncate is not None and args.truncate < 1:
        print("error: --truncate must be at least 1", file=sys.stderr)
        return 2
    path = getattr(args, "graph", None) or getattr(args, "system", None) or args.rep
    try:
        data = _read(path)
        out = Outcome(args.command, [(path, data)])
        t0 = time.perf_counter()
        COMMANDS[args.command](args, out, data)
        out.timing["total"] = time.perf_counter() - t0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GraphError, BranchingError, RepError, MapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PlanError, CertificateError) as exc:
        # the input is fine but the procedure does not apply to it
        out.negative.append(str(exc))
    doc = out.to_json(args.timing)
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(_text(doc))
    return 0 if out.ok else 1
