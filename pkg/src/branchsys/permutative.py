"""Basis-map representations and their permutativity.

A :class:`BasisMapRep` fixes an orthonormal basis ``{δ_λ : λ ∈ Λ}`` and sends
``δ_λ`` (``λ ∈ H_{r(e)}``) to ``c_e(λ) δ_{τ_e(λ)}`` with ``c_e(λ)`` a root of
unity.  Rescaling the basis by phases ``g(λ)`` changes the weights to
``c_e(λ) g(λ) / g(τ_e(λ))``, so the rep permutes a rescaled basis exactly when
the weights are a coboundary on the transition graph ``λ -> τ_e(λ)``.  That
is decided by gauge-fixing along a spanning forest and checking every
remaining arc.

The plan generator builds the bases ``B_v``, ``B_e`` vertex by vertex in the
order of the level sweeps (or, for a single undirected cycle, starting from
the vertices that receive two edges).
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import deque
from dataclasses import dataclass, field

from .branching import DiscreteSystem, discrete_system
from .graph import Graph, GraphError, connected_components, is_P_simple
from .levels import (
    TAG_NOTE,
    AllLevelsPlusOne,
    LevelDecomposition,
    NotApplicable,
    PppClassification,
    classify_ppp,
    decompose,
)
from .operators import IndexOperator, index_projection, op_adjoint, op_compose
from .report import Report, failed, passed, vacuous
from .representation import induced_generator
from .scalars import ONE, Scalar


class RepError(ValueError):
    pass


class PlanError(RuntimeError):
    pass


class CertificateError(RuntimeError):
    pass


# ---- representations --------------------------------------------------------


@dataclass(frozen=True)
class BasisMapRep:
    graph: Graph
    index: tuple[int, ...]
    H: dict[str, frozenset[int]]
    tau: dict[str, dict[int, tuple[int, Scalar]]]
    escapes: dict[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(sorted(self.index)))
        object.__setattr__(self, "H", {v: frozenset(self.H.get(v, ())) for v in self.graph.vertices})
        object.__setattr__(self, "tau", {e: dict(self.tau.get(e, {})) for e in self.graph.edge_ids})
        object.__setattr__(
            self, "escapes", {e: frozenset(s) for e, s in self.escapes.items() if s}
        )
        problem = self._problem()
        if problem:
            raise RepError(problem)

    def _problem(self) -> str | None:
        g = self.graph
        universe = set(self.index)
        if len(universe) != len(self.index):
            return "duplicate indices"
        owner: dict[int, str] = {}
        for v in g.vertices:
            for i in self.H[v]:
                if i not in universe:
                    return f"H_{v} contains {i}, which is not in the index set"
                if i in owner:
                    return f"index {i} lies in both H_{owner[i]} and H_{v}"
                owner[i] = v
        for e in self.escapes:
            if not g.has_edge(e):
                return f"escapes given for unknown edge {e!r}"
        hit: dict[int, str] = {}
        for e in g.edge_ids:
            src, dst = g.source(e), g.range(e)
            t, esc = self.tau[e], self.escapes.get(e, frozenset())
            if set(t) & esc:
                return f"tau_{e} both defined and escaping at {min(set(t) & esc)}"
            if set(t) | esc != self.H[dst]:
                return f"tau_{e} must be defined on all of H_{dst}"
            for lam, (mu, c) in t.items():
                if mu not in self.H[src]:
                    return f"tau_{e}({lam}) = {mu} is not in H_{src}"
                if mu in hit:
                    return f"index {mu} is in the ranges of both {hit[mu]} and {e}"
                if not c.is_unimodular():
                    return f"weight of {e} at {lam} is not unimodular"
                hit[mu] = e
        for v in g.vertices:
            if g.is_finite_emitter(v):
                missing = self.H[v] - {mu for e in g.out_edges(v) for mu, _ in self.tau[e.id].values()}
                if missing:
                    return f"H_{v} is not covered by the edge ranges (index {min(missing)})"
        return None

    @property
    def residual(self) -> frozenset[int]:
        """Indices outside every ``H_v``: all operators vanish there."""
        return frozenset(self.index) - frozenset().union(*self.H.values())

    def range_of(self, e: str) -> frozenset[int]:
        return frozenset(mu for mu, _ in self.tau[e].values())

    def arcs(self):
        """``(λ, μ, c, e)`` for every arc of the transition graph, in order."""
        for e in self.graph.edge_ids:
            for lam in sorted(self.tau[e]):
                mu, c = self.tau[e][lam]
                yield lam, mu, c, e

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(rep_to_json(self), sort_keys=True).encode()).hexdigest()


def rep_operator(r: BasisMapRep, kind: str, name: str) -> IndexOperator:
    """``φ(S_e)`` or ``φ(P_v)`` as a weighted partial injection."""
    if kind == "P":
        if name not in r.graph:
            raise GraphError(f"unknown vertex {name!r}", name)
        return index_projection(r.H[name], f"P_{name}")
    if not r.graph.has_edge(name):
        raise GraphError(f"unknown edge {name!r}", name)
    return IndexOperator(dict(r.tau[name]), r.escapes.get(name, frozenset()), frozenset(), f"S_{name}")


def _phase_json(c: Scalar) -> list[int]:
    return [c.phase.numerator, c.phase.denominator]


def rep_to_json(r: BasisMapRep) -> dict:
    return {
        "graph": r.graph.to_dict(),
        "index": list(r.index),
        "H": {v: sorted(r.H[v]) for v in r.graph.vertices},
        "tau": {
            e: [[lam, mu, _phase_json(c)] for lam, (mu, c) in sorted(r.tau[e].items())]
            for e in r.graph.edge_ids
        },
        "escapes": {e: sorted(s) for e, s in sorted(r.escapes.items())},
    }


def rep_from_json(doc: dict | str) -> BasisMapRep:
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        g = Graph.from_dict(doc["graph"])
        tau = {
            e: {int(lam): (int(mu), Scalar.root_of_unity(int(k), int(n))) for lam, mu, (k, n) in items}
            for e, items in doc.get("tau", {}).items()
        }
        return BasisMapRep(
            g,
            tuple(int(i) for i in doc["index"]),
            {v: frozenset(int(i) for i in xs) for v, xs in doc.get("H", {}).items()},
            tau,
            {e: frozenset(int(i) for i in xs) for e, xs in doc.get("escapes", {}).items()},
        )
    except GraphError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RepError):
            raise
        raise RepError(f"malformed representation document: {exc}") from None


# ---- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class Permutative:
    gauge: dict[int, Scalar]
    B_v: dict[str, frozenset[int]]
    B_e: dict[str, frozenset[int]]
    rep_digest: str
    method: str = "cocycle"
    transcript: tuple[str, ...] = ()

    permutative = True

    def to_json(self) -> dict:
        return {
            "verdict": "permutative",
            "method": self.method,
            "gauge": {str(i): _phase_json(c) for i, c in sorted(self.gauge.items())},
            "B_v": {v: sorted(s) for v, s in sorted(self.B_v.items())},
            "B_e": {e: sorted(s) for e, s in sorted(self.B_e.items())},
            **({"transcript": list(self.transcript)} if self.transcript else {}),
        }


@dataclass(frozen=True)
class NotPermutative:
    """``cycle`` lists steps ``(edge, from, to, orientation)``; walking an arc
    backwards contributes its inverse weight to ``product``."""

    cycle: tuple[tuple[str, int, int, str], ...]
    product: Scalar

    permutative = False

    def to_json(self) -> dict:
        return {
            "verdict": "not_permutative",
            "cycle": [
                {"edge": e, "from": a, "to": b, "orientation": o} for e, a, b, o in self.cycle
            ],
            "product": _phase_json(self.product),
        }


PermutativityCertificate = Permutative | NotPermutative


def cycle_product(r: BasisMapRep, cycle) -> Scalar:
    """Multiply the weights along a witness cycle directly from the rep."""
    prod = ONE
    for e, a, b, o in cycle:
        if o == "forward":
            mu, c = r.tau[e][a]
            assert mu == b
            prod = prod * c
        else:
            mu, c = r.tau[e][b]
            assert mu == a
            prod = prod * c.inverse()
    return prod


def _check_certificate(r: BasisMapRep, cert: Permutative) -> str | None:
    """Re-check the nesting and permutation conditions for a rescaled basis."""
    g = r.graph
    for lam, mu, c, e in r.arcs():
        if not (cert.gauge[lam] * c * cert.gauge[mu].inverse()).is_one():
            return f"rescaled weight of {e} at {lam} is not 1"
    for e in g.edge_ids:
        if cert.B_e[e] != r.range_of(e):
            return f"B_{e} is not the range of S_{e}"
        if not cert.B_e[e] <= cert.B_v[g.source(e)]:
            return f"B_{e} is not inside B_{g.source(e)}"
        if frozenset(r.tau[e]) | r.escapes.get(e, frozenset()) != cert.B_v[g.range(e)]:
            return f"S_{e} does not map B_{g.range(e)} onto B_{e}"
    for v in g.vertices:
        if cert.B_v[v] != r.H[v]:
            return f"B_{v} is not a basis of H_{v}"
        if g.is_finite_emitter(v) and frozenset().union(*(cert.B_e[e.id] for e in g.out_edges(v))) != cert.B_v[v]:
            return f"B_{v} is not the union of the B_e, e in s^-1({v})"
    return None


def _certificate(r: BasisMapRep, gauge: dict[int, Scalar], method: str, transcript=()) -> Permutative:
    cert = Permutative(
        {i: gauge.get(i, ONE) for i in r.index},
        dict(r.H),
        {e: r.range_of(e) for e in r.graph.edge_ids},
        r.digest(),
        method,
        tuple(transcript),
    )
    problem = _check_certificate(r, cert)
    if problem:
        raise CertificateError(problem)
    return cert


def check_permutative(r: BasisMapRep) -> PermutativityCertificate:
    """Decide whether some phase rescaling of the basis is permuted by every ``φ(S_e)``."""
    adj: dict[int, list[tuple[int, Scalar, str, str]]] = {i: [] for i in r.index}
    for lam, mu, c, e in r.arcs():
        adj[lam].append((mu, c, e, "forward"))
        if mu != lam:
            adj[mu].append((lam, c.inverse(), e, "backward"))
    gauge: dict[int, Scalar] = {}
    parent: dict[int, tuple[int, tuple[str, int, int]] | None] = {}
    for root in r.index:
        if root in gauge:
            continue
        gauge[root] = ONE
        parent[root] = None
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, c, e, o in adj[x]:
                if y not in gauge:
                    # b_y = g(y) δ_y with g(y) = g(x) * (weight of x -> y)
                    gauge[y] = gauge[x] * c
                    arc = (e, x, y) if o == "forward" else (e, y, x)
                    parent[y] = (x, arc)
                    queue.append(y)
    for lam, mu, c, e in r.arcs():
        if not (gauge[lam] * c * gauge[mu].inverse()).is_one():
            cyc = _witness(parent, lam, mu, e)
            prod = cycle_product(r, cyc)
            assert not prod.is_one()
            return NotPermutative(tuple(cyc), prod)
    return _certificate(r, gauge, "cocycle")


def _walk_step(arc: tuple[str, int, int], start: int) -> tuple[str, int, int, str]:
    """Orient a tree arc ``τ_e(λ) = μ`` so that it is traversed from ``start``."""
    e, lam, mu = arc
    if start == lam:
        return (e, lam, mu, "forward")
    return (e, mu, lam, "backward")


def _witness(parent, lam: int, mu: int, e: str) -> list[tuple[str, int, int, str]]:
    """Closed walk: arc ``λ -> μ`` then the tree path from ``μ`` back to ``λ``."""

    def to_root(x):
        path = [x]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]][0])
        return path

    up_mu, up_lam = to_root(mu), to_root(lam)
    common = set(up_lam)
    lca = next(x for x in up_mu if x in common)
    walk = [(e, lam, mu, "forward")]
    x = mu
    while x != lca:
        p, step = parent[x]
        walk.append(_walk_step(step, x))
        x = p
    down = []
    x = lam
    while x != lca:
        p, step = parent[x]
        down.append(_walk_step(step, p))
        x = p
    walk += reversed(down)
    return walk


# ---- round trip to a branching system ----------------------------------------


def extract_branching_system(r: BasisMapRep, cert: Permutative) -> tuple[DiscreteSystem, IndexOperator]:
    """Counting-measure system with ``D_v = B_v``, ``R_e = B_e``, ``f_e = τ_e`` and
    the unitary ``U`` (``U b_λ = δ_λ``) as a diagonal phase operator."""
    if cert.rep_digest != r.digest():
        raise CertificateError("certificate was issued for a different representation")
    g = r.graph
    b = discrete_system(
        g,
        r.index,
        cert.B_e,
        cert.B_v,
        {e: {lam: mu for lam, (mu, _) in r.tau[e].items()} for e in g.edge_ids},
        overflow=r.escapes,
        kind="extracted",
    )
    U = IndexOperator({i: (i, cert.gauge[i].conj()) for i in r.index}, word="U")
    return b, U


def verify_intertwine(r: BasisMapRep, b: DiscreteSystem, U: IndexOperator) -> Report:
    """``U* π(x) U = φ(x)`` on every basis index, for every generator."""
    rep = Report("intertwine")
    Ustar = op_adjoint(U)
    zeros = 0

    def claim(name: str, gens):
        nonlocal zeros
        for kind, x in gens:
            lhs = op_compose(Ustar, op_compose(induced_generator(b, kind, x), U))
            rhs = rep_operator(r, kind, x)
            und = lhs.und_fwd | rhs.und_fwd
            for lam in r.index:
                if lam in und:
                    continue
                a, c = lhs.apply(lam), rhs.apply(lam)
                if a != c:
                    rep.add(failed(name, {
                        "generator": f"{kind}_{x}",
                        "index": lam,
                        "lhs": None if a is None else [a[0], str(a[1])],
                        "rhs": None if c is None else [c[0], str(c[1])],
                    }))
                    return
                zeros += a is None
        rep.add(passed(name))

    g = r.graph
    claim("claim-1:S_e", (("S", e) for e in g.edge_ids))
    claim("claim-2:P_v", (("P", v) for v in g.vertices))
    rep.notes.append(f"{zeros} generator/index pairs where both sides vanish")
    if r.residual:
        rep.notes.append(f"{len(r.residual)} residual indices, annihilated by every generator")
    return rep


# ---- the basis assignment plan ----------------------------------------------


OPS = ("ChooseFree", "PullbackEdge", "UnionVertex", "ExtendVertex")


@dataclass(frozen=True)
class Instruction:
    op: str
    target: str
    source: str | None = None
    step: int | str = 0
    phase: str = ""
    component: int | None = None

    def __str__(self) -> str:
        arg = f"{self.target} from {self.source}" if self.source else self.target
        return f"[{self.component}:{self.step}:{self.phase}] {self.op}({arg})"

    def to_json(self) -> dict:
        out = {"op": self.op, "target": self.target, "step": self.step, "phase": self.phase}
        if self.source is not None:
            out["source"] = self.source
        if self.component is not None:
            out["component"] = self.component
        return out


@dataclass(frozen=True)
class GbpbPlan:
    graph: Graph
    instructions: tuple[Instruction, ...]
    strategies: tuple[str, ...]
    notes: tuple[str, ...] = ()

    def ops(self) -> list[tuple]:
        return [(i.op, i.target) + ((i.source,) if i.source else ()) for i in self.instructions]

    def to_json(self) -> dict:
        return {
            "strategies": list(self.strategies),
            "instructions": [i.to_json() for i in self.instructions],
            "notes": list(self.notes),
        }


def _is_single_cycle(h: Graph) -> bool:
    if h.infinite_families or h.open_ends:
        return False
    deg = {v: 0 for v in h.vertices}
    for e in h.edges:
        deg[e.src] += 1
        deg[e.dst] += 1
    return len(h.edges) == len(h.vertices) and all(d == 2 for d in deg.values())


def _cycle_strategy_ok(h: Graph) -> bool:
    return _is_single_cycle(h) and any(len(h.in_edges(v)) >= 2 for v in h.vertices)


def gbpb_hypotheses(g: Graph) -> Report:
    """Per component: P-simple and a level dichotomy branch applies."""
    rep = Report("gbpb-hypotheses")
    comps = connected_components(g)
    if not comps.components:
        rep.add(vacuous("components", "no edges"))
    for i, (c, h) in enumerate(zip(comps.components, comps.subgraphs)):
        ps = is_P_simple(h)
        name = f"component[{i}]"
        if not ps.holds:
            rep.add(failed(f"{name}:P-simple", {"vertices": sorted(c), "reason": ps.reason}))
            continue
        rep.add(passed(f"{name}:P-simple"))
        cls = classify_ppp(h)
        if isinstance(cls, NotApplicable):
            rep.add(failed(f"{name}:levels", {"vertices": sorted(c), "reason": cls.reason}))
        else:
            rep.add(passed(f"{name}:levels", json.dumps(cls.to_json(), sort_keys=True)))
    if comps.isolated:
        rep.notes.append(f"isolated vertices get free bases: {sorted(comps.isolated)}")
    return rep


class _Claims:
    """Tracks assignments and enforces that nothing is assigned twice or early."""

    def __init__(self, g: Graph):
        self.g = g
        self.v: set[str] = set()
        self.e: set[str] = set()
        self.out: list[Instruction] = []

    def emit(self, ins: Instruction) -> None:
        g = self.g
        if ins.op == "PullbackEdge":
            if ins.target in self.e:
                raise PlanError(f"claim violated: {ins} overwrites B_{ins.target}")
            if ins.source not in self.v:
                raise PlanError(f"claim violated: {ins} before B_{ins.source} is known")
            self.e.add(ins.target)
        else:
            if ins.target in self.v:
                raise PlanError(f"claim violated: {ins} overwrites B_{ins.target}")
            if ins.op in ("UnionVertex", "ExtendVertex"):
                pending = [e.id for e in g.out_edges(ins.target) if e.id not in self.e]
                if pending:
                    raise PlanError(f"claim violated: {ins} before B_e is known for {pending}")
            self.v.add(ins.target)
        self.out.append(ins)

    def settle(self, v: str, step, phase: str, comp) -> None:
        """Assign ``B_v`` then pull back along every edge into ``v``."""
        g = self.g
        if not g.out_edges(v):
            op = "ChooseFree"
        elif g.is_infinite_emitter(v):
            op = "ExtendVertex"
        else:
            op = "UnionVertex"
        self.emit(Instruction(op, v, None, step, phase, comp))
        for e in g.in_edges(v):
            self.emit(Instruction("PullbackEdge", e.id, v, step, phase, comp))


def _levels_plan(claims: _Claims, h: Graph, d: LevelDecomposition, c: PppClassification, comp) -> None:
    for i in range(1, d.m + 1):
        for v in d.vertices_tagged(i, "VF"):
            claims.settle(v, i, "VF", comp)
    if isinstance(c, AllLevelsPlusOne):
        claims.settle(c.vbar, "extra", "vbar", comp)
    for i in range(d.m, 0, -1):
        for v in d.vertices_tagged(i, "VI"):
            claims.settle(v, d.m + 1 + (d.m - i), "VI", comp)


def _cycle_plan(claims: _Claims, h: Graph, comp) -> None:
    seeds = sorted(v for v in h.vertices if len(h.in_edges(v)) >= 2)
    step = 1
    for v in seeds:
        claims.settle(v, step, "cycle-seed", comp)
    pending = [v for v in h.vertices if v not in claims.v]
    while pending:
        step += 1
        ready = [v for v in pending if all(e.id in claims.e for e in h.out_edges(v))]
        if not ready:
            raise PlanError(f"cycle strategy stalled at {pending}")
        for v in ready:
            claims.settle(v, step, "cycle", comp)
        pending = [v for v in pending if v not in claims.v]


def gbpb_plan(
    g: Graph,
    d: LevelDecomposition | None = None,
    c: PppClassification | None = None,
    strategy: str = "auto",
) -> GbpbPlan:
    """Order the basis assignments for every component of ``g``.

    ``strategy`` is ``"levels"`` (requires the hypotheses on every component),
    ``"cycle"`` (every component a single undirected cycle with a vertex
    receiving two edges) or ``"auto"`` (levels where the hypotheses hold, the
    cycle ordering elsewhere when it applies).  ``d``/``c`` are reused for a
    connected ``g``.
    """
    if strategy not in ("auto", "levels", "cycle"):
        raise ValueError(f"unknown strategy {strategy!r}")
    comps = connected_components(g)
    chosen: list[tuple[int, Graph, str, object, object]] = []
    problems = []
    for i, h in enumerate(comps.subgraphs):
        if len(comps.subgraphs) == 1 and d is not None:
            hd, hc = d, c or classify_ppp(h, d)
        else:
            hd = decompose(h)
            hc = classify_ppp(h, hd)
        levels_ok = not isinstance(hc, NotApplicable)
        cycle_ok = _cycle_strategy_ok(h)
        if strategy in ("auto", "levels") and levels_ok:
            chosen.append((i, h, "levels", hd, hc))
        elif strategy in ("auto", "cycle") and cycle_ok:
            chosen.append((i, h, "cycle", None, None))
        else:
            why = hc.reason if isinstance(hc, NotApplicable) else f"not usable with strategy {strategy!r}"
            problems.append(f"component {i} {sorted(h.vertices)}: {why}")
    if problems:
        raise PlanError("hypotheses fail: " + "; ".join(problems))
    claims = _Claims(g)
    for i, h, kind, hd, hc in chosen:
        if kind == "levels":
            _levels_plan(claims, h, hd, hc, i)
        else:
            _cycle_plan(claims, h, i)
    for v in sorted(comps.isolated):
        claims.emit(Instruction("ChooseFree", v, None, 0, "isolated", None))
    missing_v = set(g.vertices) - claims.v
    missing_e = set(g.edge_ids) - claims.e
    if missing_v or missing_e:
        raise PlanError(f"plan leaves families unassigned: {sorted(missing_v) + sorted(missing_e)}")
    strategies = tuple(k for _, _, k, _, _ in chosen)
    notes = [TAG_NOTE]
    if any(k == "cycle" for k in strategies):
        notes.append("cycle ordering: vertices receiving two edges are seeded first")
    if any(ins.op == "ExtendVertex" for ins in claims.out):
        notes.append("ExtendVertex draws reserve indices from H_v beyond the materialized ranges")
    return GbpbPlan(g, tuple(claims.out), strategies, tuple(notes))


def execute_plan(p: GbpbPlan, r: BasisMapRep, seed: int | None = None) -> Permutative:
    """Run the plan on ``r``.  Basis vectors are ``phase · δ_λ``; free choices
    use phase 1, or random 8th roots of unity when ``seed`` is given."""
    if p.graph != r.graph:
        raise PlanError("plan and representation are over different graphs")
    g = r.graph
    rng = random.Random(seed) if seed is not None else None

    def free(indices) -> dict[int, Scalar]:
        if rng is None:
            return {i: ONE for i in sorted(indices)}
        return {i: Scalar.root_of_unity(rng.randrange(8), 8) for i in sorted(indices)}

    Bv: dict[str, dict[int, Scalar]] = {}
    Be: dict[str, dict[int, Scalar]] = {}
    transcript = []
    for ins in p.instructions:
        if ins.op == "ChooseFree":
            Bv[ins.target] = free(r.H[ins.target])
        elif ins.op == "PullbackEdge":
            e = ins.target
            Be[e] = {
                mu: c * Bv[ins.source][lam]
                for lam, (mu, c) in r.tau[e].items()
            }
        elif ins.op in ("UnionVertex", "ExtendVertex"):
            v = ins.target
            u: dict[int, Scalar] = {}
            for e in g.out_edges(v):
                u.update(Be[e.id])
            if ins.op == "ExtendVertex":
                u.update(free(r.H[v] - set(u)))
            elif set(u) != r.H[v]:
                raise CertificateError(f"{ins}: union of the B_e is not a basis of H_{v}")
            Bv[v] = u
        else:
            raise PlanError(f"unknown instruction {ins.op!r}")
        transcript.append(str(ins))
    # conditions: B_e ⊆ B_{s(e)} vector by vector, and S_e(B_{r(e)}) = B_e
    for e in g.edge_ids:
        src = Bv[g.source(e)]
        for mu, ph in Be[e].items():
            if src.get(mu) != ph:
                raise CertificateError(f"B_{e} is not inside B_{g.source(e)} at index {mu}")
        dst = Bv[g.range(e)]
        for lam, (mu, c) in r.tau[e].items():
            if Be[e].get(mu) != c * dst[lam]:
                raise CertificateError(f"S_{e} does not map B_{g.range(e)} onto B_{e} at index {lam}")
    gauge = {}
    for v in g.vertices:
        gauge.update(Bv[v])
    return _certificate(r, gauge, "plan", transcript)
