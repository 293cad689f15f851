"""Branching systems: data model, constructions and the axiom checker.

Two space models are supported.

``BundleSystem``
    The unit-interval bundle ``(0,1] x Λ`` with labels ``Λ = E^0 ∪ E^1`` and
    Lebesgue measure on each fibre.  Sets are :class:`~branchsys.intervals.Bundle`
    objects and the maps ``f_e`` are exact piecewise maps.

``DiscreteSystem``
    A finite window of a countable index set with counting measure.  The
    window may cut through the maps: ``overflow[e]`` holds indices of
    ``D_{r(e)}`` whose image falls outside the window and ``underflow[e]``
    indices of ``R_e`` whose preimage does.  Axiom 5 is checked for the part
    inside the window.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .graph import DirectedCycle, Graph, GraphError, has_condition_L
from .intervals import (
    Affine,
    Bundle,
    Derivatives,
    InexactError,
    LInterval,
    PiecewiseMap,
    Power,
    compose,
    compose_pieces,
    full,
    invert,
    power,
    radon_nikodym,
)
from .report import Report, failed, passed


class BranchingError(ValueError):
    pass


class AxiomViolation(BranchingError):
    def __init__(self, report: Report):
        super().__init__(report.summary())
        self.report = report


@dataclass(frozen=True)
class BundleSystem:
    graph: Graph
    R: dict[str, Bundle]
    D: dict[str, Bundle]
    f: dict[str, PiecewiseMap]
    tails: dict[str, Bundle] = field(default_factory=dict)
    kind: str = "custom"
    notes: tuple[str, ...] = ()

    model = "bundle"

    def derivatives(self, e: str) -> Derivatives:
        return radon_nikodym(self.f[e])

    def tail(self, e: str) -> Bundle:
        return self.tails.get(e, Bundle())


@dataclass(frozen=True)
class DiscreteSystem:
    graph: Graph
    index: tuple[int, ...]
    R: dict[str, frozenset[int]]
    D: dict[str, frozenset[int]]
    f: dict[str, dict[int, int]]
    overflow: dict[str, frozenset[int]] = field(default_factory=dict)
    underflow: dict[str, frozenset[int]] = field(default_factory=dict)
    kind: str = "custom"
    notes: tuple[str, ...] = ()
    points: dict[int, object] | None = None

    model = "discrete"

    def over(self, e: str) -> frozenset[int]:
        return self.overflow.get(e, frozenset())

    def under(self, e: str) -> frozenset[int]:
        return self.underflow.get(e, frozenset())

    @property
    def truncated(self) -> bool:
        return any(self.overflow.values()) or any(self.underflow.values())


BranchingSystem = BundleSystem | DiscreteSystem


# ---- constructions ----------------------------------------------------------


def standard_construction(g: Graph) -> BundleSystem:
    """The branching system on ``(0,1] x (E^0 ∪ E^1)`` that exists for every
    row-countable graph.

    ``R_e = (0,1] x {e}``; ``D_v = (0,1] x {v}`` for sinks and
    ``(0,1] x s^{-1}(v)`` otherwise.  For an edge ``d`` with ``w = r(d)``:

    * ``w`` a sink: ``f_d`` relabels ``(t, w) -> (t, d)``;
    * ``s^{-1}(w) = {e_1..e_N}``: ``f_d`` sends ``(0,1] x {e_j}`` linearly onto
      ``((j-1)/N, j/N] x {d}``;
    * ``w`` an infinite emitter: ``(0,1] x {e_j}`` goes onto
      ``(1/(j+1), 1/j] x {d}`` for the materialized ``e_1..e_M``; the rest
      ``(0, 1/(M+1)] x {d}`` is kept as the unmodeled tail of ``R_d``.
    """
    R = {e.id: Bundle([full(e.id)]) for e in g.edges}
    D = {}
    for v in g.vertices:
        outs = g.out_edges(v)
        D[v] = Bundle([full(v)]) if g.is_sink(v) else Bundle(full(e.id) for e in outs)
    f, tails = {}, {}
    for d in g.edges:
        w = d.dst
        outs = g.out_edges(w)
        if g.is_sink(w):
            f[d.id] = PiecewiseMap([Affine(full(w), full(d.id))])
        elif not g.is_infinite_emitter(w):
            n = len(outs)
            f[d.id] = PiecewiseMap(
                Affine(full(e.id), LInterval(d.id, Fraction(j - 1, n), Fraction(j, n)))
                for j, e in enumerate(outs, start=1)
            )
        else:
            f[d.id] = PiecewiseMap(
                Affine(full(e.id), LInterval(d.id, Fraction(1, j + 1), Fraction(1, j)))
                for j, e in enumerate(outs, start=1)
            )
            tails[d.id] = Bundle([LInterval(d.id, Fraction(0), Fraction(1, len(outs) + 1))])
    notes = ()
    if tails:
        notes = ("infinite families truncated: tails of R_d left unmodeled",)
    return BundleSystem(g, R, D, f, tails, "standard", notes)


def _require_exitless(g: Graph, alpha: DirectedCycle) -> None:
    if not alpha.is_cycle_of(g):
        raise BranchingError(f"{list(alpha.edges)} is not a directed cycle of the graph")
    if alpha.has_exit(g):
        raise BranchingError(f"cycle {list(alpha.edges)} has an exit")


def exitless_witness(g: Graph) -> DirectedCycle:
    v = has_condition_L(g)
    if v.holds:
        raise BranchingError("no exitless cycle: the graph satisfies condition (L)")
    return v.witness


def _cycle_system(g: Graph, alpha: DirectedCycle, last_exponent: Fraction, kind: str) -> BundleSystem:
    _require_exitless(g, alpha)
    base = standard_construction(g)
    f = dict(base.f)
    edges = alpha.edges
    n = len(edges)
    notes = list(base.notes)
    if n == 1:
        (e,) = edges
        if kind == "cycle-collapse":
            f[e] = PiecewiseMap([Affine(full(e), full(e))])
        else:
            f[e] = PiecewiseMap([power(e, e, Fraction(1, 2))])
        notes.append("loop (n = 1): single map used for both cycle ends (extension)")
    else:
        f[edges[0]] = PiecewiseMap([power(edges[1], edges[0], Fraction(1, 2))])
        for i in range(1, n - 1):
            f[edges[i]] = PiecewiseMap([Affine(full(edges[i + 1]), full(edges[i]))])
        f[edges[-1]] = PiecewiseMap([power(edges[0], edges[-1], last_exponent)])
    return BundleSystem(g, base.R, base.D, f, base.tails, kind, tuple(notes))


def cycle_collapse_system(g: Graph, alpha: DirectedCycle | None = None) -> BundleSystem:
    """Standard system rebuilt along an exitless cycle so the cycle word acts
    as the vertex projection: ``f_{e_1} = t^(1/2)``, ``f_{e_n} = t^2``."""
    alpha = alpha or exitless_witness(g)
    b = _cycle_system(g, alpha, Fraction(2), "cycle-collapse")
    assert cycle_composite(b, alpha).is_identity
    return b


def cycle_separating_system(g: Graph, alpha: DirectedCycle | None = None) -> BundleSystem:
    """Standard system rebuilt along an exitless cycle so the cycle word
    differs from the vertex projection: ``f_{e_1} = f_{e_n} = t^(1/2)``."""
    alpha = alpha or exitless_witness(g)
    b = _cycle_system(g, alpha, Fraction(1, 2), "cycle-separate")
    assert not cycle_composite(b, alpha).is_identity
    return b


def cycle_composite(b: BundleSystem, alpha: DirectedCycle) -> PiecewiseMap:
    """``f_{e_n}^{-1} ∘ ... ∘ f_{e_1}^{-1}`` -- the substitution the cycle word applies."""
    edges = alpha.edges
    comp = invert(b.f[edges[0]])
    for e in edges[1:]:
        comp = compose(invert(b.f[e]), comp)
    return comp


def discrete_system(
    graph: Graph,
    index,
    R: dict,
    D: dict,
    f: dict,
    overflow: dict | None = None,
    underflow: dict | None = None,
    kind: str = "custom",
    check: bool = True,
) -> DiscreteSystem:
    """Build a counting-measure system and verify it (``Φ_{f_e} = 1``)."""
    b = DiscreteSystem(
        graph,
        tuple(sorted(index)),
        {e: frozenset(R.get(e, ())) for e in graph.edge_ids},
        {v: frozenset(D.get(v, ())) for v in graph.vertices},
        {e: dict(f.get(e, {})) for e in graph.edge_ids},
        {e: frozenset(s) for e, s in (overflow or {}).items() if s},
        {e: frozenset(s) for e, s in (underflow or {}).items() if s},
        kind,
    )
    if check:
        rep = verify_axioms(b)
        if not rep.ok:
            raise AxiomViolation(rep)
    return b


def discretize(b: BundleSystem, max_points: int = 512, seeds=None, max_bits: int = 64) -> DiscreteSystem:
    """Counting-measure shadow of a bundle system on a finite orbit window.

    Starting from ``seeds`` (default: the right endpoint and midpoint of every
    interval of every ``D_v``), points are explored breadth-first under all ``f_e`` and
    ``f_e^{-1}`` until ``max_points`` are collected.  Images that leave the
    window (are irrational under a power piece, or have denominators above
    ``2**max_bits``) become overflow/underflow.
    """
    g = b.graph
    d_owner: dict[str, str] = {}
    for v, bun in b.D.items():
        for lab in bun.labels:
            d_owner[lab] = v
    into = {v: [e.id for e in g.in_edges(v)] for v in g.vertices}
    r_owner: dict[str, list[str]] = {}
    for e, bun in b.R.items():
        for lab in bun.labels:
            r_owner.setdefault(lab, []).append(e)

    images: dict = {}

    def forward(e: str, p):
        key = (e, p)
        if key in images:
            return images[key]
        lab, t = p
        q = None
        if b.D[g.range(e)].contains_point(lab, t):
            try:
                q = b.f[e](lab, t)
            except InexactError:
                pass
        images[key] = q
        return q

    inverses = {e: invert(m) for e, m in b.f.items()}

    def small(q):
        # keep exact points of moderate height so windows stay cheap
        return q is not None and q[1].denominator.bit_length() <= max_bits

    def backward(e: str, p):
        lab, t = p
        piece = inverses[e].piece_at(lab, t)
        if piece is None:
            return None
        try:
            return piece.target.label, piece(t)
        except InexactError:
            return None

    if seeds is None:
        seeds = [(iv.label, t) for v in g.vertices for iv in b.D[v] for t in (iv.hi, (iv.lo + iv.hi) / 2)]
    order: dict = {}
    queue = deque()
    for p in seeds:
        if p not in order and len(order) < max_points:
            order[p] = len(order)
            queue.append(p)
    while queue:
        p = queue.popleft()
        lab = p[0]
        nbrs = []
        v = d_owner.get(lab)
        if v is not None:
            nbrs += [forward(e, p) for e in into[v]]
        nbrs += [backward(e, p) for e in r_owner.get(lab, [])]
        for q in nbrs:
            if small(q) and q not in order and len(order) < max_points:
                order[q] = len(order)
                queue.append(q)

    pts = list(order)
    R = {e: {order[p] for p in pts if b.R[e].contains_point(*p)} for e in g.edge_ids}
    D = {v: {order[p] for p in pts if b.D[v].contains_point(*p)} for v in g.vertices}
    f, over, under = {}, {}, {}
    for e in g.edge_ids:
        fe, ov = {}, set()
        for i in D[g.range(e)]:
            q = forward(e, pts[i])
            if q is not None and q in order:
                fe[i] = order[q]
            else:
                ov.add(i)
        f[e] = fe
        over[e] = ov
        under[e] = R[e] - set(fe.values())
    out = discrete_system(g, range(len(pts)), R, D, f, over, under, kind=f"{b.kind}/discretized", check=False)
    return DiscreteSystem(
        out.graph, out.index, out.R, out.D, out.f, out.overflow, out.underflow,
        out.kind, b.notes + ("discrete orbit window",), {i: p for i, p in enumerate(pts)},
    )


# ---- verification -----------------------------------------------------------


def _overlap_sweep(owned: list[tuple[LInterval, str]]):
    """First pair of differently-owned overlapping intervals, or None."""
    owned = sorted(owned, key=lambda x: (x[0].label, x[0].lo, x[0].hi, x[1]))
    cur = None
    for iv, who in owned:
        if cur is not None and cur[0].label == iv.label and iv.lo < cur[0].hi and cur[1] != who:
            return cur[1], who, cur[0].intersect(iv)
        if cur is None or cur[0].label != iv.label or iv.hi > cur[0].hi:
            cur = (iv, who)
    return None


def _verify_bundle(b: BundleSystem, g: Graph) -> Report:
    rep = Report(f"axioms[{b.kind}]")
    hit = _overlap_sweep([(iv, e) for e in g.edge_ids for iv in b.R[e]])
    rep.add(passed("1:R-disjoint") if hit is None else failed(
        "1:R-disjoint", {"edges": [hit[0], hit[1]], "overlap": hit[2].to_json()}))
    hit = _overlap_sweep([(iv, v) for v in g.vertices for iv in b.D[v]])
    rep.add(passed("2:D-disjoint") if hit is None else failed(
        "2:D-disjoint", {"vertices": [hit[0], hit[1]], "overlap": hit[2].to_json()}))

    bad = next((e for e in g.edge_ids if not b.D[g.source(e)].contains(b.R[e])), None)
    rep.add(passed("3:R-in-D") if bad is None else failed("3:R-in-D", {"edge": bad}))

    finite = [v for v in g.vertices if g.is_finite_emitter(v)]
    bad = None
    for v in finite:
        union = Bundle()
        for e in g.out_edges(v):
            union = union | b.R[e.id]
        if union != b.D[v]:
            bad = {"vertex": v, "D": b.D[v].to_json(), "union": union.to_json()}
            break
    rep.add(passed("4:D-union") if bad is None else failed("4:D-union", bad))

    bad = None
    for e in g.edge_ids:
        m = b.f[e]
        tail = b.tail(e)
        if m.domain != b.D[g.range(e)]:
            bad = {"edge": e, "problem": "domain is not D_r(e)"}
        elif not m.codomain.isdisjoint(tail) or (m.codomain | tail) != b.R[e]:
            bad = {"edge": e, "problem": "image is not R_e"}
        else:
            for p in m.pieces:
                back, fwd = compose_pieces(p.inverse(), p), compose_pieces(p, p.inverse())
                if not (back.source == back.target == p.source and fwd.source == fwd.target == p.target
                        and not isinstance(back, Power) and not isinstance(fwd, Power)):
                    bad = {"edge": e, "problem": "inverse mismatch", "piece": p.to_json()}
                    break
        if bad:
            break
    rep.add(passed("5:bijection") if bad is None else failed("5:bijection", bad))

    bad = next((e for e in g.edge_ids if not b.derivatives(e).chain_rule_holds()), None)
    rep.add(passed("6:radon-nikodym") if bad is None else failed("6:radon-nikodym", {"edge": bad}))
    if b.tails:
        rep.notes.append("condition 5 checked modulo the unmodeled tails of truncated families")
    return rep


def _verify_discrete(b: DiscreteSystem, g: Graph) -> Report:
    rep = Report(f"axioms[{b.kind}]")
    universe = set(b.index)

    def disjoint(fam: dict, ids) -> dict | None:
        owner: dict[int, str] = {}
        for k in ids:
            for i in sorted(fam[k]):
                if i not in universe:
                    return {"owner": k, "index": i, "problem": "index outside Λ"}
                if i in owner:
                    return {"owners": [owner[i], k], "index": i}
                owner[i] = k
        return None

    bad = disjoint(b.R, g.edge_ids)
    rep.add(passed("1:R-disjoint") if bad is None else failed("1:R-disjoint", bad))
    bad = disjoint(b.D, g.vertices)
    rep.add(passed("2:D-disjoint") if bad is None else failed("2:D-disjoint", bad))

    bad = None
    for e in g.edge_ids:
        extra = b.R[e] - b.D[g.source(e)]
        if extra:
            bad = {"edge": e, "index": min(extra)}
            break
    rep.add(passed("3:R-in-D") if bad is None else failed("3:R-in-D", bad))

    bad = None
    for v in g.vertices:
        if g.is_finite_emitter(v):
            union = frozenset().union(*(b.R[e.id] for e in g.out_edges(v)))
            diff = union ^ b.D[v]
            if diff:
                bad = {"vertex": v, "index": min(diff)}
                break
    rep.add(passed("4:D-union") if bad is None else failed("4:D-union", bad))

    bad = None
    for e in g.edge_ids:
        fe = b.f[e]
        dom, ran = set(fe), list(fe.values())
        d_r = b.D[g.range(e)]
        if not dom <= d_r:
            bad = {"edge": e, "index": min(dom - d_r), "problem": "defined outside D_r(e)"}
        elif (dom & b.over(e)) or (dom | b.over(e)) != d_r:
            bad = {"edge": e, "problem": "domain plus overflow is not D_r(e)",
                   "index": min((dom | b.over(e)) ^ d_r or dom & b.over(e))}
        elif len(set(ran)) != len(ran):
            seen: dict[int, int] = {}
            for i in sorted(fe):
                if fe[i] in seen:
                    bad = {"edge": e, "index": i, "collides_with": seen[fe[i]], "problem": "not injective"}
                    break
                seen[fe[i]] = i
        elif not set(ran) <= b.R[e]:
            bad = {"edge": e, "index": min(set(ran) - b.R[e]), "problem": "image outside R_e"}
        elif (set(ran) & b.under(e)) or (set(ran) | b.under(e)) != b.R[e]:
            bad = {"edge": e, "problem": "image plus underflow is not R_e"}
        if bad:
            break
    rep.add(passed("5:bijection") if bad is None else failed("5:bijection", bad))
    rep.add(passed("6:radon-nikodym", "counting measure: both derivatives are identically 1"))
    if b.truncated:
        rep.notes.append("condition 5 checked inside the truncation window")
    return rep


def verify_axioms(b: BranchingSystem, g: Graph | None = None) -> Report:
    """Check the six branching-system conditions exactly."""
    g = g or b.graph
    if isinstance(b, BundleSystem):
        return _verify_bundle(b, g)
    return _verify_discrete(b, g)


# ---- serialization ----------------------------------------------------------


def system_to_json(b: BranchingSystem) -> dict:
    if isinstance(b, BundleSystem):
        return {
            "model": "bundle",
            "kind": b.kind,
            "graph": b.graph.to_dict(),
            "R": {e: b.R[e].to_json() for e in sorted(b.R)},
            "D": {v: b.D[v].to_json() for v in sorted(b.D)},
            "f": {e: b.f[e].to_json() for e in sorted(b.f)},
            "tails": {e: t.to_json() for e, t in sorted(b.tails.items())},
            "notes": list(b.notes),
        }
    return {
        "model": "discrete",
        "kind": b.kind,
        "graph": b.graph.to_dict(),
        "index": list(b.index),
        "R": {e: sorted(s) for e, s in sorted(b.R.items())},
        "D": {v: sorted(s) for v, s in sorted(b.D.items())},
        "f": {e: sorted(m.items()) for e, m in sorted(b.f.items())},
        "overflow": {e: sorted(s) for e, s in sorted(b.overflow.items())},
        "underflow": {e: sorted(s) for e, s in sorted(b.underflow.items())},
        "notes": list(b.notes),
    }


def system_from_json(doc: dict | str) -> BranchingSystem:
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        g = Graph.from_dict(doc["graph"])
        if doc["model"] == "bundle":
            return BundleSystem(
                g,
                {e: Bundle.from_json(v) for e, v in doc["R"].items()},
                {v: Bundle.from_json(x) for v, x in doc["D"].items()},
                {e: PiecewiseMap.from_json(m) for e, m in doc["f"].items()},
                {e: Bundle.from_json(t) for e, t in doc.get("tails", {}).items()},
                doc.get("kind", "custom"),
                tuple(doc.get("notes", ())),
            )
        if doc["model"] == "discrete":
            b = discrete_system(
                g,
                doc["index"],
                doc["R"],
                doc["D"],
                {e: {int(a): int(c) for a, c in pairs} for e, pairs in doc["f"].items()},
                doc.get("overflow"),
                doc.get("underflow"),
                doc.get("kind", "custom"),
                check=False,
            )
            return replace(b, notes=tuple(doc.get("notes", ())))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GraphError):
            raise
        raise BranchingError(f"malformed system document: {exc}") from None
    raise BranchingError(f"unknown space model {doc.get('model')!r}")
