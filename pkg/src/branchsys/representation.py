"""The representation induced by a branching system.

On the bundle backend ``S_e`` acts by ``φ -> χ_{R_e} Φ_{f_e^{-1}}^{1/2} (φ ∘ f_e^{-1})``
and ``P_v`` is multiplication by ``χ_{D_v}``.  On the discrete backend all
derivatives are 1, so ``S_e`` is the index map ``f_e`` with unit weights.
"""

from __future__ import annotations

import random
from functools import cached_property

from .branching import BranchingSystem, BundleSystem, DiscreteSystem
from .graph import Graph, GraphError
from .intervals import UnsupportedComposition, measure
from .operators import (
    BundleOperator,
    IndexOperator,
    Operator,
    bundle_projection,
    index_map,
    index_projection,
    op_adjoint,
    op_compose,
    op_difference,
    op_sum,
    zero_like,
)
from .report import Report, failed, passed, vacuous


class WordError(ValueError):
    pass


class InducedRepresentation:
    def __init__(self, b: BranchingSystem):
        self.b = b
        self.graph = b.graph
        self._s: dict[str, Operator] = {}
        self._p: dict[str, Operator] = {}
        self._s_star: dict[str, Operator] = {}
        self._q: dict[str, Operator] = {}

    def S(self, e: str) -> Operator:
        if e not in self._s:
            self._s[e] = induced_generator(self.b, "S", e)
        return self._s[e]

    def S_star(self, e: str) -> Operator:
        if e not in self._s_star:
            self._s_star[e] = op_adjoint(self.S(e)).named(f"S_{e}*")
        return self._s_star[e]

    def range_projection(self, e: str) -> Operator:
        """``π(S_e S_e*)``."""
        if e not in self._q:
            self._q[e] = op_compose(self.S(e), self.S_star(e))
        return self._q[e]

    def P(self, v: str) -> Operator:
        if v not in self._p:
            self._p[v] = induced_generator(self.b, "P", v)
        return self._p[v]

    def path(self, word, vertex: str | None = None) -> Operator:
        return path_operator(self.b, word, vertex, rep=self)

    @cached_property
    def zero(self) -> Operator:
        return zero_like(self.P(self.graph.vertices[0])) if self.graph.vertices else BundleOperator()


def induced_generator(b: BranchingSystem, kind: str, name: str) -> Operator:
    """``π(S_e)`` (``kind="S"``) or ``π(P_v)`` (``kind="P"``)."""
    g = b.graph
    if kind == "P":
        if name not in g:
            raise GraphError(f"unknown vertex {name!r}", name)
        if isinstance(b, DiscreteSystem):
            return index_projection(b.D[name], f"P_{name}")
        return bundle_projection(b.D[name], f"P_{name}")
    if kind != "S":
        raise ValueError(f"generator kind must be 'S' or 'P', not {kind!r}")
    if not g.has_edge(name):
        raise GraphError(f"unknown edge {name!r}", name)
    if isinstance(b, DiscreteSystem):
        return index_map(b.f[name], b.over(name), b.under(name), f"S_{name}")
    der = b.derivatives(name)
    return BundleOperator(
        ((p, bw.sqrt()) for p, bw in zip(der.pieces, der.backward)), f"S_{name}"
    )


def path_operator(b: BranchingSystem, word, vertex: str | None = None, rep: InducedRepresentation | None = None) -> Operator:
    """``π(S_{e_1} ... S_{e_n})``; the empty word at ``vertex`` is ``π(P_vertex)``."""
    rep = rep or InducedRepresentation(b)
    g = b.graph
    word = list(word)
    if not word:
        if vertex is None:
            raise WordError("the empty word needs a vertex")
        return rep.P(vertex)
    for e in word:
        if not g.has_edge(e):
            raise GraphError(f"unknown edge {e!r}", e)
    for x, y in zip(word, word[1:]):
        if g.range(x) != g.source(y):
            raise WordError(f"word not composable at {x}{y}: r({x}) = {g.range(x)} but s({y}) = {g.source(y)}")
    if vertex is not None and g.source(word[0]) != vertex:
        raise WordError(f"word starts at {g.source(word[0])}, not {vertex}")
    op = rep.S(word[-1])
    for e in reversed(word[:-1]):
        op = op_compose(rep.S(e), op)
    return op.named("S_" + "".join(word))


def _support_keys(op: Operator):
    if isinstance(op, IndexOperator):
        return op.range
    return {p.target.label for p, _ in op.pieces}


def _meeting_pairs(ops: dict[str, Operator]) -> list[tuple[str, str]]:
    """Ordered pairs of distinct names whose operators have meeting ranges
    (label-level for bundles, index-level for the discrete backend)."""
    owners: dict = {}
    for name, op in ops.items():
        for k in _support_keys(op):
            owners.setdefault(k, []).append(name)
    pairs = set()
    for names in owners.values():
        for a in names:
            for b in names:
                if a != b:
                    pairs.add((a, b))
    return sorted(pairs)


def verify_ck(b: BranchingSystem, g: Graph | None = None) -> Report:
    """Check the Cuntz-Krieger relations and the orthogonality relations exactly.

    Relations are grouped: one check per relation family, reporting the first
    failing generator.
    """
    g = g or b.graph
    pi = InducedRepresentation(b)
    rep = Report(f"ck[{b.kind}]")
    if isinstance(b, DiscreteSystem) and b.truncated:
        rep.notes.append("discrete window: relations compared on determined indices only")
    if isinstance(b, BundleSystem) and b.tails:
        rep.notes.append("CK3 counts the unmodeled tails of truncated families as range projections")

    def family(name: str, items):
        for lhs, rhs, where in items:
            diff = op_difference(lhs, rhs)
            if diff is not None:
                rep.add(failed(name, {**where, **diff}))
                return
        rep.add(passed(name))

    vs, es = g.vertices, g.edge_ids
    family("projections", ((op_compose(pi.P(v), pi.P(v)), pi.P(v), {"vertex": v}) for v in vs))
    family("self-adjoint", ((op_adjoint(pi.P(v)), pi.P(v), {"vertex": v}) for v in vs))
    # a product X* Y of generators vanishes when the ranges of X and Y do not meet,
    # so only pairs with a shared support key need to be multiplied out
    family(
        "orthogonal-projections",
        ((op_compose(pi.P(v), pi.P(w)), pi.zero, {"vertices": [v, w]})
         for v, w in _meeting_pairs({v: pi.P(v) for v in vs})),
    )
    family("CK1", ((op_compose(pi.S_star(e), pi.S(e)), pi.P(g.range(e)), {"edge": e}) for e in es))
    family(
        "orthogonal-ranges",
        ((op_compose(pi.S_star(e), pi.S(f)), pi.zero, {"edges": [e, f]})
         for e, f in _meeting_pairs({e: pi.S(e) for e in es})),
    )

    range_proj = pi.range_projection

    family(
        "CK2",
        ((op_compose(pi.P(g.source(e)), range_proj(e)), range_proj(e), {"edge": e}) for e in es),
    )
    family(
        "partial-isometry",
        ((op_compose(range_proj(e), pi.S(e)), pi.S(e), {"edge": e}) for e in es),
    )
    finite = [v for v in vs if g.is_finite_emitter(v)]
    if finite:
        def ck3():
            for v in finite:
                total = zero_like(pi.P(v))
                for e in g.out_edges(v):
                    total = op_sum(total, range_proj(e.id))
                    if isinstance(b, BundleSystem) and e.id in b.tails:
                        # the tail is the range of the family edges left unmaterialized
                        total = op_sum(total, bundle_projection(b.tails[e.id]))
                yield pi.P(v), total, {"vertex": v}
        family("CK3", ck3())
    else:
        rep.add(vacuous("CK3", "no vertex with 0 < #s^{-1}(v) < ∞"))
    return rep


def _paths_from(g: Graph, v: str, max_len: int) -> list[tuple[str, ...]]:
    out, frontier = [], [()]
    for _ in range(max_len):
        nxt = []
        for p in frontier:
            end = g.range(p[-1]) if p else v
            for e in g.out_edges(end):
                nxt.append(p + (e.id,))
        out += nxt
        frontier = nxt
    return out


def check_nonzero(b: BranchingSystem, g: Graph | None = None, seed: int = 0, samples: int = 40, max_len: int = 3) -> Report:
    """``π(P_v) ≠ 0``, ``π(S_e) ≠ 0`` and sampled ``π(S_α S_β*) ≠ 0`` with ``r(α) = r(β)``."""
    g = g or b.graph
    rep = Report(f"nonzero[{b.kind}]")
    pi = InducedRepresentation(b)

    def size(x) -> object:
        return len(x) if isinstance(b, DiscreteSystem) else measure(x)

    bad = next((v for v in g.vertices if not size(b.D[v]) > 0), None)
    rep.add(passed("P_v") if bad is None else failed("P_v", {"vertex": bad, "measure": "0"}))
    bad = next((e for e in g.edge_ids if not size(b.R[e]) > 0), None)
    rep.add(passed("S_e") if bad is None else failed("S_e", {"edge": bad, "measure": "0"}))

    rng = random.Random(seed)
    paths = [p for v in g.vertices for p in _paths_from(g, v, max_len)]
    by_range: dict[str, list[tuple[str, ...]]] = {}
    for p in paths:
        by_range.setdefault(g.range(p[-1]), []).append(p)
    pools = [ps for ps in by_range.values()]
    if not pools:
        rep.add(vacuous("S_alpha S_beta*", "no nonempty paths"))
        return rep
    bad, tried, skipped = None, 0, 0
    for _ in range(samples):
        pool = rng.choice(pools)
        alpha, beta = rng.choice(pool), rng.choice(pool)
        try:
            op = op_compose(pi.path(alpha), op_adjoint(pi.path(beta)))
        except UnsupportedComposition:
            skipped += 1
            continue
        if op.is_zero() and isinstance(op, IndexOperator) and (op.und_fwd or op.und_bwd):
            skipped += 1
            continue
        tried += 1
        if op.is_zero():
            bad = {"alpha": list(alpha), "beta": list(beta)}
            break
    name = "S_alpha S_beta*"
    if bad is not None:
        rep.add(failed(name, bad))
    elif tried == 0:
        rep.add(vacuous(name, "no sampled word has a normal form in this map family"))
    else:
        rep.add(passed(name, f"{tried} sampled pairs"))
    if skipped:
        rep.notes.append(f"{skipped} sampled words skipped (no normal form, or outside the discrete window)")
    return rep
