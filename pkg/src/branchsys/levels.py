"""Extreme vertices, the subgraph chain ``E_0 ⊃ E_1 ⊃ ...`` and its level sets.

``X_i`` are the extreme vertices of ``E_{i-1}`` and ``Y_i`` its extreme
edges; ``E_i`` removes both.  The chain stops at the first empty level.
Vertices of ``Z = r(E^1) ∪ s(E^1)`` never removed form the residual.

Each level vertex ``v`` carries a direction tag taken from its unique
adjacent edge ``f`` in ``E_{i-1}``: ``"VF"`` (final vertex) when
``r(f) = v`` and ``"VI"`` (initial vertex) when ``s(f) = v``.  The basis
assignment sweeps in :mod:`branchsys.permutative` are ordered by these tags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .graph import Graph, connected_components, is_connected, is_P_simple
from .report import Report, failed, passed, vacuous

TAG_NOTE = (
    "VF/VI tags are reconstructed: VF when the vertex is the range of its unique "
    "edge in E_{i-1}, VI when it is the source"
)


def is_extreme(g: Graph, v: str) -> bool:
    if v in g.open_ends or g.is_infinite_emitter(v) or g.receives_infinitely(v):
        return False
    adj = g.adjacent_edges(v)
    return len(adj) == 1 and adj[0].src != adj[0].dst


def extreme_vertices(g: Graph) -> frozenset[str]:
    """Vertices with exactly one adjacent edge that is not a loop at them."""
    return frozenset(v for v in g.vertices if is_extreme(g, v))


def extreme_edges(g: Graph) -> frozenset[str]:
    return frozenset(g.adjacent_edges(v)[0].id for v in extreme_vertices(g))


@dataclass(frozen=True)
class LevelDecomposition:
    graph: Graph
    levels: tuple[frozenset[str], ...]
    level_edges: tuple[frozenset[str], ...]
    residual: frozenset[str]
    stages: tuple[Graph, ...]
    level_of: dict[str, int] = field(repr=False)
    tags: dict[str, str] = field(repr=False)
    unique_edge: dict[str, str] = field(repr=False)

    @property
    def m(self) -> int:
        """Index of the last nonempty level (0 when nothing is extreme)."""
        return len(self.levels)

    def level(self, v: str) -> int | None:
        return self.level_of.get(v)

    def vertices_tagged(self, i: int, tag: str) -> list[str]:
        return sorted(v for v in self.levels[i - 1] if self.tags[v] == tag)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "levels": [sorted(x) for x in self.levels],
            "level_edges": [sorted(y) for y in self.level_edges],
            "tags": dict(sorted(self.tags.items())),
            "residual": sorted(self.residual),
            "stage_sizes": [len(s.vertices) for s in self.stages],
        }


def decompose(g: Graph) -> LevelDecomposition:
    stage = g
    stages = [g]
    levels, level_edges = [], []
    level_of, tags, unique = {}, {}, {}
    while True:
        xs = extreme_vertices(stage)
        if not xs:
            break
        i = len(levels) + 1
        ys = set()
        for v in xs:
            f = stage.adjacent_edges(v)[0]
            ys.add(f.id)
            level_of[v] = i
            unique[v] = f.id
            tags[v] = "VF" if f.dst == v else "VI"
        levels.append(frozenset(xs))
        level_edges.append(frozenset(ys))
        keep_edges = [e.id for e in stage.declared_edges if e.id not in ys]
        stage = stage.restrict([v for v in stage.vertices if v not in xs], keep_edges)
        stages.append(stage)
    residual = g.touched_vertices() - set(level_of)
    return LevelDecomposition(
        g, tuple(levels), tuple(level_edges), frozenset(residual), tuple(stages), level_of, tags, unique
    )


@dataclass(frozen=True)
class AllLevels:
    """``Z = X_1 ∪ ... ∪ X_m``."""

    m: int

    def to_json(self) -> dict:
        return {"case": "all_levels", "m": self.m}


@dataclass(frozen=True)
class AllLevelsPlusOne:
    """``Z = X_1 ∪ ... ∪ X_m ∪ {vbar}``."""

    m: int
    vbar: str

    def to_json(self) -> dict:
        return {"case": "all_levels_plus_one", "m": self.m, "vbar": self.vbar}


@dataclass(frozen=True)
class NotApplicable:
    reason: str

    def to_json(self) -> dict:
        return {"case": "not_applicable", "reason": self.reason}


PppClassification = AllLevels | AllLevelsPlusOne | NotApplicable


def classify_ppp(g: Graph, d: LevelDecomposition | None = None) -> PppClassification:
    """Decide which branch of the level dichotomy ``g`` falls into.

    The hypotheses are: ``g`` is P-simple, ``Z`` is connected, and some
    ``E_n`` has finitely many vertices.  A finite window with open ends stands
    for an infinite graph whose every ``E_n`` keeps the (infinite) continuation
    beyond the window, so it fails the last hypothesis.
    """
    z = g.touched_vertices()
    if not z:
        return NotApplicable("Z is empty (no edges)")
    ps = is_P_simple(g)
    if not ps.holds:
        return NotApplicable(f"not P-simple ({ps.reason})")
    if not is_connected(g):
        return NotApplicable("Z is not connected")
    if g.open_ends & z:
        return NotApplicable("no E_n with finitely many vertices (graph continues past its open ends)")
    d = d or decompose(g)
    if not d.residual:
        return AllLevels(d.m)
    if len(d.residual) == 1:
        (vbar,) = d.residual
        return AllLevelsPlusOne(d.m, vbar)
    return NotApplicable(f"decomposition stalled with {len(d.residual)} residual vertices")


class _Adjacency:
    def __init__(self, g: Graph):
        self.g = g

    @cached_property
    def neighbours(self) -> dict[str, frozenset[str]]:
        nb: dict[str, set[str]] = {v: set() for v in self.g.vertices}
        for e in self.g.edges:
            if e.src != e.dst:
                nb[e.src].add(e.dst)
                nb[e.dst].add(e.src)
        return {v: frozenset(s) for v, s in nb.items()}

    def edges_between(self, u: str, v: str) -> list[str]:
        return [e.id for e in self.g.edges if {e.src, e.dst} == {u, v}]


def check_auxiliar(g: Graph, d: LevelDecomposition | None = None) -> Report:
    """Check the structural facts (a)-(d) about level sets.

    (a) and (b) hold for every graph; (c) and (d) are checked on the
    matching branch of :func:`classify_ppp` and reported vacuous otherwise.
    """
    d = d or decompose(g)
    c = classify_ppp(g, d)
    rep = Report("auxiliar")
    rep.notes.append(f"classification: {c.to_json()}")
    adj = _Adjacency(g)
    z = g.touched_vertices()
    inf = float("inf")

    def lvl(w: str) -> float:
        # residual vertices sit above every level
        return d.level_of.get(w, inf)

    # (a)
    if is_connected(g):
        bad = None
        removed: set[str] = set()
        for i in range(1, d.m + 1):
            removed |= d.levels[i - 1]
            if not is_connected(d.stages[i], z - removed):
                bad = i
                break
        rep.add(passed("a") if bad is None else failed("a", {"stage": bad}))
    else:
        rep.add(vacuous("a", "Z not connected"))

    # (b)
    bad_b = None
    for v in sorted(d.level_of):
        n = d.level_of[v]
        high = sorted(w for w in adj.neighbours[v] if lvl(w) >= n)
        if len(high) > 1:
            bad_b = {"vertex": v, "level": n, "higher_neighbours": high}
            break
    rep.add(passed("b") if bad_b is None else failed("b", bad_b))

    m = d.m
    if isinstance(c, AllLevels):
        bad = None
        for v in sorted(d.level_of):
            n = d.level_of[v]
            if n < m:
                higher = [w for w in adj.neighbours[v] if lvl(w) > n]
                if len(higher) != 1:
                    bad = {"vertex": v, "level": n, "higher_neighbours": sorted(higher)}
                    break
        rep.add(passed("c-I") if bad is None else failed("c-I", bad))
        top = sorted(d.levels[m - 1])
        ok = len(top) == 2 and len(adj.edges_between(*top)) == 1
        rep.add(passed("c-II") if ok else failed("c-II", {"top_level": top}))
        rep.add(vacuous("d-I", "not the vbar case"))
        rep.add(vacuous("d-II", "not the vbar case"))
    elif isinstance(c, AllLevelsPlusOne):
        rep.add(vacuous("c-I", "not the all-levels case"))
        rep.add(vacuous("c-II", "not the all-levels case"))
        vbar = c.vbar
        bad = None
        for v in sorted(d.level_of):
            n = d.level_of[v]
            if n < m and vbar not in adj.neighbours[v]:
                higher = [w for w in adj.neighbours[v] if n < d.level_of.get(w, 0)]
                if len(higher) != 1:
                    bad = {"vertex": v, "level": n, "higher_neighbours": sorted(higher)}
                    break
        rep.add(passed("d-I") if bad is None else failed("d-I", bad))
        bad = None
        for v in sorted(d.levels[m - 1]):
            if len(adj.edges_between(v, vbar)) != 1:
                bad = {"vertex": v, "vbar": vbar}
                break
        rep.add(passed("d-II") if bad is None else failed("d-II", bad))
    else:
        for name in ("c-I", "c-II", "d-I", "d-II"):
            rep.add(vacuous(name, c.reason))
    return rep


def decomposition_json(g: Graph) -> dict:
    d = decompose(g)
    out = d.to_json()
    out["classification"] = classify_ppp(g, d).to_json()
    out["components"] = connected_components(g).to_json()
    out["notes"] = [TAG_NOTE]
    return out
