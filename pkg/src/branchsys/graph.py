"""Directed multigraphs, graph-JSON ingestion and the graph predicates.

Graphs are immutable.  Vertex and edge ids are strings and every
enumeration is in canonical (lexicographic id) order, so results are
reproducible.

A vertex may carry a *countably infinite out-family*: edges ``v#1, v#2, ...``
all ranging at the same vertex, of which only the first ``truncate_at`` are
materialized.  Cardinality tests (``#s^{-1}(v) = inf``) treat such a vertex
as an infinite emitter regardless of the truncation.

``open_ends`` marks vertices of a finite window cut out of an infinite graph
whose adjacency continues beyond the window (for instance the two boundary
vertices of a truncated bi-infinite line).  They are never extreme and they
make a component "infinite" for the level-decomposition hypotheses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import networkx as nx


class GraphError(ValueError):
    """Invalid graph document or query; ``ident`` names the offending id."""

    def __init__(self, message: str, ident: str | None = None):
        super().__init__(message)
        self.ident = ident


@dataclass(frozen=True, order=True)
class Edge:
    id: str
    src: str
    dst: str


@dataclass(frozen=True)
class InfiniteFamily:
    vertex: str
    dst: str
    truncate_at: int

    def edge_id(self, k: int) -> str:
        return f"{self.vertex}#{k}"


class Graph:
    """A finite directed multigraph ``(E^0, E^1, r, s)``."""

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[Edge | tuple[str, str, str]] = (),
        infinite_families: Iterable[InfiniteFamily | tuple[str, str, int]] = (),
        open_ends: Iterable[str] = (),
    ):
        verts = list(vertices)
        seen: set[str] = set()
        for v in verts:
            if v in seen:
                raise GraphError(f"duplicate vertex id {v!r}", v)
            seen.add(v)
        self.vertices: tuple[str, ...] = tuple(sorted(verts))
        self._vset = frozenset(verts)

        declared = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        families = [
            f if isinstance(f, InfiniteFamily) else InfiniteFamily(*f) for f in infinite_families
        ]
        ids: set[str] = set()
        for e in declared:
            if e.id in ids:
                raise GraphError(f"duplicate edge id {e.id!r}", e.id)
            ids.add(e.id)
            for end in (e.src, e.dst):
                if end not in self._vset:
                    raise GraphError(f"edge {e.id!r} has dangling endpoint {end!r}", e.id)
        fam: dict[str, InfiniteFamily] = {}
        for f in families:
            if f.vertex not in self._vset:
                raise GraphError(f"infinite family at unknown vertex {f.vertex!r}", f.vertex)
            if f.dst not in self._vset:
                raise GraphError(f"infinite family of {f.vertex!r} has dangling range {f.dst!r}", f.vertex)
            if f.vertex in fam:
                raise GraphError(f"vertex {f.vertex!r} carries two infinite families", f.vertex)
            if not isinstance(f.truncate_at, int) or f.truncate_at < 1:
                raise GraphError(f"truncation count of {f.vertex!r} must be >= 1, got {f.truncate_at!r}", f.vertex)
            fam[f.vertex] = f
        self.infinite_families: dict[str, InfiniteFamily] = dict(sorted(fam.items()))

        materialized = []
        for f in self.infinite_families.values():
            for k in range(1, f.truncate_at + 1):
                e = Edge(f.edge_id(k), f.vertex, f.dst)
                if e.id in ids:
                    raise GraphError(f"duplicate edge id {e.id!r} (clashes with infinite family)", e.id)
                ids.add(e.id)
                materialized.append(e)

        oe = frozenset(open_ends)
        for v in oe:
            if v not in self._vset:
                raise GraphError(f"open end {v!r} is not a vertex", v)
        self.open_ends = oe

        self.declared_edges: tuple[Edge, ...] = tuple(sorted(declared))
        self.edges: tuple[Edge, ...] = self.declared_edges + tuple(materialized)
        self._edge = {e.id: e for e in self.edges}
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e)
            inc[e.dst].append(e)
        self._out = {v: tuple(es) for v, es in out.items()}
        self._in = {v: tuple(es) for v, es in inc.items()}

    # ---- lookup -----------------------------------------------------------

    def __contains__(self, v: object) -> bool:
        return v in self._vset

    def __repr__(self) -> str:
        return f"Graph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def edge(self, eid: str) -> Edge:
        try:
            return self._edge[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}", eid) from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._edge

    def source(self, eid: str) -> str:
        return self.edge(eid).src

    def range(self, eid: str) -> str:
        return self.edge(eid).dst

    def _check_vertex(self, v: str) -> None:
        if v not in self._vset:
            raise GraphError(f"unknown vertex {v!r}", v)

    def out_edges(self, v: str) -> tuple[Edge, ...]:
        """``s^{-1}(v)``: declared edges in id order, then the materialized family."""
        self._check_vertex(v)
        return self._out[v]

    def in_edges(self, v: str) -> tuple[Edge, ...]:
        """``r^{-1}(v)``."""
        self._check_vertex(v)
        return self._in[v]

    def is_infinite_emitter(self, v: str) -> bool:
        """True when ``s^{-1}(v)`` is infinite (the out-list is then truncated)."""
        self._check_vertex(v)
        return v in self.infinite_families

    def out_degree(self, v: str) -> float:
        """``#s^{-1}(v)``, ``math.inf`` for infinite emitters."""
        return math.inf if self.is_infinite_emitter(v) else len(self.out_edges(v))

    def is_finite_emitter(self, v: str) -> bool:
        """``0 < #s^{-1}(v) < inf`` -- the vertices (CK3) and condition 4 constrain."""
        return 0 < self.out_degree(v) < math.inf

    def is_sink(self, v: str) -> bool:
        return self.out_degree(v) == 0

    def receives_infinitely(self, v: str) -> bool:
        return any(f.dst == v for f in self.infinite_families.values())

    def adjacent_edges(self, v: str) -> tuple[Edge, ...]:
        """``s^{-1}(v) ∪ r^{-1}(v)`` (a loop counted once)."""
        seen = {}
        for e in self.out_edges(v) + self.in_edges(v):
            seen[e.id] = e
        return tuple(sorted(seen.values()))

    def touched_vertices(self) -> frozenset[str]:
        """``Z = r(E^1) ∪ s(E^1)``."""
        return frozenset(v for e in self.edges for v in (e.src, e.dst))

    # ---- derived graphs ---------------------------------------------------

    def restrict(self, vertices: Iterable[str], edge_ids: Iterable[str] | None = None) -> "Graph":
        """Subgraph on ``vertices``; edges default to those with both ends kept.

        Infinite families and open ends survive on kept vertices.
        """
        vs = frozenset(vertices)
        keep = None if edge_ids is None else frozenset(edge_ids)
        declared = [
            e
            for e in self.declared_edges
            if e.src in vs and e.dst in vs and (keep is None or e.id in keep)
        ]
        fams = [f for f in self.infinite_families.values() if f.vertex in vs and f.dst in vs]
        return Graph(sorted(vs), declared, fams, self.open_ends & vs)

    def with_truncation(self, n: int) -> "Graph":
        fams = [InfiniteFamily(f.vertex, f.dst, n) for f in self.infinite_families.values()]
        return Graph(self.vertices, self.declared_edges, fams, self.open_ends)

    # ---- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict = {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in self.declared_edges],
        }
        if self.infinite_families:
            out["infinite_families"] = [
                {"vertex": f.vertex, "dst": f.dst, "truncate_at": f.truncate_at}
                for f in self.infinite_families.values()
            ]
        if self.open_ends:
            out["open_ends"] = sorted(self.open_ends)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        if not isinstance(doc, dict):
            raise GraphError("graph document must be a JSON object")
        try:
            vertices = [str(v) for v in doc.get("vertices", [])]
            edges = [Edge(str(e["id"]), str(e["src"]), str(e["dst"])) for e in doc.get("edges", [])]
            fams = [
                InfiniteFamily(str(f["vertex"]), str(f["dst"]), f["truncate_at"])
                for f in doc.get("infinite_families", [])
            ]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from None
        return cls(vertices, edges, fams, [str(v) for v in doc.get("open_ends", [])])


def load_graph(document: str) -> Graph:
    """Parse graph-JSON text into a validated :class:`Graph`."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph document is not valid JSON: {exc}") from None
    return Graph.from_dict(doc)


def dump_graph(g: Graph) -> str:
    return json.dumps(g.to_dict(), indent=2, sort_keys=True)


# ---- paths and cycles -------------------------------------------------------


@dataclass(frozen=True)
class UPath:
    """An undirected path ``(u_0 ... u_n, e_1 ... e_n)``.

    ``orientation[i]`` is ``"forward"`` when ``r(e_i) = u_{i-1}`` and
    ``s(e_i) = u_i``, and ``"backward"`` when the edge runs the other way.
    """

    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    orientation: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.edges) + 1 or len(self.orientation) != len(self.edges):
            raise ValueError("UPath needs n+1 vertices, n edges and n orientation flags")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("UPath edges must be pairwise distinct")

    @property
    def is_cycle(self) -> bool:
        return bool(self.edges) and self.vertices[0] == self.vertices[-1]

    def validate(self, g: Graph) -> bool:
        for i, (eid, o) in enumerate(zip(self.edges, self.orientation)):
            e = g.edge(eid)
            a, b = self.vertices[i], self.vertices[i + 1]
            if o == "forward" and not (e.dst == a and e.src == b):
                return False
            if o == "backward" and not (e.src == a and e.dst == b):
                return False
        return True

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": list(self.edges), "orientation": list(self.orientation)}


def _step(g: Graph, eid: str, at: str) -> tuple[str, str]:
    """Traverse edge ``eid`` from vertex ``at``; return (next vertex, flag)."""
    e = g.edge(eid)
    if e.dst == at:
        return e.src, "forward"
    return e.dst, "backward"


def upath_from_edges(g: Graph, start: str, edges: Sequence[str]) -> UPath:
    verts, flags = [start], []
    for eid in edges:
        nxt, flag = _step(g, eid, verts[-1])
        verts.append(nxt)
        flags.append(flag)
    return UPath(tuple(verts), tuple(edges), tuple(flags))


@dataclass(frozen=True)
class DirectedCycle:
    """A closed directed path ``e_1 ... e_n`` based at ``s(e_1)``."""

    edges: tuple[str, ...]
    base: str

    @classmethod
    def canonical(cls, g: Graph, edges: Sequence[str]) -> "DirectedCycle":
        """Rotate so the lexicographically least edge id comes first."""
        edges = tuple(edges)
        k = edges.index(min(edges))
        rot = edges[k:] + edges[:k]
        return cls(rot, g.source(rot[0]))

    def __len__(self) -> int:
        return len(self.edges)

    def is_cycle_of(self, g: Graph) -> bool:
        if not self.edges or any(not g.has_edge(e) for e in self.edges):
            return False
        n = len(self.edges)
        return g.source(self.edges[0]) == self.base and all(
            g.range(self.edges[i]) == g.source(self.edges[(i + 1) % n]) for i in range(n)
        )

    def exits(self, g: Graph) -> list[str]:
        """Edges leaving a cycle vertex that are not cycle edges."""
        on_cycle = set(self.edges)
        verts = {g.source(e) for e in self.edges}
        return [e.id for v in sorted(verts) for e in g.out_edges(v) if e.id not in on_cycle]

    def has_exit(self, g: Graph) -> bool:
        verts = {g.source(e) for e in self.edges}
        return any(g.is_infinite_emitter(v) for v in verts) or bool(self.exits(g))

    def to_json(self) -> dict:
        return {"edges": list(self.edges), "base": self.base}


def sinks(g: Graph) -> frozenset[str]:
    """Vertices emitting no edges (vertices with an infinite family never count)."""
    return frozenset(v for v in g.vertices if g.is_sink(v))


def directed_cycles(g: Graph) -> list[DirectedCycle]:
    """All elementary directed cycles, each once, in canonical rotation.

    Each cycle is found from its least vertex by a backtracking search that
    only visits larger vertices.  Exponential in the worst case; intended for
    desk-scale graphs.
    """
    order = {v: i for i, v in enumerate(g.vertices)}
    found: list[DirectedCycle] = []

    for s in g.vertices:
        lo = order[s]
        on_path = {s}
        path: list[str] = []

        def walk(v: str) -> None:
            for e in g.out_edges(v):
                w = e.dst
                if w == s:
                    found.append(DirectedCycle.canonical(g, path + [e.id]))
                elif order[w] > lo and w not in on_path:
                    on_path.add(w)
                    path.append(e.id)
                    walk(w)
                    path.pop()
                    on_path.discard(w)

        walk(s)
    return sorted(found, key=lambda c: c.edges)


class Verdict(NamedTuple):
    holds: bool
    witness: object = None
    reason: str = ""


def exitless_cycles(g: Graph) -> list[DirectedCycle]:
    """Every directed cycle without an exit.

    On such a cycle each vertex emits exactly one (finite) edge, so these
    are exactly the cycles of the partial function ``v -> r(unique out-edge)``.
    """
    nxt: dict[str, tuple[str, str]] = {}
    for v in g.vertices:
        if not g.is_infinite_emitter(v) and len(g.out_edges(v)) == 1:
            e = g.out_edges(v)[0]
            nxt[v] = (e.id, e.dst)
    state: dict[str, int] = {}
    cycles = []
    for v0 in sorted(nxt):
        trail: list[str] = []
        v = v0
        while v in nxt and v not in state:
            state[v] = 1
            trail.append(v)
            v = nxt[v][1]
        if v in nxt and state.get(v) == 1:
            k = trail.index(v)
            cycles.append(DirectedCycle.canonical(g, [nxt[u][0] for u in trail[k:]]))
        for u in trail:
            state[u] = 2
    return sorted(cycles, key=lambda c: c.edges)


def has_condition_L(g: Graph) -> Verdict:
    """Condition (L): every directed cycle has an exit.

    Returns ``Verdict(False, cycle)`` with the canonically least exitless
    cycle when the condition fails.
    """
    bad = exitless_cycles(g)
    if bad:
        return Verdict(False, bad[0], "exitless cycle")
    return Verdict(True)


def _nx_multigraph(g: Graph) -> nx.MultiDiGraph:
    G = nx.MultiDiGraph()
    G.add_nodes_from(g.vertices)
    for e in g.edges:
        G.add_edge(e.src, e.dst, key=e.id)
    return G


def find_undirected_cycle(g: Graph) -> UPath | None:
    """Some undirected cycle (loops and parallel edges included), or None."""
    for e in g.edges:
        if e.src == e.dst:
            return UPath((e.src, e.src), (e.id,), ("forward",))
    G = _nx_multigraph(g)
    try:
        found = nx.find_cycle(G, orientation="ignore")
    except nx.NetworkXNoCycle:
        return None
    a, b, key, direction = found[0]
    start = a if direction == "forward" else b
    return upath_from_edges(g, start, [t[2] for t in found])


def is_P_simple(g: Graph) -> Verdict:
    """P-simple: no loops and at most one undirected path between vertices.

    Equivalently the underlying undirected multigraph is a forest.  An
    infinite out-family is a bundle of parallel edges, so it always breaks
    P-simplicity.
    """
    for v, f in g.infinite_families.items():
        if f.truncate_at >= 2:
            cyc = upath_from_edges(g, v, [f.edge_id(1), f.edge_id(2)])
            return Verdict(False, cyc, f"infinite family at {v}")
        return Verdict(False, None, f"infinite family at {v}")
    cyc = find_undirected_cycle(g)
    if cyc is not None:
        reason = "loop" if len(cyc.edges) == 1 else "undirected cycle"
        return Verdict(False, cyc, reason)
    return Verdict(True)


@dataclass(frozen=True)
class Components:
    """``E^0 = ⋃ Z_{v_i} ∪ R`` with the induced subgraphs ``E^{v_i}``."""

    components: tuple[frozenset[str], ...]
    isolated: frozenset[str]
    subgraphs: tuple[Graph, ...]

    def to_json(self) -> dict:
        return {
            "components": [sorted(c) for c in self.components],
            "isolated": sorted(self.isolated),
        }


def connected_components(g: Graph) -> Components:
    z = g.touched_vertices()
    G = nx.Graph()
    G.add_nodes_from(sorted(z))
    G.add_edges_from((e.src, e.dst) for e in g.edges)
    comps = sorted((frozenset(c) for c in nx.connected_components(G)), key=min)
    isolated = frozenset(g.vertices) - z
    return Components(tuple(comps), isolated, tuple(g.restrict(c) for c in comps))


def is_connected(g: Graph, vertices: Iterable[str] | None = None) -> bool:
    """Whether ``vertices`` (default ``Z``) is connected by undirected paths in ``g``."""
    vs = g.touched_vertices() if vertices is None else frozenset(vertices)
    if len(vs) <= 1:
        return True
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    G.add_edges_from((e.src, e.dst) for e in g.edges)
    start = next(iter(vs))
    reach = nx.node_connected_component(G, start)
    return vs <= reach
