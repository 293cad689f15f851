"""Named graphs, seeded random graphs and seeded basis-map representations."""

from __future__ import annotations

import itertools
import random

from .graph import Edge, Graph, InfiniteFamily, exitless_cycles
from .permutative import BasisMapRep
from .scalars import Scalar


# ---- named graphs -----------------------------------------------------------


def rose(k: int) -> Graph:
    return Graph(["v"], [Edge(f"e{i}", "v", "v") for i in range(1, k + 1)])


def single_loop() -> Graph:
    return Graph(["v"], [Edge("e", "v", "v")])


def single_edge() -> Graph:
    return Graph(["u", "v"], [Edge("e", "u", "v")])


def path3() -> Graph:
    """``u -> v -> w``."""
    return Graph(["u", "v", "w"], [Edge("a", "u", "v"), Edge("b", "v", "w")])


def cycle(n: int) -> Graph:
    """``C_n``: ``e_i : v_i -> v_{i+1}`` (indices mod n)."""
    vs = [f"v{i}" for i in range(1, n + 1)]
    return Graph(vs, [Edge(f"e{i}", vs[i - 1], vs[i % n]) for i in range(1, n + 1)])


def example_kk() -> Graph:
    """One undirected 8-cycle; ``v1``, ``v3``, ``v5`` receive two edges each."""
    return Graph(
        [f"v{i}" for i in range(1, 9)],
        [
            Edge("e1", "v2", "v1"),
            Edge("e2", "v2", "v3"),
            Edge("e3", "v4", "v3"),
            Edge("e4", "v4", "v5"),
            Edge("e5", "v6", "v5"),
            Edge("e6", "v7", "v6"),
            Edge("e7", "v7", "v8"),
            Edge("e8", "v8", "v1"),
        ],
    )


def final_example() -> Graph:
    """Three tree components on ``v1 .. v9``."""
    return Graph(
        [f"v{i}" for i in range(1, 10)],
        [
            Edge("e1", "v1", "v2"),
            Edge("e2", "v1", "v3"),
            Edge("e3", "v4", "v1"),
            Edge("e4", "v5", "v6"),
            Edge("e5", "v6", "v8"),
            Edge("e6", "v7", "v9"),
        ],
    )


def final_tree() -> Graph:
    return Graph(
        [f"v{i}" for i in range(1, 6)],
        [
            Edge("e0", "v2", "v3"),
            Edge("e1", "v4", "v3"),
            Edge("e2", "v3", "v5"),
            Edge("e-1", "v2", "v1"),
        ],
    )


def star(n: int) -> Graph:
    """``v_j -> v_1`` for ``j = 2..n``."""
    return Graph([f"v{j}" for j in range(1, n + 1)], [Edge(f"e{j}", f"v{j}", "v1") for j in range(2, n + 1)])


def bi_infinite_line(k: int = 3) -> Graph:
    """The window ``v_{-k} .. v_k`` of the line ``e_i : v_{i-1} -> v_i``; both
    boundary vertices are open ends."""
    vs = [f"v{i}" for i in range(-k, k + 1)]
    es = [Edge(f"e{i}", f"v{i - 1}", f"v{i}") for i in range(-k + 1, k + 1)]
    return Graph(vs, es, open_ends=[f"v{-k}", f"v{k}"])


def named_corpus() -> dict[str, Graph]:
    """The twelve named graphs used by the acceptance suite."""
    return {
        "final-example": final_example(),
        "final-tree": final_tree(),
        "rose-1": rose(1),
        "rose-2": rose(2),
        "rose-3": rose(3),
        "single-loop": single_loop(),
        "single-edge": single_edge(),
        "path-3": path3(),
        "example-kk": example_kk(),
        "bi-infinite-line": bi_infinite_line(),
        "cycle-2": cycle(2),
        "cycle-3": cycle(3),
    }


# ---- random graphs ----------------------------------------------------------


def random_graph(rng: random.Random, max_vertices: int = 40, max_edges: int = 80, max_truncation: int = 8,
                 family_rate: float = 0.1) -> Graph:
    n = rng.randint(1, max_vertices)
    vs = [f"x{i}" for i in range(n)]
    m = rng.randint(0, max_edges)
    edges = [Edge(f"a{j}", rng.choice(vs), rng.choice(vs)) for j in range(m)]
    fams = []
    budget = max_edges - m
    for v in vs:
        if budget > 0 and rng.random() < family_rate:
            t = rng.randint(1, min(max_truncation, budget))
            budget -= t
            fams.append(InfiniteFamily(v, rng.choice(vs), t))
    return Graph(vs, edges, fams)


def random_tree(rng: random.Random, n: int | None = None, max_vertices: int = 40, prefix: str = "t") -> Graph:
    """Random labelled tree with random edge orientations (``n >= 2``)."""
    n = n if n is not None else rng.randint(2, max_vertices)
    vs = [f"{prefix}{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        j = rng.randrange(i)
        a, b = (vs[i], vs[j]) if rng.random() < 0.5 else (vs[j], vs[i])
        edges.append(Edge(f"{prefix}e{i}", a, b))
    return Graph(vs, edges)


def random_forest(rng: random.Random, trees: int = 3, max_vertices: int = 12, isolated: int = 1) -> Graph:
    vs, es = [], []
    for k in range(trees):
        t = random_tree(rng, max_vertices=max_vertices, prefix=f"f{k}_")
        vs += t.vertices
        es += t.edges
    vs += [f"iso{i}" for i in range(isolated)]
    return Graph(vs, es)


def small_graphs(max_vertices: int = 3, max_edges: int = 4) -> list[Graph]:
    """Every directed multigraph on at most ``max_vertices`` vertices with at
    most ``max_edges`` edges, up to relabelling of vertices."""
    out = []
    for n in range(1, max_vertices + 1):
        vs = list(range(n))
        pairs = [(a, b) for a in vs for b in vs]
        perms = list(itertools.permutations(vs))
        seen = set()
        for m in range(0, max_edges + 1):
            for combo in itertools.combinations_with_replacement(pairs, m):
                key = min(tuple(sorted((p[a], p[b]) for a, b in combo)) for p in perms)
                if key in seen:
                    continue
                seen.add(key)
                out.append(
                    Graph([f"n{i}" for i in vs], [Edge(f"k{j}", f"n{a}", f"n{b}") for j, (a, b) in enumerate(key)])
                )
    return out


# ---- basis-map representations ----------------------------------------------


def _weights(rng: random.Random, mode: str, order: int):
    """Return (gauge, weight) factories for the requested weight mode."""
    if mode == "one":
        return None
    if mode == "random":
        return lambda lam, mu: Scalar.root_of_unity(rng.randrange(order), order)
    if mode == "coboundary":
        gauge: dict[int, int] = {}

        def w(lam, mu):
            for i in (lam, mu):
                if i not in gauge:
                    gauge[i] = rng.randrange(order)
            # c = g(μ)/g(λ) makes δ'_λ = g(λ)δ_λ exactly permuted
            return Scalar.root_of_unity(gauge[mu] - gauge[lam], order)
        return w
    raise ValueError(f"unknown weight mode {mode!r}")


def path_rep(
    g: Graph,
    rng: random.Random,
    sink_dim: int = 2,
    cycle_dim: int = 2,
    max_len: int = 6,
    max_size: int = 256,
    weights: str = "random",
    order: int = 4,
) -> BasisMapRep:
    """A basis-map rep built from paths into anchors.

    Anchors are ``d`` basis vectors at each sink and a ``d``-dimensional
    block rotated by each exitless cycle.  ``H_v`` is spanned by pairs
    (path from ``v`` to an anchor vertex, anchor), and ``S_e`` prepends ``e``.
    Paths longer than ``max_len``, or beyond ``max_size`` indices, are cut off
    and recorded as escapes.
    """
    cyc_edges = set()
    elems: list[tuple[str, tuple[str, ...], object]] = []  # (start vertex, path, anchor)
    lookup: dict[tuple[tuple[str, ...], object], int] = {}

    def add(v, path, anchor) -> int | None:
        if len(elems) >= max_size:
            return None
        lookup[(path, anchor)] = len(elems)
        elems.append((v, path, anchor))
        return lookup[(path, anchor)]

    tau: dict[str, dict[int, tuple[int, Scalar]]] = {e: {} for e in g.edge_ids}
    wf = _weights(rng, weights, order)
    pending_cycle = []
    for v in g.vertices:
        if g.is_sink(v):
            for j in range(rng.randint(1, sink_dim)):
                add(v, (), (v, j))
    for c in exitless_cycles(g):
        cyc_edges |= set(c.edges)
        d = min(rng.randint(1, cycle_dim), (max_size - len(elems)) // len(c.edges))
        for e in c.edges:
            for j in range(d):
                add(g.source(e), (), (c.edges[0], g.source(e), j))
        pending_cycle.append((c, d))
    frontier = list(range(len(elems)))
    escapes: dict[str, set[int]] = {e: set() for e in g.edge_ids}
    arcs = []
    for c, d in pending_cycle:
        for e in c.edges:
            for j in range(d):
                lam = lookup[((), (c.edges[0], g.range(e), j))]
                mu = lookup[((), (c.edges[0], g.source(e), j))]
                arcs.append((e, lam, mu))
    depth = 0
    while frontier:
        nxt = []
        for lam in frontier:
            u, path, anchor = elems[lam]
            for e in g.in_edges(u):
                if e.id in cyc_edges:
                    continue
                mu = None
                if depth < max_len:
                    mu = add(e.src, (e.id,) + path, anchor)
                if mu is None:
                    escapes[e.id].add(lam)
                else:
                    arcs.append((e.id, lam, mu))
                    nxt.append(mu)
        frontier = nxt
        depth += 1
    for e, lam, mu in arcs:
        tau[e][lam] = (mu, wf(lam, mu) if wf else Scalar())
    H: dict[str, set[int]] = {v: set() for v in g.vertices}
    for i, (v, _, _) in enumerate(elems):
        H[v].add(i)
    return BasisMapRep(g, tuple(range(len(elems))), H, tau, escapes)


def rose_rep(k: int, n: int, rng: random.Random | None = None, weights: str = "one", order: int = 4) -> BasisMapRep:
    """Truncated rose rep on ``{1..n}``: ``τ_{e_i}(m) = i + (m-1)k``."""
    g = rose(k)
    wf = _weights(rng or random.Random(0), weights, order)
    tau, esc = {}, {}
    for i in range(1, k + 1):
        t, x = {}, set()
        for m in range(1, n + 1):
            mu = i + (m - 1) * k
            if mu <= n:
                t[m] = (mu, wf(m, mu) if wf else Scalar())
            else:
                x.add(m)
        tau[f"e{i}"], esc[f"e{i}"] = t, x
    return BasisMapRep(g, tuple(range(1, n + 1)), {"v": set(range(1, n + 1))}, tau, esc)


def loop_rep(weight: Scalar, dim: int = 2) -> BasisMapRep:
    """Single loop acting diagonally on ``{1..dim}`` with a constant weight."""
    g = single_loop()
    return BasisMapRep(g, tuple(range(1, dim + 1)), {"v": set(range(1, dim + 1))},
                       {"e": {m: (m, weight) for m in range(1, dim + 1)}})


def random_permutative_rep(rng: random.Random, max_size: int = 256) -> BasisMapRep:
    """Permutative by construction: coboundary weights on varied graph shapes.
    Shapes that leave the index set empty are redrawn."""
    while True:
        r = _random_permutative_rep(rng, max_size)
        if r.index:
            return r


def _random_permutative_rep(rng: random.Random, max_size: int) -> BasisMapRep:
    kind = rng.choice(["graph", "graph", "tree", "rose", "cycle"])
    order = rng.choice([2, 4, 8])
    if kind == "rose":
        return rose_rep(rng.randint(1, 4), rng.randint(1, max_size), rng, "coboundary", order)
    if kind == "cycle":
        g = cycle(rng.randint(1, 5))
    elif kind == "tree":
        g = random_tree(rng, max_vertices=15)
    else:
        g = random_graph(rng, max_vertices=10, max_edges=16, max_truncation=3)
    return path_rep(g, rng, sink_dim=3, cycle_dim=3, max_len=rng.randint(2, 8), max_size=max_size,
                    weights="coboundary", order=order)
