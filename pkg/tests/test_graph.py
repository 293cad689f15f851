import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchsys.corpus import example_kk, final_example, rose, single_edge, single_loop
from branchsys.graph import (
    Edge,
    Graph,
    GraphError,
    InfiniteFamily,
    connected_components,
    directed_cycles,
    dump_graph,
    exitless_cycles,
    has_condition_L,
    is_P_simple,
    load_graph,
    sinks,
)


def test_load_single_loop():
    g = load_graph('{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v"}]}')
    assert g == single_loop()
    assert g.source("e") == g.range("e") == "v"


def test_load_empty():
    g = load_graph('{"vertices":[],"edges":[]}')
    assert g.vertices == () and g.edge_ids == ()


def test_dangling_endpoint():
    with pytest.raises(GraphError) as err:
        load_graph('{"vertices":["v"],"edges":[{"id":"e","src":"x","dst":"v"}]}')
    assert err.value.ident in ("x", "e")


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        "[1, 2]",
        '{"vertices":["v","v"],"edges":[]}',
        '{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v"},{"id":"e","src":"v","dst":"v"}]}',
        '{"vertices":["v"],"edges":[{"src":"v","dst":"v"}]}',
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(GraphError):
        load_graph(doc)


def test_json_round_trip_keeps_families_and_open_ends():
    g = Graph(["a", "b"], [Edge("e", "a", "b")], [InfiniteFamily("b", "a", 3)], ["a"])
    h = load_graph(dump_graph(g))
    assert h == g and h.open_ends == frozenset({"a"})
    assert len(h.edge_ids) == 4


def test_out_edges_rose():
    assert [e.id for e in rose(3).out_edges("v")] == ["e1", "e2", "e3"]


def test_out_edges_sink():
    assert single_edge().out_edges("v") == ()


def test_truncated_family():
    g = Graph(["v", "w"], [], [InfiniteFamily("v", "w", 4)])
    assert len(g.out_edges("v")) == 4
    assert g.is_infinite_emitter("v") and not g.is_finite_emitter("v")
    assert g.with_truncation(6).out_degree("v") == float("inf")
    assert len(g.with_truncation(6).out_edges("v")) == 6


def test_sinks():
    assert sinks(single_edge()) == {"v"}
    assert sinks(single_loop()) == frozenset()
    assert sinks(final_example()) == {"v2", "v3", "v8", "v9"}


def test_directed_cycles():
    assert [c.edges for c in directed_cycles(single_loop())] == [("e",)]
    path = Graph(["a", "b", "c"], [Edge("x", "a", "b"), Edge("y", "b", "c")])
    assert directed_cycles(path) == []
    assert [c.edges for c in directed_cycles(rose(2))] == [("e1",), ("e2",)]


def test_condition_L():
    v = has_condition_L(single_loop())
    assert not v.holds and v.witness.edges == ("e",)
    assert has_condition_L(rose(2)).holds
    assert has_condition_L(final_example()).holds


def test_p_simple():
    assert not is_P_simple(example_kk()).holds
    assert is_P_simple(single_edge()).holds
    par = Graph(["u", "v"], [Edge("a", "u", "v"), Edge("b", "u", "v")])
    v = is_P_simple(par)
    assert not v.holds and sorted(v.witness.edges) == ["a", "b"]
    assert v.witness.validate(par)


def test_components():
    c = connected_components(final_example())
    assert [sorted(x) for x in c.components] == [["v1", "v2", "v3", "v4"], ["v5", "v6", "v8"], ["v7", "v9"]]
    assert c.isolated == frozenset()
    e = connected_components(Graph([]))
    assert e.components == () and e.isolated == frozenset()
    w = connected_components(Graph(["u", "v", "w"], [Edge("e", "u", "v")]))
    assert len(w.components) == 1 and w.isolated == {"w"}


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 6))
    vs = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, 8))
    es = [Edge(f"e{j}", draw(st.sampled_from(vs)), draw(st.sampled_from(vs))) for j in range(m)]
    return Graph(vs, es)


def _brute_cycles(g):
    # elementary cycles, each listed from its least edge: walk simple paths on
    # larger edges only and close up at the start vertex
    out = set()

    def walk(start, path, seen):
        last = g.range(path[-1])
        if last == start:
            out.add(tuple(path))
            return
        for e in g.out_edges(last):
            if e.id > path[0] and e.dst not in seen:
                walk(start, path + [e.id], seen | {e.dst})
            elif e.id > path[0] and e.dst == start:
                out.add(tuple(path + [e.id]))

    for e in g.edge_ids:
        walk(g.source(e), [e], {g.source(e), g.range(e)})
    return out


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_cycles_match_brute_force(g):
    found = {c.edges for c in directed_cycles(g)}
    assert found == _brute_cycles(g)
    ex = {c.edges for c in exitless_cycles(g)}
    assert ex == {c for c in found if all(len(g.out_edges(g.source(e))) == 1 for e in c)}
    assert has_condition_L(g).holds == (not ex)


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_p_simple_is_forest(g):
    # forest iff #edges == #vertices - #components on touched vertices, with no loops
    comps = connected_components(g)
    touched = len(g.touched_vertices())
    forest = len(g.edge_ids) == touched - len(comps.components)
    assert is_P_simple(g).holds == forest


def test_graph_json_is_stable():
    doc = json.loads(dump_graph(final_example()))
    assert doc["vertices"][0] == "v1" and len(doc["edges"]) == 6
