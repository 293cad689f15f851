import json
import random
from dataclasses import replace

import pytest

from branchsys.branching import verify_axioms
from branchsys.corpus import (
    bi_infinite_line,
    example_kk,
    final_example,
    loop_rep,
    path3,
    path_rep,
    random_permutative_rep,
    rose_rep,
    single_edge,
    single_loop,
)
from branchsys.graph import Edge, Graph
from branchsys.permutative import (
    BasisMapRep,
    CertificateError,
    NotPermutative,
    Permutative,
    PlanError,
    RepError,
    check_permutative,
    cycle_product,
    execute_plan,
    extract_branching_system,
    gbpb_hypotheses,
    gbpb_plan,
    rep_from_json,
    rep_to_json,
    verify_intertwine,
)
from branchsys.scalars import ONE, Scalar

I = Scalar.root_of_unity(1, 4)
MINUS = Scalar.root_of_unity(1, 2)


def edge_rep(weight):
    return BasisMapRep(single_edge(), (1, 2), {"u": {1}, "v": {2}}, {"e": {2: (1, weight)}})


def test_rose_is_permutative():
    cert = check_permutative(rose_rep(3, 30))
    assert isinstance(cert, Permutative)
    assert cert.B_e["e2"] == frozenset(range(2, 31, 3))


def test_loop_with_weight_i_is_not():
    cert = check_permutative(loop_rep(I))
    assert isinstance(cert, NotPermutative)
    assert cert.product == I
    assert cert.cycle == (("e", 1, 1, "forward"),)


def test_tree_arc_is_gauged_away():
    cert = check_permutative(edge_rep(MINUS))
    assert isinstance(cert, Permutative)
    assert cert.gauge[1] * MINUS * cert.gauge[2].inverse() == ONE


def test_witness_is_a_closed_walk():
    # a directed 2-cycle carrying total weight -1
    g = Graph(["a", "b"], [Edge("x", "a", "b"), Edge("y", "b", "a")])
    r = BasisMapRep(g, (1, 2), {"a": {1}, "b": {2}}, {"x": {2: (1, ONE)}, "y": {1: (2, MINUS)}})
    cert = check_permutative(r)
    assert isinstance(cert, NotPermutative)
    assert cycle_product(r, cert.cycle) == MINUS == cert.product
    _assert_closed(r, cert)


def _assert_closed(r, cert):
    # steps list (edge, from, to, orientation) in walking order
    walk = cert.cycle
    assert all(walk[k][2] == walk[(k + 1) % len(walk)][1] for k in range(len(walk)))
    for e, a, b, o in walk:
        lam, mu = (a, b) if o == "forward" else (b, a)
        assert r.tau[e][lam][0] == mu


@pytest.mark.parametrize("seed", range(30))
def test_random_witnesses_are_closed_walks(seed):
    from branchsys.corpus import random_graph

    rng = random.Random(seed)
    g = random_graph(rng, max_vertices=5, max_edges=8, max_truncation=2)
    r = path_rep(g, rng, max_len=3, max_size=40, weights="random", order=4)
    cert = check_permutative(r)
    if isinstance(cert, NotPermutative):
        _assert_closed(r, cert)
        assert cycle_product(r, cert.cycle) == cert.product != ONE


def test_diagonal_sign_loop_is_outside_the_basis_map_class():
    # diag(1, -1) on a loop is permutative through a rotated basis, but no
    # rescaling of the given basis works; the decision is for rescalings only
    r = BasisMapRep(single_loop(), (1, 2), {"v": {1, 2}}, {"e": {1: (1, ONE), 2: (2, MINUS)}})
    assert isinstance(check_permutative(r), NotPermutative)


def test_extract_rose_two():
    r = rose_rep(2, 20)
    b, U = extract_branching_system(r, check_permutative(r))
    assert b.R["e1"] == frozenset(range(1, 21, 2)) and b.R["e2"] == frozenset(range(2, 21, 2))
    assert b.f["e2"][4] == 8
    assert verify_axioms(b).ok
    assert verify_intertwine(r, b, U).ok


def test_extract_isolated_vertex():
    r = BasisMapRep(Graph(["v"]), (1,), {"v": {1}}, {})
    b, _ = extract_branching_system(r, check_permutative(r))
    assert b.D["v"] == {1} and b.graph.edge_ids == ()


def test_extract_single_edge():
    r = edge_rep(ONE)
    b, U = extract_branching_system(r, check_permutative(r))
    assert b.R["e"] == {1} and b.D["u"] == {1} and b.D["v"] == {2} and b.f["e"] == {2: 1}
    assert verify_intertwine(r, b, U).ok


def test_residual_index_vanishes():
    r = BasisMapRep(single_edge(), (1, 2, 3), {"u": {1}, "v": {2}}, {"e": {2: (1, ONE)}})
    assert r.residual == {3}
    b, U = extract_branching_system(r, check_permutative(r))
    rep = verify_intertwine(r, b, U)
    assert rep.ok and any("residual" in n for n in rep.notes)


def test_wrong_map_fails_intertwine():
    r = rose_rep(2, 10)
    b, U = extract_branching_system(r, check_permutative(r))
    swapped = dict(b.f)
    swapped["e1"], swapped["e2"] = b.f["e2"], b.f["e1"]
    rep = verify_intertwine(r, replace(b, f=swapped), U)
    assert not rep.ok and rep.first_failure.witness["generator"].startswith("S_")


def test_certificate_bound_to_rep():
    r = rose_rep(2, 10)
    cert = check_permutative(r)
    with pytest.raises(CertificateError):
        extract_branching_system(rose_rep(2, 12), cert)


@pytest.mark.parametrize("seed", range(20))
def test_random_round_trip(seed):
    r = random_permutative_rep(random.Random(seed), max_size=64)
    cert = check_permutative(r)
    assert isinstance(cert, Permutative)
    b, U = extract_branching_system(r, cert)
    assert verify_axioms(b).ok and verify_intertwine(r, b, U).ok


def test_rep_json_round_trip():
    r = rose_rep(3, 9, random.Random(1), "random", 8)
    again = rep_from_json(json.dumps(rep_to_json(r)))
    assert again == r and again.digest() == r.digest()


@pytest.mark.parametrize(
    "tau, why",
    [
        ({"e": {2: (2, ONE)}}, "not in H_u"),
        ({"e": {}}, "defined on all"),
        ({"e": {2: (1, Scalar.rational(2))}}, "unimodular"),
    ],
)
def test_invalid_reps(tau, why):
    with pytest.raises(RepError, match=why):
        BasisMapRep(single_edge(), (1, 2), {"u": {1}, "v": {2}}, tau)


def test_hypotheses():
    assert gbpb_hypotheses(final_example()).ok
    assert not gbpb_hypotheses(example_kk()).ok
    rep = gbpb_hypotheses(bi_infinite_line())
    assert not rep.ok and "open ends" in json.dumps(rep.to_json())


def test_single_edge_plan():
    p = gbpb_plan(single_edge())
    assert p.ops() == [("ChooseFree", "v"), ("PullbackEdge", "e", "v"), ("UnionVertex", "u")]


def test_path_plan_has_extra_step():
    p = gbpb_plan(path3())
    assert p.ops() == [
        ("ChooseFree", "w"),
        ("PullbackEdge", "b", "w"),
        ("UnionVertex", "v"),
        ("PullbackEdge", "a", "v"),
        ("UnionVertex", "u"),
    ]
    assert any(i.step == "extra" for i in p.instructions)


def test_plan_rejects_bad_graph():
    with pytest.raises(PlanError):
        gbpb_plan(example_kk(), strategy="levels")


def test_run_single_edge_with_sign():
    cert = execute_plan(gbpb_plan(single_edge()), edge_rep(MINUS))
    assert isinstance(cert, Permutative) and cert.method == "plan"
    assert cert.transcript[0].endswith("ChooseFree(v)")


@pytest.mark.parametrize("seed", range(5))
def test_run_final_example(seed):
    rng = random.Random(seed)
    r = path_rep(final_example(), rng, max_len=3, weights="random", order=8)
    cert = execute_plan(gbpb_plan(final_example()), r, seed=seed)
    b, U = extract_branching_system(r, cert)
    assert verify_intertwine(r, b, U).ok


@pytest.mark.parametrize("seed", range(5))
def test_cycle_ordering_on_example_kk(seed):
    r = path_rep(example_kk(), random.Random(seed), max_len=4, weights="random", order=4)
    p = gbpb_plan(example_kk(), strategy="cycle")
    assert p.strategies == ("cycle",)
    assert isinstance(execute_plan(p, r), Permutative)


def test_plan_graph_mismatch():
    with pytest.raises(PlanError):
        execute_plan(gbpb_plan(single_edge()), rose_rep(1, 3))
