import random
from fractions import Fraction as F

import pytest

from branchsys.branching import (
    BundleSystem,
    cycle_collapse_system,
    cycle_separating_system,
    discrete_system,
    discretize,
    standard_construction,
)
from branchsys.corpus import cycle, named_corpus, random_graph, rose
from branchsys.graph import DirectedCycle, Edge, Graph
from branchsys.intervals import Affine, Bundle, LInterval, full
from branchsys.operators import (
    BackendMismatch,
    BundleOperator,
    IndexOperator,
    bundle_projection,
    index_projection,
    op_adjoint,
    op_compose,
    op_equal,
    op_is_zero,
    op_sum,
)
from branchsys.representation import (
    InducedRepresentation,
    WordError,
    check_nonzero,
    induced_generator,
    path_operator,
    verify_ck,
)
from branchsys.scalars import Monomial, Scalar


def rose_discrete(k, n):
    g = rose(k)
    R = {f"e{i}": {m for m in range(1, n + 1) if (m - i) % k == 0} for i in range(1, k + 1)}
    f = {f"e{i}": {m: i + (m - 1) * k for m in range(1, n + 1) if i + (m - 1) * k <= n} for i in range(1, k + 1)}
    over = {e: {m for m in range(1, n + 1) if m not in f[e]} for e in f}
    return discrete_system(g, range(1, n + 1), R, {"v": set(range(1, n + 1))}, f, over)


def statuses(rep):
    return {c.name: c.status for c in rep.checks}


def test_rose_generator_is_shift():
    S = induced_generator(rose_discrete(2, 30), "S", "e1")
    assert all(S.apply(m)[0] == 2 * m - 1 for m in range(1, 16))
    assert S.apply(1) == (1, Scalar())


def test_projection_on_one_vertex():
    b = discrete_system(Graph(["v"]), [1, 2], {}, {"v": {1, 2}}, {})
    P = induced_generator(b, "P", "v")
    assert P.mapping == {1: (1, Scalar()), 2: (2, Scalar())}


def test_case_two_weight():
    g = Graph(["u", "v", "a", "b", "c"], [Edge("d", "u", "v")] + [Edge(f"e{j}", "v", x) for j, x in enumerate("abc")])
    S = induced_generator(standard_construction(g), "S", "d")
    assert {w for _, w in S.pieces} == {Monomial(Scalar.sqrt(3))}


def test_adjoint_times_generator_is_domain_projection():
    b = rose_discrete(2, 40)
    pi = InducedRepresentation(b)
    lhs = op_compose(pi.S_star("e1"), pi.S("e1"))
    assert op_equal(lhs, pi.P("v"))
    assert op_is_zero(op_compose(pi.S_star("e1"), pi.S("e2")))


def test_identity_is_neutral():
    b = standard_construction(rose(2))
    pi = InducedRepresentation(b)
    S = pi.S("e1")
    assert op_compose(S, pi.P("v")) == S and op_compose(pi.P("v"), S) == S


def test_backends_do_not_mix():
    with pytest.raises(BackendMismatch):
        op_compose(index_projection([1]), bundle_projection(Bundle([full("x")])))


def test_sum_requires_disjoint_support():
    p = index_projection([1, 2])
    with pytest.raises(ValueError):
        op_sum(p, p)
    q = bundle_projection(Bundle([LInterval("x", 0, F(1, 2))]))
    r = bundle_projection(Bundle([LInterval("x", F(1, 2), 1)]))
    assert op_sum(q, r) == bundle_projection(Bundle([full("x")]))


def test_non_injective_index_operator():
    with pytest.raises(ValueError):
        IndexOperator({1: (3, Scalar()), 2: (3, Scalar())})


def test_bundle_adjoint_uses_derivative():
    a = BundleOperator([(Affine(full("x"), LInterval("y", 0, F(1, 4))), Monomial(Scalar.rational(2)))])
    s = op_adjoint(a)
    (p, w), = s.pieces
    assert p.source == LInterval("y", 0, F(1, 4)) and w == Monomial(Scalar.rational(F(1, 2)))
    assert op_equal(op_compose(s, a), bundle_projection(Bundle([full("x")])))


@pytest.mark.parametrize("name", sorted(named_corpus()))
def test_ck_corpus(name):
    b = standard_construction(named_corpus()[name])
    assert verify_ck(b).ok
    assert verify_ck(discretize(b)).ok


def test_rose_discrete_ck():
    rep = verify_ck(rose_discrete(2, 64))
    assert rep.ok and statuses(rep)["CK3"] == "pass"


def test_ck3_failure_has_witness():
    b = rose_discrete(2, 10)
    from dataclasses import replace as dc_replace

    bad = dc_replace(b, D={"v": b.D["v"] | {11}}, index=b.index + (11,))
    rep = verify_ck(bad)
    fail = {c.name: c for c in rep.checks}["CK3"]
    assert fail.status == "fail" and fail.witness["vertex"] == "v"


def test_ck3_vacuous_without_finite_emitters():
    rep = verify_ck(standard_construction(Graph(["a", "b"])))
    assert statuses(rep)["CK3"] == "vacuous"


@pytest.mark.parametrize("seed", range(10))
def test_ck_random(seed):
    g = random_graph(random.Random(100 + seed), max_vertices=12, max_edges=24, max_truncation=4, family_rate=0.3)
    b = standard_construction(g)
    assert verify_ck(b).ok and verify_ck(discretize(b, max_points=128)).ok


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cycle_words(n):
    g = cycle(n)
    alpha = DirectedCycle.canonical(g, [f"e{i}" for i in range(1, n + 1)])
    v = g.source(alpha.edges[0])
    c = cycle_collapse_system(g, alpha)
    assert path_operator(c, alpha.edges) == induced_generator(c, "P", v)
    s = cycle_separating_system(g, alpha)
    op = path_operator(s, alpha.edges)
    assert op != induced_generator(s, "P", v)
    (p, _), = op.pieces
    assert p.exponent == F(1, 4)  # the cycle word substitutes t -> t^4, i.e. the map t -> t^(1/4)


def test_empty_word_is_vertex_projection():
    b = standard_construction(rose(2))
    assert path_operator(b, [], vertex="v") == induced_generator(b, "P", "v")
    with pytest.raises(WordError):
        path_operator(b, [])


def test_non_composable_word():
    g = Graph(["u", "v", "w"], [Edge("a", "u", "v"), Edge("b", "w", "u")])
    with pytest.raises(WordError):
        path_operator(standard_construction(g), ["a", "b"])


@pytest.mark.parametrize("name", sorted(named_corpus()))
def test_nonzero_corpus(name):
    b = standard_construction(named_corpus()[name])
    assert check_nonzero(b).ok
    assert check_nonzero(discretize(b)).ok


def test_isolated_vertex_projection_nonzero():
    b = standard_construction(Graph(["u", "v", "w"], [Edge("e", "u", "v")]))
    assert b.D["w"] == Bundle([full("w")]) and check_nonzero(b).ok


def test_zero_projection_reported():
    g = Graph(["v"])
    b = BundleSystem(g, {}, {"v": Bundle()}, {})
    assert statuses(check_nonzero(b))["P_v"] == "fail"
