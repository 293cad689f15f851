"""Operators in the two backends and their exact algebra.

``IndexOperator`` (discrete backend) is a weighted partial injection on a
finite window of an index set: ``δ_λ -> w(λ) δ_{σ(λ)}``.  When the window
cuts through an operator, ``und_fwd`` lists inputs whose image is unknown and
``und_bwd`` lists outputs whose preimage is unknown; equality is decided on
the determined part only, for the operator and for its adjoint.

``BundleOperator`` (interval backend) is a weighted substitution operator
``(Tφ)(y) = w(y) φ(σ^{-1}(y))`` given by pieces ``σ`` with monomial weights
``w`` in the target coordinate.  The normal form is the sorted, merged piece
list, so operator equality is structural equality.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .intervals import (
    Affine,
    Bundle,
    LInterval,
    Piece,
    compose_density,
    compose_pieces,
)
from .scalars import ONE, Monomial, Scalar


class BackendMismatch(TypeError):
    pass


class OperatorError(ValueError):
    pass


# ---- discrete backend -------------------------------------------------------


@dataclass(frozen=True)
class IndexOperator:
    mapping: dict[int, tuple[int, Scalar]]
    und_fwd: frozenset[int] = frozenset()
    und_bwd: frozenset[int] = frozenset()
    word: str = ""

    backend = "discrete"

    def __post_init__(self) -> None:
        seen = set()
        for lam, (mu, w) in self.mapping.items():
            if mu in seen:
                raise OperatorError(f"not injective: two inputs reach {mu}")
            if w.is_zero():
                raise OperatorError(f"zero weight at {lam}")
            seen.add(mu)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.mapping)

    @property
    def range(self) -> frozenset[int]:
        return frozenset(mu for mu, _ in self.mapping.values())

    def apply(self, lam: int) -> tuple[int, Scalar] | None:
        """Image of ``δ_λ`` as ``(μ, weight)``; ``None`` when it is 0."""
        return self.mapping.get(lam)

    def is_zero(self) -> bool:
        return not self.mapping

    def named(self, word: str) -> "IndexOperator":
        return IndexOperator(self.mapping, self.und_fwd, self.und_bwd, word)


def index_projection(indices, word: str = "", undetermined=()) -> IndexOperator:
    und = frozenset(undetermined)
    return IndexOperator({i: (i, ONE) for i in indices if i not in und}, und, und, word)


def index_map(sigma: dict[int, int], over=(), under=(), word: str = "") -> IndexOperator:
    return IndexOperator({a: (b, ONE) for a, b in sigma.items()}, frozenset(over), frozenset(under), word)


# ---- bundle backend ---------------------------------------------------------


def _b_sort_key(pw: tuple[Piece, Monomial]):
    return (pw[0].source.label, pw[0].source.lo)


def _b_mergeable(a: tuple[Piece, Monomial], b: tuple[Piece, Monomial]) -> bool:
    p, q = a[0], b[0]
    return (
        a[1] == b[1]
        and isinstance(p, Affine)
        and isinstance(q, Affine)
        and p.source.label == q.source.label
        and p.source.hi == q.source.lo
        and p.target.label == q.target.label
        and p.target.hi == q.target.lo
        and p.slope == q.slope
    )


def _meet_sorted(a: LInterval, b: LInterval) -> bool:
    # a precedes b in (label, lo) order
    return a.label == b.label and b.lo < a.hi


class BundleOperator:
    __slots__ = ("pieces", "word")

    backend = "bundle"

    def __init__(self, pieces=(), word: str = ""):
        ps = sorted(((p, w) for p, w in pieces if not w.coeff.is_zero()), key=_b_sort_key)
        merged: list[tuple[Piece, Monomial]] = []
        for pw in ps:
            if merged and _b_mergeable(merged[-1], pw):
                p0, w = merged[-1]
                p = pw[0]
                merged[-1] = (
                    Affine(
                        LInterval(p.source.label, p0.source.lo, p.source.hi),
                        LInterval(p.target.label, p0.target.lo, p.target.hi),
                    ),
                    w,
                )
            else:
                merged.append(pw)
        for (p, _), (q, _) in zip(merged, merged[1:]):
            if _meet_sorted(p.source, q.source):
                raise OperatorError(f"overlapping sources {p.source} and {q.source}")
        targets = sorted(p.target for p, _ in merged)
        for a, b in zip(targets, targets[1:]):
            if _meet_sorted(a, b):
                raise OperatorError(f"overlapping targets {a} and {b}")
        self.pieces: tuple[tuple[Piece, Monomial], ...] = tuple(merged)
        self.word = word

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BundleOperator) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    def __repr__(self) -> str:
        body = ", ".join(f"{p.source}->{p.target} w={w}" for p, w in self.pieces)
        return f"BundleOperator({self.word or '?'}: {body})"

    @property
    def domain(self) -> Bundle:
        return Bundle(p.source for p, _ in self.pieces)

    @property
    def range(self) -> Bundle:
        return Bundle(p.target for p, _ in self.pieces)

    def is_zero(self) -> bool:
        return not self.pieces

    def named(self, word: str) -> "BundleOperator":
        return BundleOperator(self.pieces, word)

    def to_json(self) -> list:
        return [{"piece": p.to_json(), "weight": str(w)} for p, w in self.pieces]


def bundle_projection(bundle: Bundle, word: str = "") -> BundleOperator:
    return BundleOperator(((Affine(iv, iv), Monomial()) for iv in bundle), word)


Operator = IndexOperator | BundleOperator


# ---- algebra ----------------------------------------------------------------


def zero_like(a: Operator) -> Operator:
    return IndexOperator({}) if isinstance(a, IndexOperator) else BundleOperator()


def _backend_check(a: Operator, b: Operator) -> None:
    if type(a) is not type(b):
        raise BackendMismatch(f"cannot combine {a.backend} and {b.backend} operators")


def op_compose(a: Operator, b: Operator) -> Operator:
    """The product ``a b`` (apply ``b`` first)."""
    _backend_check(a, b)
    word = f"{a.word}{b.word}" if a.word and b.word else ""
    if isinstance(a, IndexOperator):
        out = {}
        und_fwd = set(b.und_fwd)
        for lam, (mu, w) in b.mapping.items():
            hit = a.mapping.get(mu)
            if hit is not None:
                out[lam] = (hit[0], hit[1] * w)
            elif mu in a.und_fwd:
                und_fwd.add(lam)
        und_bwd = set(a.und_bwd)
        inv_b = {mu: lam for lam, (mu, _) in b.mapping.items()}
        for lam, (nu, _) in a.mapping.items():
            if lam not in inv_b and lam in b.und_bwd:
                und_bwd.add(nu)
        return IndexOperator(out, frozenset(und_fwd), frozenset(und_bwd), word)

    if not a.pieces or not b.pieces:
        return BundleOperator((), word)
    keys = [(p.source.label, p.source.lo) for p, _ in a.pieces]  # already sorted
    out = []
    for p2, w2 in b.pieces:
        t = p2.target
        k = max(bisect_right(keys, (t.label, t.lo)) - 1, 0)
        for p1, w1 in a.pieces[k:]:
            s1 = p1.source
            if s1.label != t.label:
                if s1.label > t.label:
                    break
                continue
            if s1.lo >= t.hi:
                break
            if s1.hi <= t.lo:
                continue
            j = t.intersect(s1)
            q1 = p1.restrict(j)
            q2 = p2.corestrict(j)
            out.append((compose_pieces(q1, q2), w1 * compose_density(w2, q1.inverse())))
    return BundleOperator(out, word)


def op_adjoint(a: Operator) -> Operator:
    word = f"({a.word})*" if a.word else ""
    if isinstance(a, IndexOperator):
        return IndexOperator(
            {mu: (lam, w.conj()) for lam, (mu, w) in a.mapping.items()}, a.und_bwd, a.und_fwd, word
        )
    return BundleOperator(
        ((p.inverse(), compose_density(w.conj(), p) * p.density()) for p, w in a.pieces), word
    )


def op_sum(a: Operator, b: Operator) -> Operator:
    """Sum of two operators with disjoint domains and disjoint ranges."""
    _backend_check(a, b)
    if isinstance(a, IndexOperator):
        if a.domain & b.domain or a.range & b.range:
            raise OperatorError("sum of operators with overlapping supports")
        return IndexOperator({**a.mapping, **b.mapping}, a.und_fwd | b.und_fwd, a.und_bwd | b.und_bwd)
    try:
        return BundleOperator(a.pieces + b.pieces)
    except OperatorError as exc:
        raise OperatorError(f"sum of operators with overlapping supports ({exc})") from None


def op_difference(a: Operator, b: Operator):
    """``None`` when ``a == b``, else a JSON-friendly witness of a difference."""
    _backend_check(a, b)
    if isinstance(a, IndexOperator):
        und = a.und_fwd | b.und_fwd
        for lam in sorted((a.domain | b.domain) - und):
            x, y = a.apply(lam), b.apply(lam)
            if x != y:
                return {"index": lam, "lhs": _idx_json(x), "rhs": _idx_json(y)}
        sa, sb = op_adjoint(a), op_adjoint(b)
        und = sa.und_fwd | sb.und_fwd
        for mu in sorted((sa.domain | sb.domain) - und):
            x, y = sa.apply(mu), sb.apply(mu)
            if x != y:
                return {"adjoint_index": mu, "lhs": _idx_json(x), "rhs": _idx_json(y)}
        return None
    if a == b:
        return None
    for (p, w), (q, v) in zip(a.pieces, b.pieces):
        if (p, w) != (q, v):
            return {"lhs_piece": p.to_json(), "lhs_weight": str(w), "rhs_piece": q.to_json(), "rhs_weight": str(v)}
    longer = a if len(a.pieces) > len(b.pieces) else b
    p, w = longer.pieces[min(len(a.pieces), len(b.pieces))]
    side = "lhs" if longer is a else "rhs"
    return {f"{side}_piece": p.to_json(), f"{side}_weight": str(w), "other": "absent"}


def op_equal(a: Operator, b: Operator) -> bool:
    return op_difference(a, b) is None


def op_is_zero(a: Operator) -> bool:
    return op_difference(a, zero_like(a)) is None


def _idx_json(x):
    return None if x is None else [x[0], str(x[1])]
