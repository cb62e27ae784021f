"""The elliptic shuffle product, coproduct, braiding factor, and Cartan action.

Elements of degree v live on colored variables z^i_1..z^i_{v^i}.  Blocks of
arguments are passed around as dicts color -> tuple of LinearForm, so shifted
arguments (z + u, -z, ...) ride through the same factor builders.

The interaction factor fac = fac1 * fac2 is multiplicative over disjoint
unions of blocks in either slot.  fac1 couples equal colors through
theta(s - t + t1 + t2)/theta(t - s); fac2 couples arrow-adjacent colors
through one theta per arrow orientation, weighted by the arrow's (t1, t2)
weights.  At t1 = t2 = 0 the fac1 ratio collapses to (-1)^(|A||B|) summed
over colors, and fac2 to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import (Expr, LinearForm, T1, T2, Theta, Var, add, const, lf, mul,
                   recip, substitute)
from .quiver import Quiver, dim_add, dim_total, enumerate_partitions, zvar

FormBlocks = dict[str, tuple[LinearForm, ...]]


def index_forms(blocks: dict[str, tuple[int, ...]]) -> FormBlocks:
    """Turn index blocks {color: (s, ...)} into form blocks {color: (z^c_s, ...)}."""
    return {c: tuple(lf(zvar(c, s)) for s in idx) for c, idx in blocks.items()}


def _check_disjoint(A: FormBlocks, B: FormBlocks):
    for c in A:
        for fa in A[c]:
            for fb in B.get(c, ()):
                if fa == fb:
                    raise ValueError(f"overlapping blocks at color {c!r}: {fa!r}")


def fac1(quiver: Quiver, A: FormBlocks, B: FormBlocks) -> Expr:
    """Same-color factor: prod theta(s - t + t1 + t2) / theta(t - s)."""
    _check_disjoint(A, B)
    factors = []
    for c in quiver.vertices:
        for s in A.get(c, ()):
            for t in B.get(c, ()):
                factors.append(Theta(s - t + lf(T1) + lf(T2)))
                factors.append(recip(Theta(t - s)))
    return mul(*factors)


def fac2(quiver: Quiver, A: FormBlocks, B: FormBlocks) -> Expr:
    """Arrow factor: per arrow h, theta(t - s + m_h t1) for s in A at out(h),
    t in B at inc(h), and theta(t - s + m_h* t2) for s in A at inc(h), t in B
    at out(h)."""
    factors = []
    for out, inc, m1, m2 in quiver.arrow_weights():
        for s in A.get(out, ()):
            for t in B.get(inc, ()):
                factors.append(Theta(t - s + m1 * lf(T1)))
        for s in A.get(inc, ()):
            for t in B.get(out, ()):
                factors.append(Theta(t - s + m2 * lf(T2)))
    return mul(*factors)


def fac(quiver: Quiver, A: FormBlocks, B: FormBlocks) -> Expr:
    return mul(fac1(quiver, A, B), fac2(quiver, A, B))


def braiding_factor(quiver: Quiver, A: FormBlocks, B: FormBlocks) -> Expr:
    """The two-block braiding kernel fac(B|A) / fac(A|B)."""
    return mul(fac(quiver, B, A), recip(fac(quiver, A, B)))


@dataclass(frozen=True)
class ShuffleElement:
    quiver: Quiver
    dim: tuple[tuple[str, int], ...]
    expr: Expr

    @property
    def dimvec(self) -> dict[str, int]:
        return dict(self.dim)


def element(quiver: Quiver, dimvec: dict[str, int], expr: Expr) -> ShuffleElement:
    dim = tuple((c, dimvec[c]) for c in quiver.vertices if dimvec.get(c, 0))
    return ShuffleElement(quiver, dim, expr)


def unit(quiver: Quiver) -> ShuffleElement:
    return element(quiver, {}, const(1.0))


def _leg_map(v: dict, block: dict[str, tuple[int, ...]]) -> dict[Var, LinearForm]:
    """Map contiguous leg variables z^c_1..z^c_{v^c} onto the block's indices."""
    out = {}
    for c, idx in block.items():
        for pos, s in enumerate(idx, start=1):
            out[zvar(c, pos)] = lf(zvar(c, s))
    return out


def shuffle_product(f1: ShuffleElement, f2: ShuffleElement,
                    max_total: int = 8) -> ShuffleElement:
    """Signed symmetrized product: (-1)^(v2.Cbar.v1) * sum over two-block
    partitions of f1(z_A) f2(z_B) fac(z_A|z_B)."""
    if f1.quiver != f2.quiver:
        raise ValueError("elements live on different quivers")
    q = f1.quiver
    v1, v2 = f1.dimvec, f2.dimvec
    v = dim_add(v1, v2)
    if dim_total(v) > max_total:
        raise ValueError(f"total degree {dim_total(v)} exceeds cap {max_total}")
    terms = []
    for A, B in enumerate_partitions(q, v, v1):
        terms.append(mul(substitute(f1.expr, _leg_map(v1, A)),
                         substitute(f2.expr, _leg_map(v2, B)),
                         fac(q, index_forms(A), index_forms(B))))
    sign = q.sign_pairing(v1, v2)
    return element(q, v, mul(const(float(sign)), add(*terms)))


def standard_split(quiver: Quiver, v: dict, v1: dict):
    """The standard partition ([1, v1], [v1+1, v]) per color."""
    A = {c: tuple(range(1, v1.get(c, 0) + 1)) for c in quiver.vertices if v.get(c, 0)}
    B = {c: tuple(range(v1.get(c, 0) + 1, v.get(c, 0) + 1))
         for c in quiver.vertices if v.get(c, 0)}
    return A, B


def coproduct_component(f: ShuffleElement, v1: dict) -> Expr:
    """Degree-(v1, v2) component of the coproduct, on leg variables
    z_[1,v1] (x) z_[v1+1,v]:  (-1)^(v2.Cbar.v1) * f / fac(leg2|leg1)."""
    q = f.quiver
    v = f.dimvec
    v2 = {c: v.get(c, 0) - v1.get(c, 0) for c in q.vertices}
    if any(n < 0 for n in v2.values()):
        raise ValueError(f"split {v1} exceeds degree {v}")
    v2 = {c: n for c, n in v2.items() if n}
    A, B = standard_split(q, v, v1)
    sign = q.sign_pairing(v1, v2)
    return mul(const(float(sign)), f.expr,
               recip(fac(q, index_forms(B), index_forms(A))))


def cartan_action(quiver: Quiver, k: str, v: dict, u: Var) -> Expr:
    """Diagonal kernel prod_{i,j} theta(u + z^i_j + c_ki t1) / theta(u + z^i_j - c_ki t1).

    Only meaningful in hbar mode, where c_ki t1 = c_ki hbar/2.
    """
    if quiver.mode != "hbar":
        raise ValueError("cartan_action requires hbar weight mode")
    factors = []
    for i in quiver.vertices:
        c = quiver.cartan_entry(k, i)
        for j in range(1, v.get(i, 0) + 1):
            factors.append(Theta(lf(u) + lf(zvar(i, j)) + c * lf(T1)))
            factors.append(recip(Theta(lf(u) + lf(zvar(i, j)) - c * lf(T1))))
    return mul(*factors)


def _intersect(block: dict[str, tuple[int, ...]], lo: dict, hi: dict):
    """Split a block at the leg divider: indices <= v1^c vs > v1^c."""
    first = {c: tuple(s for s in idx if s <= lo.get(c, 0)) for c, idx in block.items()}
    second = {c: tuple(s for s in idx if s > lo.get(c, 0)) for c, idx in block.items()}
    return first, second


def _block_dim(block: dict[str, tuple[int, ...]]) -> dict:
    return {c: len(idx) for c, idx in block.items() if idx}


def _tensor_map(vP: dict, first: dict, second: dict) -> dict[Var, LinearForm]:
    """Map an element's leg variables onto (z_first (x) z_second): slots
    1..|first^c| take the first block, the rest the second."""
    out = {}
    for c in set(first) | set(second):
        targets = list(first.get(c, ())) + list(second.get(c, ()))
        for pos, s in enumerate(targets, start=1):
            out[zvar(c, pos)] = lf(zvar(c, s))
    return out


def braided_product_component(P: ShuffleElement, Q: ShuffleElement,
                              v1: dict) -> Expr:
    """Degree-(v1, v2) component of Delta(P) * Delta(Q) in the braided tensor
    square, matching coproduct_component(shuffle_product(P, Q), v1).

    Per partition (A, B) of the result indices into a P-block and a Q-block,
    each block splits at the leg divider into (A1, A2), (B1, B2); the term
    carries the leg-local coproducts of P and Q, the leg-local interaction
    factors fac(A1|B1) fac(A2|B2), and the cross-leg braiding kernel
    fac(A1|B2)/fac(B2|A1) from moving Q's first leg past P's second.
    """
    if P.quiver != Q.quiver:
        raise ValueError("elements live on different quivers")
    q = P.quiver
    vP, vQ = P.dimvec, Q.dimvec
    v = dim_add(vP, vQ)
    terms = []
    for A, B in enumerate_partitions(q, v, vP):
        A1, A2 = _intersect(A, v1, v)
        B1, B2 = _intersect(B, v1, v)
        expo = (q.sign_exponent(_block_dim(A1), _block_dim(A2))
                + q.sign_exponent(_block_dim(B1), _block_dim(B2))
                + q.sign_exponent(_block_dim(A1), _block_dim(B1))
                + q.sign_exponent(_block_dim(A2), _block_dim(B2)))
        sign = -1.0 if expo % 2 else 1.0
        fA1, fA2 = index_forms(A1), index_forms(A2)
        fB1, fB2 = index_forms(B1), index_forms(B2)
        terms.append(mul(
            const(sign),
            substitute(P.expr, _tensor_map(vP, A1, A2)),
            substitute(Q.expr, _tensor_map(vQ, B1, B2)),
            recip(fac(q, fA2, fA1)),
            recip(fac(q, fB2, fB1)),
            fac(q, fA1, fB1),
            fac(q, fA2, fB2),
            fac(q, fA1, fB2),
            recip(fac(q, fB2, fA1)),
        ))
    return add(*terms)
