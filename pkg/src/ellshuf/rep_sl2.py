"""Rank-one representation on block-symmetric functions of t_1..t_w.

A weight space (v, w) holds functions symmetric separately in the first block
t_1..t_v and the second block t_{v+1}..t_w; v counts the first block, w the
total.  The raising operator shrinks the first block (v -> v-1), the lowering
operator grows it (v -> v+1).  Both insert a one-variable kernel K(t_k) and a
theta-ratio over the block the moved variable leaves or joins:

  (x^+ f)(..) = sum_{k=v}^{w} f(t_k joins block 1) K(t_k)
                prod_{m in [v,w], m != k} theta(t_k - t_m + hbar)/theta(t_k - t_m)
  (x^- f)(..) = sum_{k=1}^{v+1} f(t_k joins block 2) K(t_k)
                prod_{m in [1,v+1], m != k} theta(t_m - t_k + hbar)/theta(t_m - t_k)

The default kernels are the dynamical g-section jets g^(r) with parameter
lam + v hbar (raising) and -lam - (w-v) hbar (lowering); generating-series
checks pass closed kernels g(t_k + u) with the parameters frozen instead.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .expr import (Expr, GSection, LinearForm, T1, T2, Theta, Var, add, const,
                   eval_expr, lf, mul, recip, substitute)
from .currents import (RelationReport, draw_admissible, sample_tau,
                       theta_arg_forms, _scale)

LAM = Var("lam")
W1 = Var("w1")
W2 = Var("w2")
HBAR = lf(T1) + lf(T2)


def tvar(s: int) -> Var:
    return Var("t", "", s)


@dataclass(frozen=True)
class WeightSpace:
    v: int
    w: int

    def __post_init__(self):
        if not (0 <= self.v <= self.w):
            raise ValueError(f"bad block sizes ({self.v}, {self.w})")

    @property
    def variables(self) -> tuple[Var, ...]:
        return tuple(tvar(s) for s in range(1, self.w + 1))

    @property
    def first_block(self) -> tuple[int, ...]:
        return tuple(range(1, self.v + 1))

    @property
    def second_block(self) -> tuple[int, ...]:
        return tuple(range(self.v + 1, self.w + 1))


@dataclass(frozen=True)
class WeightFunction:
    space: WeightSpace
    expr: Expr


def _slot_map(v: int, first: list[int], second: list[int]) -> dict[Var, LinearForm]:
    """Feed block-ordered arguments into a (v, w)-function's slots."""
    out = {}
    for slot, s in enumerate(first, start=1):
        out[tvar(slot)] = lf(tvar(s))
    for slot, s in enumerate(second, start=v + 1):
        out[tvar(slot)] = lf(tvar(s))
    return out


Kernel = Callable[[LinearForm], Expr]


def x_plus_kernel(fn: WeightFunction, kernel: Kernel) -> WeightFunction:
    v, w = fn.space.v, fn.space.w
    if v < 1:
        raise ValueError("raising needs a nonempty first block")
    terms = []
    for k in range(v, w + 1):
        rest = [m for m in range(v, w + 1) if m != k]
        fmap = _slot_map(v, list(range(1, v)) + [k], rest)
        tk = lf(tvar(k))
        ratio = []
        for m in rest:
            ratio.append(Theta(tk - lf(tvar(m)) + HBAR))
            ratio.append(recip(Theta(tk - lf(tvar(m)))))
        terms.append(mul(substitute(fn.expr, fmap), kernel(tk), *ratio))
    return WeightFunction(WeightSpace(v - 1, w), add(*terms))


def x_minus_kernel(fn: WeightFunction, kernel: Kernel) -> WeightFunction:
    v, w = fn.space.v, fn.space.w
    if v >= w:
        raise ValueError("lowering needs a nonempty second block")
    terms = []
    for k in range(1, v + 2):
        rest = [m for m in range(1, v + 2) if m != k]
        fmap = _slot_map(v, rest, sorted(set(range(v + 2, w + 1)) | {k}))
        tk = lf(tvar(k))
        ratio = []
        for m in rest:
            ratio.append(Theta(lf(tvar(m)) - tk + HBAR))
            ratio.append(recip(Theta(lf(tvar(m)) - tk)))
        terms.append(mul(substitute(fn.expr, fmap), kernel(tk), *ratio))
    return WeightFunction(WeightSpace(v + 1, w), add(*terms))


def x_plus(fn: WeightFunction, order: int = 0,
           lamform: LinearForm | None = None,
           shift: LinearForm | None = None) -> WeightFunction:
    """Jet coefficient x^+_order; dynamical parameter defaults to lam + v hbar."""
    v = fn.space.v
    if lamform is None:
        lamform = lf(LAM) + 2 * v * lf(T1)
    if shift is None:
        shift = LinearForm((), 0.0)
    return x_plus_kernel(fn, lambda tk: GSection(tk + shift, lamform, order))


def x_minus(fn: WeightFunction, order: int = 0,
            lamform: LinearForm | None = None,
            shift: LinearForm | None = None) -> WeightFunction:
    """Jet coefficient x^-_order; dynamical parameter defaults to -lam - (w-v) hbar."""
    v, w = fn.space.v, fn.space.w
    if lamform is None:
        lamform = -lf(LAM) - 2 * (w - v) * lf(T1)
    if shift is None:
        shift = LinearForm((), 0.0)
    return x_minus_kernel(fn, lambda tk: GSection(tk + shift, lamform, order))


def cartan_H(v: int, w: int, zform: LinearForm) -> Expr:
    """Diagonal kernel prod_{i<=v} theta(z-t_i+hbar) prod_{i>v} theta(z-t_i-hbar)
    over prod_i theta(z-t_i)."""
    factors = []
    for s in range(1, w + 1):
        shift = HBAR if s <= v else -1 * HBAR
        factors.append(Theta(zform - lf(tvar(s)) + shift))
        factors.append(recip(Theta(zform - lf(tvar(s)))))
    return mul(*factors)


def ba_ratio(v: int, w: int, zform: LinearForm) -> Expr:
    """cartan_H with hbar negated: prod theta(z-t_i-hbar) (i<=v), +hbar (i>v)."""
    factors = []
    for s in range(1, w + 1):
        shift = -1 * HBAR if s <= v else HBAR
        factors.append(Theta(zform - lf(tvar(s)) + shift))
        factors.append(recip(Theta(zform - lf(tvar(s)))))
    return mul(*factors)


def drinfeld_kernel(w: int, zform: LinearForm) -> Expr:
    """Highest-weight diagonal eigenvalue: prod_j theta(z-t_j-hbar)/theta(z-t_j)."""
    return cartan_H(0, w, zform)


def verify_sl2_EQ5(v: int, w: int, f_exprs=None, samples: int = 50,
                   seed: int = 42, tolerance: float = 1e-7,
                   perturbation: float = 0.0) -> RelationReport:
    """theta(hbar) [X^+(w2), X^-(w1)] f = -(g_{lam2}(w2-w1) BA(-w1)
    + g_{lam1}(w1-w2) BA(-w2)) f, with lam1 = -lam-(w-v)hbar, lam2 = lam+v hbar
    frozen in both composition orders and BA the hbar-negated diagonal kernel."""
    if not (1 <= v <= w - 1):
        raise ValueError("need 1 <= v <= w-1 so both composition orders exist")
    space = WeightSpace(v, w)
    if f_exprs is None:
        f_exprs = [const(1.0),
                   Theta(sum((lf(tvar(s)) for s in range(1, v + 1)),
                             start=LinearForm((), 0.0)) - lf(tvar(w)))]
    lam1 = -lf(LAM) - 2 * (w - v) * lf(T1)
    lam2 = lf(LAM) + 2 * v * lf(T1)
    kp: Kernel = lambda tk: GSection(tk + lf(W2), lam2)
    km: Kernel = lambda tk: GSection(tk + lf(W1), lam1)

    worst = 0.0
    rng = random.Random(seed)
    for fe in f_exprs:
        fn = WeightFunction(space, fe)
        t1 = x_plus_kernel(x_minus_kernel(fn, km), kp).expr
        t2 = x_minus_kernel(x_plus_kernel(fn, kp), km).expr
        rhs1 = mul(const(-1.0), GSection(lf(W2) - lf(W1), lam2),
                   ba_ratio(v, w, -1 * lf(W1)), fe)
        rhs2 = mul(const(-1.0), GSection(lf(W1) - lf(W2), lam1),
                   ba_ratio(v, w, -1 * lf(W2)), fe)
        forms = (theta_arg_forms(t1) | theta_arg_forms(t2)
                 | theta_arg_forms(rhs1) | theta_arg_forms(rhs2))
        names = list(space.variables) + [LAM, W1, W2]
        for _ in range(samples):
            tau = sample_tau(rng)
            env = draw_admissible(rng, tau, names, forms)
            th = eval_expr(Theta(HBAR), env, tau)
            lhs = th * (eval_expr(t1, env, tau) - eval_expr(t2, env, tau))
            r1 = eval_expr(rhs1, env, tau) * (1.0 + perturbation)
            r2 = eval_expr(rhs2, env, tau)
            worst = max(worst, abs(lhs - r1 - r2) / _scale(lhs, r1, r2))
    return RelationReport("sl2EQ5", f"T*Gr({v},{w})", seed, samples,
                          tolerance, worst)
