"""Acceptance gate: one test per release criterion.

Each test pins the advertised sample counts, tolerances, and wall-clock
budgets; run with ``pytest -v`` to get one pass/fail line per criterion.
"""

import cmath
import functools
import itertools
import json
import math
import os
import random
import subprocess
import sys
import time

import pytest

from ellshuf.cli import SuiteConfig, run_suite
from ellshuf.currents import (draw_admissible, sample_cell, sample_hbar,
                              sample_tau, theta_arg_forms, verify_EQ1_EQ2,
                              verify_EQ3, verify_EQ4, verify_term_identity)
from ellshuf.expr import (GSection, T1, T2, Theta, Var, const, eval_expr, lf,
                          mul, recip)
from ellshuf.pairing import (ResidueTask, residue, verify_double_relation)
from ellshuf.quiver import (BUILTIN_QUIVERS, a1, a2, dim_add, dim_total,
                            kronecker, zvar)
from ellshuf.rep_sl2 import drinfeld_kernel, tvar, verify_sl2_EQ5
from ellshuf.shuffle import (braided_product_component, braiding_factor,
                             coproduct_component, element, index_forms,
                             shuffle_product)
from ellshuf.theta import PoleError, eta, theta, theta_jet

PI = cmath.pi


def clocked(budget):
    start = time.perf_counter()

    def check():
        dt = time.perf_counter() - start
        assert dt < budget, f"exceeded {budget}s budget: {dt:.2f}s"
        return dt

    return check


def dims_of_total(quiver, total):
    """Nonzero dimension vectors on the quiver's vertices with the given sum."""
    verts = quiver.vertices
    out = []
    for combo in itertools.product(range(total + 1), repeat=len(verts)):
        if sum(combo) == total:
            out.append({c: n for c, n in zip(verts, combo) if n})
    return out


def all_zvars(quiver, v):
    return [zvar(c, s) for c in quiver.vertices for s in range(1, v.get(c, 0) + 1)]


def test_criterion_01_theta_axioms():
    done = clocked(1.0)
    rng = random.Random(101)
    worst = 0.0
    for _ in range(200):
        tau = sample_tau(rng)
        z = sample_cell(rng, tau)
        tz = theta(z, tau)
        scale = max(abs(tz), 1e-12)
        worst = max(worst, abs(theta(-z, tau) + tz) / scale)
        worst = max(worst, abs(theta(z + 1, tau) + tz) / scale)
        law = -cmath.exp(-1j * PI * tau - 2j * PI * z) * tz
        worst = max(worst, abs(theta(z + tau, tau) - law) / max(abs(law), 1e-12))
        worst = max(worst, abs(theta_jet(0.0, tau, 1)[1] - 1.0))
    assert worst <= 1e-9, worst
    done()


def test_criterion_02_heat_equation():
    done = clocked(2.0)
    rng = random.Random(202)
    worst = 0.0
    h = 1e-4
    for _ in range(50):
        tau = sample_tau(rng)
        z = sample_cell(rng, tau)
        if abs(theta(z, tau)) < 1e-3:
            z += 0.37
        dtau = (eta(tau + h) ** 3 * theta(z, tau + h)
                - eta(tau - h) ** 3 * theta(z, tau - h)) / (2 * h)
        d2z = 2.0 * eta(tau) ** 3 * theta_jet(z, tau, 2)[2]
        rhs = d2z / (4j * PI)
        worst = max(worst, abs(dtau - rhs) / max(abs(rhs), 1e-12))
    assert worst <= 1e-5, worst
    done()


def test_criterion_03_four_term_identity():
    done = clocked(2.0)
    rep = verify_term_identity(4, samples=200, seed=303, tolerance=1e-8)
    assert rep.max_residual <= 1e-8, rep.max_residual
    done()


@functools.lru_cache(maxsize=1)
def assoc_instances():
    """(name, quiver, v, left, right) for every triple of nonzero dimension
    vectors with total <= 4, multiplied as constant elements."""
    out = []
    for name, mk in (("a1", a1), ("a2", a2), ("kronecker", kronecker)):
        q = mk()
        singles = [v for t in (1, 2) for v in dims_of_total(q, t)]
        for v1, v2, v3 in itertools.product(singles, repeat=3):
            if dim_total(v1) + dim_total(v2) + dim_total(v3) > 4:
                continue
            f, g, h = (element(q, v, const(1.0)) for v in (v1, v2, v3))
            left = shuffle_product(shuffle_product(f, g), h)
            right = shuffle_product(f, shuffle_product(g, h))
            out.append((name, q, left.dimvec, left.expr, right.expr))
    return out


def test_criterion_04_associativity():
    done = clocked(30.0)
    instances = assoc_instances()
    assert len(instances) == 92
    worst = 0.0
    rng = random.Random(404)
    for name, q, v, lexpr, rexpr in instances:
        names = all_zvars(q, v)
        forms = theta_arg_forms(lexpr) | theta_arg_forms(rexpr)
        for _ in range(30):
            tau = sample_tau(rng)
            env = draw_admissible(rng, tau, names, forms)
            lv = eval_expr(lexpr, env, tau)
            rv = eval_expr(rexpr, env, tau)
            worst = max(worst, abs(lv - rv) / max(abs(lv), abs(rv), 1.0))
    assert worst <= 1e-8, worst
    done()


def test_criterion_05_symmetry_and_diagonal_regularity():
    done = clocked(30.0)
    rng = random.Random(505)
    worst = 0.0
    for name, q, v, lexpr, _ in assoc_instances():
        names = all_zvars(q, v)
        forms = theta_arg_forms(lexpr)
        swaps = []
        for c in q.vertices:
            for s in range(1, v.get(c, 0)):
                swaps.append((zvar(c, s), zvar(c, s + 1)))
        for _ in range(50):
            tau = sample_tau(rng)
            env = draw_admissible(rng, tau, names, forms)
            base = eval_expr(lexpr, env, tau)
            for x, y in swaps:
                flipped = dict(env)
                flipped[x], flipped[y] = env[y], env[x]
                other = eval_expr(lexpr, flipped, tau)
                worst = max(worst, abs(other - base) / max(abs(base), 1.0))
    assert worst <= 1e-8, worst

    # diagonal regularity: pinching two same-color points must not blow up
    for name, q, v, lexpr, _ in assoc_instances():
        color = max(v, key=v.get)
        if v[color] < 2:
            continue
        names = all_zvars(q, v)
        forms = theta_arg_forms(lexpr)
        tau = sample_tau(rng)
        env = draw_admissible(rng, tau, names, forms)
        mags = []
        for eps in (1e-2, 1e-3, 1e-4):
            pinched = dict(env)
            pinched[zvar(color, 2)] = env[zvar(color, 1)] + eps
            mags.append(abs(eval_expr(lexpr, pinched, tau)))
        assert mags[1] < 10 * max(mags[0], 1.0), (name, v, mags)
        assert mags[2] < 10 * max(mags[1], 1.0), (name, v, mags)
    done()


def test_criterion_06_braiding_involution_and_factorization():
    done = clocked(5.0)
    q = kronecker()
    A = index_forms({"1": (1,)})
    B = index_forms({"1": (2,), "2": (1,)})
    C = index_forms({"2": (2,)})
    BC = index_forms({"1": (2,), "2": (1, 2)})
    fwd, back = braiding_factor(q, A, B), braiding_factor(q, B, A)
    joint = braiding_factor(q, A, BC)
    split = mul(braiding_factor(q, A, B), braiding_factor(q, A, C))
    names = [zvar("1", 1), zvar("1", 2), zvar("2", 1), zvar("2", 2)]
    forms = (theta_arg_forms(fwd) | theta_arg_forms(back)
             | theta_arg_forms(joint))
    rng = random.Random(606)
    worst = 0.0
    for _ in range(100):
        tau = sample_tau(rng)
        env = draw_admissible(rng, tau, names, forms)
        fv = eval_expr(fwd, env, tau)
        worst = max(worst, abs(fv * eval_expr(back, env, tau) - 1.0))
        jv = eval_expr(joint, env, tau)
        sv = eval_expr(split, env, tau)
        worst = max(worst, abs(jv - sv) / max(abs(jv), 1.0))
    assert worst <= 1e-9, worst
    done()


def test_criterion_07_bialgebra_compatibility():
    done = clocked(30.0)
    q = a1()
    z1, z2 = zvar("1", 1), zvar("1", 2)
    shapes = {
        1: [const(1.0), Theta(lf(z1) + lf(T1))],
        2: [Theta(lf(z1) + lf(z2))],
    }
    rng = random.Random(707)
    worst = 0.0
    for np_, nq in ((1, 1), (1, 2), (2, 1)):
        for pe in shapes[np_]:
            for qe in shapes[nq]:
                P = element(q, {"1": np_}, pe)
                Q = element(q, {"1": nq}, qe)
                total = np_ + nq
                prod = shuffle_product(P, Q)
                for k in range(total + 1):
                    v1 = {"1": k} if k else {}
                    lhs = coproduct_component(prod, v1)
                    rhs = braided_product_component(P, Q, v1)
                    names = all_zvars(q, {"1": total})
                    forms = theta_arg_forms(lhs) | theta_arg_forms(rhs)
                    for _ in range(30):
                        tau = sample_tau(rng)
                        env = draw_admissible(rng, tau, names, forms)
                        lv = eval_expr(lhs, env, tau)
                        rv = eval_expr(rhs, env, tau)
                        worst = max(worst, abs(lv - rv) / max(abs(lv), abs(rv), 1.0))
    assert worst <= 1e-7, worst
    done()


def test_criterion_08_current_relations():
    done = clocked(60.0)
    worst = 0.0
    for name, mk in BUILTIN_QUIVERS.items():
        q = mk()
        r1, r2 = verify_EQ1_EQ2(q, samples=50, seed=808)
        worst = max(worst, r1.max_residual, r2.max_residual)
        for i in q.vertices:
            for j in q.vertices:
                worst = max(worst, verify_EQ3(q, i, j, samples=50,
                                              seed=808).max_residual)
        for i in q.vertices:
            for j in q.vertices:
                if i == j or (q.adjacency(i, j) and q.adjacency(j, i)):
                    continue
                worst = max(worst, verify_EQ4(q, i, j, samples=50,
                                              seed=808).max_residual)
    assert worst <= 1e-7, worst
    done()


def test_criterion_09_sl2_commutator():
    done = clocked(60.0)
    worst = 0.0
    for v, w in ((1, 2), (2, 3)):
        rep = verify_sl2_EQ5(v, w, samples=50, seed=909)
        worst = max(worst, rep.max_residual)
    assert worst <= 1e-7, worst
    done()


def test_criterion_10_double_relation():
    done = clocked(30.0)
    rep = verify_double_relation(samples=50, seed=1010)
    assert rep.max_residual <= 1e-7, rep.max_residual
    done()


def test_criterion_11_residue_engine():
    done = clocked(5.0)
    rng = random.Random(1111)
    X = Var("x")
    worst_rad = 0.0
    worst_formula = 0.0
    for _ in range(20):
        tau = sample_tau(rng)
        pts = []
        while len(pts) < 3:
            p = sample_cell(rng, tau)
            if all(abs(p - o) > 0.15 for o in pts) and abs(theta(p, tau)) > 1e-2:
                pts.append(p)
        shift = sample_cell(rng, tau)
        tvars_ = [tvar(s) for s in (1, 2, 3)]
        env = {A: p for A, p in zip(tvars_, pts)}
        env[Var("a")] = shift
        e = mul(Theta(lf(X) + lf(Var("a"))),
                *[recip(Theta(lf(X) - lf(t))) for t in tvars_])
        # radius invariance
        r1 = residue(ResidueTask(e, X, pts[0], 0.02), env, tau)
        r2 = residue(ResidueTask(e, X, pts[0], 0.045), env, tau)
        worst_rad = max(worst_rad, abs(r1 - r2) / max(abs(r1), 1.0))
        # closed-form residue at a simple pole
        for k, tkv in enumerate(pts):
            want = theta(tkv + shift, tau)
            for m, tm in enumerate(pts):
                if m != k:
                    want /= theta(tkv - tm, tau)
            got = residue(ResidueTask(e, X, tkv, 0.03), env, tau)
            worst_formula = max(worst_formula,
                                abs(got - want) / max(abs(want), 1.0))
    assert worst_rad <= 1e-9, worst_rad
    assert worst_formula <= 1e-8, worst_formula
    done()


def test_criterion_12_drinfeld_polynomial():
    done = clocked(2.0)
    rng = random.Random(1212)
    w = 3
    Z = Var("zz")
    e = drinfeld_kernel(w, lf(Z))
    names = [Z] + [tvar(s) for s in range(1, w + 1)]
    forms = theta_arg_forms(e)
    worst = 0.0
    for _ in range(50):
        tau = sample_tau(rng)
        env = draw_admissible(rng, tau, names, forms)
        hb = env[T1] + env[T2]
        want = 1.0
        for s in range(1, w + 1):
            d = env[Z] - env[tvar(s)]
            want *= theta(d - hb, tau) / theta(d, tau)
        got = eval_expr(e, env, tau)
        worst = max(worst, abs(got - want) / max(abs(want), 1.0))
    assert worst <= 1e-9, worst
    done()


def test_criterion_13_determinism():
    cfg = SuiteConfig(quiver="a2", seed=31337, samples=10)
    one = json.dumps(run_suite(cfg)[1], sort_keys=False)
    two = json.dumps(run_suite(cfg)[1], sort_keys=False)
    assert one == two
    # byte identity across processes and thread counts
    args = [sys.executable, "-m", "ellshuf.cli", "--quiver", "a2",
            "--seed", "31337", "--samples", "10"]
    env = dict(os.environ)
    p1 = subprocess.run(args, capture_output=True, text=True, env=env)
    env["ELLSHUF_THREADS"] = "1"
    p2 = subprocess.run(args, capture_output=True, text=True, env=env)
    assert p1.returncode == p2.returncode == 0
    assert p1.stdout == p2.stdout


def test_criterion_14_perturbation_sensitivity():
    eps = 1e-3
    floor = 1e-4
    r1, r2 = verify_EQ1_EQ2(a2(), samples=10, seed=1414, perturbation=eps)
    assert r1.max_residual >= floor
    assert r2.max_residual >= floor
    assert verify_EQ3(a2(), "1", "2", samples=10, seed=1414,
                      perturbation=eps).max_residual >= floor
    assert verify_EQ4(a2(), "1", "2", samples=10, seed=1414,
                      perturbation=eps).max_residual >= floor
    assert verify_sl2_EQ5(1, 2, samples=10, seed=1414,
                          perturbation=eps).max_residual >= floor
    assert verify_double_relation(samples=10, seed=1414,
                                  perturbation=eps).max_residual >= floor
    for n in (3, 4):
        assert verify_term_identity(n, samples=10, seed=1414,
                                    perturbation=eps).max_residual >= floor
