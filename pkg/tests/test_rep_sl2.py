import random

import pytest

from ellshuf.expr import (LinearForm, T1, T2, Theta, const, eval_expr, lf,
                          mul)
from ellshuf.rep_sl2 import (HBAR, LAM, W1, W2, WeightFunction, WeightSpace,
                             ba_ratio, cartan_H, drinfeld_kernel, tvar,
                             verify_sl2_EQ5, x_minus, x_minus_kernel, x_plus,
                             x_plus_kernel)
from ellshuf.theta import PoleError, g_section, theta

TAU = 0.07 + 0.83j
RNG = random.Random(97531)


def draw(vars_, rng=RNG, h=0.13 + 0.04j):
    env = {T1: h / 2, T2: h / 2}
    for v in vars_:
        env[v] = complex(rng.uniform(-0.45, 0.45), 0) + rng.uniform(-0.45, 0.45) * TAU
    return env


def eval_retry(expr, vars_, rng=RNG, tries=60):
    for _ in range(tries):
        env = draw(vars_, rng)
        try:
            return eval_expr(expr, env, TAU), env
        except PoleError:
            continue
    raise RuntimeError("no admissible sample found")


def test_weight_space_blocks():
    sp = WeightSpace(2, 5)
    assert sp.first_block == (1, 2)
    assert sp.second_block == (3, 4, 5)
    assert sp.variables == tuple(tvar(s) for s in (1, 2, 3, 4, 5))
    with pytest.raises(ValueError):
        WeightSpace(3, 2)
    with pytest.raises(ValueError):
        WeightSpace(-1, 2)


def test_operator_degree_bookkeeping():
    f = WeightFunction(WeightSpace(1, 2), const(1.0))
    up = x_plus(f)
    dn = x_minus(f)
    assert up.space == WeightSpace(0, 2)
    assert dn.space == WeightSpace(2, 2)
    with pytest.raises(ValueError):
        x_plus(WeightFunction(WeightSpace(0, 2), const(1.0)))
    with pytest.raises(ValueError):
        x_minus(WeightFunction(WeightSpace(2, 2), const(1.0)))


def test_raising_hand_expansion_two_points():
    # on (1,2) with f = 1:  sum_k g_{lam+hbar}(t_k) theta(t_k - t_m + hbar)/theta(t_k - t_m)
    f = WeightFunction(WeightSpace(1, 2), const(1.0))
    up = x_plus(f)
    t1v, t2v = tvar(1), tvar(2)
    for _ in range(20):
        (got, env) = eval_retry(up.expr, [t1v, t2v, LAM])
        h = env[T1] + env[T2]
        lam = env[LAM] + h  # v = 1
        a, b = env[t1v], env[t2v]
        want = (g_section(a, lam, TAU) * theta(a - b + h, TAU) / theta(a - b, TAU)
                + g_section(b, lam, TAU) * theta(b - a + h, TAU) / theta(b - a, TAU))
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_lowering_hand_expansion_two_points():
    # on (1,2) with f = 1:  sum_k g_{-lam-hbar}(t_k) theta(t_m - t_k + hbar)/theta(t_m - t_k)
    f = WeightFunction(WeightSpace(1, 2), const(1.0))
    dn = x_minus(f)
    t1v, t2v = tvar(1), tvar(2)
    for _ in range(20):
        (got, env) = eval_retry(dn.expr, [t1v, t2v, LAM])
        h = env[T1] + env[T2]
        lam = -env[LAM] - h  # w - v = 1
        a, b = env[t1v], env[t2v]
        want = (g_section(a, lam, TAU) * theta(b - a + h, TAU) / theta(b - a, TAU)
                + g_section(b, lam, TAU) * theta(a - b + h, TAU) / theta(a - b, TAU))
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_results_symmetric_in_new_blocks():
    # x^+ on (2,3) lands in (1,3): symmetric under t2 <-> t3
    f = WeightFunction(WeightSpace(2, 3),
                       Theta(lf(tvar(1)) + lf(tvar(2)) - lf(tvar(3))))
    up = x_plus(f)
    vars_ = [tvar(1), tvar(2), tvar(3), LAM]
    (v0, env) = eval_retry(up.expr, vars_)
    swapped = dict(env)
    swapped[tvar(2)], swapped[tvar(3)] = env[tvar(3)], env[tvar(2)]
    assert abs(eval_expr(up.expr, swapped, TAU) - v0) < 1e-10 * max(1.0, abs(v0))
    # x^- on (1,3) lands in (2,3): symmetric under t1 <-> t2
    g = WeightFunction(WeightSpace(1, 3), Theta(lf(tvar(1)) - lf(tvar(3))))
    dn = x_minus(g)
    (v1, env) = eval_retry(dn.expr, vars_)
    swapped = dict(env)
    swapped[tvar(1)], swapped[tvar(2)] = env[tvar(2)], env[tvar(1)]
    assert abs(eval_expr(dn.expr, swapped, TAU) - v1) < 1e-10 * max(1.0, abs(v1))


def test_jets_generate_shifted_kernel():
    # sum_r x^+_r(f) u^r equals the kernel shifted by the constant u
    f = WeightFunction(WeightSpace(1, 2), const(1.0))
    u0 = 0.02 + 0.013j
    shifted = x_plus(f, shift=LinearForm((), u0))
    orders = [x_plus(f, order=r) for r in range(7)]
    vars_ = [tvar(1), tvar(2), LAM]
    for _ in range(5):
        (want, env) = eval_retry(shifted.expr, vars_)
        got = sum(eval_expr(orders[r].expr, env, TAU) * u0**r for r in range(7))
        assert abs(got - want) < 1e-5 * max(1.0, abs(want))


def test_cartan_kernel_values():
    z = lf(W1)
    e = cartan_H(1, 3, z)
    vars_ = [W1, tvar(1), tvar(2), tvar(3)]
    (got, env) = eval_retry(e, vars_)
    h = env[T1] + env[T2]
    want = 1.0
    for s, sgn in ((1, +1), (2, -1), (3, -1)):
        d = env[W1] - env[tvar(s)]
        want *= theta(d + sgn * h, TAU) / theta(d, TAU)
    assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_ba_ratio_is_hbar_negated_cartan():
    z = lf(W1)
    vars_ = [W1, tvar(1), tvar(2)]
    (got, env) = eval_retry(ba_ratio(1, 2, z), vars_)
    flipped = dict(env)
    flipped[T1], flipped[T2] = -env[T1], -env[T2]
    want = eval_expr(cartan_H(1, 2, z), flipped, TAU)
    assert abs(got - want) < 1e-12 * max(1.0, abs(want))


def test_drinfeld_kernel_is_empty_first_block():
    z = lf(W2)
    vars_ = [W2, tvar(1), tvar(2)]
    e = drinfeld_kernel(2, z)
    (got, env) = eval_retry(e, vars_)
    h = env[T1] + env[T2]
    want = 1.0
    for s in (1, 2):
        d = env[W2] - env[tvar(s)]
        want *= theta(d - h, TAU) / theta(d, TAU)
    assert abs(got - want) < 1e-10 * max(1.0, abs(want))
    assert e == cartan_H(0, 2, z)


def test_commutator_relation_both_spaces():
    for v, w in ((1, 2), (2, 3)):
        rep = verify_sl2_EQ5(v, w, samples=6, seed=17)
        assert rep.relation == "sl2EQ5"
        assert rep.quiver == f"T*Gr({v},{w})"
        assert rep.max_residual < 1e-10, (v, w, rep.max_residual)


def test_commutator_relation_custom_function():
    rep = verify_sl2_EQ5(1, 3, f_exprs=[Theta(lf(tvar(2)) + lf(tvar(3)))],
                         samples=4, seed=23)
    assert rep.max_residual < 1e-10


def test_commutator_guards():
    with pytest.raises(ValueError):
        verify_sl2_EQ5(0, 2)
    with pytest.raises(ValueError):
        verify_sl2_EQ5(2, 2)


def test_commutator_perturbation_detected():
    rep = verify_sl2_EQ5(1, 2, samples=4, seed=17, perturbation=1e-3)
    assert rep.max_residual >= 1e-4
