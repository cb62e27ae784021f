"""Numerical kernel for the odd Jacobi theta function and its relatives.

Everything downstream (shuffle kernels, currents, residue pairings) reduces to
evaluations of ``theta(z, tau)`` with ``Im tau > 0``: the entire function with
simple zeros exactly on Z + tau*Z, normalized by theta'(0) = 1, odd,
anti-periodic under z -> z+1, and quasi-periodic with multiplier
-exp(-pi*i*tau - 2*pi*i*z) under z -> z + tau.

The evaluation strategy is: reduce z into the fundamental cell, picking up the
exact quasi-periodicity multiplier, then use the product form

    sin(pi z)/pi * prod_{n>=1} (1 - q^n e)(1 - q^n/e) / (1 - q^n)^2

with q = exp(2*pi*i*tau) and e = exp(2*pi*i*z).  The product is truncated once
|q^n| < 1e-17; for Im tau >= 0.05 this terminates quickly and sits at
double-precision roundoff.  Taylor data (derivatives, jets, the Weierstrass
function) come from contour integrals on small circles, never from symbolic
differentiation.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

PI = math.pi

#: reject tau closer to the real axis than this (q-series conditioning)
MIN_IM_TAU = 0.05

#: truncation threshold for the q-products
_Q_EPS = 1e-17

#: nodes on every derivative contour
_JET_NODES = 64


class PoleError(ArithmeticError):
    """Raised when an evaluation lands on (or hugs) a pole divisor."""


def _check_tau(tau: complex) -> complex:
    tau = complex(tau)
    if tau.imag < MIN_IM_TAU:
        raise ValueError(f"Im(tau) = {tau.imag:g} below conditioning floor {MIN_IM_TAU}")
    return tau


def lattice_reduce(z: complex, tau: complex) -> tuple[complex, int, int]:
    """Write z = z0 + m + n*tau with z0 in the centered fundamental cell.

    Returns (z0, m, n).  The reduction is exact integer bookkeeping, so the
    quasi-periodicity laws hold to the last bit by construction.
    """
    z = complex(z)
    n = round(z.imag / tau.imag)
    z1 = z - n * tau
    m = round(z1.real)
    return z1 - m, m, n


def lattice_distance(z: complex, tau: complex, exclude_self: bool = False) -> float:
    """Distance from z to the nearest point of Z + tau*Z.

    With ``exclude_self`` the lattice point z itself reduces to (when it lies
    on the lattice) is ignored -- used to pick contour radii around lattice
    points.
    """
    z0, _, _ = lattice_reduce(z, tau)
    best = math.inf
    for p in (-1, 0, 1):
        for q in (-1, 0, 1):
            if exclude_self and p == 0 and q == 0:
                continue
            best = min(best, abs(z0 - p - q * tau))
    return best


@lru_cache(maxsize=1 << 16)
def _theta_reduced(z0: complex, tau: complex) -> complex:
    # z0 is already reduced; product form, truncated at |q^n| < _Q_EPS.
    if z0 == 0:
        return 0j
    q = cmath.exp(2j * PI * tau)
    e = cmath.exp(2j * PI * z0)
    einv = 1.0 / e
    val = cmath.sin(PI * z0) / PI
    qn = 1.0 + 0j
    while True:
        qn *= q
        if abs(qn) < _Q_EPS:
            return val
        val *= (1 - qn * e) * (1 - qn * einv) / (1 - qn) ** 2


def theta(z: complex, tau: complex) -> complex:
    """The odd Jacobi theta function, exactly zero on Z + tau*Z.

    Satisfies theta(-z) = -theta(z) = theta(z+1) and
    theta(z+tau) = -exp(-pi*i*tau - 2*pi*i*z) * theta(z), with theta'(0) = 1.
    """
    tau = _check_tau(tau)
    z0, m, n = lattice_reduce(z, tau)
    val = _theta_reduced(z0, tau)
    if val == 0:
        return 0j
    mult = cmath.exp(-1j * PI * n * n * tau - 2j * PI * n * z0)
    if (m + n) % 2:
        mult = -mult
    return mult * val


@lru_cache(maxsize=1 << 12)
def eta(tau: complex) -> complex:
    """Dedekind eta: q^{1/24} * prod_{n>=1} (1 - q^n), principal q^{1/24}."""
    tau = _check_tau(tau)
    q = cmath.exp(2j * PI * tau)
    val = cmath.exp(1j * PI * tau / 12)
    qn = 1.0 + 0j
    while True:
        qn *= q
        if abs(qn) < _Q_EPS:
            return val
        val *= 1 - qn


def theta_jet(z: complex, tau: complex, max_order: int, radius: float | None = None) -> list[complex]:
    """Taylor coefficients c_0..c_max of theta at z: theta(z+w) = sum c_i w^i.

    Trapezoid rule with 64 nodes on a circle whose radius defaults to a quarter
    of the distance to the nearest lattice point (the nearest *other* one when
    z itself is on the lattice).  If a node lands within 1e-9 of the lattice
    the radius is halved, at most four times.
    """
    tau = _check_tau(tau)
    z = complex(z)
    if radius is None:
        radius = 0.25 * lattice_distance(z, tau, exclude_self=True)
    for _ in range(5):
        nodes = [z + radius * cmath.exp(2j * PI * k / _JET_NODES) for k in range(_JET_NODES)]
        if all(lattice_distance(p, tau) > 1e-9 for p in nodes):
            break
        radius *= 0.5
    else:
        raise ValueError("contour keeps intersecting the lattice after 4 shrinks")
    vals = [theta(p, tau) for p in nodes]
    out = []
    for i in range(max_order + 1):
        acc = 0j
        for k, v in enumerate(vals):
            acc += v * cmath.exp(-2j * PI * k * i / _JET_NODES)
        out.append(acc / (_JET_NODES * radius ** i))
    return out


def theta_deriv(z: complex, tau: complex, order: int) -> complex:
    """i-th z-derivative of theta divided by i! (a Taylor coefficient).

    theta_deriv(z, tau, 0) == theta(z, tau); theta_deriv(0, tau, 1) == 1.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order == 0:
        return theta(z, tau)
    if order > 8:
        raise ValueError("order capped at 8")
    return theta_jet(z, tau, order)[order]


def g_jet(z: complex, lam: complex, tau: complex, max_order: int) -> list[complex]:
    """Taylor coefficients of w -> theta(z+w+lam) / (theta(z+w) theta(lam)).

    The coefficients are the basis sections g^{(i)}_lam(z); summing
    g^{(i)}(z) u^i reproduces g_lam(z+u).  Poles sit on z in Z+tau*Z only, so
    the contour radius is a quarter of that distance.
    """
    tau = _check_tau(tau)
    z, lam = complex(z), complex(lam)
    th_lam = theta(lam, tau)
    if th_lam == 0 or lattice_distance(lam, tau) < 1e-9:
        raise PoleError(f"dynamical parameter {lam} on the theta lattice")
    dist = lattice_distance(z, tau)
    if dist < 1e-9:
        raise PoleError(f"g-section argument {z} on the theta lattice")
    radius = 0.25 * dist
    nodes = [z + radius * cmath.exp(2j * PI * k / _JET_NODES) for k in range(_JET_NODES)]
    vals = [theta(p + lam, tau) / (theta(p, tau) * th_lam) for p in nodes]
    out = []
    for i in range(max_order + 1):
        acc = 0j
        for k, v in enumerate(vals):
            acc += v * cmath.exp(-2j * PI * k * i / _JET_NODES)
        out.append(acc / (_JET_NODES * radius ** i))
    return out


def g_section(z: complex, lam: complex, tau: complex, order: int = 0) -> complex:
    """g^{(order)}_lam(z), with g^{(0)}_lam(z) = theta(z+lam)/(theta(z) theta(lam)).

    Quasi-periodicity: invariant under z -> z+1, multiplier exp(-2*pi*i*lam)
    under z -> z+tau.  Simple pole of residue 1 at z = 0.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    tau = _check_tau(tau)
    if order == 0:
        denom = theta(z, tau) * theta(lam, tau)
        if denom == 0 or lattice_distance(z, tau) < 1e-9 or lattice_distance(lam, tau) < 1e-9:
            raise PoleError("g-section evaluated on its pole divisor")
        return theta(z + lam, tau) / denom
    return g_jet(z, lam, tau, order)[order]


def _log_theta_jet(z: complex, tau: complex, max_order: int) -> list[complex]:
    # Taylor coefficients L_1..L_max of log theta(z+w) (L_0 dropped), via the
    # series identity T' = L' * T solved by forward substitution.
    t = theta_jet(z, tau, max_order)
    if abs(t[0]) == 0:
        raise PoleError(f"log-derivative of theta requested on the lattice at {z}")
    L = [0j] * (max_order + 1)
    for k in range(max_order):
        acc = (k + 1) * t[k + 1]
        for i in range(k):
            acc -= (i + 1) * L[i + 1] * t[k - i]
        L[k + 1] = acc / ((k + 1) * t[0])
    return L


@lru_cache(maxsize=1 << 10)
def _wp_constant(tau: complex) -> complex:
    # The additive constant fixing the Laurent expansion of wp at 0 to
    # 1/z^2 + O(z^2): the regular value at 0 of 1/z^2 + (log theta)''(z),
    # an even function of z, extrapolated by Richardson in z^2 at four radii.
    # (Independently, the constant equals theta'''(0)/3; a test cross-checks.)
    vals = []
    for k in range(4):
        h = 0.2 / 2 ** k
        L = _log_theta_jet(h, tau, 2)
        vals.append(1.0 / (h * h) + 2.0 * L[2])
    for j in range(1, 4):
        w = 4 ** j
        vals = [(w * vals[k + 1] - vals[k]) / (w - 1) for k in range(len(vals) - 1)]
    return vals[0]


def wp(z: complex, tau: complex, order: int = 0) -> complex:
    """Taylor coefficient of the Weierstrass function at z, order-th term / order!.

    wp(z, tau) is -(log theta)''(z) plus the constant that makes the Laurent
    expansion at 0 read 1/z^2 + O(z^2); it is even and doubly periodic.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    tau = _check_tau(tau)
    if lattice_distance(z, tau) < 1e-9:
        raise PoleError(f"wp evaluated at lattice point {z}")
    L = _log_theta_jet(z, tau, order + 2)
    coeff = -(order + 2) * (order + 1) * L[order + 2]
    if order == 0:
        coeff += _wp_constant(tau)
    return coeff
