"""Expression trees over theta atoms with affine-linear arguments.

Identity verification downstream works by sampling, so expressions stay
evaluable trees -- there is no canonical form and no symbolic simplification.
Leaves are theta atoms ``Theta(form)`` and dynamical sections
``GSection(zform, lamform, order)``; interior nodes are sums, products,
integer powers, and numerical derivatives.  Arguments of theta atoms are
integer-coefficient combinations of named variables plus a complex constant;
the two equivariant weights are ordinary variables ``T1``, ``T2`` (tied to
hbar/2 each in the one-parameter convention), which keeps every coefficient an
integer.

Poles are carried structurally: a negative integer power declares the zero set
of its base's theta factors as a pole divisor, and evaluation refuses points
within 1e-6 of a declared divisor (in lattice-reduced coordinates).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Union

from .theta import PI, PoleError, g_section, lattice_distance, theta


class Var(NamedTuple):
    name: str
    color: str = ""
    index: int = 0

    def __repr__(self):
        bits = self.name
        if self.color:
            bits += f"^{self.color}"
        if self.index:
            bits += f"_{self.index}"
        return bits


#: the two equivariant weights; hbar = T1 + T2 (tied mode binds both to hbar/2)
T1 = Var("t1")
T2 = Var("t2")


class UnboundVariableError(KeyError):
    pass


class PoleProximityError(PoleError):
    """Evaluation point within 1e-6 of a declared pole divisor."""

    def __init__(self, divisor: "LinearForm", value: complex):
        super().__init__(f"pole divisor {divisor} hit at value {value}")
        self.divisor = divisor
        self.value = value


@dataclass(frozen=True)
class LinearForm:
    """Integer combination of variables plus a complex constant."""

    terms: tuple[tuple[Var, int], ...] = ()
    const: complex = 0j

    @staticmethod
    def of(*vars_: Var) -> "LinearForm":
        out = LinearForm()
        for v in vars_:
            out = out + LinearForm(((v, 1),))
        return out

    @staticmethod
    def shift(c: complex) -> "LinearForm":
        return LinearForm((), complex(c))

    def _merged(self, other_terms, other_const):
        acc: dict[Var, int] = dict(self.terms)
        for v, c in other_terms:
            acc[v] = acc.get(v, 0) + c
        terms = tuple(sorted((v, c) for v, c in acc.items() if c != 0))
        return LinearForm(terms, self.const + other_const)

    def __add__(self, other):
        if isinstance(other, LinearForm):
            return self._merged(other.terms, other.const)
        return self._merged((), complex(other))

    __radd__ = __add__

    def __neg__(self):
        return LinearForm(tuple((v, -c) for v, c in self.terms), -self.const)

    def __sub__(self, other):
        if not isinstance(other, LinearForm):
            other = LinearForm.shift(other)
        return self + (-other)

    def __rsub__(self, other):
        return LinearForm.shift(other) + (-self)

    def __mul__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("linear forms scale by integers only")
        return LinearForm(tuple((v, c * k) for v, c in self.terms), self.const * k)

    __rmul__ = __mul__

    def evaluate(self, env: Mapping[Var, complex]) -> complex:
        val = self.const
        for v, c in self.terms:
            try:
                val += c * env[v]
            except KeyError:
                raise UnboundVariableError(v) from None
        return val

    def subs(self, mapping: Mapping[Var, "LinearForm"]) -> "LinearForm":
        out = LinearForm.shift(self.const)
        for v, c in self.terms:
            repl = mapping.get(v)
            out = out + (repl * c if repl is not None else LinearForm(((v, c),)))
        return out

    def coeff(self, v: Var) -> int:
        for w, c in self.terms:
            if w == v:
                return c
        return 0

    def __repr__(self):
        if not self.terms:
            return f"<{self.const}>"
        bits = "+".join(f"{c}*{v}" if c != 1 else f"{v}" for v, c in self.terms)
        return f"<{bits}+{self.const}>" if self.const else f"<{bits}>"


def lf(*vars_: Var) -> LinearForm:
    return LinearForm.of(*vars_)


HBAR = lf(T1) + lf(T2)


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Theta:
    form: LinearForm


@dataclass(frozen=True)
class GSection:
    """g^{(order)} with argument zform and dynamical parameter lamform."""

    zform: LinearForm
    lamform: LinearForm
    order: int = 0


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class IntPow:
    base: object
    exp: int


@dataclass(frozen=True)
class Deriv:
    """order-th derivative in var, taken numerically at evaluation time."""

    base: object
    var: Var
    order: int


Expr = Union[Const, Theta, GSection, Sum, Product, IntPow, Deriv]

ONE = Const(1.0 + 0j)
ZERO = Const(0j)


def const(c) -> Const:
    return Const(complex(c))


def add(*terms: Expr) -> Expr:
    flat = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        elif isinstance(t, Const) and t.value == 0:
            continue
        else:
            flat.append(t)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat = []
    scalar = 1.0 + 0j
    for f in factors:
        if isinstance(f, Product):
            flat.extend(f.factors)
        elif isinstance(f, Const):
            scalar *= f.value
        else:
            flat.append(f)
    if scalar == 0:
        return ZERO
    if scalar != 1:
        flat.insert(0, Const(scalar))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def pw(base: Expr, exp: int) -> Expr:
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, IntPow):
        return IntPow(base.base, base.exp * exp)
    return IntPow(base, exp)


def recip(base: Expr) -> Expr:
    return pw(base, -1)


def free_vars(e: Expr) -> set[Var]:
    out: set[Var] = set()

    def walk(x):
        if isinstance(x, (Theta,)):
            out.update(v for v, _ in x.form.terms)
        elif isinstance(x, GSection):
            out.update(v for v, _ in x.zform.terms)
            out.update(v for v, _ in x.lamform.terms)
        elif isinstance(x, Sum):
            for t in x.terms:
                walk(t)
        elif isinstance(x, Product):
            for t in x.factors:
                walk(t)
        elif isinstance(x, IntPow):
            walk(x.base)
        elif isinstance(x, Deriv):
            walk(x.base)
            out.add(x.var)

    walk(e)
    return out


def _canonical_divisor(form: LinearForm) -> LinearForm:
    # theta(-f) vanishes where theta(f) does; normalize the sign so both map
    # to one divisor key.
    for _, c in form.terms:
        if c > 0:
            return form
        if c < 0:
            return -form
    return form


def pole_divisors(e: Expr) -> dict[LinearForm, int]:
    """Net multiplicative powers of theta-type divisors; negative = pole.

    Sums are merged conservatively (componentwise minimum), so every pole of
    the expression appears with at least its true order.
    """
    def merge_min(a, b):
        out = dict(a)
        for k, v in b.items():
            out[k] = min(out.get(k, 0), v)
        return out

    def walk(x, power: int) -> dict[LinearForm, int]:
        if isinstance(x, Theta):
            return {_canonical_divisor(x.form): power}
        if isinstance(x, GSection):
            out = {_canonical_divisor(x.zform): -power * (x.order + 1)}
            key = _canonical_divisor(x.lamform)
            out[key] = out.get(key, 0) - power
            if x.order == 0:
                key = _canonical_divisor(x.zform + x.lamform)
                out[key] = out.get(key, 0) + power
            return out
        if isinstance(x, Product):
            out: dict[LinearForm, int] = {}
            for f in x.factors:
                for k, v in walk(f, power).items():
                    out[k] = out.get(k, 0) + v
            return out
        if isinstance(x, IntPow):
            return walk(x.base, power * x.exp)
        if isinstance(x, Sum):
            out = {}
            for t in x.terms:
                out = merge_min(out, walk(t, power))
            return out
        if isinstance(x, Deriv):
            return {k: (v - x.order if v < 0 else v) for k, v in walk(x.base, power).items()}
        return {}

    return walk(e, 1)


def _check_divisors(e: Expr, env, tau, tol=1e-6):
    for form, net in pole_divisors(e).items():
        if net < 0:
            val = form.evaluate(env)
            if lattice_distance(val, tau) < tol:
                raise PoleProximityError(form, val)


def _deriv_radius(e: Deriv, env, tau) -> float:
    # Largest safe contour radius in the derivative variable: a quarter of the
    # distance (in that variable) to the nearest declared pole divisor.
    best = 0.05
    for form, net in pole_divisors(e.base).items():
        if net >= 0:
            continue
        c = form.coeff(e.var)
        if c == 0:
            continue
        best = min(best, 0.25 * lattice_distance(form.evaluate(env), tau) / abs(c))
    return best


def eval_expr(e: Expr, env: Mapping[Var, complex], tau: complex) -> complex:
    """Evaluate the tree at the assignment env on the torus of modulus tau."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Theta):
        return theta(e.form.evaluate(env), tau)
    if isinstance(e, GSection):
        z = e.zform.evaluate(env)
        lam = e.lamform.evaluate(env)
        if lattice_distance(z, tau) < 1e-6:
            raise PoleProximityError(e.zform, z)
        if lattice_distance(lam, tau) < 1e-6:
            raise PoleProximityError(e.lamform, lam)
        return g_section(z, lam, tau, e.order)
    if isinstance(e, Sum):
        return sum(eval_expr(t, env, tau) for t in e.terms)
    if isinstance(e, Product):
        out = 1.0 + 0j
        for f in e.factors:
            out *= eval_expr(f, env, tau)
            if out == 0:
                # keep scanning for pole divisors so 0 * pole still errors
                _check_divisors(e, env, tau)
                return 0j
        return out
    if isinstance(e, IntPow):
        if e.exp < 0:
            # a zero of the base is a pole of the power
            for form, net in pole_divisors(e.base).items():
                if net > 0:
                    val = form.evaluate(env)
                    if lattice_distance(val, tau) < 1e-6:
                        raise PoleProximityError(form, val)
        base = eval_expr(e.base, env, tau)
        if base == 0 and e.exp < 0:
            raise PoleError(f"zero base raised to power {e.exp}")
        return base ** e.exp
    if isinstance(e, Deriv):
        r = _deriv_radius(e, env, tau)
        n = 32
        center = env[e.var]
        work = dict(env)
        acc = 0j
        for k in range(n):
            w = cmath.exp(2j * PI * k / n)
            work[e.var] = center + r * w
            acc += eval_expr(e.base, work, tau) * w ** (-e.order)
        coeff = acc / (n * r ** e.order)
        fact = 1.0
        for i in range(2, e.order + 1):
            fact *= i
        return coeff * fact
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: Expr, mapping: Mapping[Var, LinearForm]) -> Expr:
    """Simultaneous capture-free replacement of variables by linear forms."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Theta):
        return Theta(e.form.subs(mapping))
    if isinstance(e, GSection):
        return GSection(e.zform.subs(mapping), e.lamform.subs(mapping), e.order)
    if isinstance(e, Sum):
        return Sum(tuple(substitute(t, mapping) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(substitute(f, mapping) for f in e.factors))
    if isinstance(e, IntPow):
        return IntPow(substitute(e.base, mapping), e.exp)
    if isinstance(e, Deriv):
        repl = mapping.get(e.var)
        if repl is None:
            return Deriv(substitute(e.base, mapping), e.var, e.order)
        if len(repl.terms) == 1 and repl.const == 0 and repl.terms[0][1] in (1, -1):
            newvar, sgn = repl.terms[0]
            body = substitute(e.base, mapping)
            d = Deriv(body, newvar, e.order)
            return mul(const((-1.0) ** e.order), d) if sgn < 0 else d
        raise ValueError("derivative variable must map to another single variable")
    raise TypeError(f"not an expression node: {e!r}")


def symmetrize(e: Expr, perms: Iterable[Mapping[Var, Var]], sign: complex = 1.0) -> Expr:
    """sign * sum over the given variable permutations of the relabeled tree."""
    present = free_vars(e)
    terms = []
    for p in perms:
        for src in p:
            if src not in present and p[src] in present:
                raise ValueError(f"permutation moves absent variable {src}")
        terms.append(substitute(e, {a: lf(b) for a, b in p.items()}))
    return mul(const(sign), add(*terms))


# ---------------------------------------------------------------------------
# JSON round-trip (for reproducible reports)

def _var_json(v: Var):
    return [v.name, v.color, v.index]


def _form_json(f: LinearForm):
    return {"t": [[_var_json(v), c] for v, c in f.terms],
            "c": [f.const.real, f.const.imag]}


def _form_from(d) -> LinearForm:
    return LinearForm(tuple((Var(*v), int(c)) for v, c in d["t"]),
                      complex(d["c"][0], d["c"][1]))


def to_json(e: Expr):
    if isinstance(e, Const):
        return {"k": "const", "v": [e.value.real, e.value.imag]}
    if isinstance(e, Theta):
        return {"k": "theta", "f": _form_json(e.form)}
    if isinstance(e, GSection):
        return {"k": "gsec", "z": _form_json(e.zform), "l": _form_json(e.lamform), "o": e.order}
    if isinstance(e, Sum):
        return {"k": "sum", "t": [to_json(t) for t in e.terms]}
    if isinstance(e, Product):
        return {"k": "prod", "t": [to_json(f) for f in e.factors]}
    if isinstance(e, IntPow):
        return {"k": "pow", "b": to_json(e.base), "e": e.exp}
    if isinstance(e, Deriv):
        return {"k": "deriv", "b": to_json(e.base), "v": _var_json(e.var), "o": e.order}
    raise TypeError(f"not an expression node: {e!r}")


def from_json(d) -> Expr:
    kind = d["k"]
    if kind == "const":
        return Const(complex(d["v"][0], d["v"][1]))
    if kind == "theta":
        return Theta(_form_from(d["f"]))
    if kind == "gsec":
        return GSection(_form_from(d["z"]), _form_from(d["l"]), int(d["o"]))
    if kind == "sum":
        return Sum(tuple(from_json(t) for t in d["t"]))
    if kind == "prod":
        return Product(tuple(from_json(t) for t in d["t"]))
    if kind == "pow":
        return IntPow(from_json(d["b"]), int(d["e"]))
    if kind == "deriv":
        return Deriv(from_json(d["b"]), Var(*d["v"]), int(d["o"]))
    raise ValueError(f"unknown node tag {kind!r}")
