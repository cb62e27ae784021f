"""Quiver combinatorics: adjacency/Cartan data, dimension vectors, arrow
weights, shuffle and partition enumeration, and the product sign.

Dimension vectors are plain ``dict`` maps vertex-id -> count.  Colored
variables are ``Var("z", vertex, s)`` with 1-based s.  Two weight modes:

* ``"unit"``  -- every arrow weighs (t1, t2); the generic two-parameter case.
* ``"hbar"``  -- t1 = t2 = hbar/2, and the p-th of a parallel arrows between a
  fixed ordered pair weighs (a+2-2p, -a+2p) in units of (t1, t2), so each
  arrow's total weight is exactly hbar.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .expr import Var


@dataclass(frozen=True)
class Arrow:
    out: str
    inc: str


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...]
    mode: str = "hbar"

    def __post_init__(self):
        if self.mode not in ("hbar", "unit"):
            raise ValueError(f"unknown weight mode {self.mode!r}")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        for a in self.arrows:
            if a.out not in self.vertices or a.inc not in self.vertices:
                raise ValueError(f"arrow {a} touches unknown vertex")

    def adjacency(self, k: str, l: str) -> int:
        """Number of arrows from k to l."""
        return sum(1 for a in self.arrows if a.out == k and a.inc == l)

    def cartan_entry(self, i: str, k: str) -> int:
        """2 on the diagonal, minus the count of arrows either way otherwise."""
        if i not in self.vertices or k not in self.vertices:
            raise ValueError(f"unknown vertex in ({i!r}, {k!r})")
        if i == k:
            return 2
        return -self.adjacency(i, k) - self.adjacency(k, i)

    def cbar_entry(self, k: str, l: str) -> int:
        """Entry of Id minus the adjacency matrix (taken as-is, untransposed)."""
        return (1 if k == l else 0) - self.adjacency(k, l)

    def sign_exponent(self, v1: dict, v2: dict) -> int:
        return sum(v2.get(k, 0) * self.cbar_entry(k, l) * v1.get(l, 0)
                   for k in self.vertices for l in self.vertices)

    def sign_pairing(self, v1: dict, v2: dict) -> int:
        return -1 if self.sign_exponent(v1, v2) % 2 else 1

    def arrow_weights(self) -> list[tuple[str, str, int, int]]:
        """Per arrow: (out, inc, coefficient of t1, coefficient of t2).

        In hbar mode the coefficients of a parallel group sum pairwise to 2, so
        each arrow's weight is t1+t2 = hbar -- an exact integer invariant.
        """
        if self.mode == "unit":
            return [(a.out, a.inc, 1, 1) for a in self.arrows]
        seen: dict[tuple[str, str], int] = {}
        groups: dict[tuple[str, str], int] = {}
        for a in self.arrows:
            groups[(a.out, a.inc)] = groups.get((a.out, a.inc), 0) + 1
        out = []
        for a in self.arrows:
            key = (a.out, a.inc)
            p = seen.get(key, 0) + 1
            seen[key] = p
            n = groups[key]
            out.append((a.out, a.inc, n + 2 - 2 * p, -n + 2 * p))
        return out

    def has_edge_loops(self) -> bool:
        return any(a.out == a.inc for a in self.arrows)

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices),
                "arrows": [{"out": a.out, "inc": a.inc} for a in self.arrows],
                "mode": self.mode}


def quiver_from_json(data: dict) -> Quiver:
    try:
        return Quiver(tuple(str(v) for v in data["vertices"]),
                      tuple(Arrow(str(a["out"]), str(a["inc"])) for a in data["arrows"]),
                      str(data.get("mode", "hbar")))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed quiver config: {exc}") from exc


def load_quiver(path: str) -> Quiver:
    with open(path) as fh:
        return quiver_from_json(json.load(fh))


def a1() -> Quiver:
    return Quiver(("1",), ())


def a2() -> Quiver:
    return Quiver(("1", "2"), (Arrow("1", "2"),))


def kronecker() -> Quiver:
    return Quiver(("1", "2"), (Arrow("1", "2"), Arrow("1", "2")))


BUILTIN_QUIVERS = {"a1": a1, "a2": a2, "kronecker": kronecker}


# --------------------------------------------------------------------------
# dimension vectors and colored index bookkeeping

def dim_total(v: dict) -> int:
    return sum(v.values())


def dim_add(v1: dict, v2: dict) -> dict:
    out = dict(v1)
    for k, c in v2.items():
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def zvar(color: str, s: int) -> Var:
    return Var("z", color, s)


def zvars(quiver: Quiver, v: dict) -> dict[str, tuple[Var, ...]]:
    """The colored variables z^i_1 .. z^i_{v^i} for each vertex i."""
    return {c: tuple(zvar(c, s) for s in range(1, v.get(c, 0) + 1))
            for c in quiver.vertices}


def enumerate_partitions(quiver: Quiver, v: dict, v1: dict):
    """All two-block colored partitions (A, B) of [1, v] with |A| = v1.

    Blocks are dicts color -> ascending index tuples; the first element yielded
    is the standard one ([1, v1], [v1+1, v]) per color.
    """
    colors = [c for c in quiver.vertices if v.get(c, 0)]
    for c in v1:
        if v1[c] > v.get(c, 0):
            raise ValueError(f"block {v1} exceeds {v} at vertex {c}")
    per_color = []
    for c in colors:
        idx = range(1, v.get(c, 0) + 1)
        per_color.append([(A, tuple(s for s in idx if s not in A))
                          for A in itertools.combinations(idx, v1.get(c, 0))])
    for combo in itertools.product(*per_color):
        A = {c: combo[k][0] for k, c in enumerate(colors)}
        B = {c: combo[k][1] for k, c in enumerate(colors)}
        yield A, B


def enumerate_shuffles(quiver: Quiver, v1: dict, v2: dict):
    """Colored (v1, v2)-shuffles as variable permutation maps Var -> Var.

    Each shuffle keeps the relative order inside [1, v1] and inside
    [v1+1, v1+v2] per color; there are prod_i binom(v1+v2, v1) of them, in
    bijection with the two-block partitions (a shuffle is determined by the
    image of the first block).
    """
    v = dim_add(v1, v2)
    for A, B in enumerate_partitions(quiver, v, v1):
        perm: dict[Var, Var] = {}
        for c in v:
            split = v1.get(c, 0)
            for pos, target in enumerate(A.get(c, ()), start=1):
                perm[zvar(c, pos)] = zvar(c, target)
            for pos, target in enumerate(B.get(c, ()), start=1):
                perm[zvar(c, split + pos)] = zvar(c, target)
        yield perm
