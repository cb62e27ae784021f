"""Randomized verification harness.

Runs named suites of identity checks over a chosen quiver and emits one JSON
report per relation: {relation, quiver, seed, samples, tolerance,
maxResidual, pass}.  Output is byte-deterministic for a fixed command line:
every suite derives its own RNG seed from the master seed and the suite name,
suites may run in worker threads (capped by ELLSHUF_THREADS), and reports are
emitted in suite-name order regardless of scheduling.

Exit status: 0 all relations passed, 1 at least one failed, 2 malformed
configuration (unknown suite, bad tolerance/samples, unreadable quiver).
"""

from __future__ import annotations

import argparse
import cmath
import json
import os
import random
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .currents import (RelationReport, draw_admissible, sample_cell,
                       sample_tau, theta_arg_forms, verify_EQ1_EQ2,
                       verify_EQ3, verify_EQ4, verify_EQ5,
                       verify_term_identity, _scale)
from .expr import GSection, T1, T2, Theta, Var, const, eval_expr, lf, mul
from .pairing import (ResidueTask, hopf_pairing, residue,
                      verify_double_relation)
from .quiver import BUILTIN_QUIVERS, Quiver, load_quiver, zvar
from .rep_sl2 import verify_sl2_EQ5
from .shuffle import (braided_product_component, braiding_factor,
                      coproduct_component, element, index_forms,
                      shuffle_product)
from .theta import PI, eta, theta, theta_deriv, theta_jet

SUITE_NAMES = ("currents", "identities", "pairing", "shuffle", "sl2", "theta")


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    quiver: str = "a1"
    seed: int = 42
    samples: int = 50
    tolerance: float = 1e-7
    suites: tuple[str, ...] = SUITE_NAMES
    out: str | None = None
    pretty: bool = False


def _suite_seed(master: int, name: str) -> int:
    return (master * 1000003 + zlib.crc32(name.encode())) & 0x7FFFFFFF


def _load(cfg: SuiteConfig) -> Quiver:
    if cfg.quiver in BUILTIN_QUIVERS:
        return BUILTIN_QUIVERS[cfg.quiver]()
    try:
        return load_quiver(cfg.quiver)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load quiver {cfg.quiver!r}: {exc}") from exc


# --------------------------------------------------------------------------
# suites

def _suite_theta(q: Quiver, label: str, samples: int, seed: int,
                 tol: float) -> list[RelationReport]:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(samples):
        tau = sample_tau(rng)
        z = sample_cell(rng, tau)
        tz = theta(z, tau)
        scale = max(abs(tz), 1e-30)
        worst = max(worst, abs(theta(-z, tau) + tz) / scale)
        worst = max(worst, abs(theta(z + 1, tau) + tz) / scale)
        law = -cmath.exp(-1j * PI * tau - 2j * PI * z) * tz
        worst = max(worst, abs(theta(z + tau, tau) - law) / max(abs(law), 1e-30))
        worst = max(worst, abs(theta_deriv(0.0, tau, 1) - 1.0))
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        worst = max(worst, abs(theta(m + n * tau, tau)))
    heat = 0.0
    h = 1e-4
    for _ in range(min(samples, 50)):
        tau = sample_tau(rng)
        z = sample_cell(rng, tau)

        def cap(t):
            return eta(t) ** 3 * theta(z, t)

        dtau = (cap(tau + h) - cap(tau - h)) / (2 * h)
        d2z = 2.0 * eta(tau) ** 3 * theta_jet(z, tau, 2)[2]
        rhs = d2z / (4j * PI)
        heat = max(heat, abs(dtau - rhs) / max(abs(rhs), 1e-30))
    return [RelationReport("thetaAxioms", label, seed, samples, tol, worst),
            RelationReport("heatEquation", label, seed, min(samples, 50),
                           max(tol, 1e-5), heat)]


def _suite_identities(q: Quiver, label: str, samples: int, seed: int,
                      tol: float) -> list[RelationReport]:
    return [verify_term_identity(4, samples, seed, tol),
            verify_term_identity(3, samples, seed + 1, tol)]


def _lam(c: str) -> Var:
    return Var("lam", c)


def _gsec_element(q: Quiver, c: str):
    return element(q, {c: 1}, GSection(lf(zvar(c, 1)), lf(_lam(c))))


def _suite_shuffle(q: Quiver, label: str, samples: int, seed: int,
                   tol: float) -> list[RelationReport]:
    rng = random.Random(seed)
    out = []

    worst = 0.0
    for _ in range(max(1, samples // 10)):
        cs = [rng.choice(q.vertices) for _ in range(3)]
        f1, f2, f3 = (_gsec_element(q, c) for c in cs)
        left = shuffle_product(shuffle_product(f1, f2), f3).expr
        right = shuffle_product(f1, shuffle_product(f2, f3)).expr
        forms = theta_arg_forms(left) | theta_arg_forms(right)
        names = {v for f in forms for v, _ in f.terms} - {T1, T2}
        for _ in range(10):
            tau = sample_tau(rng)
            env = draw_admissible(rng, tau, sorted(names), forms)
            a = eval_expr(left, env, tau)
            b = eval_expr(right, env, tau)
            worst = max(worst, abs(a - b) / _scale(a, b))
    out.append(RelationReport("shuffleAssoc", label, seed, samples, tol, worst))

    worst = 0.0
    for _ in range(samples):
        cs = [rng.choice(q.vertices) for _ in range(3)]
        used: dict[str, int] = {}
        blocks = []
        for c in cs:
            used[c] = used.get(c, 0) + 1
            blocks.append({c: (used[c],)})
        A, B, C = (index_forms(b) for b in blocks)
        BC = {}
        for src in (blocks[1], blocks[2]):
            for c, idx in src.items():
                BC[c] = tuple(sorted(BC.get(c, ()) + idx))
        inv = mul(braiding_factor(q, A, B), braiding_factor(q, B, A))
        fact = mul(braiding_factor(q, A, index_forms(BC)))
        split = mul(braiding_factor(q, A, B), braiding_factor(q, A, C))
        forms = theta_arg_forms(mul(inv, fact, split))
        names = {v for f in forms for v, _ in f.terms} - {T1, T2}
        tau = sample_tau(rng)
        env = draw_admissible(rng, tau, sorted(names), forms)
        worst = max(worst, abs(eval_expr(inv, env, tau) - 1.0))
        fv, sv = eval_expr(fact, env, tau), eval_expr(split, env, tau)
        worst = max(worst, abs(fv - sv) / _scale(fv, sv))
    out.append(RelationReport("braiding", label, seed, samples, tol, worst))

    if len(q.vertices) == 1 and not q.arrows:
        c = q.vertices[0]
        worst = 0.0
        P = _gsec_element(q, c)
        Q = element(q, {c: 1}, const(1.0))
        PQ = shuffle_product(P, Q)
        for k in (0, 1, 2):
            v1 = {c: k} if k else {}
            lhs = coproduct_component(PQ, v1)
            rhs = braided_product_component(P, Q, v1)
            forms = theta_arg_forms(lhs) | theta_arg_forms(rhs)
            names = {v for f in forms for v, _ in f.terms} - {T1, T2}
            for _ in range(max(1, samples // 5)):
                tau = sample_tau(rng)
                env = draw_admissible(rng, tau, sorted(names), forms)
                a = eval_expr(lhs, env, tau)
                b = eval_expr(rhs, env, tau)
                worst = max(worst, abs(a - b) / _scale(a, b))
        out.append(RelationReport("bialgebra", label, seed, samples, tol, worst))
    return out


def _suite_currents(q: Quiver, label: str, samples: int, seed: int,
                    tol: float) -> list[RelationReport]:
    if q.mode != "hbar":
        raise ConfigError("currents suite requires a quiver in hbar mode")
    out = list(verify_EQ1_EQ2(q, samples, seed, tol, label=label))
    worst3 = 0.0
    for i in q.vertices:
        for j in q.vertices:
            rep = verify_EQ3(q, i, j, samples, _suite_seed(seed, f"3{i}{j}"),
                            tol, label=label)
            worst3 = max(worst3, rep.max_residual)
    out.append(RelationReport("EQ3", label, seed, samples, tol, worst3))
    pairs = [(i, j) for a, i in enumerate(q.vertices)
             for j in q.vertices[a + 1:]
             if not (q.adjacency(i, j) and q.adjacency(j, i))]
    worst4 = 0.0
    for i, j in pairs:
        rep = verify_EQ4(q, i, j, samples, _suite_seed(seed, f"4{i}{j}"),
                        tol, label=label)
        worst4 = max(worst4, rep.max_residual)
    out.append(RelationReport("EQ4", label, seed, samples, tol, worst4))
    worst5 = 0.0
    for i, j in pairs:
        rep = verify_EQ5(q, i, j, samples, seed, tol, label=label)
        worst5 = max(worst5, rep.max_residual)
    out.append(RelationReport("EQ5", label, seed, samples, tol, worst5))
    return out


def _suite_pairing(q: Quiver, label: str, samples: int, seed: int,
                   tol: float) -> list[RelationReport]:
    rng = random.Random(seed)
    c = q.vertices[0]
    z = zvar(c, 1)
    worst = 0.0
    for _ in range(samples):
        tau = sample_tau(rng)
        while True:
            lam, mu = sample_cell(rng, tau), sample_cell(rng, tau)
            ok = all(abs(theta(x, tau)) > 1e-3 for x in (lam, mu))
            if ok:
                break
        f = element(q, {c: 1}, GSection(lf(z), lf(Var("lam"))))
        g = element(q, {c: 1}, GSection(lf(z), lf(Var("mu"))))
        env = {Var("lam"): lam, Var("mu"): mu, T1: 0.05, T2: 0.05}
        got = hopf_pairing(f, g, env, tau)
        want = (theta_jet(mu, tau, 1)[1] / theta(mu, tau)
                - theta_jet(lam, tau, 1)[1] / theta(lam, tau))
        worst = max(worst, abs(got - want) / _scale(want))
    reports = [RelationReport("pairingOracle", label, seed, samples, tol, worst)]

    worst = 0.0
    for _ in range(max(1, samples // 10)):
        tau = sample_tau(rng)
        lam = sample_cell(rng, tau)
        if abs(theta(lam, tau)) < 1e-3:
            continue
        task_a = ResidueTask(GSection(lf(z), lf(Var("lam"))), z, 0.0, 0.05)
        task_b = ResidueTask(GSection(lf(z), lf(Var("lam"))), z, 0.0, 0.11)
        env = {Var("lam"): lam}
        ra = residue(task_a, env, tau)
        rb = residue(task_b, env, tau)
        worst = max(worst, abs(ra - rb), abs(ra - 1.0))
    reports.append(RelationReport("residueRadius", label, seed, samples,
                                  tol, worst))
    reports.append(verify_double_relation(max(5, samples // 5), seed, tol))
    return reports


def _suite_sl2(q: Quiver, label: str, samples: int, seed: int,
               tol: float) -> list[RelationReport]:
    return [verify_sl2_EQ5(1, 2, samples=samples, seed=seed, tolerance=tol),
            verify_sl2_EQ5(2, 3, samples=max(5, samples // 5),
                           seed=seed + 1, tolerance=tol)]


_RUNNERS = {
    "currents": _suite_currents,
    "identities": _suite_identities,
    "pairing": _suite_pairing,
    "shuffle": _suite_shuffle,
    "sl2": _suite_sl2,
    "theta": _suite_theta,
}


def run_suite(cfg: SuiteConfig):
    """Run the configured suites; returns (exit_code, report dicts)."""
    if not (0.0 < cfg.tolerance <= 1e-3):
        raise ConfigError(f"tolerance {cfg.tolerance} outside (0, 1e-3]")
    if cfg.samples < 10:
        raise ConfigError(f"need at least 10 samples, got {cfg.samples}")
    for s in cfg.suites:
        if s not in _RUNNERS:
            raise ConfigError(f"unknown suite {s!r}")
    q = _load(cfg)
    label = cfg.quiver
    names = tuple(sorted(set(cfg.suites)))
    threads = os.environ.get("ELLSHUF_THREADS")
    try:
        max_workers = max(1, int(threads)) if threads else min(4, len(names))
    except ValueError:
        raise ConfigError(f"bad ELLSHUF_THREADS value {threads!r}")

    def run_one(name):
        return _RUNNERS[name](q, label, cfg.samples,
                              _suite_seed(cfg.seed, name), cfg.tolerance)

    if max_workers == 1:
        results = [run_one(n) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_one, names))
    reports = [r for batch in results for r in batch]
    code = 0 if all(r.passed for r in reports) else 1
    return code, [r.to_json() for r in reports]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ellshuf",
        description="randomized numerical checks for the elliptic shuffle "
                    "algebra of a quiver")
    ap.add_argument("--quiver", default="a1",
                    help="builtin name (a1, a2, kronecker) or JSON file path")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--tol", type=float, default=1e-7)
    ap.add_argument("--suite", action="append", choices=SUITE_NAMES,
                    help="suite to run (repeatable; default: all)")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    group = ap.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true",
                       help="compact JSON output (default)")
    group.add_argument("--pretty", action="store_true",
                       help="indented JSON output")
    args = ap.parse_args(argv)
    cfg = SuiteConfig(quiver=args.quiver, seed=args.seed, samples=args.samples,
                      tolerance=args.tol,
                      suites=tuple(args.suite) if args.suite else SUITE_NAMES,
                      out=args.out, pretty=args.pretty)
    try:
        code, reports = run_suite(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(reports, indent=2 if cfg.pretty else None,
                      separators=None if cfg.pretty else (",", ":"))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
