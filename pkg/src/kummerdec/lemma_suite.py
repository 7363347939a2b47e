"""Grid verification of the seven ring and module facts the decomposition rests on.

Each check drives an existing operation over a (p, n, m) grid: exact twist
filtration of powers, evaluation of the norm-like operators P(i,j), ring
annihilators, the trivial-part submodule of the free ring, the minimal-ideal
floor, nonvanishing of trivial parts, and the disjoint-trivial-part criterion
for direct sums.  Parts with ambient size at most 2^16 run exhaustively; the
rest are sampled from a seeded generator, so a run is reproducible and its
output deterministic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .group_ring import (
    GroupRingElement,
    RingParams,
    check_upower,
    classify_twist,
    from_coeffs,
    one,
    p_operator,
    phi_d,
    scalar,
    sigma,
)
from .rmg_modules import (
    ModulePresentation,
    annihilator_element,
    direct_sum_certify,
    ideal_floor_check,
    ideal_span,
    star,
    star_nonzero_check,
    stars_pairwise_disjoint,
)

EXHAUSTIVE_CAP = 2 ** 16
FAILURE_LOG_CAP = 20
LEMMA_NAMES = ("upower", "phi", "kerbasic", "star", "ideal", "starzero", "excl")


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    checked: int
    failed: int
    failures: Tuple[str, ...]  # first few offenders, for reporting

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def format(self) -> str:
        word = "ok" if self.ok else "FAIL"
        line = f"{self.name}: {self.checked} checks, {self.failed} failures [{word}]"
        if self.failures:
            line += f" e.g. {self.failures[0]}"
        return line


@dataclass(frozen=True)
class LemmaSuiteResult:
    ps: Tuple[int, ...]
    ns: Tuple[int, ...]
    ms: Tuple[int, ...]
    seed: int
    samples: int
    checks: Tuple[LemmaCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def check_map(self) -> Dict[str, LemmaCheck]:
        return {c.name: c for c in self.checks}

    def serialize(self) -> Dict:
        return {
            "ps": list(self.ps),
            "ns": list(self.ns),
            "ms": list(self.ms),
            "seed": self.seed,
            "samples": self.samples,
            "ok": self.ok,
            "checks": [
                {
                    "name": c.name,
                    "checked": c.checked,
                    "failed": c.failed,
                    "failures": list(c.failures),
                }
                for c in self.checks
            ],
        }

    def format_lines(self) -> List[str]:
        return [c.format() for c in self.checks]


class _Tally:
    def __init__(self) -> None:
        self.checked = 0
        self.failed = 0
        self.failures: List[str] = []

    def count(self, passed: bool, describe: str) -> None:
        self.checked += 1
        if not passed:
            self.failed += 1
            if len(self.failures) < FAILURE_LOG_CAP:
                self.failures.append(describe)

    def finish(self, name: str) -> LemmaCheck:
        return LemmaCheck(name, self.checked, self.failed, tuple(self.failures))


def _random_ring_element(rng: random.Random, params: RingParams) -> GroupRingElement:
    return from_coeffs(
        params, [rng.randrange(params.modulus) for _ in range(params.width)]
    )


def _sigma_minus_one_power(params: RingParams, k: int) -> GroupRingElement:
    step = sigma(params) - one(params)
    out = one(params)
    for _ in range(k):
        out = out * step
    return out


# -- the seven checks ---------------------------------------------------------


def _check_upower(ps: Sequence[int]) -> LemmaCheck:
    """Predicted filtration class of d^{p^j} vs direct exponentiation."""
    tally = _Tally()
    depth = 4
    for p in ps:
        for d in range(1, p ** 6, p):
            for j in range(5):
                want = classify_twist(p, d ** (p ** j), depth)
                got = check_upower(p, d, j, depth)
                tally.count(got == want, f"p={p} d={d} j={j}: {got} != {want}")
    return tally.finish("upower")


def _check_phi(ps: Sequence[int]) -> LemmaCheck:
    """Valuation of phi_d(P(i,j)): the coarse bound and all three sharp cases."""
    tally = _Tally()
    for p in ps:
        params = RingParams(p, 3, 10)
        twists = list(range(1, p ** 6, p))
        for i in range(4):
            for j in range(i + 1):
                P = p_operator(params, i, j)
                if i == j:
                    continue  # P(i,i) = 1; the claims are mod p^0
                for d in twists:
                    base = phi_d(P, d, i - j) == 0
                    tally.count(base, f"p={p} i={i} j={j} d={d}: coarse bound")
                    cls = classify_twist(p, d, 12)
                    if p > 2 or j > 0 or cls.sign == 1:
                        if cls.sign == 1 and cls.level == 1 and p == 2:
                            continue  # excluded from every sharp case
                        want = p ** (i - j)
                        got = phi_d(P, d, i - j + 1)
                        tally.count(
                            got == want, f"p={p} i={i} j={j} d={d}: {got} != {want}"
                        )
                    elif cls.level is not None:
                        v = cls.level
                        want = 2 ** (i + v - 1)
                        got = phi_d(P, d, i + v)
                        tally.count(
                            got == want, f"p=2 i={i} d={d} v={v}: {got} != {want}"
                        )
        if p == 2:
            for i in range(1, 4):
                got = phi_d(p_operator(params, i, 0), -1, 10)
                tally.count(got == 0, f"p=2 i={i} d=-1: {got} != 0")
    return tally.finish("phi")


def _check_kerbasic(
    ps: Sequence[int], ns: Sequence[int], ms: Sequence[int]
) -> LemmaCheck:
    """Annihilators of p^k and p^k(sigma^{p^j}-1) in the free ring module."""
    tally = _Tally()
    for p, m in itertools.product(ps, ms):
        for i in range(max(ns) + 1):
            params = RingParams(p, i, m)
            R = ModulePresentation.free(params, 1)
            for k in range(m + 1):
                x = R.element([scalar(params, p ** k)])
                want = ideal_span(scalar(params, p ** (m - k)))
                got = annihilator_element(x)
                tally.count(got == want, f"p={p} i={i} m={m} k={k}: ann(p^k)")
                for j in range(i):
                    twist = scalar(params, p ** k) * (
                        sigma(params, p ** j) - one(params)
                    )
                    got = annihilator_element(R.element([twist]))
                    want = ideal_span(
                        p_operator(params, i, j), scalar(params, p ** (m - k))
                    )
                    tally.count(
                        got == want, f"p={p} i={i} m={m} k={k} j={j}: ann(p^k(s-1))"
                    )
    return tally.finish("kerbasic")


def _check_star(ps: Sequence[int], ns: Sequence[int], ms: Sequence[int]) -> LemmaCheck:
    """Trivial part of the free ring: both closed forms, and nonzero."""
    tally = _Tally()
    for p, m in itertools.product(ps, ms):
        for i in range(max(ns) + 1):
            params = RingParams(p, i, m)
            R = ModulePresentation.free(params, 1)
            got = star(R)
            lead = p ** (m - 1)
            norm_form = R.submodule([R.element([p_operator(params, i, 0) * lead])])
            diff_form = R.submodule(
                [R.element([_sigma_minus_one_power(params, p ** i - 1) * lead])]
            )
            where = f"p={p} i={i} m={m}"
            tally.count(got.rows == norm_form.rows, f"{where}: norm form")
            tally.count(got.rows == diff_form.rows, f"{where}: difference form")
            tally.count(got.size > 1, f"{where}: trivial part vanished")
    return tally.finish("star")


def _check_ideal(
    ps: Sequence[int],
    ns: Sequence[int],
    ms: Sequence[int],
    rng: random.Random,
    samples: int,
) -> LemmaCheck:
    """Every nonzero cyclic ideal contains p^{m-1}P(i,0); exhaustive when small."""
    tally = _Tally()
    cells = [
        (p, i, m)
        for p in ps
        for i in range(max(ns) + 1)
        for m in ms
    ]
    big = [c for c in cells if (c[0] ** c[2]) ** (c[0] ** c[1]) > EXHAUSTIVE_CAP]
    quota = max(1, samples // len(big)) if big else 0
    for p, i, m in cells:
        params = RingParams(p, i, m)
        w = params.width
        where = f"p={p} i={i} m={m}"
        if (p, i, m) in big:
            for _ in range(quota):
                f = _random_ring_element(rng, params)
                tally.count(ideal_floor_check(f), f"{where} f={f.coeffs}")
        else:
            for coeffs in itertools.product(range(params.modulus), repeat=w):
                f = from_coeffs(params, coeffs)
                tally.count(ideal_floor_check(f), f"{where} f={coeffs}")
    return tally.finish("ideal")


def _check_starzero(
    ps: Sequence[int],
    ns: Sequence[int],
    ms: Sequence[int],
    rng: random.Random,
    samples: int,
) -> LemmaCheck:
    """Random presentations: a nonzero module has a nonzero trivial part."""
    tally = _Tally()
    cells = list(itertools.product(ps, ns, ms))
    quota = max(1, -(-samples // len(cells)))
    for p, n, m in cells:
        params = RingParams(p, n, m)
        for _ in range(quota):
            g = rng.choice((1, 2))
            rows = [
                [_random_ring_element(rng, params) for _ in range(g)]
                for _ in range(rng.randrange(3))
            ]
            M = ModulePresentation(params, tuple("uv"[:g]), rows)
            tally.count(
                star_nonzero_check(M), f"p={p} n={n} m={m} g={g} rels={len(rows)}"
            )
    return tally.finish("starzero")


def _check_excl(
    ps: Sequence[int],
    ns: Sequence[int],
    ms: Sequence[int],
    rng: random.Random,
    samples: int,
) -> LemmaCheck:
    """Disjoint trivial parts certify a direct sum (and conversely)."""
    tally = _Tally()
    cells = list(itertools.product(ps, ns, ms))
    quota = max(1, -(-samples // len(cells)))
    for p, n, m in cells:
        params = RingParams(p, n, m)
        ambient = ModulePresentation.free(params, 2)
        for _ in range(quota):
            x = ambient.element(
                [_random_ring_element(rng, params) for _ in range(2)]
            )
            y = ambient.element(
                [_random_ring_element(rng, params) for _ in range(2)]
            )
            disjoint = stars_pairwise_disjoint(ambient, [[x], [y]])
            direct = direct_sum_certify(ambient, [[x], [y]])
            tally.count(
                disjoint == direct,
                f"p={p} n={n} m={m}: disjoint={disjoint} direct={direct}",
            )
    return tally.finish("excl")


def run_lemma_suite(
    ps: Sequence[int] = (2, 3),
    ns: Sequence[int] = (1, 2),
    ms: Sequence[int] = (1, 2, 3),
    seed: int = 0,
    samples: int = 10_000,
) -> LemmaSuiteResult:
    """Run all seven checks over the grid; a seeded run is fully deterministic."""
    ps, ns, ms = tuple(sorted(set(ps))), tuple(sorted(set(ns))), tuple(sorted(set(ms)))
    for p in ps:
        RingParams(p, 1, 1)  # validates primality early
    rng = random.Random(seed)
    checks = (
        _check_upower(ps),
        _check_phi(ps),
        _check_kerbasic(ps, ns, ms),
        _check_star(ps, ns, ms),
        _check_ideal(ps, ns, ms, rng, samples),
        _check_starzero(ps, ns, ms, rng, samples),
        _check_excl(ps, ns, ms, rng, samples),
    )
    return LemmaSuiteResult(ps, ns, ms, seed, samples, checks)
