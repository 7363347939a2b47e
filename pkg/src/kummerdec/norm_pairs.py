"""Norm pairs: verification, ordering, truncation, and minimal-pair search.

A pair couples a level vector a = (a_0, ..., a_{m-1}) over {-inf, 0, ..., n}
with a twist d = 1 mod p.  It is realized by elements (alpha, delta_0, ...,
delta_m) of the cyclic tower satisfying two equations at once: sigma(alpha)
/ alpha^d equals the product of the delta_i^{p^i}, and a fixed primitive
p-th root of unity of the base field is recovered from norms of the same
elements.  Everything here works with exact truncated-field arithmetic; the
search decides each (vector, twist) cell completely via linear algebra on
the p^{m+1}-power class group rather than by enumerating products.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import linalg
from .group_ring import ArithmeticDomainError, int_valuation
from .local_field import FieldUnit, Tower
from .rmg_modules import NEG_INF, NormVector, is_neg_inf

__all__ = [
    "NormPair",
    "NormPairWitness",
    "WitnessReport",
    "InequalityReport",
    "SearchResult",
    "verify",
    "order_leq",
    "twist_leq",
    "twist_shift",
    "truncate",
    "find_witness",
    "search_minimal",
    "i_invariant",
    "check_exceptional",
    "check_inequalities",
]


# ---------------------------------------------------------------------------
# Pair and witness containers


@dataclass(frozen=True)
class NormPair:
    """Level vector plus twist; the twist only matters mod p^m."""

    p: int
    n: int
    m: int
    a: NormVector
    d: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ArithmeticDomainError("n and m must be positive")
        self.a.validate(self.n, self.m)
        first = self.a[0]
        if not is_neg_inf(first) and first >= self.n:
            raise ArithmeticDomainError(f"leading level {first} must stay below n={self.n}")
        if (self.d - 1) % self.p:
            raise ArithmeticDomainError(f"twist {self.d} is not 1 mod {self.p}")

    @property
    def d_residue(self) -> int:
        return self.d % self.p ** self.m

    def format(self) -> str:
        return f"(({self.a.format()}), {self.d})"

    def __repr__(self) -> str:
        return f"NormPair{self.format()}"


@dataclass(frozen=True)
class NormPairWitness:
    """alpha and delta_0..delta_m, all carried at the top level of the tower."""

    alpha: FieldUnit
    deltas: Tuple[FieldUnit, ...]

    def serialize(self) -> Dict:
        return {
            "alpha": self.alpha.serialize(),
            "deltas": [d.serialize() for d in self.deltas],
        }

    @classmethod
    def deserialize(cls, tower: Tower, payload: Dict) -> "NormPairWitness":
        mod = tower.K
        alpha = FieldUnit.deserialize(mod, payload["alpha"])
        deltas = tuple(FieldUnit.deserialize(mod, d) for d in payload["deltas"])
        return cls(alpha, deltas)


@dataclass(frozen=True)
class WitnessReport:
    """Per-equation diagnostics from verify()."""

    product_eq: bool
    norm_eq: bool
    levels: Tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return self.product_eq and self.norm_eq and all(self.levels)

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# Verification


def _is_one(fu: FieldUnit) -> bool:
    return fu.v == 0 and fu.model.congruent(fu.u, fu.model.one())


def _fixed_at_level(tower: Tower, fu: FieldUnit, level: int) -> bool:
    if level >= tower.n:
        return True
    return fu.apply_sigma(tower.p ** level).congruent_to(fu)


def _delta_product(pair: NormPair, w: NormPairWitness) -> FieldUnit:
    acc = None
    for i, delta in enumerate(w.deltas):
        term = delta.power(pair.p ** i)
        acc = term if acc is None else acc.times(term)
    return acc


def _norm_value(tower: Tower, pair: NormPair, w: NormPairWitness) -> FieldUnit:
    """Right side of the norm equation, as an element of the base field."""
    p, n, m, d = pair.p, pair.n, pair.m, pair.d
    acc = tower.norm_to_F(w.alpha).power((d - 1) // p)
    delta0 = w.deltas[0]
    if not _is_one(delta0):
        low = tower.embeddings[(n - 1, n)].invert_unit(delta0) if n >= 1 else delta0
        acc = acc.times(tower.norm(low, n - 1, 0))
    for i in range(1, m + 1):
        di = w.deltas[i]
        if _is_one(di):
            continue
        acc = acc.times(tower.norm_to_F(di).power(p ** (i - 1)))
    return acc


def base_root(tower: Tower) -> FieldUnit:
    """The fixed primitive p-th root of unity all checks are measured against."""
    if tower.nu_F < 1:
        raise ArithmeticDomainError("base field has no primitive p-th root of unity")
    return tower.xi(1, level=0)


def verify(pair: NormPair, w: NormPairWitness, tower: Tower, m: Optional[int] = None) -> WitnessReport:
    """Check both defining equations and the level memberships exactly."""
    if m is None:
        m = pair.m
    if m != pair.m:
        raise ArithmeticDomainError(f"pair has length {pair.m}, expected {m}")
    if tower.p != pair.p or tower.n != pair.n:
        raise ArithmeticDomainError("pair does not match the tower shape")
    if len(w.deltas) != m + 1:
        raise ArithmeticDomainError(f"witness needs {m + 1} deltas, got {len(w.deltas)}")
    mod = tower.K
    for fu in (w.alpha,) + w.deltas:
        if fu.model is not mod:
            raise ArithmeticDomainError("witness element is not at the top level")
    xi = base_root(tower)

    levels = []
    for i in range(m):
        ai = pair.a[i]
        if is_neg_inf(ai):
            levels.append(_is_one(w.deltas[i]))
        else:
            levels.append(_fixed_at_level(tower, w.deltas[i], ai))

    lhs = w.alpha.apply_sigma().times(w.alpha.power(-pair.d))
    product_eq = lhs.congruent_to(_delta_product(pair, w))

    try:
        norm_eq = _norm_value(tower, pair, w).congruent_to(xi)
    except ArithmeticDomainError:
        norm_eq = False

    return WitnessReport(product_eq, norm_eq, tuple(levels))


# ---------------------------------------------------------------------------
# Ordering


def twist_leq(p: int, d: int, dp: int, m: int) -> bool:
    """Filtration preorder: d <= d' when every congruence depth d' reaches, d
    reaches too; for p = 2 and both twists 3 mod 4, measured along -1 instead."""
    if (d - 1) % p or (dp - 1) % p:
        raise ArithmeticDomainError("twists must be 1 mod p")
    if p == 2 and (d - 1) % 4 and (dp - 1) % 4:
        return all((d + 1) % 2 ** i == 0 for i in range(2, m + 1) if (dp + 1) % 2 ** i == 0)
    return all((d - 1) % p ** i == 0 for i in range(1, m + 1) if (dp - 1) % p ** i == 0)


def order_leq(x: NormPair, y: NormPair, m: Optional[int] = None) -> bool:
    """Lexicographic on vectors (with -inf least), then the twist preorder."""
    if m is None:
        m = x.m
    if x.m != m or y.m != m:
        raise ArithmeticDomainError("pairs must have the common length m")
    if x.p != y.p or x.n != y.n:
        raise ArithmeticDomainError("pairs live over different shapes")
    kx = _vector_key(x.a)
    ky = _vector_key(y.a)
    if kx != ky:
        return kx < ky
    return twist_leq(x.p, x.d, y.d, m)


def _vector_key(a: NormVector) -> Tuple[int, ...]:
    return tuple(-1 if is_neg_inf(v) else v for v in a)


# ---------------------------------------------------------------------------
# Twist shifts and truncation


def twist_shift(pair: NormPair, w: NormPairWitness, x: int) -> Tuple[NormPair, NormPairWitness]:
    """Move the twist by p^m * x; only the last delta changes."""
    pm = pair.p ** pair.m
    shifted = NormPair(pair.p, pair.n, pair.m, pair.a, pair.d + pm * x)
    deltas = w.deltas[:-1] + (w.deltas[-1].times(w.alpha.power(-x)),)
    return shifted, NormPairWitness(w.alpha, deltas)


def truncate(pair: NormPair, w: NormPairWitness, m: int) -> Tuple[NormPair, NormPairWitness]:
    """Contract a length-s pair to length m <= s by folding the deep deltas."""
    s = pair.m
    if not 1 <= m <= s:
        raise ArithmeticDomainError(f"target length {m} out of range for {s}")
    if m == s:
        return pair, w
    p = pair.p
    tail = None
    for i in range(m, s + 1):
        term = w.deltas[i].power(p ** (i - m))
        tail = term if tail is None else tail.times(term)
    small = NormPair(pair.p, pair.n, m, NormVector(pair.a.entries[:m]), pair.d)
    return small, NormPairWitness(w.alpha, w.deltas[:m] + (tail,))


# ---------------------------------------------------------------------------
# Cell decision: witnesses for a fixed (vector, twist)


class _CellSolver:
    """Decides single (vector, twist) cells over classes mod p^{m+1}.

    The two defining equations are split: the product equation becomes a
    linear system on p^{m+1}-power classes, and on its solution lattice the
    norm-equation value is a homomorphism into mu_p of the base field.  A
    cell has a witness exactly when that homomorphism is nontrivial, so
    scanning the Howell basis of the lattice decides the cell completely.
    """

    def __init__(self, tower: Tower, m: int):
        self.m = m
        self.M = m + 1
        self.tower = tower.at_depth(self.M)
        tw = self.tower
        self.p = tw.p
        self.pM = self.p ** self.M
        jm = tw.jmodule(self.M)
        self.action = jm.action_rows
        self.scalar = jm.scalar_rows
        self.width = len(self.action)
        self.kd = tw.kummer(tw.n)
        self.gens = tuple(tw.jgens(tw.n))
        self.xi = base_root(tw)
        self._levels: Dict[int, Tuple[Tuple[FieldUnit, ...], Tuple[Tuple[int, ...], ...]]] = {}

    def _coords(self, fu: FieldUnit) -> Tuple[int, ...]:
        c = (fu.v,) + self.kd.dlog(self.kd.strip_teichmuller(fu.u))
        return tuple(x % self.pM for x in c)

    def _level_data(self, level: int):
        if level not in self._levels:
            tw = self.tower
            if level == tw.n:
                gens = self.gens
                rows = tuple(linalg.identity_rows(self.width))
            else:
                emb = tw.embeddings[(level, tw.n)]
                gens = tuple(emb.convert_unit(g) for g in tw.jgens(level))
                rows = tuple(self._coords(g) for g in gens)
            self._levels[level] = (gens, rows)
        return self._levels[level]

    def _blocks(self, vec: Sequence) -> List[Tuple[int, int]]:
        """(delta index, level) for every unknown block after the alpha block."""
        out = []
        for i, ai in enumerate(vec):
            if not is_neg_inf(ai):
                out.append((i, int(ai)))
        out.append((self.m, self.tower.n))
        return out

    def _solution_rows(self, vec: Sequence, d: int) -> Tuple[Tuple[int, ...], ...]:
        p, pM = self.p, self.pM
        cmat: List[List[int]] = []
        for c in range(self.width):
            row = list(self.action[c])
            row[c] = (row[c] - d) % pM
            cmat.append([x % pM for x in row])
        for i, level in self._blocks(vec):
            scale = p ** i
            for r in self._level_data(level)[1]:
                cmat.append([(-scale * x) % pM for x in r])
        return linalg.solve_sub(cmat, self.scalar, p, self.M)

    def _build(self, vec: Sequence, d: int, y: Sequence[int]) -> NormPairWitness:
        tw, p = self.tower, self.p
        mod = tw.K
        one = FieldUnit(mod, 0, mod.one())

        def combine(gens: Sequence[FieldUnit], exps: Sequence[int]) -> FieldUnit:
            acc = one
            for g, c in zip(gens, exps):
                c %= self.pM
                if c:
                    acc = acc.times(g.power(c))
            return acc

        pos = self.width
        alpha = combine(self.gens, y[: self.width])
        deltas: List[FieldUnit] = [one] * (self.m + 1)
        for i, level in self._blocks(vec):
            gens = self._level_data(level)[0]
            deltas[i] = combine(gens, y[pos : pos + len(gens)])
            pos += len(gens)

        rhs = one
        for i, delta in enumerate(deltas):
            rhs = rhs.times(delta.power(p ** i))
        gap = alpha.apply_sigma().times(alpha.power(-d)).over(rhs)
        eta = self.kd.pth_root(gap, self.M)
        deltas[-1] = deltas[-1].times(eta.power(p ** (self.M - self.m)))
        return NormPairWitness(alpha, tuple(deltas))

    def _mu_exponent(self, value: FieldUnit) -> int:
        if value.v != 0:
            raise ArithmeticDomainError("norm-equation value is not a unit")
        probe = FieldUnit(self.xi.model, 0, self.xi.model.one())
        for j in range(self.p):
            if value.congruent_to(probe):
                return j
            probe = probe.times(self.xi)
        raise ArithmeticDomainError("norm-equation value escaped mu_p of the base field")

    def decide(self, vec: Sequence, d: int) -> Optional[NormPairWitness]:
        """A verified witness for the cell, or None when none exists."""
        pair = NormPair(self.p, self.tower.n, self.m, NormVector(tuple(vec)), d)
        for row in self._solution_rows(vec, d):
            w = self._build(vec, d, row)
            k = self._mu_exponent(_norm_value(self.tower, pair, w))
            if k == 0:
                continue
            t = pow(k, -1, self.p)
            scaled = tuple((t * x) % self.pM for x in row)
            witness = self._build(vec, d, scaled)
            report = verify(pair, witness, self.tower, self.m)
            if not report:
                raise ArithmeticDomainError(
                    f"cell {pair.format()} produced a witness that failed verification"
                )
            return witness
        return None


def find_witness(tower: Tower, pair: NormPair) -> Optional[NormPairWitness]:
    """Solve one cell: a verified witness for the given pair, if any exists."""
    if tower.p != pair.p or tower.n != pair.n:
        raise ArithmeticDomainError("pair does not match the tower shape")
    solver = _CellSolver(tower, pair.m)
    return solver.decide(pair.a.entries, pair.d)


# ---------------------------------------------------------------------------
# Minimal-pair search


@dataclass(frozen=True)
class SearchResult:
    pair: Optional[NormPair]
    witness: Optional[NormPairWitness]
    complete: bool
    cells: int
    residues: Tuple[int, ...]

    def __iter__(self) -> Iterator:
        return iter((self.pair, self.witness, self.complete))


def _vectors(n: int, m: int) -> Iterator[Tuple]:
    first = [NEG_INF] + list(range(n))
    rest = [NEG_INF] + list(range(n + 1))
    return itertools.product(first, *([rest] * (m - 1)))


def _twist_tiers(p: int, m: int) -> List[List[int]]:
    """Residues mod p^m grouped by twist class, least classes first."""
    groups: Dict[Tuple[int, int], List[int]] = {}
    for d in range(1, p ** m):
        if (d - 1) % p:
            continue
        if p == 2 and m >= 2 and (d - 1) % 4:
            v = int_valuation(d + 1, 2)
            key = (1, m if v is None else min(v, m))
        else:
            v = int_valuation(d - 1, p)
            key = (0, m if v is None else min(v, m))
        groups.setdefault(key, []).append(d)
    if p == 2 and m == 1:
        groups = {(0, 1): [1]}
    order = sorted(groups, key=lambda key: (key[0], -key[1]))
    return [sorted(groups[key]) for key in order]


def search_minimal(tower: Tower, m: int, budget: Optional[int] = None) -> SearchResult:
    """Least verified pair under the (vector, twist) order.

    Cells are decided exactly, one at a time, vectors in ascending
    lexicographic order and twist tiers from the least class upward.  Within
    the winning tier every residue is decided and the smallest verified one
    is reported.  ``budget`` caps the number of cells; when it runs out the
    result so far is returned with ``complete`` False.
    """
    if m < 1:
        raise ArithmeticDomainError("length m must be positive")
    base_root(tower)
    solver = _CellSolver(tower, m)
    tw = solver.tower
    cells = 0
    for vec in _vectors(tw.n, m):
        for tier in _twist_tiers(tw.p, m):
            verified: List[Tuple[int, NormPairWitness]] = []
            truncated = False
            for d in tier:
                if budget is not None and cells >= budget:
                    truncated = True
                    break
                cells += 1
                witness = solver.decide(vec, d)
                if witness is not None:
                    verified.append((d, witness))
            if verified:
                d0, w0 = min(verified, key=lambda pick: pick[0])
                pair = NormPair(tw.p, tw.n, m, NormVector(tuple(vec)), d0)
                residues = tuple(sorted(d for d, _ in verified))
                return SearchResult(pair, w0, not truncated, cells, residues)
            if truncated:
                return SearchResult(None, None, False, cells, ())
    raise ArithmeticDomainError(
        "no norm pair verified although existence is guaranteed; "
        "this indicates a defect in the tower data"
    )


# ---------------------------------------------------------------------------
# The extension invariant


def i_invariant(tower: Tower):
    """Least level i with the base root inside the two-norm subgroup product.

    Returns -inf when norms from the top level alone suffice.  Membership is
    decided in the base field modulo p^n-th powers, which is exact here
    because the subgroup contains all p^n-th powers.
    """
    base_root(tower)
    n, p = tower.n, tower.p
    tw = tower.at_depth(max(tower.m, n))
    kd = tw.kummer(0)

    def coords(fu: FieldUnit) -> Tuple[int, ...]:
        c = (fu.v,) + kd.dlog(kd.strip_teichmuller(fu.u))
        return tuple(x % p ** n for x in c)

    target = coords(tw.xi(1, level=0))
    rows: List[Tuple[int, ...]] = [(0,) + tuple(r) for r in kd.lattice_mod(n)]
    rows.extend(coords(tw.norm_to_F(g)) for g in tw.jgens(n))

    candidates = [NEG_INF] + list(range(n))
    for i in candidates:
        level_rows = list(rows)
        if not is_neg_inf(i):
            for g in tw.jgens(i):
                up = g if i == n - 1 else tw.embeddings[(i, n - 1)].convert_unit(g)
                level_rows.append(coords(tw.norm(up, n - 1, 0)))
        span = linalg.howell(level_rows, p, n)
        if linalg.in_span(target, span, p, n):
            return i
    raise ArithmeticDomainError(
        "the base root escaped every norm subgroup; existence is guaranteed, "
        "so this indicates a defect in the tower data"
    )


# ---------------------------------------------------------------------------
# Exceptional elements


def check_exceptional(alpha: FieldUnit, tower: Tower) -> bool:
    """Norm has a p-th root in K, sigma-1 sends it to the base root, and
    alpha generates the top step of the tower."""
    xi = base_root(tower)
    n = tower.n
    mod = tower.K
    if alpha.model is not mod:
        raise ArithmeticDomainError("element is not at the top level")
    kd = tower.kummer(n)
    lift = tower.embeddings[(0, n)].convert_unit(tower.norm_to_F(alpha))
    if not kd.is_pth_power(lift, 1):
        return False
    beta = kd.pth_root(lift)
    image = beta.apply_sigma().over(beta)
    xi_top = tower.embeddings[(0, n)].convert_unit(xi)
    if not image.congruent_to(xi_top):
        return False
    return not _fixed_at_level(tower, alpha, n - 1)


# ---------------------------------------------------------------------------
# Inequality clauses for minimal pairs


@dataclass(frozen=True)
class InequalityReport:
    """Clause-by-clause evaluation; any False on a minimal pair falsifies."""

    strict_increase: bool
    nonzero_upper_entries: bool
    gap_growth: bool
    level_floor: bool
    minus_level_floor: bool
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _twist_levels(p: int, d: int, m: int) -> Tuple[bool, Optional[int], int]:
    """(minus side?, exact plus/minus level below m or None, capped level)."""
    minus = p == 2 and (d - 1) % 4 != 0
    v = int_valuation(d + 1, 2) if minus else int_valuation(d - 1, p)
    exact = None if (v is None or v >= m) else v
    capped = m if (v is None or v > m) else v
    return minus, exact, capped


def check_inequalities(pair: NormPair, m: Optional[int] = None) -> InequalityReport:
    """Evaluate the level inequalities every minimal pair must satisfy.

    Twist levels are capped at the pair length, since the twist only matters
    mod p^m and the capped instance always has a representative.
    """
    if m is None:
        m = pair.m
    if m != pair.m:
        raise ArithmeticDomainError(f"pair has length {pair.m}, expected {m}")
    p, a, d = pair.p, pair.a, pair.d
    fin = [not is_neg_inf(x) for x in a]
    bad: List[str] = []
    minus, exact_level, capped_level = _twist_levels(p, d, m)

    ok_inc = True
    for i in range(m):
        for j in range(i + 1, m):
            if fin[i] and fin[j] and not a[i] < a[j]:
                ok_inc = False
                bad.append(f"a_{i}={a[i]} !< a_{j}={a[j]}")

    ok_nonzero = True
    if minus and m >= 2:
        for i in range(1, m):
            if a[i] == 0:
                ok_nonzero = False
                bad.append(f"a_{i}=0 with p=2 and twist 3 mod 4")

    ok_gap = True
    for i in range(m):
        if not fin[i]:
            continue
        if minus and m >= 2 and i == 0 and a[0] == 0:
            continue
        for j in range(1, m - i):
            if fin[i + j] and not a[i] + j < a[i + j]:
                ok_gap = False
                bad.append(f"a_{i}+{j} !< a_{i + j}")

    ok_floor = True
    if exact_level is not None:
        t = exact_level
        for k in range(0, m - t):
            if fin[t + k] and not a[t + k] > k:
                ok_floor = False
                bad.append(f"a_{t + k}={a[t + k]} !> {k} at twist level {t}")

    ok_minus_floor = True
    if minus and fin[0] and a[0] == 0:
        t = capped_level
        for k in range(0, m - t + 1):
            idx = t + k - 1
            if fin[idx] and not a[idx] > k:
                ok_minus_floor = False
                bad.append(f"a_{idx}={a[idx]} !> {k} at minus level {t}")

    return InequalityReport(
        ok_inc, ok_nonzero, ok_gap, ok_floor, ok_minus_floor, tuple(bad)
    )
