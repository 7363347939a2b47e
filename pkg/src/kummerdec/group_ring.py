"""Exact arithmetic in truncated cyclic-group rings (Z/p^m)[C_{p^i}].

Everything downstream runs over R = (Z/p^m)[sigma]/(sigma^{p^i} - 1) for a
prime p: element arithmetic, the canonical digit table in powers of
(sigma - 1), partial-norm operators, scalar evaluation maps sigma -> d, and
the congruence-depth classification of twists d in 1 + pZ.

Coefficients are ordinary Python integers reduced into [0, p^m); the modulus
is capped so residues always fit in a machine word.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

MAX_MODULUS = 2 ** 63
MAX_WIDTH = 2 ** 20


class ArithmeticDomainError(ValueError):
    """Out-of-contract parameters: bad prime, overflow, shape mismatch."""


class NegInfinity:
    """Ordered sentinel for absent ramification-vector entries.

    Compares below every integer, absorbs addition, and is never equal to a
    number, so vectors mixing integers and the sentinel sort lexicographically
    without special cases.
    """

    _singleton: Optional["NegInfinity"] = None

    def __new__(cls) -> "NegInfinity":
        if cls._singleton is None:
            cls._singleton = super().__new__(cls)
        return cls._singleton

    def __lt__(self, other) -> bool:
        return other is not self

    def __le__(self, other) -> bool:
        return True

    def __gt__(self, other) -> bool:
        return False

    def __ge__(self, other) -> bool:
        return other is self

    def __add__(self, other) -> "NegInfinity":
        return self

    __radd__ = __add__

    def __repr__(self) -> str:
        return "-inf"

    def __reduce__(self):
        return (NegInfinity, ())


NEG_INF = NegInfinity()


def is_neg_inf(value) -> bool:
    return isinstance(value, NegInfinity)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    q = 2
    while q * q <= p:
        if p % q == 0:
            return False
        q += 1
    return True


def int_valuation(value: int, p: int) -> Optional[int]:
    """p-adic valuation of a nonzero integer; None encodes +infinity for 0."""
    if value == 0:
        return None
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


@dataclass(frozen=True)
class RingParams:
    """Shape of (Z/p^m)[C_{p^level}] inside the ambient group of order p^n."""

    p: int
    n: int
    m: int
    level: Optional[int] = None

    def __post_init__(self):
        level = self.n if self.level is None else self.level
        object.__setattr__(self, "level", level)
        if not _is_prime(self.p):
            raise ArithmeticDomainError(f"p must be prime, got {self.p}")
        if self.n < 0 or self.m < 1:
            raise ArithmeticDomainError("need n >= 0 and m >= 1")
        if not 0 <= level <= self.n:
            raise ArithmeticDomainError(f"level must lie in [0, {self.n}]")
        if self.p ** self.m > MAX_MODULUS:
            raise ArithmeticDomainError("p^m exceeds the 2^63 residue bound")
        if self.p ** self.n > MAX_WIDTH:
            raise ArithmeticDomainError("group order p^n too large")

    @property
    def modulus(self) -> int:
        return self.p ** self.m

    @property
    def width(self) -> int:
        return self.p ** self.level

    def at_level(self, level: int) -> "RingParams":
        return RingParams(self.p, self.n, self.m, level)

    def at_m(self, m: int) -> "RingParams":
        return RingParams(self.p, self.n, m, self.level)


@dataclass(frozen=True)
class GroupRingElement:
    """Element of (Z/p^m)[sigma]/(sigma^width - 1), coefficients by exponent."""

    params: RingParams
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.params.width:
            raise ArithmeticDomainError("coefficient vector has wrong length")

    def _match(self, other: "GroupRingElement") -> None:
        if self.params != other.params:
            raise ArithmeticDomainError("ring parameter mismatch")

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._match(other)
        mod = self.params.modulus
        return GroupRingElement(
            self.params,
            tuple((a + b) % mod for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._match(other)
        mod = self.params.modulus
        return GroupRingElement(
            self.params,
            tuple((a - b) % mod for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self) -> "GroupRingElement":
        mod = self.params.modulus
        return GroupRingElement(self.params, tuple((-a) % mod for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            mod = self.params.modulus
            return GroupRingElement(
                self.params, tuple((a * other) % mod for a in self.coeffs)
            )
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        self._match(other)
        w = self.params.width
        mod = self.params.modulus
        out = [0] * w
        for s, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for t, b in enumerate(other.coeffs):
                if b == 0:
                    continue
                k = s + t
                if k >= w:
                    k -= w
                out[k] = (out[k] + a * b) % mod
        return GroupRingElement(self.params, tuple(out))

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, exponent: int) -> "GroupRingElement":
        if exponent < 0:
            raise ArithmeticDomainError("negative powers are not defined here")
        result = one(self.params)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shift(self, t: int) -> "GroupRingElement":
        """Multiply by sigma^t (a cyclic rotation of the coefficients)."""
        w = self.params.width
        t %= w
        return GroupRingElement(self.params, self.coeffs[-t:] + self.coeffs[:-t])

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def scale_mod(self, m: int) -> "GroupRingElement":
        """Reduce into the same ring with coefficient length m <= self.params.m."""
        if m > self.params.m:
            raise ArithmeticDomainError("cannot extend coefficient precision")
        q = self.params.at_m(m)
        mod = q.modulus
        return GroupRingElement(q, tuple(a % mod for a in self.coeffs))

    def __str__(self) -> str:
        terms = []
        for t, a in enumerate(self.coeffs):
            if a == 0:
                continue
            if t == 0:
                terms.append(str(a))
            elif t == 1:
                terms.append(f"{a}*s" if a != 1 else "s")
            else:
                terms.append(f"{a}*s^{t}" if a != 1 else f"s^{t}")
        return " + ".join(terms) if terms else "0"


def zero(params: RingParams) -> GroupRingElement:
    return GroupRingElement(params, (0,) * params.width)


def one(params: RingParams) -> GroupRingElement:
    return scalar(params, 1)


def scalar(params: RingParams, value: int) -> GroupRingElement:
    c = [0] * params.width
    c[0] = value % params.modulus
    return GroupRingElement(params, tuple(c))


def sigma(params: RingParams, t: int = 1) -> GroupRingElement:
    c = [0] * params.width
    c[t % params.width] = 1
    return GroupRingElement(params, tuple(c))


def from_coeffs(params: RingParams, coeffs: Sequence[int]) -> GroupRingElement:
    mod = params.modulus
    w = params.width
    out = [0] * w
    for t, a in enumerate(coeffs):
        out[t % w] = (out[t % w] + a) % mod
    return GroupRingElement(params, tuple(out))


def sigma_minus_d(params: RingParams, d: int) -> GroupRingElement:
    return sigma(params) - scalar(params, d)


def p_operator(params: RingParams, i: int, j: int) -> GroupRingElement:
    """Partial-norm operator: sum of sigma^{k p^j} for 0 <= k < p^{i-j}.

    Acting on a sigma^{p^i}-fixed element it computes the norm from level i
    down to level j.  Requires 0 <= j <= i <= params.level so that all
    exponents stay inside the group.
    """
    if not 0 <= j <= i <= params.level:
        raise ArithmeticDomainError("p_operator needs 0 <= j <= i <= level")
    p = params.p
    out = [0] * params.width
    step = p ** j
    for k in range(p ** (i - j)):
        out[(k * step) % params.width] += 1
    mod = params.modulus
    return GroupRingElement(params, tuple(a % mod for a in out))


@lru_cache(maxsize=None)
def _sigma_minus_one_powers(params: RingParams) -> Tuple[Tuple[int, ...], ...]:
    """(sigma-1)^j mod (p^m, sigma^width - 1) for 0 <= j < width."""
    rows = [one(params)]
    g = sigma_minus_d(params, 1)
    for _ in range(params.width - 1):
        rows.append(rows[-1] * g)
    return tuple(r.coeffs for r in rows)


@lru_cache(maxsize=None)
def _binomial_basis_inverse(p: int, width: int) -> Tuple[Tuple[int, ...], ...]:
    """Inverse mod p of the matrix whose columns are (sigma-1)^j, j < width."""
    cols = []
    q = RingParams(p, _exp_of(width, p), 1, _exp_of(width, p))
    for row in _sigma_minus_one_powers(q):
        cols.append([c % p for c in row])
    # Gauss-Jordan over F_p on the width x width matrix with columns cols[j].
    a = [[cols[j][t] % p for j in range(width)] for t in range(width)]
    inv = [[1 if s == t else 0 for s in range(width)] for t in range(width)]
    for col in range(width):
        piv = next(r for r in range(col, width) if a[r][col] % p != 0)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        u = pow(a[col][col], -1, p)
        a[col] = [(u * x) % p for x in a[col]]
        inv[col] = [(u * x) % p for x in inv[col]]
        for r in range(width):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
                inv[r] = [(x - f * y) % p for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def _exp_of(width: int, p: int) -> int:
    e = 0
    w = width
    while w > 1:
        w //= p
        e += 1
    return e


def canonical_table(f: GroupRingElement) -> Tuple[Tuple[int, ...], ...]:
    """Unique digits a[i][j] in [0, p) with f = sum p^i * a[i][j] * (sigma-1)^j.

    Rows are indexed by the coefficient layer i < m, columns by the binomial
    exponent j < width.  Digit peeling: expand the mod-p reduction in the
    (sigma-1) basis, subtract the integer lift, divide exactly by p, repeat.
    """
    params = f.params
    p, m, w = params.p, params.m, params.width
    binv = _binomial_basis_inverse(p, w)
    binom = _sigma_minus_one_powers(params)
    coeffs = list(f.coeffs)
    rows = []
    for layer in range(m):
        residual = [c % p for c in coeffs]
        digits = tuple(
            sum(binv[j][t] * residual[t] for t in range(w)) % p for j in range(w)
        )
        rows.append(digits)
        mod_left = p ** (m - layer)
        for j, a in enumerate(digits):
            if a:
                bv = binom[j]
                for t in range(w):
                    coeffs[t] = (coeffs[t] - a * bv[t]) % mod_left
        coeffs = [c // p for c in coeffs]
    return tuple(rows)


def from_canonical(params: RingParams, table: Sequence[Sequence[int]]) -> GroupRingElement:
    """Rebuild the element from its canonical digit table."""
    if len(table) != params.m:
        raise ArithmeticDomainError("table must have m rows")
    binom = _sigma_minus_one_powers(params)
    mod = params.modulus
    out = [0] * params.width
    for layer, row in enumerate(table):
        if len(row) != params.width:
            raise ArithmeticDomainError("table row has wrong width")
        pk = params.p ** layer
        for j, a in enumerate(row):
            if not 0 <= a < params.p:
                raise ArithmeticDomainError("digits must lie in [0, p)")
            if a:
                bv = binom[j]
                for t in range(params.width):
                    out[t] = (out[t] + pk * a * bv[t]) % mod
    return GroupRingElement(params, tuple(out))


def phi_d(f: GroupRingElement, d: int, m_out: Optional[int] = None) -> int:
    """Evaluate f at sigma = d, reduced mod p^{m_out}.

    Only defined for m_out <= params.m, because coefficients are known mod
    p^m only.
    """
    params = f.params
    mm = params.m if m_out is None else m_out
    if not 1 <= mm <= params.m:
        raise ArithmeticDomainError("m_out must lie in [1, m]")
    mod = params.p ** mm
    total = 0
    for t, a in enumerate(f.coeffs):
        if a:
            total = (total + a * pow(d, t, mod)) % mod
    return total


@dataclass(frozen=True)
class TwistClass:
    """Congruence depth of a twist d = 1 mod p.

    sign=+1 with level t:    d in U_t \\ U_{t+1}         (label ``U_t``)
    sign=+1 with level None: d = 1 at every tracked depth (label ``U_inf``)
    sign=-1 with level v:    d in -U_v \\ -U_{v+1}, p = 2 (label ``-U_v``)
    sign=-1 with level None: d = -1 at every tracked depth (label ``-1``)
    """

    sign: int
    level: Optional[int]

    @property
    def label(self) -> str:
        if self.sign == 1:
            return "U_inf" if self.level is None else f"U_{self.level}"
        return "-1" if self.level is None else f"-U_{self.level}"

    def __repr__(self) -> str:
        return f"TwistClass({self.label})"


def classify_twist(p: int, d: int, depth: int) -> TwistClass:
    """Classify d in U_1 by congruence depth, truncated at ``depth``.

    Levels >= depth collapse to the unbounded classes, which keeps the result
    a function of d mod p^depth (and mod 2^(depth) on the minus side).
    """
    if depth < 1:
        raise ArithmeticDomainError("depth must be positive")
    if (d - 1) % p != 0:
        raise ArithmeticDomainError(f"twist {d} is not congruent to 1 mod {p}")
    t = int_valuation(d - 1, p)
    if p == 2 and t == 1:
        v = int_valuation(d + 1, 2)
        if v is None or v >= depth:
            return TwistClass(-1, None)
        return TwistClass(-1, v)
    if t is None or t >= depth:
        return TwistClass(1, None)
    return TwistClass(1, t)


def check_upower(p: int, d: int, j: int, depth: int) -> TwistClass:
    """Predicted congruence class of d^{p^j} from the layer lemma alone.

    The prediction is exact (both containment and sharpness) and is compared
    against direct exponentiation in the tests.
    """
    if j < 0:
        raise ArithmeticDomainError("j must be nonnegative")
    base = classify_twist(p, d, depth + j + 2)
    if base.sign == 1:
        if base.level is None:
            return TwistClass(1, None)
        # p > 2, or level > 1, or j = 0; p = 2 with level 1 lands minus-side.
        lvl = base.level + j
        return TwistClass(1, None if lvl >= depth else lvl)
    if j == 0:
        lvl = base.level
        if lvl is not None and lvl >= depth:
            return TwistClass(-1, None)
        return TwistClass(-1, lvl)
    if base.level is None:
        # d = -1 to full tracked depth: squaring kills it.
        return TwistClass(1, None)
    lvl = base.level + j
    return TwistClass(1, None if lvl >= depth else lvl)
