"""Fixed-precision arithmetic in small cyclic towers of p-adic fields.

Three families of towers K_0 = F < K_1 < ... < K_n = K are modelled, each
level as Z_p[x]/(g) truncated at a coefficient precision chosen from the
requested class depth m.  On top of the ring arithmetic the module keeps,
per level, an exact basis of the principal-unit filtration deep enough to
decide p^k-th power classes for all k <= m, certified at build time by
counting filtration jumps.  Wrong answers are never returned: a question
beyond the built depth raises PrecisionError instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .group_ring import ArithmeticDomainError, RingParams, int_valuation
from .linalg import AffineSolver
from .rmg_modules import ModuleElement, ModulePresentation

__all__ = [
    "PrecisionError",
    "FieldSpecError",
    "FieldSpec",
    "Model",
    "FieldUnit",
    "KummerData",
    "KummerModule",
    "Tower",
    "build_tower",
    "kummer_module",
    "norm_indices",
    "minus_one_is_norm",
    "QUADRATIC_CLASSES",
]


class PrecisionError(ArithmeticError):
    """The tower does not carry enough digits to decide the question."""


class FieldSpecError(ValueError):
    """Malformed or unsupported field description."""


# ---------------------------------------------------------------------------
# Field specifications


QUADRATIC_CLASSES = (-1, 2, -2, 5, -5, 10, -10)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _canonical_quadratic(a: int) -> int:
    """Square-class representative of a in Q_2, drawn from QUADRATIC_CLASSES."""
    if a == 0:
        raise FieldSpecError("a must be a nonzero integer")
    v = int_valuation(a, 2)
    unit = a >> v
    unit_mod8 = unit % 8
    rep_unit = {1: 1, 3: -5, 5: 5, 7: -1}[unit_mod8]
    rep = rep_unit * (2 if v % 2 else 1)
    if rep == 1:
        raise FieldSpecError(f"a={a} is a square in Q_2; no quadratic extension")
    return rep


@dataclass(frozen=True)
class FieldSpec:
    """One of the supported tower shapes.

    family "unramified":  F = Q_p, K the degree-p^n unramified extension.
    family "cyclotomic":  K_i = Q_p(zeta_{p^{i+1}}), so F = Q_p(zeta_p).
    family "quadratic2":  p = 2, n = 1, K = Q_2(sqrt(a)).
    """

    family: str
    p: int
    n: int
    a: Optional[int] = None

    def __post_init__(self):
        if self.family not in ("unramified", "cyclotomic", "quadratic2"):
            raise FieldSpecError(f"unknown family {self.family!r}")
        if not _is_prime(self.p):
            raise FieldSpecError(f"p={self.p} is not prime")
        if self.n < 1:
            raise FieldSpecError("tower height n must be at least 1")
        if self.family == "quadratic2":
            if self.p != 2 or self.n != 1:
                raise FieldSpecError("quadratic2 towers have p=2, n=1")
            if self.a not in QUADRATIC_CLASSES:
                raise FieldSpecError(f"a={self.a} is not a canonical class")
        else:
            if self.a is not None:
                raise FieldSpecError("a only applies to quadratic2")
        if self.family == "cyclotomic" and self.p == 2 and self.n >= 2:
            raise FieldSpecError(
                "cyclotomic 2-power towers of height >= 2 are not cyclic over Q_2(zeta_2)"
            )

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        tokens = text.strip().lower().split()
        if not tokens:
            raise FieldSpecError("empty field description")
        family = tokens[0]
        kv: Dict[str, int] = {}
        for tok in tokens[1:]:
            if "=" not in tok:
                raise FieldSpecError(f"expected key=value, got {tok!r}")
            key, _, val = tok.partition("=")
            try:
                kv[key] = int(val)
            except ValueError as exc:
                raise FieldSpecError(f"bad integer in {tok!r}") from exc
        if family == "quadratic2":
            if set(kv) - {"a"}:
                raise FieldSpecError("quadratic2 takes only a=<int>")
            if "a" not in kv:
                raise FieldSpecError("quadratic2 needs a=<int>")
            return cls("quadratic2", 2, 1, _canonical_quadratic(kv["a"]))
        if family in ("unramified", "cyclotomic"):
            if set(kv) - {"p", "n"}:
                raise FieldSpecError(f"{family} takes p=<prime> n=<height>")
            if "p" not in kv or "n" not in kv:
                raise FieldSpecError(f"{family} needs p=<prime> n=<height>")
            return cls(family, kv["p"], kv["n"])
        raise FieldSpecError(f"unknown family {family!r}")

    def label(self) -> str:
        if self.family == "quadratic2":
            return f"quadratic2 a={self.a}"
        return f"{self.family} p={self.p} n={self.n}"


# ---------------------------------------------------------------------------
# Polynomials over F_p (plain int lists, used only at build time)


def _ptrim(c: List[int]) -> List[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ptrim(out)


def _pdivmod(num: Sequence[int], den: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    num = list(num)
    den = _ptrim(list(den))
    if not den:
        raise ZeroDivisionError
    inv_lead = pow(den[-1], -1, p)
    q = [0] * max(0, len(num) - len(den) + 1)
    for k in range(len(num) - len(den), -1, -1):
        coef = (num[k + len(den) - 1] * inv_lead) % p
        if coef:
            q[k] = coef
            for j, y in enumerate(den):
                num[k + j] = (num[k + j] - coef * y) % p
    return q, _ptrim(num)


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        _, r = _pdivmod(a, b, p)
        a, b = b, r
    return a


def _ppow_mod(base: Sequence[int], k: int, mod: Sequence[int], p: int) -> List[int]:
    result = [1]
    cur = list(base)
    while k:
        if k & 1:
            _, result = _pdivmod(_pmul(result, cur, p), mod, p)
        cur_sq = _pmul(cur, cur, p)
        _, cur = _pdivmod(cur_sq, mod, p)
        k >>= 1
    return result


def _p_irreducible(g: Sequence[int], p: int) -> bool:
    d = len(g) - 1
    x = [0, 1]
    xq = _ppow_mod(x, p ** d, g, p)
    if _ptrim([(a - b) % p for a, b in itertools.zip_longest(xq, x, fillvalue=0)]):
        return False
    for r in set(_prime_factors(d)):
        xr = _ppow_mod(x, p ** (d // r), g, p)
        diff = _ptrim([(a - b) % p for a, b in itertools.zip_longest(xr, x, fillvalue=0)])
        if len(_pgcd(diff, g, p)) != 1:
            return False
    return True


def _prime_factors(d: int) -> List[int]:
    out = []
    q = 2
    while q * q <= d:
        while d % q == 0:
            out.append(q)
            d //= q
        q += 1
    if d > 1:
        out.append(d)
    return out


def _first_irreducible(p: int, d: int) -> Tuple[int, ...]:
    """Lexicographically first monic irreducible of degree d over F_p."""
    if d == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=d):
        g = list(low) + [1]
        if _p_irreducible(g, p):
            return tuple(g)
    raise ArithmeticDomainError("no irreducible polynomial found")


# ---------------------------------------------------------------------------
# Ring models


Vec = Tuple[int, ...]


class Model:
    """O = Z_p[x]/(g) at fixed coefficient precision p^Ncoef.

    Carries a uniformizer pi (with an exact division routine built from a
    Galois cofactor), the residue-field coordinate map, and the generator
    sigma of the automorphism group used by the tower.
    """

    def __init__(self, p: int, g: Sequence[int], Ncoef: int, e: int, f: int, tag: str):
        self.p = p
        self.g = tuple(c % (p ** Ncoef) for c in g)
        self.D = len(g) - 1
        if self.D < 1 or g[-1] != 1:
            raise ArithmeticDomainError("model polynomial must be monic of degree >= 1")
        self.Ncoef = Ncoef
        self.modulus = p ** Ncoef
        self.e = e
        self.f = f
        if self.e * self.f != self.D:
            raise ArithmeticDomainError("e*f must equal the degree")
        self.tag = tag
        self._xpow = self._build_xpow()
        self._sigma_images: List[Vec] = []
        self._pi_pows: List[Vec] = [self.one()]
        # installed later by _finish_pi / _finish_sigma
        self.pi: Optional[Vec] = None
        self.depth_hint: Optional[int] = None
        self.assert_prec: Optional[int] = None
        self.work_digits: Optional[int] = None

    # -- raw ring ops -------------------------------------------------------

    def _build_xpow(self) -> List[Vec]:
        # x^{D+j} reduced mod g, for j = 0 .. D-2
        D, mod = self.D, self.modulus
        out = []
        cur = [(-c) % mod for c in self.g[:D]]
        out.append(tuple(cur))
        for _ in range(D - 2):
            top = cur[D - 1]
            cur = [0] + cur[: D - 1]
            if top:
                for t in range(D):
                    cur[t] = (cur[t] + top * out[0][t]) % mod
            out.append(tuple(cur))
        return out

    def zero(self) -> Vec:
        return (0,) * self.D

    def one(self) -> Vec:
        return self.from_int(1)

    def from_int(self, c: int) -> Vec:
        return (c % self.modulus,) + (0,) * (self.D - 1)

    def x_element(self) -> Vec:
        if self.D == 1:
            return ((-self.g[0]) % self.modulus,)
        return (0, 1) + (0,) * (self.D - 2)

    def from_poly(self, coeffs: Sequence[int]) -> Vec:
        acc = self.zero()
        xe = self.x_element()
        for c in reversed(list(coeffs)):
            acc = self.add(self.mul(acc, xe), self.from_int(c))
        return acc

    def add(self, a: Vec, b: Vec) -> Vec:
        mod = self.modulus
        return tuple((x + y) % mod for x, y in zip(a, b))

    def sub(self, a: Vec, b: Vec) -> Vec:
        mod = self.modulus
        return tuple((x - y) % mod for x, y in zip(a, b))

    def neg(self, a: Vec) -> Vec:
        mod = self.modulus
        return tuple((-x) % mod for x in a)

    def scalar_mul(self, c: int, a: Vec) -> Vec:
        mod = self.modulus
        return tuple((c * x) % mod for x in a)

    def mul(self, a: Vec, b: Vec) -> Vec:
        D, mod = self.D, self.modulus
        if D == 1:
            return ((a[0] * b[0]) % mod,)
        conv = [0] * (2 * D - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        conv[i + j] = (conv[i + j] + x * y) % mod
        out = conv[:D]
        for k in range(D, 2 * D - 1):
            c = conv[k]
            if c:
                row = self._xpow[k - D]
                for t in range(D):
                    out[t] = (out[t] + c * row[t]) % mod
        return tuple(out)

    def power(self, a: Vec, k: int) -> Vec:
        if k < 0:
            return self.power(self.inverse(a), -k)
        result = self.one()
        cur = a
        while k:
            if k & 1:
                result = self.mul(result, cur)
            cur = self.mul(cur, cur)
            k >>= 1
        return result

    def is_zero(self, a: Vec) -> bool:
        return not any(a)

    # -- inversion ----------------------------------------------------------

    def _inverse_mod_p(self, a: Vec) -> Vec:
        p = self.p
        g = _ptrim([c % p for c in self.g])
        r0, r1 = g, _ptrim([c % p for c in a])
        s0, s1 = [], [1]
        while r1:
            q, r = _pdivmod(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _ptrim(
                [
                    (x - y) % p
                    for x, y in itertools.zip_longest(s0, _pmul(q, s1, p), fillvalue=0)
                ]
            )
        if len(r0) != 1:
            raise ArithmeticDomainError(f"not a unit in {self.tag}")
        c = pow(r0[0], -1, p)
        inv = [(c * x) % p for x in s0]
        inv += [0] * (self.D - len(inv))
        return tuple(inv[: self.D])

    def inverse(self, a: Vec) -> Vec:
        w = self._inverse_mod_p(a)
        digits = 1
        two = self.from_int(2)
        while digits < self.Ncoef:
            w = self.mul(w, self.sub(two, self.mul(a, w)))
            digits *= 2
        return w

    # -- uniformizer machinery ---------------------------------------------

    def _finish_pi(self, pi: Vec, cofactor: Vec) -> None:
        self.pi = pi
        self._pi_pows = [self.one(), pi]
        den_elt = self.mul(pi, cofactor)
        if any(den_elt[1:]):
            raise ArithmeticDomainError("uniformizer cofactor product is not scalar")
        den = den_elt[0]
        dv = int_valuation(den, self.p)
        if dv < 1 or dv >= self.Ncoef:
            raise ArithmeticDomainError("uniformizer norm has bad valuation")
        self._pi_inv_num = cofactor
        self._den_val = dv
        self._den_unit_inv = pow(den // (self.p ** dv), -1, self.modulus)
        # residue coordinates: free columns modulo the row span of pi*x^j
        pi_rows = []
        xe = self.x_element()
        cur = pi
        for _ in range(self.D):
            pi_rows.append(tuple(c % self.p for c in cur))
            cur = self.mul(cur, xe)
        self._res_lattice = linalg.howell(pi_rows, self.p, 1)
        pivot_cols = {next(i for i, x in enumerate(r) if x) for r in self._res_lattice}
        self._res_free_cols = tuple(c for c in range(self.D) if c not in pivot_cols)
        if len(self._res_free_cols) != self.f:
            raise ArithmeticDomainError(
                f"residue field dimension {len(self._res_free_cols)} != f={self.f}"
            )

    def pi_pow(self, j: int) -> Vec:
        while len(self._pi_pows) <= j:
            self._pi_pows.append(self.mul(self._pi_pows[-1], self.pi))
        return self._pi_pows[j]

    def exact_scalar_div(self, a: Vec, k: int) -> Vec:
        """Divide by an integer, exactly in the p-part; unit part inverted."""
        s = int_valuation(k, self.p)
        unit = k // (self.p ** s)
        if unit != 1:
            a = self.scalar_mul(pow(unit, -1, self.modulus), a)
        if s:
            ps = self.p ** s
            if any(c % ps for c in a):
                raise PrecisionError(f"inexact division by {k} in {self.tag}")
            a = tuple(c // ps for c in a)
        return a

    def divide_pi(self, a: Vec) -> Vec:
        w = self.mul(a, self._pi_inv_num)
        if self._den_unit_inv != 1:
            w = self.scalar_mul(self._den_unit_inv, w)
        ps = self.p ** self._den_val
        if any(c % ps for c in w):
            raise PrecisionError(f"element not divisible by uniformizer in {self.tag}")
        return tuple(c // ps for c in w)

    def residue_coords(self, a: Vec) -> Vec:
        red = linalg.reduce_row(tuple(c % self.p for c in a), self._res_lattice, self.p, 1)
        return tuple(red[c] for c in self._res_free_cols)

    def residue_lift(self, coords: Sequence[int]) -> Vec:
        out = [0] * self.D
        for c, col in zip(coords, self._res_free_cols):
            out[col] = c % self.modulus
        return tuple(out)

    def in_max_ideal(self, a: Vec) -> bool:
        return not any(self.residue_coords(a))

    def split(self, a: Vec, cap: Optional[int] = None) -> Tuple[int, Vec]:
        """Write a = pi^v * unit; PrecisionError if v cannot be certified < cap."""
        if cap is None:
            cap = self.val_cap
        cur = a
        for v in range(cap):
            if not self.in_max_ideal(cur):
                return v, cur
            cur = self.divide_pi(cur)
        raise PrecisionError(
            f"valuation of element exceeds certification cap {cap} in {self.tag}"
        )

    def val_at_least(self, a: Vec, k: int) -> bool:
        cur = a
        for _ in range(k):
            if not self.in_max_ideal(cur):
                return False
            cur = self.divide_pi(cur)
        return True

    def congruent(self, a: Vec, b: Vec, depth: Optional[int] = None) -> bool:
        if depth is None:
            depth = self.assert_prec
        return self.val_at_least(self.sub(a, b), depth)

    @property
    def val_cap(self) -> int:
        return self.e * (self.Ncoef - 2)

    # -- automorphism --------------------------------------------------------

    def _finish_sigma(self, sigma_image: Vec) -> None:
        if not self.is_zero(self.eval_g(sigma_image)):
            raise ArithmeticDomainError("sigma image is not a root of g")
        self._sigma_images = [self.x_element(), sigma_image]
        if self.pi is not None:
            spi = self.apply_sigma(self.pi)
            v, u = self.split(spi, cap=4)
            if v != 1:
                raise ArithmeticDomainError("sigma does not preserve the valuation")
            self.sigma_pi_unit = u

    def eval_g(self, z: Vec) -> Vec:
        acc = self.zero()
        for c in reversed(self.g):
            acc = self.add(self.mul(acc, z), self.from_int(c))
        return acc

    def _eval_at(self, poly_vec: Vec, point: Vec) -> Vec:
        acc = self.zero()
        for c in reversed(poly_vec):
            acc = self.add(self.mul(acc, point), self.from_int(c))
        return acc

    def sigma_image(self, t: int = 1) -> Vec:
        while len(self._sigma_images) <= t:
            prev = self._sigma_images[-1]
            self._sigma_images.append(self._eval_at(prev, self._sigma_images[1]))
        return self._sigma_images[t]

    def apply_sigma(self, a: Vec, t: int = 1) -> Vec:
        if t == 0 or self.D == 1:
            return a
        return self._eval_at(a, self.sigma_image(t))

    # -- series --------------------------------------------------------------

    def _series_floor(self, k: int, v: int) -> int:
        # term k of exp/log has valuation >= k*v - e*ceil((k-1)/(p-1)),
        # a bound nondecreasing in k since v > e/(p-1)
        return k * v - (self.e * (k - 1) + self.p - 2) // (self.p - 1)

    def exp(self, w: Vec, target: Optional[int] = None) -> Vec:
        """exp of w with v(w) > e/(p-1), correct to pi^target."""
        if target is None:
            target = self.assert_prec
        n0 = self.e // (self.p - 1) + 1
        if not self.val_at_least(w, n0):
            raise PrecisionError("exp argument too shallow")
        if self.val_at_least(w, target):
            return self.add(self.one(), w)
        v_w, _ = self.split(w, cap=target)
        acc = self.one()
        term = self.one()
        k = 0
        while True:
            k += 1
            if k > 1 and self._series_floor(k, v_w) >= target:
                break
            term = self.exact_scalar_div(self.mul(term, w), k)
            acc = self.add(acc, term)
        return acc

    def log(self, u: Vec, target: Optional[int] = None) -> Vec:
        """log of a principal unit with v(u-1) > e/(p-1), correct to pi^target."""
        if target is None:
            target = self.assert_prec
        z = self.sub(u, self.one())
        if self.is_zero(z):
            return self.zero()
        min_v = self.e // (self.p - 1) + 1
        if not self.val_at_least(z, min_v):
            raise PrecisionError("log argument too shallow")
        if self.val_at_least(z, target):
            return z
        v_z, _ = self.split(z, cap=target)
        acc = self.zero()
        zk = self.one()
        k = 0
        while True:
            k += 1
            if k > 1 and self._series_floor(k, v_z) >= target:
                break
            zk = self.mul(zk, z)
            term = self.exact_scalar_div(zk, k)
            if k % 2 == 0:
                term = self.neg(term)
            acc = self.add(acc, term)
        return acc

    def teichmuller(self, u: Vec) -> Vec:
        q = self.p ** self.f
        t = u
        for _ in range(self.Ncoef + 2):
            t = self.power(t, q)
        return t

    def __repr__(self) -> str:
        return f"Model({self.tag})"


# ---------------------------------------------------------------------------
# Multiplicative elements


@dataclass(frozen=True)
class FieldUnit:
    """Element of K^x as pi^v times a unit, at the model's precision."""

    model: Model
    v: int
    u: Vec

    @classmethod
    def of_element(cls, model: Model, z: Vec, cap: Optional[int] = None) -> "FieldUnit":
        v, u = model.split(z, cap)
        return cls(model, v, u)

    @classmethod
    def of_int(cls, model: Model, c: int) -> "FieldUnit":
        return cls.of_element(model, model.from_int(c))

    def _chk(self, other: "FieldUnit") -> None:
        if other.model is not self.model:
            raise ArithmeticDomainError("operands live in different models")

    def times(self, other: "FieldUnit") -> "FieldUnit":
        self._chk(other)
        return FieldUnit(self.model, self.v + other.v, self.model.mul(self.u, other.u))

    def over(self, other: "FieldUnit") -> "FieldUnit":
        self._chk(other)
        return FieldUnit(
            self.model, self.v - other.v, self.model.mul(self.u, self.model.inverse(other.u))
        )

    def power(self, k: int) -> "FieldUnit":
        return FieldUnit(self.model, self.v * k, self.model.power(self.u, k))

    def apply_sigma(self, t: int = 1) -> "FieldUnit":
        if t == 0:
            return self
        m = self.model
        out_u = m.apply_sigma(self.u, t)
        if self.v:
            # sigma^t(pi) = pi * prod_{s<t} sigma^s(u_sigma)
            shift = m.one()
            for s in range(t):
                shift = m.mul(shift, m.apply_sigma(m.sigma_pi_unit, s))
            out_u = m.mul(out_u, m.power(shift, self.v))
        return FieldUnit(m, self.v, out_u)

    def plus(self, other: "FieldUnit") -> "FieldUnit":
        self._chk(other)
        m = self.model
        base = min(self.v, other.v)
        if base < 0:
            raise ArithmeticDomainError("sum of elements with negative valuation")
        z = m.add(
            m.mul(m.pi_pow(self.v - base), self.u) if self.v > base else self.u,
            m.mul(m.pi_pow(other.v - base), other.u) if other.v > base else other.u,
        )
        v, u = m.split(z)
        return FieldUnit(m, base + v, u)

    def as_element(self) -> Vec:
        if self.v < 0:
            raise ArithmeticDomainError("negative valuation has no ring representative")
        return self.model.mul(self.model.pi_pow(self.v), self.u)

    def congruent_to(self, other: "FieldUnit", depth: Optional[int] = None) -> bool:
        self._chk(other)
        if self.v != other.v:
            return False
        return self.model.congruent(self.u, other.u, depth)

    def serialize(self) -> Dict:
        return {"v": self.v, "unit": list(self.u), "prec": self.model.Ncoef}

    @classmethod
    def deserialize(cls, model: Model, payload: Dict) -> "FieldUnit":
        # extra digits reduce away exactly; missing digits cannot be invented
        prec = payload.get("prec")
        if not isinstance(prec, int) or prec < model.Ncoef:
            raise PrecisionError("serialized element carries too few digits")
        if len(payload["unit"]) != model.D:
            raise ArithmeticDomainError("serialized element has the wrong degree")
        u = tuple(int(c) % model.modulus for c in payload["unit"])
        if model.in_max_ideal(u):
            raise ArithmeticDomainError("serialized unit part is not a unit")
        return cls(model, int(payload["v"]), u)

    def __repr__(self) -> str:
        return f"FieldUnit(v={self.v}, {self.model.tag})"


# ---------------------------------------------------------------------------
# Principal-unit filtration bookkeeping


@dataclass(frozen=True)
class _Pivot:
    lead: Vec            # F_p^f coordinates at this depth
    combo: Vec           # generator exponent vector
    value: Vec           # unit element realizing the combo
    value_inv: Vec


class KummerData:
    """Exact generating set and relation lattice for U^(1)/U^(T) at one level.

    T = floor(e/(p-1)) + 1 + e*m, deep enough that membership of U^(T) in
    the p^k-th powers is automatic for every k <= m.  The build certifies
    the relation lattice by counting exactly f independent filtration jumps
    at every depth 1 <= t < T; any shortfall raises.
    """

    def __init__(self, model: Model, m: int):
        if m < 1:
            raise ArithmeticDomainError("depth m must be at least 1")
        self.model = model
        self.m = m
        p, e, f = model.p, model.e, model.f
        self.N0 = e // (p - 1) + 1
        self.T = self.N0 + e * m
        if model.Ncoef * e < self.T + 3 * e + 8:
            raise PrecisionError(
                f"model {model.tag} too shallow for unit depth {self.T}"
            )
        self.exp_mod = p ** (self.T + e + 4)
        self.gens: List[Vec] = []
        lifts = [model.residue_lift(coords) for coords in _unit_vectors(p, f)]
        for j in range(1, self.N0):
            for b in lifts:
                self.gens.append(model.add(model.one(), model.mul(model.pi_pow(j), b)))
        series_target = self.T + 2 * e + 8
        for j in range(e):
            for b in lifts:
                w = model.mul(model.pi_pow(self.N0 + j), b)
                self.gens.append(model.exp(w, series_target))
        self.s = len(self.gens)
        self._levels: List[Tuple[int, List[_Pivot]]] = []
        self._eliminate()
        self._lattice_cache: Dict[int, Tuple[Vec, ...]] = {}
        self.cert_exp = f * (self.T - 1) + 2
        self._certify_index()
        self._root_solvers: Dict[int, AffineSolver] = {}

    # -- construction ---------------------------------------------------------

    def _lead(self, u: Vec, t: int) -> Vec:
        m = self.model
        w = m.sub(u, m.one())
        for _ in range(t):
            w = m.divide_pi(w)
        return m.residue_coords(w)

    def _eliminate(self) -> None:
        m, p, f = self.model, self.model.p, self.model.f
        work: List[Tuple[Vec, Vec]] = []
        for i, g in enumerate(self.gens):
            combo = tuple(1 if j == i else 0 for j in range(self.s))
            work.append((combo, g))
        for t in range(1, self.T):
            pivots: List[_Pivot] = []
            kernel: List[Tuple[Vec, Vec]] = []
            for combo, value in work:
                lead = list(self._lead(value, t))
                for piv in pivots:
                    pos = next(i for i, x in enumerate(piv.lead) if x)
                    if lead[pos]:
                        c = (lead[pos] * pow(piv.lead[pos], -1, p)) % p
                        lead = [(x - c * y) % p for x, y in zip(lead, piv.lead)]
                        combo = tuple(a - c * b for a, b in zip(combo, piv.combo))
                        value = m.mul(value, m.power(piv.value_inv, c))
                if any(lead):
                    pivots.append(
                        _Pivot(tuple(lead), combo, value, m.inverse(value))
                    )
                else:
                    kernel.append((combo, value))
            if len(pivots) != f:
                raise ArithmeticDomainError(
                    f"unit filtration of {m.tag} has rank {len(pivots)} != {f} "
                    f"at depth {t}"
                )
            pivots.sort(key=lambda piv: next(i for i, x in enumerate(piv.lead) if x))
            self._levels.append((t, pivots))
            work = kernel + [
                (tuple(p * c for c in piv.combo), m.power(piv.value, p))
                for piv in pivots
            ]
        for combo, value in work:
            if not m.val_at_least(m.sub(value, m.one()), self.T):
                raise ArithmeticDomainError("relation row does not reach depth T")
        self.relation_rows = tuple(tuple(c for c in combo) for combo, _ in work)

    def _certify_index(self) -> None:
        p, f = self.model.p, self.model.f
        big = self.cert_exp
        h = linalg.howell(self.relation_rows, p, big)
        if len(h) != self.s:
            raise ArithmeticDomainError("relation lattice is not full rank")
        size = linalg.span_size(h, p, big)
        index = (p ** (big * self.s)) // size
        if index != p ** (f * (self.T - 1)):
            raise ArithmeticDomainError("relation lattice index mismatch")
        self._full_lattice = h

    # -- queries ---------------------------------------------------------------

    def lattice_mod(self, k: int) -> Tuple[Vec, ...]:
        if k not in self._lattice_cache:
            self._lattice_cache[k] = linalg.howell(self.relation_rows, self.model.p, k)
        return self._lattice_cache[k]

    def dlog(self, u: Vec) -> Vec:
        """Exponent vector of a principal unit over the generators, mod U^(T)."""
        m, p = self.model, self.model.p
        if m.in_max_ideal(u):
            raise ArithmeticDomainError("dlog of a non-unit")
        if not m.val_at_least(m.sub(u, m.one()), 1):
            raise ArithmeticDomainError("dlog argument is not a principal unit")
        acc = [0] * self.s
        cur = u
        for t, pivots in self._levels:
            lead = list(self._lead(cur, t))
            for piv in pivots:
                pos = next(i for i, x in enumerate(piv.lead) if x)
                if lead[pos]:
                    c = (lead[pos] * pow(piv.lead[pos], -1, p)) % p
                    lead = [(x - c * y) % p for x, y in zip(lead, piv.lead)]
                    for i, b in enumerate(piv.combo):
                        acc[i] += c * b
                    cur = m.mul(cur, m.power(piv.value_inv, c))
            if any(lead):
                raise ArithmeticDomainError("filtration pivots failed to reduce a class")
        if not m.val_at_least(m.sub(cur, m.one()), self.T):
            raise ArithmeticDomainError("dlog residual did not reach depth T")
        return tuple(acc)

    def unit_from_coords(self, coords: Sequence[int]) -> Vec:
        m = self.model
        out = m.one()
        for g, c in zip(self.gens, coords):
            c %= self.exp_mod
            if c:
                out = m.mul(out, m.power(g, c))
        return out

    def strip_teichmuller(self, u: Vec) -> Vec:
        m = self.model
        w = m.teichmuller(u)
        return m.mul(u, m.inverse(w))

    def is_pth_power(self, fu: FieldUnit, k: int) -> bool:
        if fu.model is not self.model:
            raise ArithmeticDomainError("element from a different model")
        if k < 1:
            raise ArithmeticDomainError("power depth must be positive")
        if k > self.m:
            raise PrecisionError(
                f"tower built for depth {self.m}; cannot decide p^{k}-th powers"
            )
        p = self.model.p
        if fu.v % (p ** k):
            return False
        c = self.dlog(self.strip_teichmuller(fu.u))
        return linalg.in_span(
            tuple(x % (p ** k) for x in c), self.lattice_mod(k), p, k
        )

    def pth_root(self, fu: FieldUnit, k: int = 1) -> FieldUnit:
        m, p = self.model, self.model.p
        if not self.is_pth_power(fu, k):
            raise ArithmeticDomainError(f"element is not a p^{k}-th power")
        q = p ** m.f
        pk = p ** k
        u1 = self.strip_teichmuller(fu.u)
        w = m.mul(fu.u, m.inverse(u1))        # Teichmuller part
        if q > 2:
            w_root = m.power(w, pow(pk, -1, q - 1))
        else:
            w_root = w                        # trivial torsion: w == 1
        c = self.dlog(u1)
        if k not in self._root_solvers:
            self._root_solvers[k] = AffineSolver(
                linalg.identity_rows(self.s, pk),
                p,
                self.cert_exp,
                lout=self.relation_rows,
            )
        y = self._root_solvers[k].solve(tuple(x % (p ** self.cert_exp) for x in c))
        if y is None:
            raise ArithmeticDomainError("root solve failed despite class membership")
        r0 = self.unit_from_coords(y)
        t = m.mul(u1, m.inverse(m.power(r0, pk)))
        if not m.val_at_least(m.sub(t, m.one()), self.T):
            raise ArithmeticDomainError("root residual did not reach depth T")
        series_target = self.T + 2 * m.e + 8
        corr = m.exp(m.exact_scalar_div(m.log(t, series_target), pk), series_target)
        root_u = m.mul(m.mul(r0, corr), w_root)
        root = FieldUnit(m, fu.v // pk, root_u)
        check = root.power(pk)
        if check.v != fu.v or not m.congruent(check.u, fu.u):
            raise ArithmeticDomainError("certified root failed verification")
        return root

    def torsion_mu_p(self) -> Optional[Vec]:
        """An element of exact order p, or None when U^(1) is torsion free."""
        m, p = self.model, self.model.p
        lam1 = self.lattice_mod(1)
        dim = _fp_dim(lam1)
        # U^(1) modulo p-th powers has rank D, plus 1 when mu_p is present.
        if self.s - dim == m.D:
            return None
        big = self.cert_exp
        scaled = linalg.identity_rows(self.s, p)
        cand = linalg.solve_sub(scaled, self._full_lattice, p, big)
        target = None
        for row in cand:
            if not linalg.in_span(tuple(x % p for x in row), lam1, p, 1):
                target = row
                break
        if target is None:
            raise ArithmeticDomainError("torsion detected but no class found")
        u0 = self.unit_from_coords(target)
        t = m.power(u0, p)
        if not m.val_at_least(m.sub(t, m.one()), self.T):
            raise ArithmeticDomainError("torsion candidate is not near-torsion")
        series_target = self.T + 2 * m.e + 8
        corr = m.exp(m.exact_scalar_div(m.log(t, series_target), p), series_target)
        u1 = m.mul(u0, m.inverse(corr))
        if m.congruent(u1, m.one()):
            raise ArithmeticDomainError("torsion candidate collapsed to 1")
        if not m.congruent(m.power(u1, p), m.one()):
            raise ArithmeticDomainError("torsion candidate has wrong order")
        return u1


def _unit_vectors(p: int, f: int) -> List[Tuple[int, ...]]:
    return [tuple(1 if j == i else 0 for j in range(f)) for i in range(f)]


def _fp_dim(hrows: Sequence[Vec]) -> int:
    # dimension of the mod-p span
    return sum(1 for r in hrows if any(r))


# ---------------------------------------------------------------------------
# Embeddings between levels


class Embedding:
    """K_j -> K_i as models, with an inverse on the image.

    The inverse solves inside the trusted digit window shared by the two
    models: coefficients above it may carry pi-division fuzz.
    """

    def __init__(self, low: Model, high: Model, im_x: Vec):
        self.low = low
        self.high = high
        self.im_x = im_x
        rows = []
        cur = high.one()
        for _ in range(low.D):
            rows.append(cur)
            cur = high.mul(cur, im_x)
        self.rows = tuple(rows)
        self.solve_digits = min(low.work_digits, high.work_digits)
        self.solve_mod = high.p ** self.solve_digits
        self._solver = AffineSolver(self.rows, high.p, self.solve_digits)
        self.rel_ram = high.e // low.e
        im_pi = self.apply(low.pi)
        v, u = high.split(im_pi, cap=self.rel_ram + 2)
        if v != self.rel_ram:
            raise ArithmeticDomainError("embedded uniformizer has wrong valuation")
        self.pi_unit = u            # emb(pi_low) = pi_high^rel_ram * pi_unit

    def apply(self, z: Vec) -> Vec:
        out = self.high.zero()
        for c, row in zip(z, self.rows):
            if c:
                out = self.high.add(out, self.high.scalar_mul(c, row))
        return out

    def convert_unit(self, fu: FieldUnit) -> FieldUnit:
        if fu.model is not self.low:
            raise ArithmeticDomainError("element not in the embedding domain")
        u = self.apply(fu.u)
        if fu.v:
            u = self.high.mul(u, self.high.power(self.pi_unit, fu.v))
        return FieldUnit(self.high, fu.v * self.rel_ram, u)

    def invert_unit(self, fu: FieldUnit) -> FieldUnit:
        """Preimage of an element known to lie in the lower level."""
        if fu.model is not self.high:
            raise ArithmeticDomainError("element not in the embedding codomain")
        if fu.v % self.rel_ram:
            raise ArithmeticDomainError("valuation shows the element is not in the subfield")
        v_low = fu.v // self.rel_ram
        u_target = fu.u
        if v_low:
            u_target = self.high.mul(
                u_target, self.high.power(self.high.inverse(self.pi_unit), v_low)
            )
        reduced = tuple(c % self.solve_mod for c in u_target)
        y = self._solver.solve(reduced)
        if y is None:
            raise ArithmeticDomainError("element does not lie in the subfield")
        back = self.apply(y)
        if any((a - b) % self.solve_mod for a, b in zip(back, u_target)):
            raise ArithmeticDomainError("subfield solve failed round trip")
        return FieldUnit(self.low, v_low, tuple(y))


# ---------------------------------------------------------------------------
# Towers


class Tower:
    """A cyclic tower K_0 < ... < K_n with per-level unit bookkeeping."""

    def __init__(self, spec: FieldSpec, m: int, extra_digits: int = 0):
        if m < 1:
            raise ArithmeticDomainError("depth m must be at least 1")
        self.spec = spec
        self.m = m
        self.extra_digits = extra_digits
        self.p = spec.p
        self.n = spec.n
        builder = {
            "unramified": _build_unramified,
            "cyclotomic": _build_cyclotomic,
            "quadratic2": _build_quadratic2,
        }[spec.family]
        self.models: Tuple[Model, ...] = builder(spec, m, extra_digits)
        self.K = self.models[self.n]
        self.F = self.models[0]
        self.embeddings: Dict[Tuple[int, int], Embedding] = {}
        for j in range(self.n + 1):
            for i in range(j + 1, self.n + 1):
                self.embeddings[(j, i)] = _build_embedding(
                    self.spec, self.models, j, i
                )
        self._check_sigma_compat()
        self._kummer: Dict[int, KummerData] = {}
        self._jmod: Dict[int, "KummerModule"] = {}
        self._nu: Dict[int, Tuple[int, bool, Dict[int, Vec]]] = {}

    # -- assembly checks ------------------------------------------------------

    def _check_sigma_compat(self) -> None:
        for i in range(1, self.n + 1):
            mod = self.models[i]
            x = mod.x_element()
            if not mod.congruent(mod.apply_sigma(x, self.p ** i), x):
                raise ArithmeticDomainError("sigma does not have the declared order")
            if mod.congruent(mod.apply_sigma(x, self.p ** (i - 1)), x):
                raise ArithmeticDomainError("sigma order is too small")
        for (j, i), emb in self.embeddings.items():
            low, high = self.models[j], self.models[i]
            lhs = high.apply_sigma(emb.im_x)
            rhs = emb.apply(low.apply_sigma(low.x_element()))
            if not high.congruent(lhs, rhs):
                raise ArithmeticDomainError("sigma restriction disagrees with embedding")

    # -- caches ----------------------------------------------------------------

    def kummer(self, level: int) -> KummerData:
        if level not in self._kummer:
            self._kummer[level] = KummerData(self.models[level], self.m)
        return self._kummer[level]

    def at_depth(self, m: int) -> "Tower":
        if m <= self.m:
            return self
        return Tower(self.spec, m, self.extra_digits)

    # -- roots of unity ----------------------------------------------------------

    def _seed(self, level: int) -> Optional[Tuple[int, Vec]]:
        """A known primitive p-power root of unity (order exponent, element)."""
        mod = self.models[level]
        fam = self.spec.family
        if fam == "cyclotomic":
            return (level + 1, mod.x_element())
        if self.p == 2:
            if fam == "quadratic2" and self.spec.a == -1 and level == 1:
                return (2, mod.x_element())
            return (1, mod.from_int(-1))
        return None

    def roots_of_unity_level(self, level: Optional[int] = None) -> Tuple[int, bool]:
        """(nu, capped): mu_{p^nu} lies in the level; capped at m+n+2."""
        if level is None:
            level = self.n
        nu, capped, _ = self._nu_data(level)
        return nu, capped

    def _nu_data(self, level: int) -> Tuple[int, bool, Dict[int, Vec]]:
        if level in self._nu:
            return self._nu[level]
        mod = self.models[level]
        kd = self.kummer(level)
        cap = self.m + self.n + 2
        seed = self._seed(level)
        if seed is None:
            tor = kd.torsion_mu_p()
            if tor is None:
                self._nu[level] = (0, False, {})
                return self._nu[level]
            lvl, cur = 1, tor
        else:
            lvl, cur = seed
            # certify the seed really has exact order p^lvl
            top_p = mod.power(cur, self.p ** lvl)
            below = mod.power(cur, self.p ** (lvl - 1))
            if not mod.congruent(top_p, mod.one()) or mod.congruent(below, mod.one()):
                raise ArithmeticDomainError("seed root of unity has wrong order")
        capped = False
        while lvl < cap:
            fu = FieldUnit(mod, 0, cur)
            if not kd.is_pth_power(fu, 1):
                break
            cur = kd.pth_root(fu).u
            lvl += 1
        else:
            capped = kd.is_pth_power(FieldUnit(mod, 0, cur), 1)
        table = {lvl: cur}
        for j in range(lvl - 1, 0, -1):
            table[j] = mod.power(table[j + 1], self.p)
        self._nu[level] = (lvl, capped, table)
        return self._nu[level]

    def xi(self, j: int, level: Optional[int] = None) -> FieldUnit:
        """A primitive p^j-th root of unity at the given level."""
        if level is None:
            level = self.n
        nu, _, table = self._nu_data(level)
        if j < 1 or j > nu:
            raise ArithmeticDomainError(f"no primitive root of order p^{j} at level {level}")
        return FieldUnit(self.models[level], 0, table[j])

    @property
    def nu(self) -> int:
        return self.roots_of_unity_level(self.n)[0]

    @property
    def nu_F(self) -> int:
        return self.roots_of_unity_level(0)[0]

    # -- norms -------------------------------------------------------------------

    def norm(self, fu: FieldUnit, i: int, j: int) -> FieldUnit:
        """Norm K_i -> K_j of an element given in level-i coordinates."""
        if not 0 <= j <= i <= self.n:
            raise ArithmeticDomainError("levels out of range")
        if fu.model is not self.models[i]:
            raise ArithmeticDomainError("element is not at the claimed level")
        if i == j:
            return fu
        acc = fu
        prod = fu
        step = self.p ** j
        count = self.p ** (i - j)
        for t in range(1, count):
            acc = acc.apply_sigma(step)
            prod = prod.times(acc)
        return self.embeddings[(j, i)].invert_unit(prod)

    def norm_to_F(self, fu: FieldUnit) -> FieldUnit:
        return self.norm(fu, self.n, 0)

    # -- J-modules ----------------------------------------------------------------

    def jgens(self, level: int) -> List[FieldUnit]:
        """pi followed by the principal-unit generators, as field elements."""
        mod = self.models[level]
        kd = self.kummer(level)
        out = [FieldUnit(mod, 1, mod.one())]
        out.extend(FieldUnit(mod, 0, g) for g in kd.gens)
        return out

    def jmodule(self, k: int) -> "KummerModule":
        if k < 1 or k > self.m:
            raise PrecisionError(f"tower built for depth {self.m}, asked for {k}")
        if k not in self._jmod:
            self._jmod[k] = _assemble_jmodule(self, k)
        return self._jmod[k]


@dataclass
class KummerModule:
    """K^x / (K^x)^{p^m} presented as a module over (Z/p^m)[C_{p^n}]."""

    tower: Tower
    m: int
    presentation: ModulePresentation
    gen_units: Tuple[FieldUnit, ...]
    nu: int
    scalar_rows: Tuple[Tuple[int, ...], ...]
    action_rows: Tuple[Tuple[int, ...], ...]

    def class_of(self, fu: FieldUnit, verify: bool = True) -> ModuleElement:
        tower = self.tower
        kd = tower.kummer(tower.n)
        mod = tower.K
        if fu.model is not mod:
            raise ArithmeticDomainError("element does not live at the top level")
        p, k = tower.p, self.m
        stripped = kd.strip_teichmuller(fu.u)
        coords = (fu.v,) + kd.dlog(stripped)
        if verify:
            probe = FieldUnit(mod, 0, mod.one())
            for g, c in zip(self.gen_units, coords):
                cc = c % kd.exp_mod
                if cc:
                    probe = probe.times(g.power(cc))
            ratio = fu.over(probe)
            if not kd.is_pth_power(ratio, k):
                raise ArithmeticDomainError("dlog verification failed")
        width = self.presentation.params.width
        flat = [0] * (len(self.gen_units) * width)
        for idx, c in enumerate(coords):
            flat[idx * width] = c % (p ** k)
        return self.presentation.element_from_flat(flat)

    @property
    def size(self) -> int:
        return self.presentation.size


def _assemble_jmodule(tower: Tower, k: int) -> KummerModule:
    p, n = tower.p, tower.n
    kd = tower.kummer(n)
    mod = tower.K
    params = RingParams(p, n, k, level=n)
    names = ["pi"] + [f"u{i}" for i in range(kd.s)]
    scalar_rows = [(0,) + tuple(row) for row in kd.relation_rows]
    action: List[Tuple[int, ...]] = []
    spi = FieldUnit(mod, 1, mod.one()).apply_sigma()
    row = (1,) + kd.dlog(kd.strip_teichmuller(spi.u))
    action.append(tuple(c % (p ** k) for c in row))
    for g in kd.gens:
        sg = mod.apply_sigma(g)
        row = (0,) + kd.dlog(kd.strip_teichmuller(sg))
        action.append(tuple(c % (p ** k) for c in row))
    pres = ModulePresentation.from_action(params, names, scalar_rows, action)
    nu, _ = tower.roots_of_unity_level(n)
    expected = p ** (k * (mod.D + 1) + min(k, nu))
    if pres.size != expected:
        raise ArithmeticDomainError(
            f"Kummer module has size {pres.size}, expected {expected}"
        )
    gen_units = tuple(tower.jgens(n))
    return KummerModule(
        tower, k, pres, gen_units, nu, tuple(scalar_rows), tuple(action)
    )


def kummer_module(tower: Tower, m: int) -> KummerModule:
    return tower.jmodule(m)


# ---------------------------------------------------------------------------
# Family builders


def _ncoef(p: int, e: int, m: int, n: int, extra: int) -> int:
    # sized so that the trusted digit window survives worst-case losses
    # from pi-division and series denominators
    n0 = e // (p - 1) + 1
    T = n0 + e * m
    return 3 * T + 2 * ((T + 8 + e - 1) // e) + m + n + 16 + extra


def _finish(model: Model, pi: Vec, cofactor: Vec, sigma_image: Vec, m: int) -> Model:
    model._finish_pi(pi, cofactor)
    model.depth_hint = m
    n0 = model.e // (model.p - 1) + 1
    t_depth = n0 + model.e * m
    model.assert_prec = t_depth + model.e + 4
    model.work_digits = (t_depth + 2 * model.e + 8 + model.e - 1) // model.e + 2
    model._finish_sigma(sigma_image)
    return model


def _build_unramified(spec: FieldSpec, m: int, extra: int) -> Tuple[Model, ...]:
    p, n = spec.p, spec.n
    Ncoef = _ncoef(p, 1, m, n, extra)
    models = []
    for i in range(n + 1):
        D = p ** i
        g = _first_irreducible(p, D)
        model = Model(p, g, Ncoef, 1, D, f"unramified[{p}^{i}]")
        pi = model.from_int(p)
        cof = model.one()
        sigma_image = _frobenius_root(model) if D > 1 else model.x_element()
        _finish(model, pi, cof, sigma_image, m)
        models.append(model)
    return tuple(models)


def _frobenius_root(model: Model) -> Vec:
    """Hensel root h of g with h = x^p mod p: the Frobenius image of x."""
    p = model.p
    h = model.power(model.x_element(), p)
    digits = 1
    while digits < model.Ncoef:
        gh = model.eval_g(h)
        gprime = _eval_g_prime(model, h)
        h = model.sub(h, model.mul(gh, model.inverse(gprime)))
        digits *= 2
    if not model.is_zero(model.eval_g(h)):
        raise ArithmeticDomainError("Frobenius lift did not converge")
    return h


def _eval_g_prime(model: Model, z: Vec) -> Vec:
    acc = model.zero()
    for k in range(len(model.g) - 1, 0, -1):
        acc = model.add(model.mul(acc, z), model.from_int(k * model.g[k]))
    return acc


def _build_cyclotomic(spec: FieldSpec, m: int, extra: int) -> Tuple[Model, ...]:
    p, n = spec.p, spec.n
    e_top = (p - 1) * p ** n
    Ncoef = _ncoef(p, e_top, m, n, extra)
    c = 1 + p if p != 2 else 3
    models = []
    for i in range(n + 1):
        order = p ** (i + 1)
        g = _cyclotomic_poly(p, i + 1)
        e = (p - 1) * p ** i
        model = Model(p, g, Ncoef, e, 1, f"cyclotomic[{p}^{i + 1}]")
        x = model.x_element()
        pi = model.sub(x, model.one())
        if model.D == 1:
            cof = model.one()
        else:
            cof = model.one()
            for j in range(2, order):
                if j % p == 0:
                    continue
                conj = model.sub(model.power(x, j), model.one())
                cof = model.mul(cof, conj)
        sigma_image = model.power(x, c % order)
        _finish(model, pi, cof, sigma_image, m)
        models.append(model)
    return tuple(models)


def _cyclotomic_poly(p: int, k: int) -> Tuple[int, ...]:
    # Phi_{p^k}(x) = sum_{j<p} x^{j p^{k-1}}
    D = (p - 1) * p ** (k - 1)
    g = [0] * (D + 1)
    for j in range(p):
        g[j * p ** (k - 1)] = 1
    return tuple(g)


def _build_quadratic2(spec: FieldSpec, m: int, extra: int) -> Tuple[Model, ...]:
    a = spec.a
    e = 1 if a == 5 else 2
    Ncoef = _ncoef(2, e, m, 1, extra)
    base = Model(2, (0, 1), Ncoef, 1, 1, "Q_2")
    _finish(base, base.from_int(2), base.one(), base.x_element(), m)
    if a == 5:
        # the unramified class: model on x^2 - x - 1, sqrt(5) = 2x - 1
        top = Model(2, (-1, -1, 1), Ncoef, 1, 2, "Q_2(sqrt(5))")
        x = top.x_element()
        pi = top.from_int(2)
        cof = top.one()
        sigma_image = top.sub(top.one(), x)
    else:
        top = Model(2, (-a, 0, 1), Ncoef, 2, 1, f"Q_2(sqrt({a}))")
        x = top.x_element()
        sigma_image = top.neg(x)
        if a % 2 == 0:
            pi = x
            cof = x             # pi * cof = a, |a| in {2, 10}
        else:
            pi = top.add(top.one(), x)
            cof = top.sub(top.one(), x)   # pi * cof = 1 - a, a in {-1, -5}
    _finish(top, pi, cof, sigma_image, m)
    return (base, top)


def _build_embedding(
    spec: FieldSpec, models: Tuple[Model, ...], j: int, i: int
) -> Embedding:
    low, high = models[j], models[i]
    if low.D == 1:
        im_x = high.from_int((-low.g[0]) % low.modulus)
        return Embedding(low, high, im_x)
    if spec.family == "cyclotomic":
        im_x = high.power(high.x_element(), spec.p ** (i - j))
        return Embedding(low, high, im_x)
    if spec.family == "unramified":
        im_x = _subfield_root(low, high)
        return Embedding(low, high, im_x)
    raise ArithmeticDomainError("no embedding rule for this family")


def _subfield_root(low: Model, high: Model) -> Vec:
    """Hensel-lifted root of low.g inside high, found in the residue field."""
    p = high.p
    g_res = [c % p for c in low.g]
    root_res = None
    for cand in itertools.product(range(p), repeat=high.D):
        acc = [0] * high.D
        # Horner evaluation of g_res at cand in F_p[x]/(high.g mod p)
        for c in reversed(g_res):
            acc = _respoly_mul(acc, list(cand), high)
            acc[0] = (acc[0] + c) % p
        if not any(acc):
            root_res = cand
            break
    if root_res is None:
        raise ArithmeticDomainError("no residue root for subfield embedding")
    h = tuple(root_res)
    digits = 1
    while digits < high.Ncoef:
        gh = _eval_poly_in_model(low.g, h, high)
        gp = _eval_poly_in_model(_derivative(low.g), h, high)
        h = high.sub(h, high.mul(gh, high.inverse(gp)))
        digits *= 2
    if not high.is_zero(_eval_poly_in_model(low.g, h, high)):
        raise ArithmeticDomainError("subfield root lift did not converge")
    return h


def _respoly_mul(a: List[int], b: List[int], model: Model) -> List[int]:
    p, D = model.p, model.D
    conv = [0] * (2 * D - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    conv[i + j] = (conv[i + j] + x * y) % p
    out = conv[:D]
    for k in range(D, 2 * D - 1):
        c = conv[k]
        if c:
            row = model._xpow[k - D]
            for t in range(D):
                out[t] = (out[t] + c * row[t]) % p
    return out


def _eval_poly_in_model(poly: Sequence[int], z: Vec, model: Model) -> Vec:
    acc = model.zero()
    for c in reversed(list(poly)):
        acc = model.add(model.mul(acc, z), model.from_int(c))
    return acc


def _derivative(poly: Sequence[int]) -> Tuple[int, ...]:
    return tuple(k * poly[k] for k in range(1, len(poly)))


def build_tower(spec: FieldSpec, m: int, extra_digits: int = 0) -> Tower:
    return Tower(spec, m, extra_digits)


# ---------------------------------------------------------------------------
# Norm-index computation


def norm_indices(tower: Tower) -> Tuple[int, ...]:
    """Dimensions e_i of the norm filtration steps of F^x mod p-th powers.

    e_i for i < n measures norms from level i against norms from level i+1;
    e_n measures norms from the top level against all of F^x.
    """
    p, n = tower.p, tower.n
    kd_F = tower.kummer(0)
    lam = kd_F.lattice_mod(1)

    span_rows: List[Tuple[Vec, ...]] = []
    for i in range(n + 1):
        rows = []
        for g in tower.jgens(i):
            nf = tower.norm(g, i, 0)
            coords = (nf.v,) + kd_F.dlog(kd_F.strip_teichmuller(nf.u))
            rows.append(tuple(c % p for c in coords))
        span_rows.append(tuple(rows))

    lam_aug = linalg.howell([(0,) + tuple(r) for r in lam], p, 1)
    lam_log = _span_log(lam_aug, p, 1)
    spans = []
    for rows in span_rows:
        spans.append(linalg.howell(list(rows) + list(lam_aug), p, 1))
    dims = [_span_log(s, p, 1) - lam_log for s in spans]
    for i in range(n):
        for row in spans[i + 1]:
            if not linalg.in_span(row, spans[i], p, 1):
                raise ArithmeticDomainError("norm spans are not nested")
    out = []
    for i in range(n):
        out.append(dims[i] - dims[i + 1])
    out.append(dims[n])
    return tuple(out)


def _span_log(hrows: Sequence[Vec], p: int, m: int) -> int:
    size = linalg.span_size(hrows, p, m)
    out = 0
    while size > 1:
        size //= p
        out += 1
    return out


def minus_one_is_norm(tower: Tower) -> bool:
    """Whether -1 is a norm from the top of a quadratic 2-adic tower."""
    if tower.p != 2 or tower.n != 1:
        raise ArithmeticDomainError("the -1 norm test applies to p=2, n=1 towers")
    kd_F = tower.kummer(0)
    lam = tuple((0,) + tuple(r) for r in kd_F.lattice_mod(1))
    rows = []
    for g in tower.jgens(1):
        nf = tower.norm(g, 1, 0)
        coords = (nf.v,) + kd_F.dlog(kd_F.strip_teichmuller(nf.u))
        rows.append(tuple(c % 2 for c in coords))
    span = linalg.howell(list(rows) + list(lam), 2, 1)
    m1 = FieldUnit.of_int(tower.F, -1)
    target = (m1.v % 2,) + tuple(
        c % 2 for c in kd_F.dlog(kd_F.strip_teichmuller(m1.u))
    )
    return linalg.in_span(target, span, 2, 1)
