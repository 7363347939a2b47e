"""Full decomposition of the Kummer modules J_m with checkable certificates.

The decomposition splits J_m into at most one non-free summand plus free
summands over the level rings.  Which shape applies is decided by
``select_gate``:

* ``Theorem3`` — the base field has no p-th root of unity; every summand
  is free and the ranks are the norm indices.
* ``Theorem2`` — p = 2, n = 1 and -1 is not a norm; a twisted-cyclic part
  generated by an explicit element ``lambda`` appears, with annihilator
  ``2^nu (sigma - 1)``.
* ``Theorem1`` — the remaining case; a minimal norm pair is searched and
  its witness generates the exceptional summand.

``decompose`` emits a ``DecompositionReport`` holding field-element
certificates for every summand; ``verify_report`` re-checks a report from
scratch so reports function as proofs rather than trusted output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .group_ring import ArithmeticDomainError, RingParams, one, p_operator, scalar, sigma
from .local_field import (
    FieldUnit,
    KummerModule,
    Tower,
    minus_one_is_norm,
    norm_indices,
)
from .norm_pairs import NormPair, NormPairWitness, search_minimal
from .rmg_modules import (
    NEG_INF,
    ModuleElement,
    ModulePresentation,
    NormVector,
    annihilator_element,
    brute_indecomposable,
    construct_X,
    direct_sum_certify,
    ideal_span,
    indecomp_conditions,
    is_free_cyclic,
    is_neg_inf,
    iso_to_X,
)

__all__ = [
    "DecompositionReport",
    "decompose",
    "delta_free_check",
    "select_gate",
    "verify_report",
]

GATES = ("Theorem1", "Theorem2", "Theorem3")

FLAG_NAMES = (
    "generation",
    "independence",
    "free_parts",
    "exceptional",
    "indecomposable",
    "descent",
)


def select_gate(tower: Tower) -> str:
    """Pick the decomposition shape; exactly one gate fires per tower."""
    if tower.nu_F == 0:
        return "Theorem3"
    if tower.p == 2 and tower.n == 1 and not minus_one_is_norm(tower):
        return "Theorem2"
    return "Theorem1"


# -- reports -------------------------------------------------------------------


def _vector_payload(a: Optional[NormVector]):
    if a is None:
        return None
    return ["-inf" if is_neg_inf(x) else int(x) for x in a]


def _vector_from_payload(entries) -> NormVector:
    return NormVector.of(*(NEG_INF if x == "-inf" else int(x) for x in entries))


@dataclass(frozen=True)
class DecompositionReport:
    """Certificates for one decomposition of J_m, independently checkable."""

    gate: str
    p: int
    n: int
    m: int
    nu: int
    a: Optional[NormVector]
    d: Optional[int]
    ranks: Tuple[int, ...]
    alpha: Optional[FieldUnit]
    deltas: Tuple[FieldUnit, ...]
    lam: Optional[FieldUnit]
    frees: Tuple[Tuple[int, FieldUnit], ...]
    flags: Tuple[Tuple[str, bool], ...]
    tower: Tower = field(compare=False, repr=False)

    @property
    def flag_map(self) -> Dict[str, bool]:
        return dict(self.flags)

    @property
    def ok(self) -> bool:
        return bool(self.flags) and all(v for _, v in self.flags)

    def serialize(self) -> Dict:
        return {
            "gate": self.gate,
            "spec": self.tower.spec.label(),
            "p": self.p,
            "n": self.n,
            "m": self.m,
            "nu": self.nu,
            "a": _vector_payload(self.a),
            "d": self.d,
            "ranks": list(self.ranks),
            "certificates": {
                "alpha": self.alpha.serialize() if self.alpha else None,
                "deltas": [fu.serialize() for fu in self.deltas],
                "lambda": self.lam.serialize() if self.lam else None,
                "T": [
                    {"level": lvl, "element": fu.serialize()}
                    for lvl, fu in self.frees
                ],
            },
            "flags": {k: v for k, v in self.flags},
        }

    @classmethod
    def deserialize(cls, tower: Tower, payload: Dict) -> "DecompositionReport":
        gate = payload["gate"]
        if gate not in GATES:
            raise ArithmeticDomainError(f"unknown gate {gate!r}")
        if (payload["p"], payload["n"]) != (tower.p, tower.n):
            raise ArithmeticDomainError("report was made for a different tower")
        if payload.get("spec", tower.spec.label()) != tower.spec.label():
            raise ArithmeticDomainError("report was made for a different tower")
        # same working depth as decompose, so certificates land in the same model
        work = tower.at_depth(
            payload["m"] + 1 if gate == "Theorem1" else payload["m"]
        )
        mod = work.K
        certs = payload["certificates"]
        a = None if payload["a"] is None else _vector_from_payload(payload["a"])
        return cls(
            gate=gate,
            p=payload["p"],
            n=payload["n"],
            m=payload["m"],
            nu=payload["nu"],
            a=a,
            d=payload["d"],
            ranks=tuple(payload["ranks"]),
            alpha=(
                FieldUnit.deserialize(mod, certs["alpha"])
                if certs["alpha"]
                else None
            ),
            deltas=tuple(FieldUnit.deserialize(mod, x) for x in certs["deltas"]),
            lam=(
                FieldUnit.deserialize(mod, certs["lambda"])
                if certs["lambda"]
                else None
            ),
            frees=tuple(
                (int(t["level"]), FieldUnit.deserialize(mod, t["element"]))
                for t in certs["T"]
            ),
            flags=tuple((k, bool(v)) for k, v in payload["flags"].items()),
            tower=work,
        )


# -- the twisted-cyclic generator (Theorem2 gate) --------------------------------


def _lambda_unit(tower: Tower) -> FieldUnit:
    """Element with sigma(lam)/lam equal to the inverse top root of unity."""
    mod = tower.K
    nu = tower.nu
    if nu == 1:
        lam = FieldUnit.of_element(mod, mod.x_element())
    else:
        # (xi - 1)/xi_4 keeps every intermediate integral
        xi = tower.xi(nu)
        num = FieldUnit.of_element(mod, mod.sub(xi.as_element(), mod.one()))
        lam = num.over(tower.xi(2))
    target = tower.xi(nu).power(-1)
    if not lam.apply_sigma().over(lam).congruent_to(target):
        raise ArithmeticDomainError("lambda fails the sigma - 1 identity")
    return lam


def _annihilator_matches(J: KummerModule, lam_cls: ModuleElement, nu: int) -> bool:
    """ann<[lam]_m> = <p^nu (sigma-1)>, both inclusions mod p^m."""
    params = J.presentation.params
    p, m = params.p, params.m
    got = [r for r in annihilator_element(lam_cls) if any(r)]
    gen = scalar(params, p ** nu) * (sigma(params) - one(params))
    want = () if gen.is_zero() else [r for r in ideal_span(gen) if any(r)]
    if not want:
        return not got
    if not got:
        return False
    return all(linalg.in_span(r, want, p, m) for r in got) and all(
        linalg.in_span(r, got, p, m) for r in want
    )


# -- greedy extraction of free parts ---------------------------------------------


def _unit_product(units: Sequence[FieldUnit], coeffs: Sequence[int]) -> FieldUnit:
    acc = None
    for u, c in zip(units, coeffs):
        if not c:
            continue
        term = u.power(c)
        acc = term if acc is None else acc.times(term)
    assert acc is not None
    return acc


class _Extractor:
    """Greedy free-summand extraction, deepest level first.

    Candidates at level i are products of the level-i generators with
    exponents below p, scanned in lexicographic exponent order; a candidate
    is kept when its class generates a free module over the level-i ring
    and the running sum stays direct.  Both conditions reduce to one socle
    membership test: the level-i ring is local with one minimal ideal, so a
    free cyclic span meets the running sum trivially exactly when the socle
    generator p^{m-1} P(i,0) x stays outside it.  That generator is linear
    in the exponent vector, so the failing exponent vectors form a lattice
    computed once per acceptance; the scan then tests each vector against
    it directly.  Cardinality growth is re-checked on every acceptance.
    """

    def __init__(self, J: KummerModule):
        self.J = J
        self.tower = J.tower
        self.M = J.presentation

    def level_units(self, level: int) -> List[FieldUnit]:
        tw = self.tower
        gens = tw.jgens(level)
        if level < tw.n:
            emb = tw.embeddings[(level, tw.n)]
            gens = [emb.convert_unit(g) for g in gens]
        return gens

    def extract(
        self, fixed: Sequence[ModuleElement], wanted: Mapping[int, int]
    ) -> Tuple[List[Tuple[int, FieldUnit, ModuleElement]], int]:
        p, m = self.tower.p, self.J.m
        width = self.M.params.width
        base = self.M.submodule(list(fixed))
        rows = list(base.rows)
        # covering-lattice span sizes; quotient size is recovered at the end
        size = linalg.span_size(base.rows, p, m)
        chosen: List[Tuple[int, FieldUnit, ModuleElement]] = []
        for level in range(self.tower.n, -1, -1):
            need = wanted.get(level, 0)
            if need == 0:
                continue
            units = self.level_units(level)
            classes = [self.J.class_of(u) for u in units]
            op = p_operator(self.M.params, level, 0)
            soc_rows = [((p ** (m - 1)) * (op * cls)).flat for cls in classes]
            block = p ** (m * p ** level)
            found = 0
            ker = linalg.solve_sub(soc_rows, rows, p, m)
            for coeffs in itertools.product(range(p), repeat=len(units)):
                if not any(coeffs):
                    continue
                if linalg.in_span(coeffs, ker, p, m):
                    continue
                cand = classes[0].module.zero()
                for c, cls in zip(coeffs, classes):
                    if c:
                        cand = cand + c * cls
                if not is_free_cyclic(cand, level):
                    raise ArithmeticDomainError(
                        "socle filter accepted a non-free candidate"
                    )
                cand_rows = [cand.shift(t).flat for t in range(width)]
                grown = linalg.howell(rows + cand_rows, p, m)
                grown_size = linalg.span_size(grown, p, m)
                if grown_size != size * block:
                    raise ArithmeticDomainError(
                        "cardinality growth disagrees with the socle test"
                    )
                chosen.append((level, _unit_product(units, coeffs), cand))
                rows = list(grown)
                size = grown_size
                found += 1
                if found == need:
                    break
                ker = linalg.solve_sub(soc_rows, rows, p, m)
            if found < need:
                raise ArithmeticDomainError(
                    f"free extraction stalled at level {level}:"
                    f" found {found} of {need}"
                )
        return chosen, size // linalg.span_size(self.M.lattice, p, m)


# -- construction -----------------------------------------------------------------


def _active_delta_indices(a: NormVector, m: int) -> List[int]:
    return [i for i in range(1, m) if not is_neg_inf(a[i])]


def _wanted_ranks(gate: str, e: Tuple[int, ...], a: Optional[NormVector]) -> Dict[int, int]:
    n = len(e) - 1
    if gate == "Theorem3":
        wanted = {i: e[i] for i in range(n + 1)}
    elif gate == "Theorem2":
        wanted = {0: e[0] - 1, 1: e[1] - 1}
    else:
        assert a is not None
        wanted = {i: e[i] - a.count(i) for i in range(n)}
        wanted[n] = e[n] - 1 - a.count(n)
    for lvl, r in wanted.items():
        if r < 0:
            raise ArithmeticDomainError(
                f"rank bookkeeping went negative at level {lvl}: {r}"
            )
    return wanted


def decompose(tower: Tower, m: int) -> DecompositionReport:
    """Decompose J_m and return a verified certificate report."""
    if m < 1:
        raise ArithmeticDomainError("depth m must be at least 1")
    gate = select_gate(tower)
    tw = tower.at_depth(m + 1 if gate == "Theorem1" else m)
    J = tw.jmodule(m)
    e = norm_indices(tw)
    nu = tw.nu

    a: Optional[NormVector] = None
    d: Optional[int] = None
    alpha: Optional[FieldUnit] = None
    deltas: Tuple[FieldUnit, ...] = ()
    lam: Optional[FieldUnit] = None
    fixed: List[ModuleElement] = []

    if gate == "Theorem1":
        found = search_minimal(tw, m)
        if not found.complete:
            raise ArithmeticDomainError("norm-pair search did not complete")
        a, d = found.pair.a, found.pair.d
        alpha, deltas = found.witness.alpha, found.witness.deltas
        fixed.append(J.class_of(alpha))
        fixed.extend(J.class_of(deltas[i]) for i in _active_delta_indices(a, m))
    elif gate == "Theorem2":
        lam = _lambda_unit(tw)
        fixed.append(J.class_of(lam))

    wanted = _wanted_ranks(gate, e, a)
    chosen, total = _Extractor(J).extract(fixed, wanted)
    if total != J.size:
        raise ArithmeticDomainError(
            f"summand orders cover {total}, module has {J.size}"
        )
    frees = tuple((lvl, unit) for lvl, unit, _ in chosen)
    ranks = tuple(wanted.get(i, 0) for i in range(tw.n + 1))

    report = DecompositionReport(
        gate=gate,
        p=tw.p,
        n=tw.n,
        m=m,
        nu=nu,
        a=a,
        d=d,
        ranks=ranks,
        alpha=alpha,
        deltas=deltas,
        lam=lam,
        frees=frees,
        flags=(),
        tower=tw,
    )
    flags = verify_report(report, J)
    if not all(flags.values()):
        failed = [k for k, v in flags.items() if not v]
        raise ArithmeticDomainError(
            f"decomposition verification failed: {', '.join(failed)}"
        )
    return replace(report, flags=tuple(flags.items()))


# -- verification -------------------------------------------------------------------


def _exceptional_classes(report: DecompositionReport, J: KummerModule) -> List[ModuleElement]:
    if report.gate == "Theorem1":
        assert report.a is not None and report.alpha is not None
        out = [J.class_of(report.alpha)]
        out.extend(
            J.class_of(report.deltas[i])
            for i in _active_delta_indices(report.a, report.m)
        )
        return out
    if report.gate == "Theorem2":
        assert report.lam is not None
        return [J.class_of(report.lam)]
    return []


def _check_exceptional(report: DecompositionReport, J: KummerModule) -> bool:
    if report.gate == "Theorem3":
        return True
    if report.gate == "Theorem2":
        assert report.lam is not None
        target = report.tower.xi(report.nu).power(-1)
        moved = report.lam.apply_sigma().over(report.lam)
        if not moved.congruent_to(target):
            return False
        return _annihilator_matches(J, J.class_of(report.lam), report.nu)
    assert report.a is not None and report.d is not None
    gens = {"y": J.class_of(report.alpha)}
    for i, ai in enumerate(report.a):
        if not is_neg_inf(ai):
            gens[f"x_{i}"] = J.class_of(report.deltas[i])
    target = J.presentation.submodule(_exceptional_classes(report, J))
    try:
        return iso_to_X(target, gens, report.a, report.d, report.m)
    except ArithmeticDomainError:
        return False


def _check_indecomposable(report: DecompositionReport) -> bool:
    if report.gate == "Theorem3":
        return True
    if report.gate == "Theorem2":
        # abstract model of the twisted-cyclic part: one generator z with
        # p^nu (sigma - 1) z = 0
        params = RingParams(2, 1, report.m)
        killer = scalar(params, 2 ** report.nu) * (sigma(params) - one(params))
        pres = ModulePresentation(params, ("z",), ((killer,),))
        return brute_indecomposable(pres).status != "decomposable"
    assert report.a is not None and report.d is not None
    conditions = indecomp_conditions(
        report.p, report.n, report.a, report.d, report.m
    )
    if not conditions:
        return False
    X = construct_X(report.p, report.n, report.a, report.d, report.m)
    return brute_indecomposable(X).status != "decomposable"


def _check_descent(report: DecompositionReport, J: KummerModule) -> bool:
    tower = report.tower
    for j in range(1, report.m):
        Jj = tower.jmodule(j)
        Mj = Jj.presentation
        free_parts = []
        for lvl, t in report.frees:
            cls = Jj.class_of(t)
            if not is_free_cyclic(cls, lvl):
                return False
            free_parts.append([cls])
        if report.gate == "Theorem1":
            assert report.a is not None
            alpha_cls = Jj.class_of(report.alpha)
            lower = [alpha_cls] + [
                Jj.class_of(report.deltas[i])
                for i in range(1, j)
                if not is_neg_inf(report.a[i])
            ]
            upper = list(lower)
            pieces = [lower]
            if not is_neg_inf(report.a[j]):
                dj = Jj.class_of(report.deltas[j])
                if not is_free_cyclic(dj, report.a[j]):
                    return False
                upper = lower + [dj]
                pieces = [lower, [dj]]
            if not direct_sum_certify(Mj, pieces):
                return False
            exc_parts = [upper]
        elif report.gate == "Theorem2":
            lam_cls = Jj.class_of(report.lam)
            if not _annihilator_matches(Jj, lam_cls, report.nu):
                return False
            exc_parts = [[lam_cls]]
        else:
            exc_parts = []
        parts = exc_parts + free_parts
        everything = [x for part in parts for x in part]
        if Mj.submodule(everything).size != Mj.size:
            return False
        if not direct_sum_certify(Mj, parts):
            return False
    return True


def verify_report(report: DecompositionReport, J: KummerModule) -> Dict[str, bool]:
    """Re-check a report against J_m; returns the ordered flag map."""
    if report.gate not in GATES:
        raise ArithmeticDomainError(f"unknown gate {report.gate!r}")
    if J.m != report.m:
        raise ArithmeticDomainError("report depth does not match the module")
    M = J.presentation
    flags: Dict[str, bool] = {}

    try:
        exc = _exceptional_classes(report, J)
        free_cls = [(lvl, J.class_of(t)) for lvl, t in report.frees]
    except ArithmeticDomainError:
        return {name: False for name in FLAG_NAMES}

    everything = exc + [cls for _, cls in free_cls]
    flags["generation"] = M.submodule(everything).size == M.size

    parts = ([exc] if exc else []) + [[cls] for _, cls in free_cls]
    flags["independence"] = direct_sum_certify(M, parts)

    def free_ok(lvl: int, cls: ModuleElement) -> bool:
        try:
            return is_free_cyclic(cls, lvl)
        except ArithmeticDomainError:
            return False

    flags["free_parts"] = all(free_ok(lvl, cls) for lvl, cls in free_cls)
    flags["exceptional"] = _check_exceptional(report, J)
    flags["indecomposable"] = _check_indecomposable(report)
    flags["descent"] = _check_descent(report, J)
    return flags


# -- witness-level freeness (minimality smell test) -----------------------------------


def delta_free_check(pair: NormPair, witness: NormPairWitness, tower: Tower) -> bool:
    """Each delta_i with finite a_i must be free at its level in J_1."""
    J1 = tower.jmodule(1)
    for i in range(pair.m):
        ai = pair.a[i]
        if is_neg_inf(ai):
            continue
        if not is_free_cyclic(J1.class_of(witness.deltas[i]), ai):
            return False
    return True
