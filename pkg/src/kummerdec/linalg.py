"""Exact row-lattice linear algebra over Z/p^m.

Canonical Howell normal forms, span membership, kernel and preimage
computations.  Everything is integer arithmetic on row lattices; callers
unfold group-ring structure into scalar columns before arriving here.

Row convention throughout: vectors are rows, maps act on the right
(y maps to y @ C), and a "lattice" is the set of Z/p^m-combinations of a
list of rows.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

Row = Tuple[int, ...]


def _val(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def howell(rows: Sequence[Sequence[int]], p: int, m: int) -> Tuple[Row, ...]:
    """Canonical Howell form of the row lattice spanned by ``rows``.

    Equal spans yield identical output.  Pivots are powers of p; entries
    above a pivot are reduced below it; the form is closed under the
    annihilator rows p^{m-v} * pivot_row, which is what makes leading-term
    reduction decide membership over Z/p^m.
    """
    mod = p ** m
    work = []
    width = None
    for r in rows:
        rr = [x % mod for x in r]
        if width is None:
            width = len(rr)
        elif len(rr) != width:
            raise ValueError("ragged rows")
        if any(rr):
            work.append(rr)
    if width is None or not work:
        return ()

    result = []
    pivots = []  # (column, valuation) per result row
    for c in range(width):
        best = -1
        best_v = m + 1
        for idx, r in enumerate(work):
            x = r[c]
            if x:
                v = _val(x, p)
                if v < best_v:
                    best_v = v
                    best = idx
                    if v == 0:
                        break
        if best < 0:
            continue
        r0 = work.pop(best)
        v = best_v
        pv = p ** v
        u = r0[c] // pv
        inv_u = pow(u, -1, mod)
        r0 = [(x * inv_u) % mod for x in r0]
        for r in work:
            x = r[c]
            if x:
                q = x // pv
                for t in range(c, width):
                    r[t] = (r[t] - q * r0[t]) % mod
        ann = p ** (m - v)
        if v:
            extra = [(ann * x) % mod for x in r0]
            if any(extra):
                work.append(extra)
        work = [r for r in work if any(r)]
        result.append(r0)
        pivots.append((c, v))

    for k in range(len(result)):
        rk = result[k]
        for l in range(k + 1, len(result)):
            c, v = pivots[l]
            q = rk[c] // (p ** v)
            if q:
                rl = result[l]
                for t in range(c, width):
                    rk[t] = (rk[t] - q * rl[t]) % mod
    return tuple(tuple(r) for r in result)


def _pivot_info(hrows: Sequence[Row], p: int) -> Tuple[Tuple[int, int], ...]:
    out = []
    for r in hrows:
        c = next(i for i, x in enumerate(r) if x)
        out.append((c, _val(r[c], p)))
    return tuple(out)


def reduce_row(row: Sequence[int], hrows: Sequence[Row], p: int, m: int) -> Row:
    """Canonical coset representative of ``row`` modulo the Howell lattice."""
    mod = p ** m
    cur = [x % mod for x in row]
    width = len(cur)
    for r, (c, v) in zip(hrows, _pivot_info(hrows, p)):
        q = cur[c] // (p ** v)
        if q:
            for t in range(c, width):
                cur[t] = (cur[t] - q * r[t]) % mod
    return tuple(cur)


def in_span(row: Sequence[int], hrows: Sequence[Row], p: int, m: int) -> bool:
    return not any(reduce_row(row, hrows, p, m))


def span_size(hrows: Sequence[Row], p: int, m: int) -> int:
    """Cardinality of the lattice (each pivot p^v contributes p^{m-v})."""
    total = 1
    for _, v in _pivot_info(hrows, p):
        total *= p ** (m - v)
    return total


def solve_sub(
    cmat: Sequence[Sequence[int]],
    lout: Sequence[Sequence[int]],
    p: int,
    m: int,
    dom: Optional[int] = None,
) -> Tuple[Row, ...]:
    """Howell basis of {y : y @ cmat lies in the lattice spanned by lout}.

    ``cmat`` has dom rows (the domain dimension) and any codomain width.
    Computed by Howell-reducing the block matrix [cmat | I; lout | 0] and
    keeping the rows whose codomain part vanished.
    """
    if dom is None:
        dom = len(cmat)
    cod = len(cmat[0]) if cmat else (len(lout[0]) if lout else 0)
    aug = []
    for i in range(dom):
        aug.append(list(cmat[i]) + [1 if j == i else 0 for j in range(dom)])
    for l in lout:
        aug.append(list(l) + [0] * dom)
    h = howell(aug, p, m)
    picked = [r[cod:] for r in h if not any(r[:cod])]
    return howell(picked, p, m)


def solve_affine(
    cmat: Sequence[Sequence[int]],
    lout: Sequence[Sequence[int]],
    b: Sequence[int],
    p: int,
    m: int,
) -> Optional[Row]:
    """One y with y @ cmat = b modulo the lout lattice, or None."""
    mod = p ** m
    dom = len(cmat)
    cod = len(b)
    aug = []
    for i in range(dom):
        aug.append(list(cmat[i]) + [1 if j == i else 0 for j in range(dom)])
    for l in lout:
        aug.append(list(l) + [0] * dom)
    h = howell(aug, p, m)
    red = reduce_row(list(b) + [0] * dom, h, p, m)
    if any(red[:cod]):
        return None
    return tuple((-x) % mod for x in red[cod:])


class AffineSolver:
    """Repeated solves of y @ cmat = b (mod an optional out-lattice).

    The augmented Howell form is computed once; each solve is a single
    row reduction.
    """

    def __init__(
        self,
        cmat: Sequence[Sequence[int]],
        p: int,
        m: int,
        lout: Sequence[Sequence[int]] = (),
    ):
        self.p, self.m = p, m
        self.mod = p ** m
        self.dom = len(cmat)
        self.cod = len(cmat[0]) if cmat else (len(lout[0]) if lout else 0)
        aug = []
        for i in range(self.dom):
            aug.append(list(cmat[i]) + [1 if j == i else 0 for j in range(self.dom)])
        for l in lout:
            aug.append(list(l) + [0] * self.dom)
        self.h = howell(aug, p, m)

    def solve(self, b: Sequence[int]) -> Optional[Row]:
        red = reduce_row(list(b) + [0] * self.dom, self.h, self.p, self.m)
        if any(red[: self.cod]):
            return None
        return tuple((-x) % self.mod for x in red[self.cod :])


def rmul(row: Sequence[int], mat: Sequence[Sequence[int]], mod: int) -> Tuple[int, ...]:
    """row @ mat reduced mod ``mod``."""
    width = len(mat[0]) if mat else 0
    out = [0] * width
    for x, mrow in zip(row, mat):
        if x:
            for t, y in enumerate(mrow):
                if y:
                    out[t] = (out[t] + x * y) % mod
    return tuple(out)


def lattice_intersection(
    rows1: Sequence[Sequence[int]],
    rows2: Sequence[Sequence[int]],
    p: int,
    m: int,
) -> Tuple[Row, ...]:
    """Howell basis of the intersection of two row lattices."""
    h1 = howell(rows1, p, m)
    if not h1:
        return ()
    coeffs = solve_sub(h1, howell(rows2, p, m), p, m)
    mod = p ** m
    return howell([rmul(c, h1, mod) for c in coeffs], p, m)


def identity_rows(dim: int, scale: int = 1) -> Tuple[Row, ...]:
    return tuple(
        tuple(scale if j == i else 0 for j in range(dim)) for i in range(dim)
    )
