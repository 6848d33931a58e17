"""Closed-form dimension and degree bounds, truncated series and Dickson invariants."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .ffmat import FpMatrix, kernel

__all__ = [
    "order_dim_bound", "gt_bound", "tower_index_bound_exp", "ceil_log2", "ceil_log",
    "series_geom", "series_mul", "lhs_e2_bound", "regularity_degree_bounds", "chern_param_bound",
    "DicksonSet", "dickson", "gl_generators", "substitute", "evens_degree_bound", "quillen_growth_check",
    "BoundsError",
]


class BoundsError(ValueError):
    pass


def ceil_log2(r: int) -> int:
    if r < 1:
        raise BoundsError("r must be >= 1")
    return (r - 1).bit_length()


def ceil_log(p: int, r: int) -> int:
    """Smallest k with p^k >= r."""
    k, q = 0, 1
    while q < r:
        q *= p
        k += 1
    return k


def _binom_series(r: int, i: int) -> int:
    # coefficient of t^i in (1 - t)^(-r); r = 0 gives the constant series 1
    if r == 0:
        return 1 if i == 0 else 0
    return comb(r + i - 1, i)


def order_dim_bound(n: int, i: int) -> int:
    """binom(n+i-1, i): the dimension bound for a group of order p^n."""
    if n < 0 or i < 0:
        raise BoundsError("n and i must be nonnegative")
    return _binom_series(n, i)


def _e(p: int) -> int:
    return 1 if p == 2 else 0


def gt_bound(p: int, r: int, i: int) -> int:
    """binom(r(ceil(log2 r) + 3 + e) + i - 1, i), e = 1 exactly when p = 2."""
    if r < 1 or i < 0:
        raise BoundsError("need r >= 1 and i >= 0")
    return _binom_series(r * (ceil_log2(r) + 3 + _e(p)), i)


def tower_index_bound_exp(p: int, r: int) -> int:
    """r(ceil(log2 r) + 2 + e)."""
    if r < 1:
        raise BoundsError("r must be >= 1")
    return r * (ceil_log2(r) + 2 + _e(p))


# -- truncated series -----------------------------------------------------------------

def series_geom(r: int, kmax: int) -> list[int]:
    """Coefficients of (1 - t)^(-r) through t^kmax."""
    if r < 0 or kmax < 0:
        raise BoundsError("r and kmax must be nonnegative")
    return [_binom_series(r, i) for i in range(kmax + 1)]


def series_mul(a, b, kmax: int) -> list[int]:
    out = [0] * (kmax + 1)
    for i, x in enumerate(a[:kmax + 1]):
        if x:
            for j, y in enumerate(b[:kmax + 1 - i]):
                out[i + j] += x * y
    return out


def lhs_e2_bound(U, V, kmax: int) -> list[int]:
    """sum_{s+t=i} V(s) U(t): bounds dim H^i(G) from bounds U for N and V for G/N."""
    if len(U) < kmax + 1 or len(V) < kmax + 1:
        raise BoundsError("series shorter than kmax + 1")
    return series_mul(V, U, kmax)


def regularity_degree_bounds(Ncount: int, D: int) -> dict:
    if Ncount < 1 or D < 1:
        raise BoundsError("need Ncount >= 1 and D >= 1")
    a = Ncount * (D - 1)
    return {"gen_deg": max(a, D), "rel_deg": max(2 * a, a + 1, D), "L": max(2 * a, 1)}


def _is_p_power(q: int) -> bool:
    if q < 1:
        return False
    for p in range(2, q + 1):
        if q % p == 0:
            while q % p == 0:
                q //= p
            return q == 1
    return True  # q == 1


def chern_param_bound(q: int) -> dict:
    """Parameter count and degree bound from the Chern classes of a regular representation."""
    if not _is_p_power(q):
        raise BoundsError("q must be a prime power")
    return {"count": q, "max_deg": 2 * q}


def evens_degree_bound(p: int, n: int, index: int) -> int:
    if not _is_p_power(index) or n < 0:
        raise BoundsError("index must be a prime power and n >= 0")
    return 2 * (p**n - 1) * index


def quillen_growth_check(dims, a: int) -> dict:
    """Ratios dims[i] / i^(a-1) for 1 <= i <= kmax.

    ``monotone_tail`` says whether the ratios on the upper half of the range
    stay below the largest ratio on the lower half.  Evidence only.
    """
    if a < 1:
        raise BoundsError("a must be >= 1")
    kmax = len(dims) - 1
    if kmax < 1:
        raise BoundsError("need dimensions through degree >= 1")
    ratios = [Fraction(int(dims[i]), i ** (a - 1)) for i in range(1, kmax + 1)]
    half = max(1, kmax // 2)
    head, tail = ratios[:half], ratios[half:]
    best = max(ratios)
    return {
        "max_ratio": best,
        "argmax": ratios.index(best) + 1,
        "monotone_tail": not tail or max(tail) <= max(head),
        "ratios": ratios,
    }


# -- Dickson invariants --------------------------------------------------------------------

Poly = dict  # exponent tuple -> coefficient in [1, p)


def _pmul(a: Poly, b: Poly, p: int) -> Poly:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = (out.get(e, 0) + ca * cb) % p
    return {e: c for e, c in out.items() if c}


def substitute(poly: Poly, M, p: int) -> Poly:
    """f(x) -> f(x M): variable x_j becomes sum_k M[j][k] x_k."""
    M = [[int(v) % p for v in row] for row in M]
    n = len(M)
    lin = []
    for j in range(n):
        lin.append({tuple(int(k == c) for k in range(n)): M[j][c] for c in range(n) if M[j][c]})
    one = {(0,) * n: 1}
    cache: dict = {}

    def power(j, e):
        key = (j, e)
        if key not in cache:
            cache[key] = one if e == 0 else _pmul(power(j, e - 1), lin[j], p)
        return cache[key]

    out: dict = {}
    for exps, c in poly.items():
        term = {(0,) * n: c % p}
        for j, e in enumerate(exps):
            if e:
                term = _pmul(term, power(j, e), p)
        for m, v in term.items():
            out[m] = (out.get(m, 0) + v) % p
    return {e: c for e, c in out.items() if c}


def _primitive_root(p: int) -> int:
    for g in range(1, p):
        if len({pow(g, k, p) for k in range(1, p)}) == p - 1:
            return g
    raise BoundsError("no primitive root")  # pragma: no cover


def gl_generators(p: int, n: int) -> list[list[list[int]]]:
    """Generators of GL_n(F_p): a transposition, an n-cycle, a scalar-free diagonal and a transvection."""
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    gens = []
    if n >= 2:
        t = [row[:] for row in eye]
        t[0], t[1] = t[1], t[0]
        gens.append(t)
        gens.append([eye[(i + 1) % n] for i in range(n)])
    if p > 2:
        dgl = [row[:] for row in eye]
        dgl[0][0] = _primitive_root(p)
        gens.append(dgl)
    if n >= 2:
        tv = [row[:] for row in eye]
        tv[0][1] = 1
        gens.append(tv)
    return gens


def _monomials(n: int, deg: int) -> list[tuple[int, ...]]:
    """Exponent vectors of total degree ``deg``, lexicographically decreasing."""
    out = [e for e in itertools.product(range(deg, -1, -1), repeat=n) if sum(e) == deg]
    return out


@dataclass
class DicksonSet:
    p: int
    n: int
    polys: list[Poly]  # polys[i] = c_{n,i}

    @property
    def poly_degrees(self) -> list[int]:
        return [self.p**self.n - self.p**i for i in range(self.n)]

    @property
    def cohom_degrees(self) -> list[int]:
        return [2 * d for d in self.poly_degrees]

    def to_json(self):
        return {
            "p": self.p,
            "n": self.n,
            "poly_degrees": self.poly_degrees,
            "cohom_degrees": self.cohom_degrees,
            "polys": [[[list(e), c] for e, c in sorted(f.items(), reverse=True)] for f in self.polys],
        }


DICKSON_MONOMIAL_CAP = 2000


def _invariants(p: int, n: int, deg: int) -> np.ndarray:
    mons = _monomials(n, deg)
    pos = {m: k for k, m in enumerate(mons)}
    blocks = []
    for M in gl_generators(p, n):
        A = np.zeros((len(mons), len(mons)), dtype=np.int64)
        for k, m in enumerate(mons):
            for e, c in substitute({m: 1}, M, p).items():
                A[pos[e], k] = c
        blocks.append(A - np.eye(len(mons), dtype=np.int64))
    if not blocks:  # GL_1(F_2) is trivial
        return np.eye(len(mons), dtype=np.int64)
    return kernel(FpMatrix(p, np.vstack(blocks)))


def dickson(p: int, n: int) -> DicksonSet:
    """c_{n,0}, ..., c_{n,n-1} as invariants of degree p^n - p^i, leading lex coefficient 1."""
    if n < 1 or p < 2:
        raise BoundsError("need n >= 1 and a prime p")
    top = p**n - 1
    if comb(top + n - 1, n - 1) > DICKSON_MONOMIAL_CAP:
        raise BoundsError("Dickson invariants for p=%d, n=%d are out of range" % (p, n))
    polys = []
    for i in range(n):
        deg = p**n - p**i
        mons = _monomials(n, deg)
        fixed = _invariants(p, n, deg)
        if fixed.shape[0] != 1:
            raise BoundsError("invariants in degree %d are %d-dimensional" % (deg, fixed.shape[0]))
        v = fixed[0] % p
        lead = int(v[np.flatnonzero(v)[0]])
        inv = pow(lead, -1, p)
        polys.append({m: int(c * inv % p) for m, c in zip(mons, v) if c % p})
    return DicksonSet(p, n, polys)
