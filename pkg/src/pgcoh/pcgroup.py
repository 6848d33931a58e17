"""Finite p-groups given by polycyclic presentations.

A presentation has generators ``g_1 .. g_n`` of relative order ``p`` with

* ``g_i^p = power[i]``        (a word in ``g_{i+1} .. g_n``)
* ``[g_j, g_i] = comm[j, i]`` for ``j > i`` (a word in ``g_{j+1} .. g_n``)

using ``[x, y] = x^-1 y^-1 x y``.  Elements are exponent vectors in the
normal form ``g_1^a_1 ... g_n^a_n``; internally they are numbered by reading
the vector as base-``p`` digits with ``a_1`` most significant, so the
identity is element ``0``.

Indices are 0-based in Python and 1-based in the JSON group files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PcGroupError",
    "InconsistentPresentation",
    "UnsupportedSize",
    "NotNormal",
    "CapExceeded",
    "PcGroup",
    "Subgroup",
    "validate_group",
    "multiply",
    "element_orders",
    "subgroup_generated",
    "normal_closure",
    "is_normal",
    "omega",
    "agemo",
    "center",
    "derived_subgroup",
    "frattini",
    "lower_central_series",
    "standard_series",
    "quotient",
    "subgroup_as_pcgroup",
    "subgroup_enumerate",
    "elementary_abelian_subgroups",
    "maximal_elem_ab",
    "d_of",
    "structure_invariants",
    "StructureInvariants",
    "unitriangular_group",
    "homs_to_unitriangular",
    "hom_kernel",
    "group_from_json",
    "group_to_json",
    "load_group",
    "save_group",
]

DEFAULT_SIZE_CAP = 512
DEFAULT_ENUM_CAP = 2**8
DEFAULT_HOM_CAP = 2**24
EXHAUSTIVE_ASSOC_LIMIT = 64


class PcGroupError(ValueError):
    pass


class InconsistentPresentation(PcGroupError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class UnsupportedSize(PcGroupError):
    pass


class NotNormal(PcGroupError):
    pass


class CapExceeded(PcGroupError):
    pass


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


class PcGroup:
    """A validated pc presentation together with its multiplication table."""

    def __init__(self, p: int, power, comm=None, name: str = ""):
        self.p = int(p)
        self.n = len(power)
        self.power = tuple(tuple(int(a) for a in w) for w in power)
        self.comm = {}
        for (j, i), w in (comm or {}).items():
            w = tuple(int(a) for a in w)
            if any(w):
                self.comm[(int(j), int(i))] = w
        self.name = name
        self.order = self.p**self.n
        self._gen_memo: dict[tuple[int, int], int] = {}

    # -- element encoding -------------------------------------------------
    def index(self, exps: Sequence[int]) -> int:
        k = 0
        for a in exps:
            k = k * self.p + int(a)
        return k

    def element(self, k: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            k, a = divmod(k, self.p)
            out.append(a)
        return tuple(reversed(out))

    @cached_property
    def exps(self) -> np.ndarray:
        """Exponent vectors of all elements, shape ``(order, n)``."""
        idx = np.arange(self.order)
        out = np.zeros((self.order, self.n), dtype=np.int64)
        for k in range(self.n - 1, -1, -1):
            idx, out[:, k] = np.divmod(idx, self.p)
        return out

    def gen(self, i: int) -> int:
        """Element index of the pc generator ``g_{i+1}`` (0-based ``i``)."""
        return self.p ** (self.n - 1 - i)

    @property
    def generators(self) -> list[int]:
        return [self.gen(i) for i in range(self.n)]

    # -- collection -------------------------------------------------------
    def _mul_gen(self, x: int, i: int) -> int:
        key = (x, i)
        hit = self._gen_memo.get(key)
        if hit is not None:
            return hit
        p, n = self.p, self.n
        ex = self.element(x)
        tail = (0,) * (i + 1) + ex[i + 1:]
        a = ex[i] + 1
        head = list(ex[:i]) + [a % p] + [0] * (n - i - 1)
        if a == p:
            w = self.power[i]
            head = [h + w[k] if k > i else h for k, h in enumerate(head)]
        res = self.index(head)
        if any(tail):
            res = self._mul(res, self._conj_down(tail, i))
        self._gen_memo[key] = res
        return res

    def _mul(self, x: int, y: int) -> int:
        for j, b in enumerate(self.element(y)):
            for _ in range(b):
                x = self._mul_gen(x, j)
        return x

    def _conj_down(self, tail: Sequence[int], i: int) -> int:
        """``g_i^-1 * tail * g_i`` for a word ``tail`` in ``g_{i+1}..``."""
        z = 0
        for j in range(i + 1, self.n):
            b = tail[j]
            if not b:
                continue
            w = self.comm.get((j, i))
            cj = [0] * self.n
            cj[j] = 1
            if w:
                for k in range(j + 1, self.n):
                    cj[k] = w[k]
            c = self.index(cj)
            for _ in range(b):
                z = self._mul(z, c)
        return z

    @cached_property
    def gen_table(self) -> np.ndarray:
        """``gen_table[x, i]`` is ``x * g_{i+1}``."""
        t = np.zeros((self.order, self.n), dtype=np.int64)
        for i in range(self.n):
            for x in range(self.order):
                t[x, i] = self._mul_gen(x, i)
        return t

    @cached_property
    def table(self) -> np.ndarray:
        """Full multiplication table; ``table[x, y]`` is ``x * y``."""
        order = self.order
        t = np.zeros((order, order), dtype=np.int64)
        gt = self.gen_table
        ex = self.exps
        for y in range(order):
            col = np.arange(order)
            for j in range(self.n):
                for _ in range(ex[y, j]):
                    col = gt[col, j]
            t[:, y] = col
        t.setflags(write=False)
        return t

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.argmin(self.table, axis=1)  # the identity is element 0
        return inv

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def inv(self, x: int) -> int:
        return int(self.inverse[x])

    def pow(self, x: int, k: int) -> int:
        r = 0
        for _ in range(k):
            r = int(self.table[r, x])
        return r

    def comm_of(self, x: int, y: int) -> int:
        t, inv = self.table, self.inverse
        return int(t[t[inv[x], inv[y]], t[x, y]])

    def conj(self, x: int, g: int) -> int:
        """``g^-1 x g``."""
        t = self.table
        return int(t[t[self.inverse[g], x], g])

    @cached_property
    def power_map(self) -> np.ndarray:
        """``x -> x^p`` for every element."""
        t = self.table
        cur = np.arange(self.order)
        res = np.zeros(self.order, dtype=np.int64)
        for _ in range(self.p):
            res = t[res, cur]
        return res

    @cached_property
    def orders(self) -> np.ndarray:
        out = np.ones(self.order, dtype=np.int64)
        cur = np.arange(self.order)
        pm = self.power_map
        while np.any(cur):
            nz = cur != 0
            out[nz] *= self.p
            cur = pm[cur]
        return out

    @property
    def exponent(self) -> int:
        return int(self.orders.max()) if self.order > 1 else 1

    def whole(self) -> "Subgroup":
        return Subgroup(self, tuple(range(self.order)), tuple(self.generators))

    def trivial(self) -> "Subgroup":
        return Subgroup(self, (0,), ())

    @property
    def is_abelian(self) -> bool:
        return not self.comm

    def spec(self) -> dict:
        return group_to_json(self)

    def __repr__(self):
        return "PcGroup(%s, p=%d, n=%d)" % (self.name or "?", self.p, self.n)


# -- validation ---------------------------------------------------------------


def validate_group(spec, *, size_cap: int = DEFAULT_SIZE_CAP, samples: int = 100_000, seed: int = 0) -> PcGroup:
    """Build a :class:`PcGroup` from presentation data and check consistency.

    ``spec`` is either a :class:`PcGroup` or a dict in the JSON group-file
    layout (1-based generator indices).
    """
    if isinstance(spec, PcGroup):
        G = spec
    else:
        G = group_from_json(spec, validate=False)
    p, n = G.p, G.n
    if not _is_prime(p):
        raise PcGroupError("p=%r is not prime" % p)
    if p**n > size_cap:
        raise UnsupportedSize("group of order %d^%d exceeds the size cap %d" % (p, n, size_cap))
    for i, w in enumerate(G.power):
        if len(w) != n or any(not 0 <= a < p for a in w):
            raise PcGroupError("power relation %d has malformed exponents %r" % (i + 1, w))
        if any(w[k] for k in range(i + 1)):
            raise PcGroupError("power relation of g_%d must only involve later generators" % (i + 1))
    for (j, i), w in G.comm.items():
        if not 0 <= i < j < n:
            raise PcGroupError("commutator index pair (%d, %d) must satisfy j > i" % (j + 1, i + 1))
        if len(w) != n or any(not 0 <= a < p for a in w):
            raise PcGroupError("commutator [g_%d, g_%d] has malformed exponents" % (j + 1, i + 1))
        if any(w[k] for k in range(j + 1)):
            raise PcGroupError("[g_%d, g_%d] must only involve generators after g_%d" % (j + 1, i + 1, j + 1))
    _check_consistency(G, samples=samples, seed=seed)
    return G


def _check_consistency(G: PcGroup, samples: int, seed: int) -> None:
    t = G.table
    order = G.order
    if order == 1:
        return
    # every row must be a permutation before associativity makes sense
    srt = np.sort(t, axis=1)
    if not np.all(srt == np.arange(order)):
        bad = int(np.flatnonzero(np.any(srt != np.arange(order), axis=1))[0])
        raise InconsistentPresentation("left multiplication by %r is not a bijection" % (G.element(bad),),
                                       witness=(G.element(bad),))
    if order <= EXHAUSTIVE_ASSOC_LIMIT:
        for a in range(order):
            lhs = t[t[a][:, None], np.arange(order)[None, :]]  # (a*b)*c over (b, c)
            rhs = t[a][t]  # a*(b*c)
            if not np.array_equal(lhs, rhs):
                b, c = map(int, np.argwhere(lhs != rhs)[0])
                raise InconsistentPresentation(
                    "multiplication is not associative", witness=(G.element(a), G.element(b), G.element(c)))
        return
    rng = np.random.default_rng(seed)
    trip = rng.integers(0, order, size=(samples, 3))
    a, b, c = trip.T
    bad = np.flatnonzero(t[t[a, b], c] != t[a, t[b, c]])
    if bad.size:
        k = int(bad[0])
        raise InconsistentPresentation(
            "multiplication is not associative",
            witness=tuple(G.element(int(v)) for v in trip[k]))


def multiply(G: PcGroup, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Normal form of ``a * b`` for exponent vectors ``a`` and ``b``."""
    return G.element(G.mul(G.index(a), G.index(b)))


def element_orders(G: PcGroup) -> dict[tuple[int, ...], int]:
    return {G.element(x): int(o) for x, o in enumerate(G.orders)}


# -- subgroups ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of ``parent`` stored as its sorted element indices."""

    parent: PcGroup
    elements: tuple[int, ...]
    gens: tuple[int, ...] = ()
    _set: frozenset = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_set", frozenset(self.elements))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def order_exp(self) -> int:
        return round(math.log(self.order, self.parent.p)) if self.order > 1 else 0

    def __contains__(self, x) -> bool:
        return x in self._set

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self._set == other._set

    def __hash__(self):
        return hash(self._set)

    def __le__(self, other: "Subgroup") -> bool:
        return self._set <= other._set

    def __lt__(self, other: "Subgroup") -> bool:
        return self._set < other._set

    @property
    def key(self) -> frozenset:
        return self._set

    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.elements)] = True
        return m

    def is_whole(self) -> bool:
        return self.order == self.parent.order

    def gen_vectors(self) -> list[tuple[int, ...]]:
        return [self.parent.element(g) for g in self.gens]

    def __repr__(self):
        return "Subgroup(order=%d of %s)" % (self.order, self.parent.name or "G")


def _as_sub(X) -> Subgroup:
    if isinstance(X, PcGroup):
        return X.whole()
    return X


def _closure(G: PcGroup, start: np.ndarray, gens: Sequence[int]) -> np.ndarray:
    """Boolean mask of the subgroup generated by ``start`` (a subgroup mask) and ``gens``."""
    t = G.table
    mask = start.copy()
    mask[0] = True
    gens = np.asarray(list(gens), dtype=np.int64)
    frontier = np.flatnonzero(mask)
    while frontier.size and gens.size:
        cand = np.unique(t[np.ix_(frontier, gens)].ravel())
        cand = cand[~mask[cand]]
        if cand.size == 0:
            break
        mask[cand] = True
        frontier = np.flatnonzero(mask)
    return mask


def subgroup_generated(G, gens: Iterable) -> Subgroup:
    """Smallest subgroup containing ``gens`` (indices or exponent vectors).

    Redundant generators are dropped greedily in the order given.
    """
    G = G if isinstance(G, PcGroup) else G.parent
    order = G.order
    mask = np.zeros(order, dtype=bool)
    mask[0] = True
    kept: list[int] = []
    for g in gens:
        g = G.index(g) if not isinstance(g, (int, np.integer)) else int(g)
        if mask[g]:
            continue
        kept.append(g)
        mask = _closure(G, mask, kept)
    return Subgroup(G, tuple(int(x) for x in np.flatnonzero(mask)), tuple(kept))


def _join(G: PcGroup, *subs: Subgroup) -> Subgroup:
    gens = []
    for s in subs:
        gens.extend(s.gens)
    return subgroup_generated(G, gens)


def is_normal(N: Subgroup, H=None) -> bool:
    """Whether ``N`` is normalised by ``H`` (default: the whole parent group)."""
    G = N.parent
    H = G.whole() if H is None else _as_sub(H)
    t, inv = G.table, G.inverse
    m = N.mask()
    for h in H.gens:
        for x in N.gens:
            if not m[t[t[inv[h], x], h]]:
                return False
    return True


def normal_closure(G, X: Iterable[int], H=None) -> Subgroup:
    """Normal closure of the elements ``X`` inside ``H`` (default ``G``)."""
    G = G if isinstance(G, PcGroup) else G.parent
    H = G.whole() if H is None else _as_sub(H)
    t, inv = G.table, G.inverse
    gens = list(dict.fromkeys(int(x) for x in X if int(x) != 0))
    N = subgroup_generated(G, gens)
    changed = True
    while changed:
        changed = False
        m = N.mask()
        extra = []
        for x in N.gens:
            for h in H.gens:
                c = int(t[t[inv[h], x], h])
                if not m[c]:
                    extra.append(c)
        if extra:
            N = subgroup_generated(G, list(N.gens) + extra)
            changed = True
    return N


def omega(X, r: int = 1) -> Subgroup:
    """Subgroup generated by the elements of order at most ``p^r``."""
    S = _as_sub(X)
    G = S.parent
    el = np.asarray(S.elements)
    small = el[G.orders[el] <= G.p**r]
    return subgroup_generated(G, small.tolist())


def agemo(X, r: int = 1) -> Subgroup:
    """Subgroup generated by the ``p^r``-th powers."""
    S = _as_sub(X)
    G = S.parent
    cur = np.asarray(S.elements)
    for _ in range(r):
        cur = G.power_map[cur]
    return subgroup_generated(G, sorted(set(cur.tolist())))


def center(X) -> Subgroup:
    S = _as_sub(X)
    G = S.parent
    t = G.table
    el = np.asarray(S.elements)
    ok = np.ones(el.size, dtype=bool)
    for g in S.gens:
        ok &= t[el, g] == t[g, el]
    return subgroup_generated(G, el[ok].tolist())


def derived_subgroup(X) -> Subgroup:
    S = _as_sub(X)
    G = S.parent
    comms = [G.comm_of(a, b) for a in S.gens for b in S.gens]
    return normal_closure(G, comms, S)


def frattini(X) -> Subgroup:
    S = _as_sub(X)
    return _join(S.parent, derived_subgroup(S), agemo(S, 1))


def lower_central_series(X) -> list[Subgroup]:
    """``[gamma_1, gamma_2, ...]`` ending with the trivial subgroup."""
    S = _as_sub(X)
    G = S.parent
    series = [S]
    while series[-1].order > 1:
        cur = series[-1]
        comms = [G.comm_of(a, b) for a in cur.gens for b in S.gens]
        nxt = normal_closure(G, comms, S)
        if nxt.order == cur.order:
            raise PcGroupError("lower central series stalled; group is not nilpotent")
        series.append(nxt)
    return series


def standard_series(X) -> dict:
    S = _as_sub(X)
    return {
        "derived": derived_subgroup(S),
        "frattini": frattini(S),
        "center": center(S),
        "lower_central": lower_central_series(S),
    }


def d_of(X) -> int:
    """Minimal number of generators, ``log_p |H / Phi(H)|``."""
    S = _as_sub(X)
    if S.order == 1:
        return 0
    return round(math.log(S.order // frattini(S).order, S.parent.p))


# -- building presentations for subgroups and quotients -------------------------


def _pc_from_table(L: np.ndarray, p: int, name: str, size_cap: int) -> tuple[PcGroup, np.ndarray]:
    """Find a pc presentation for the group with multiplication table ``L``.

    ``L`` is indexed by local element numbers with 0 the identity.  Returns
    the group and the array mapping local numbers to the new element indices.
    """
    m = L.shape[0]
    inv = np.argmin(L, axis=1)
    # irredundant generating set of the whole group
    gens: list[int] = []
    mask = np.zeros(m, dtype=bool)
    mask[0] = True

    def close(start, gs):
        mk = start.copy()
        gs = np.asarray(gs, dtype=np.int64)
        frontier = np.flatnonzero(mk)
        while frontier.size and gs.size:
            cand = np.unique(L[np.ix_(frontier, gs)].ravel())
            cand = cand[~mk[cand]]
            if cand.size == 0:
                break
            mk[cand] = True
            frontier = np.flatnonzero(mk)
        return mk

    for x in range(m):
        if not mask[x]:
            gens.append(x)
            mask = close(mask, gens)

    def power(x, k):
        r = 0
        for _ in range(k):
            r = L[r, x]
        return int(r)

    # central series from the bottom: each new z is central of order p mod M
    chain = [np.eye(1, m, 0, dtype=bool)[0]]
    zs: list[int] = []
    while chain[-1].sum() < m:
        M = chain[-1]
        for z in range(m):
            if M[z] or not M[power(z, p)]:
                continue
            if all(M[L[L[inv[z], inv[g]], L[z, g]]] for g in gens):
                break
        else:
            raise PcGroupError("no central element of order p found; not a p-group?")
        zs.append(z)
        chain.append(close(M, list(np.flatnonzero(M)) + [z]))
    n = len(zs)
    if p**n != m:
        raise PcGroupError("table of size %d is not a p-group for p=%d" % (m, p))
    if m > size_cap:
        raise UnsupportedSize("order %d exceeds the size cap %d" % (m, size_cap))
    pcg = [zs[n - 1 - i] for i in range(n)]
    below = [chain[n - 1 - i] for i in range(n)]  # below[i] = <g_{i+1}, ..., g_n>
    neg_pows = []
    for g in pcg:
        gi = int(inv[g])
        neg_pows.append([power(gi, a) for a in range(p)])

    def nf(x):
        out = []
        for i in range(n):
            for a in range(p):
                y = int(L[neg_pows[i][a], x])
                if below[i][y]:
                    out.append(a)
                    x = y
                    break
            else:
                raise PcGroupError("normal form computation failed")
        return tuple(out)

    pw = [nf(power(g, p)) for g in pcg]
    cm = {}
    for j in range(n):
        for i in range(j):
            a, b = pcg[j], pcg[i]
            w = nf(int(L[L[inv[a], inv[b]], L[a, b]]))
            if any(w):
                cm[(j, i)] = w
    H = validate_group(PcGroup(p, pw, cm, name), size_cap=size_cap)
    iso = np.array([H.index(nf(x)) for x in range(m)], dtype=np.int64)
    # certify: iso is a bijective homomorphism
    if len(set(iso.tolist())) != m or not np.array_equal(H.table[np.ix_(iso, iso)], iso[L]):
        raise PcGroupError("constructed presentation does not reproduce the table")
    return H, iso


@dataclass
class Quotient:
    group: PcGroup
    labels: np.ndarray  # parent element -> quotient element index
    gen_images: list[tuple[int, ...]]  # images of the parent pc generators

    def image(self, x: int) -> int:
        return int(self.labels[x])


def quotient(G: PcGroup, N: Subgroup, name: str | None = None, size_cap: int = DEFAULT_SIZE_CAP) -> Quotient:
    """``G / N`` as a new pc group with the quotient epimorphism recorded."""
    if not is_normal(N):
        raise NotNormal("subgroup of order %d is not normal in %s" % (N.order, G.name or "G"))
    t = G.table
    coset_min = t[:, list(N.elements)].min(axis=1)
    reps = np.unique(coset_min)
    local = -np.ones(G.order, dtype=np.int64)
    local[reps] = np.arange(reps.size)
    L = local[coset_min[t[np.ix_(reps, reps)]]]
    Q, iso = _pc_from_table(L, G.p, name or "%s/N" % (G.name or "G"), size_cap)
    labels = iso[local[coset_min]]
    Qt = Q.table
    # epimorphism property on generator pairs
    for a in G.generators:
        for b in G.generators:
            if Qt[labels[a], labels[b]] != labels[t[a, b]]:
                raise PcGroupError("quotient map is not a homomorphism")
    return Quotient(Q, labels, [Q.element(int(labels[g])) for g in G.generators])


def subgroup_as_pcgroup(S: Subgroup, name: str | None = None) -> tuple[PcGroup, np.ndarray]:
    """Pc presentation of a subgroup; returns the group and the embedding.

    The embedding array maps elements of the new group to parent indices.
    """
    G = S.parent
    el = np.asarray(S.elements)
    pos = -np.ones(G.order, dtype=np.int64)
    pos[el] = np.arange(el.size)
    L = pos[G.table[np.ix_(el, el)]]
    H, iso = _pc_from_table(L, G.p, name or "sub(%s)" % (G.name or "G"), DEFAULT_SIZE_CAP)
    emb = np.zeros(H.order, dtype=np.int64)
    emb[iso] = el
    return H, emb


# -- subgroup lattice -------------------------------------------------------------


def _normalizer_mask(G: PcGroup, H: Subgroup) -> np.ndarray:
    t, inv = G.table, G.inverse
    allg = np.arange(G.order)
    m = H.mask()
    ok = np.ones(G.order, dtype=bool)
    for h in H.gens:
        ok &= m[t[t[inv, h], allg]]
    return ok


def _extend_level(G: PcGroup, level: list[Subgroup], candidate_ok) -> list[Subgroup]:
    seen: dict[frozenset, Subgroup] = {}
    pm = G.power_map
    for H in level:
        hm = H.mask()
        nm = _normalizer_mask(G, H)
        for x in np.flatnonzero(nm & ~hm):
            if not hm[pm[x]] or not candidate_ok(H, int(x)):
                continue
            K = subgroup_generated(G, list(H.gens) + [int(x)])
            if K.key not in seen:
                seen[K.key] = K
    return sorted(seen.values(), key=lambda s: s.elements)


def subgroup_enumerate(G: PcGroup, cap: int = DEFAULT_ENUM_CAP) -> list[Subgroup]:
    """All subgroups, by increasing order.

    A subgroup of order ``p^(k+1)`` has a normal subgroup ``H`` of index
    ``p``, so it is ``<H, x>`` with ``x`` normalising ``H`` and ``x^p`` in ``H``.
    """
    if G.order > cap:
        raise CapExceeded("subgroup enumeration cap %d exceeded (|G| = %d)" % (cap, G.order))
    levels = [[G.trivial()]]
    while levels[-1] and levels[-1][0].order < G.order:
        levels.append(_extend_level(G, levels[-1], lambda H, x: True))
    return [H for lev in levels for H in lev]


def elementary_abelian_subgroups(G: PcGroup) -> list[Subgroup]:
    """All elementary abelian subgroups (including the trivial one)."""
    t = G.table

    def commutes_with(H, x):
        return all(t[x, h] == t[h, x] for h in H.gens)

    order_p = G.orders == G.p
    levels = [[G.trivial()]]
    while levels[-1]:
        levels.append(_extend_level(G, levels[-1], lambda H, x: order_p[x] and commutes_with(H, x)))
    return [H for lev in levels for H in lev]


def maximal_elem_ab(G: PcGroup) -> tuple[list[Subgroup], int]:
    """Maximal elementary abelian subgroups and the largest rank ``a``."""
    subs = elementary_abelian_subgroups(G)
    maximal = [A for A in subs if not any(A < B for B in subs)]
    a = max(A.order_exp for A in subs)
    return maximal, a


@dataclass(frozen=True)
class StructureInvariants:
    order_exp: int
    d: int
    rank: int | None
    nilpotency_class: int
    coclass: int
    exponent: int

    def as_dict(self) -> dict:
        return {
            "order_exp": self.order_exp,
            "d": self.d,
            "rank": self.rank,
            "class": self.nilpotency_class,
            "coclass": self.coclass,
            "exponent": self.exponent,
        }


def subgroup_rank(X, cap: int = DEFAULT_ENUM_CAP) -> int:
    S = _as_sub(X)
    if S.is_whole():
        G = S.parent
    else:
        G, _ = subgroup_as_pcgroup(S)
    return max(d_of(H) for H in subgroup_enumerate(G, cap))


def structure_invariants(G: PcGroup, with_rank: bool = True, cap: int = DEFAULT_ENUM_CAP) -> StructureInvariants:
    lcs = lower_central_series(G)
    c = len(lcs) - 1
    return StructureInvariants(
        order_exp=G.n,
        d=d_of(G),
        rank=subgroup_rank(G, cap) if with_rank else None,
        nilpotency_class=c,
        coclass=G.n - c,
        exponent=G.exponent,
    )


# -- homomorphisms into UT_r(F_p) -------------------------------------------------


@dataclass
class Unitriangular:
    p: int
    r: int
    elements: list[tuple[tuple[int, ...], ...]]
    table: np.ndarray
    index: dict

    @property
    def order(self) -> int:
        return len(self.elements)


_UT_CACHE: dict[tuple[int, int], Unitriangular] = {}


def unitriangular_group(p: int, r: int) -> Unitriangular:
    """Upper unitriangular ``r x r`` matrices over F_p; element 0 is the identity."""
    key = (p, r)
    if key in _UT_CACHE:
        return _UT_CACHE[key]
    slots = [(i, j) for i in range(r) for j in range(i + 1, r)]
    mats = []
    for vals in np.ndindex(*([p] * len(slots))):
        m = np.eye(r, dtype=np.int64)
        for (i, j), v in zip(slots, vals):
            m[i, j] = v
        mats.append(m)
    arr = np.array(mats).reshape(len(mats), r, r)
    elements = [tuple(map(tuple, m.tolist())) for m in arr]
    index = {e: k for k, e in enumerate(elements)}
    weights = np.array([p ** (len(slots) - 1 - k) for k in range(len(slots))], dtype=np.int64)
    prod = np.einsum("aij,bjk->abik", arr, arr) % p
    if slots:
        flat = np.stack([prod[:, :, i, j] for (i, j) in slots], axis=-1)
        table = flat @ weights
    else:
        table = np.zeros((1, 1), dtype=np.int64)
    ut = Unitriangular(p, r, elements, table.astype(np.int64), index)
    _UT_CACHE[key] = ut
    return ut


def _ut_pow(ut: Unitriangular, x: int, k: int) -> int:
    r = 0
    for _ in range(k):
        r = int(ut.table[r, x])
    return r


def _hom_iter(G: PcGroup, r: int, cap: int):
    """Yield ``(ut, images)`` for each homomorphism ``G -> UT_r(F_p)``, images as UT indices."""
    ut = unitriangular_group(G.p, r)
    d = d_of(G)
    if ut.order**d > cap:
        raise CapExceeded("hom search needs %d^%d candidates, above cap %d" % (ut.order, d, cap))
    n, p = G.n, G.p
    T = ut.table
    inv = np.argmin(T, axis=1)
    powers = [[_ut_pow(ut, u, a) for a in range(p)] for u in range(ut.order)]

    def word(img, w):
        z = 0
        for k in range(n):
            if w[k]:
                z = int(T[z, powers[img[k]][w[k]]])
        return z

    img = [0] * n

    def ok(i):
        u = img[i]
        if int(T[powers[u][p - 1], u]) != word(img, G.power[i]):
            return False
        for j in range(i + 1, n):
            a, b = img[j], u
            c = int(T[T[inv[a], inv[b]], T[a, b]])
            w = G.comm.get((j, i))
            if c != (word(img, w) if w else 0):
                return False
        return True

    def rec(i):
        if i < 0:
            yield tuple(img)
            return
        for u in range(ut.order):
            img[i] = u
            if ok(i):
                yield from rec(i - 1)
        img[i] = 0

    for res in rec(n - 1):
        yield ut, res


def _hom_search(G: PcGroup, r: int, cap: int) -> tuple[Unitriangular, list[tuple[int, ...]]]:
    ut = unitriangular_group(G.p, r)
    return ut, [imgs for _, imgs in _hom_iter(G, r, cap)]


def homs_to_unitriangular(G: PcGroup, r: int, cap: int = DEFAULT_HOM_CAP) -> list[tuple]:
    """All homomorphisms ``G -> UT_r(F_p)`` as tuples of pc-generator images."""
    ut, res = _hom_search(G, r, cap)
    return [tuple(ut.elements[u] for u in imgs) for imgs in res]


def _kernel_mask(G: PcGroup, ut: Unitriangular, imgs: Sequence[int]) -> np.ndarray:
    T = ut.table
    val = np.zeros(G.order, dtype=np.int64)
    ex = G.exps
    for k in range(G.n):
        pw = np.array([_ut_pow(ut, imgs[k], a) for a in range(G.p)], dtype=np.int64)
        val = T[val, pw[ex[:, k]]]
    return val == 0


def hom_kernel(G: PcGroup, images: Sequence) -> Subgroup:
    """Kernel of the homomorphism with the given generator images (matrices)."""
    if not images:
        return G.whole()
    r = len(images[0])
    ut = unitriangular_group(G.p, r)
    idx = [ut.index[tuple(map(tuple, m))] for m in images]
    m = _kernel_mask(G, ut, idx)
    return subgroup_generated(G, np.flatnonzero(m).tolist())


# -- JSON group files ---------------------------------------------------------------


def group_from_json(doc: dict, validate: bool = True, **kw) -> PcGroup:
    try:
        p = int(doc["p"])
        n = int(doc["ngens"])
        power = [list(map(int, w)) for w in doc["power"]]
        comm_list = doc.get("comm", [])
        name = str(doc.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise PcGroupError("malformed group document: %s" % exc) from None
    if len(power) != n:
        raise PcGroupError("expected %d power relations, got %d" % (n, len(power)))
    comm = {}
    for c in comm_list:
        try:
            j, i, w = int(c["j"]), int(c["i"]), list(map(int, c["w"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise PcGroupError("malformed commutator entry: %s" % exc) from None
        if (j - 1, i - 1) in comm:
            raise PcGroupError("duplicate commutator entry (%d, %d)" % (j, i))
        comm[(j - 1, i - 1)] = w
    G = PcGroup(p, power, comm, name)
    for (j, i) in comm:
        if not 0 <= i < j < n:
            raise PcGroupError("commutator index pair (%d, %d) must satisfy n >= j > i >= 1" % (j + 1, i + 1))
    return validate_group(G, **kw) if validate else G


def group_to_json(G: PcGroup) -> dict:
    return {
        "name": G.name,
        "p": G.p,
        "ngens": G.n,
        "power": [list(w) for w in G.power],
        "comm": [{"j": j + 1, "i": i + 1, "w": list(w)} for (j, i), w in sorted(G.comm.items())],
    }


def load_group(path, **kw) -> PcGroup:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PcGroupError("%s: not valid JSON (%s)" % (path, exc)) from None
    return group_from_json(doc, **kw)


def save_group(G: PcGroup, path) -> None:
    with open(path, "w") as fh:
        json.dump(group_to_json(G), fh, indent=1, sort_keys=True)
        fh.write("\n")
