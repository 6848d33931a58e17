"""Mod-p cohomology of p-groups.

Dimensions come from a minimal free resolution of F_p over F_pG.  Degree
one and two classes are handled with normalized bar cochains; these feed
the cup product, Bockstein and restriction computations behind the
powerful and Omega-extendible criteria.

Bar cocycles are parametrised by their values with last argument in a
generating set S.  For a normalized n-cochain f, u = df is itself a
cocycle, and du = 0 gives u(..., yz) = +-u(..., y) + (terms ending in z).
So u vanishes as soon as it vanishes on tuples ending in S, and df(..., s)
= 0 can be solved for f(..., zs) in terms of f(..., z).  Walking a spanning
tree of the Cayley graph fills in all values; every non-tree edge gives a
linear constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .bounds import order_dim_bound
from .ffmat import EchelonAccumulator, FpMatrix, kernel, left_kernel, rank
from .pcgroup import (
    PcGroup, PcGroupError, Subgroup, d_of, frattini, maximal_elem_ab, subgroup_as_pcgroup, subgroup_generated,
)

__all__ = [
    "GradedDims", "Cocycle2", "H2Presentation", "CohomologyError",
    "minres_dims", "bar_dims", "h2_bar_basis", "hom_basis",
    "cup11", "bockstein1", "restrict2", "bockstein_subspace",
    "degree2_relations", "omega_extendible", "powerful_cohom", "param2_data", "param2_check",
    "abelian_shape_check",
]

DEFAULT_MINRES_CAP = 4096  # max F_p-dimension n_k*|G| of a free module in the resolution
DEFAULT_H2_CAP = 256
DEFAULT_BAR3_CAP = 32


class CohomologyError(PcGroupError):
    pass


@dataclass
class GradedDims:
    """dims[i] = dim H^i(G; F_p) for i < len(dims).

    ``truncated_at`` is the first degree that was requested but not computed
    because a size cap was hit; ``None`` when complete.
    """
    dims: list[int]
    truncated_at: int | None = None

    def __getitem__(self, i):
        return self.dims[i]

    def __len__(self):
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __eq__(self, other):
        if isinstance(other, GradedDims):
            return self.dims == other.dims and self.truncated_at == other.truncated_at
        return list(self.dims) == list(other)

    def to_json(self):
        out = {"dims": list(self.dims)}
        if self.truncated_at is not None:
            out["truncated_at"] = self.truncated_at
        return out


# -- minimal resolution ----------------------------------------------------------------

def burnside_generators(G: PcGroup) -> list[int]:
    """A minimal generating set drawn from the pc generators."""
    phi = frattini(G)
    out: list[int] = []
    cur = phi
    for g in G.generators:
        if g not in cur:
            out.append(g)
            cur = subgroup_generated(G, list(cur.gens) + [g])
    return out


def _act(G: PcGroup, g: int, vecs: np.ndarray, m: int) -> np.ndarray:
    """Left multiplication by g on rows of F_p G^m (coordinate j*|G| + h is h*e_j)."""
    N = G.order
    perm = G.table[G.inverse[g]]  # (g.v)[j, x] = v[j, g^-1 x]
    return vecs.reshape(-1, m, N)[:, :, perm].reshape(vecs.shape)


def _boundary_matrix(G: PcGroup, images: np.ndarray, m_prev: int) -> np.ndarray:
    """F_p-matrix of a module map: row j*|G| + g is g * images[j]."""
    N = G.order
    n = images.shape[0]
    src = images.reshape(n, m_prev, N)
    out = np.empty((n, N, m_prev, N), dtype=np.int64)
    for g in range(N):
        out[:, g][:, :, G.table[g]] = src
    return out.reshape(n * N, m_prev * N)


def minimal_resolution(G: PcGroup, kmax: int, cap: int = DEFAULT_MINRES_CAP):
    """Ranks and boundary images of a minimal resolution up to degree ``kmax``.

    Returns ``(GradedDims, images)`` where ``images[k]`` holds d_k of the
    generators of F_k as rows in F_{k-1} (``images[0]`` is the augmentation).
    """
    if kmax < 0:
        raise CohomologyError("kmax must be >= 0")
    p, N = G.p, G.order
    S = burnside_generators(G)
    dims = [1]
    images = [np.ones((1, 1), dtype=np.int64)]
    D = np.ones((N, 1), dtype=np.int64)  # augmentation F_0 -> F_p
    m = 1
    for k in range(1, kmax + 1):
        K = left_kernel(FpMatrix(p, D))  # ker d_{k-1}, rows in F_{k-1}
        acc = EchelonAccumulator(p, m * N)
        if K.shape[0]:
            for s in S:
                acc.add_rows(np.mod(_act(G, s, K, m) - K, p))
        chosen = [b for b in K if acc.add(b)]
        n = len(chosen)
        if n * N > cap and k < kmax:
            dims.append(n)
            return GradedDims(dims, truncated_at=k + 1), images
        dims.append(n)
        imgs = np.array(chosen, dtype=np.int64).reshape(n, m * N)
        images.append(imgs)
        if k == kmax:
            break
        D = _boundary_matrix(G, imgs, m)
        m = n
    return GradedDims(dims), images


def minres_dims(G: PcGroup, kmax: int, cap: int = DEFAULT_MINRES_CAP) -> GradedDims:
    """dim H^i(G; F_p) for i <= kmax from the ranks of a minimal resolution."""
    return minimal_resolution(G, kmax, cap)[0]


# -- bar cochains ----------------------------------------------------------------------

def _spanning_tree(G: PcGroup, S: list[int]):
    """BFS over z -> z*s.  Returns tree edges and non-tree edges as (u, si, v)."""
    T = G.table
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    queue = [0]
    tree, extra = [], []
    for u in queue:
        for si, s in enumerate(S):
            v = int(T[u, s])
            if seen[v]:
                extra.append((u, si, v))
            else:
                seen[v] = True
                tree.append((u, si, v))
                queue.append(v)
    return tree, extra


class _BarSystem:
    """Normalized n-cochains parametrised by f(x_1..x_{n-1}, s), s in S."""

    def __init__(self, G: PcGroup, n: int, S: list[int]):
        self.G, self.n, self.S = G, n, S
        N = G.order
        self.d = len(S)
        self.rows = (N - 1) ** (n - 1)
        self.P = self.rows * self.d
        # tuples x in (G - 1)^(n-1), lexicographic
        if n == 1:
            self.X = np.zeros((1, 0), dtype=np.int64)
        else:
            grids = np.meshgrid(*[np.arange(1, N)] * (n - 1), indexing="ij")
            self.X = np.stack([g.ravel() for g in grids], axis=1)

    def _param(self, args: np.ndarray, si: int):
        """Parameter index of f(args, s_si); -1 where some argument is 1."""
        N = self.G.order
        idx = np.zeros(args.shape[0], dtype=np.int64)
        for c in range(args.shape[1]):
            idx = idx * (N - 1) + (args[:, c] - 1)
        idx = idx * self.d + si
        idx[np.any(args == 0, axis=1)] = -1
        return idx

    def _step_terms(self, u: int, si: int):
        """Signed parameter indices c with f(x, u s) = f(x, u) + sum c."""
        T = self.G.table
        n, X = self.n, self.X
        R = X.shape[0]
        a = np.concatenate([X, np.full((R, 1), u, dtype=np.int64)], axis=1)  # (x, u), then s
        terms = [(self._param(a[:, 1:], si), 1)]
        for i in range(n - 1):
            merged = a.copy()
            merged[:, i] = T[a[:, i], a[:, i + 1]]
            merged = np.delete(merged, i + 1, axis=1)
            terms.append((self._param(merged, si), (-1) ** (i + 1)))
        sign = -((-1) ** n)
        return [(c, sign * e) for c, e in terms]

    def _add_terms(self, M: np.ndarray, terms, scale=1):
        r = np.arange(M.shape[0])
        for c, e in terms:
            ok = c >= 0
            np.add.at(M, (r[ok], c[ok]), scale * e)

    def solve_values(self):
        """Constraint rows and the value matrices F[z] (row x: f(x, z) in parameters)."""
        p = self.G.p
        tree, extra = _spanning_tree(self.G, self.S)
        F = {0: np.zeros((self.rows, self.P), dtype=np.int64)}
        for u, si, v in tree:
            M = F[u].copy()
            self._add_terms(M, self._step_terms(u, si))
            F[v] = np.mod(M, p)
        return F, extra

    def constraint_blocks(self, F, extra):
        p = self.G.p
        for u, si, v in extra:
            M = F[u] - F[v]
            self._add_terms(M, self._step_terms(u, si))
            yield np.mod(M, p)

    def cocycle_accumulator(self, track=False):
        F, extra = self.solve_values()
        acc = EchelonAccumulator(self.G.p, self.P)
        for block in self.constraint_blocks(F, extra):
            acc.add_rows(block)
        return acc, F


def _zn_dim(G: PcGroup, n: int, S: list[int]) -> int:
    sysn = _BarSystem(G, n, S)
    acc, _ = sysn.cocycle_accumulator()
    return sysn.P - acc.rank


def bar_dims(G: PcGroup, max_degree: int = 3, bar3_cap: int = DEFAULT_BAR3_CAP) -> list[int]:
    """dim H^i(G; F_p), i <= max_degree <= 3, from normalized bar cochains."""
    if not 0 <= max_degree <= 3:
        raise CohomologyError("bar dimensions are computed through degree 3 only")
    N = G.order
    if max_degree == 3 and N > bar3_cap:
        raise CohomologyError("degree 3 bar cochains capped at |G| <= %d" % bar3_cap)
    if N == 1:
        return [1] + [0] * max_degree
    S = burnside_generators(G)
    out = [1]
    z = {0: 1}
    for n in range(1, max_degree + 1):
        z[n] = _zn_dim(G, n, S)
        c_prev = (N - 1) ** (n - 1) if n > 1 else 1
        b = c_prev - z[n - 1] if n > 1 else 0
        out.append(z[n] - b)
    return out


# -- degree one and two -------------------------------------------------------------------

def hom_basis(G: PcGroup) -> np.ndarray:
    """Basis of Hom(G, F_p) as value tables of shape (d, |G|)."""
    if G.order == 1:
        return np.zeros((0, 1), dtype=np.int64)
    S = burnside_generators(G)
    sys1 = _BarSystem(G, 1, S)
    acc, F = sys1.cocycle_accumulator()
    Z = kernel(FpMatrix(G.p, acc.basis())) if acc.rank else np.eye(sys1.P, dtype=np.int64)
    vals = np.stack([F[z][0] for z in range(G.order)])  # (|G|, P)
    return np.mod(Z @ vals.T, G.p)


@dataclass(eq=False)
class Cocycle2:
    """Normalized 2-cochain on G with values in F_p, stored as a |G| x |G| table."""
    group: PcGroup
    table: np.ndarray

    def __post_init__(self):
        t = np.mod(np.asarray(self.table, dtype=np.int64), self.group.p)
        if t.shape != (self.group.order, self.group.order):
            raise CohomologyError("cochain table has wrong shape")
        self.table = t

    @property
    def p(self):
        return self.group.p

    def __add__(self, other):
        return Cocycle2(self.group, self.table + other.table)

    def __sub__(self, other):
        return Cocycle2(self.group, self.table - other.table)

    def __mul__(self, c: int):
        return Cocycle2(self.group, self.table * int(c))

    __rmul__ = __mul__

    def is_normalized(self) -> bool:
        return not self.table[0].any() and not self.table[:, 0].any()

    def is_cocycle(self, samples: int = 20000, seed: int = 0) -> bool:
        """f(g,h) + f(gh,k) = f(h,k) + f(g,hk); exhaustive for |G| <= 32, sampled above."""
        f, T, p = self.table, self.group.table, self.p
        N = self.group.order
        if N <= 32:
            lhs = f[:, :, None] + f[T]
            rhs = f[None, :, :] + f[:, T]
            return bool(np.all(np.mod(lhs - rhs, p) == 0))
        rng = np.random.default_rng(seed)
        g, h, k = rng.integers(0, N, (3, samples))
        lhs = f[g, h] + f[T[g, h], k]
        rhs = f[h, k] + f[g, T[h, k]]
        return bool(np.all(np.mod(lhs - rhs, p) == 0))


def coboundary(G: PcGroup, c) -> Cocycle2:
    """dc(g, h) = c(g) + c(h) - c(gh) for a normalized 1-cochain c."""
    c = np.asarray(c, dtype=np.int64)
    return Cocycle2(G, c[:, None] + c[None, :] - c[G.table])


@dataclass(eq=False)
class H2Presentation:
    """H^1 and H^2 of G with a way to read off class coordinates.

    ``reps`` are cocycles whose classes form a basis of H^2; ``hom`` is a
    basis of H^1 = Hom(G, F_p); ``b2_rank`` is dim B^2.
    """
    group: PcGroup
    gens: list[int]
    hom: np.ndarray
    reps: list[Cocycle2]
    b2_rank: int
    z2_dim: int
    _acc: EchelonAccumulator = field(repr=False)
    _rep_index: list[int] = field(repr=False)

    @property
    def p(self):
        return self.group.p

    @property
    def dim_h1(self) -> int:
        return self.hom.shape[0]

    @property
    def dim_h2(self) -> int:
        return len(self.reps)

    def params(self, f: Cocycle2) -> np.ndarray:
        return f.table[1:, self.gens].reshape(-1)

    def coords(self, f: Cocycle2) -> np.ndarray:
        """Coordinates of the class of ``f`` on ``reps``."""
        if f.group is not self.group and f.table.shape[0] != self.group.order:
            raise CohomologyError("cocycle lives on a different group")
        co = self._acc.coordinates(self.params(f))
        if co is None:
            raise CohomologyError("not a cocycle")
        return np.array([co.get(i, 0) for i in self._rep_index], dtype=np.int64)

    def is_coboundary(self, f: Cocycle2) -> bool:
        return not self.coords(f).any()


def _table_from_params(G: PcGroup, S: list[int], v: np.ndarray) -> np.ndarray:
    N, T, p = G.order, G.table, G.p
    d = len(S)
    f = np.zeros((N, N), dtype=np.int64)
    f[1:, S] = v.reshape(N - 1, d)
    tree, _ = _spanning_tree(G, S)
    for u, si, w in tree:
        s = S[si]
        # f(g, us) = f(g, u) - f(u, s) + f(gu, s)
        f[:, w] = np.mod(f[:, u] - f[u, s] + f[T[:, u], s], p)
    return f


def h2_bar_basis(G: PcGroup, cap: int = DEFAULT_H2_CAP) -> H2Presentation:
    """Bases of H^1(G) and H^2(G) from normalized bar cochains."""
    N, p = G.order, G.p
    if N > cap:
        raise CohomologyError("|G| = %d exceeds the degree-2 cap %d" % (N, cap))
    S = burnside_generators(G)
    hom = hom_basis(G)
    if N == 1:
        acc = EchelonAccumulator(p, 0, track=True)
        return H2Presentation(G, S, hom, [], 0, 0, acc, [])
    sys2 = _BarSystem(G, 2, S)
    cons, _ = sys2.cocycle_accumulator()
    Z = kernel(FpMatrix(p, cons.basis())) if cons.rank else np.eye(sys2.P, dtype=np.int64)
    # coboundaries of the point masses e_x
    T = G.table
    B = np.zeros((N - 1, N - 1, len(S)), dtype=np.int64)
    for x in range(1, N):
        for si, s in enumerate(S):
            B[x - 1, :, si] = (np.arange(1, N) == x).astype(np.int64) + (s == x) - (T[1:, s] == x)
    B = np.mod(B.reshape(N - 1, -1), p)
    acc = EchelonAccumulator(p, sys2.P, track=True)
    b_rank = 0
    for row in B:
        b_rank += acc.add(row)
    reps, idx = [], []
    for z in Z:
        i = acc.count
        if acc.add(z):
            idx.append(i)
            reps.append(Cocycle2(G, _table_from_params(G, S, z)))
    return H2Presentation(G, S, hom, reps, b_rank, Z.shape[0], acc, idx)


def cup11(G: PcGroup, x, y) -> Cocycle2:
    """(x u y)(g, h) = x(g) y(h) for homomorphisms x, y: G -> F_p."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    return Cocycle2(G, np.outer(x, y))


def bockstein1(G: PcGroup, x) -> Cocycle2:
    """beta(x)(g, h) = (x~(g) + x~(h) - x~(gh)) / p with x~ the lift to [0, p)."""
    x = np.mod(np.asarray(x, dtype=np.int64), G.p)
    num = x[:, None] + x[None, :] - x[G.table]
    return Cocycle2(G, num // G.p)


def restrict2(f: Cocycle2, A: Subgroup):
    """Restriction to A, as a cocycle on A's own presentation.  Returns (cocycle, embedding)."""
    H, emb = subgroup_as_pcgroup(A)
    emb = np.asarray(emb, dtype=np.int64)
    return Cocycle2(H, f.table[np.ix_(emb, emb)]), emb


def _is_elementary_abelian(G: PcGroup) -> bool:
    return G.is_abelian and all(G.pow(g, G.p) == 0 for g in G.generators)


def bockstein_subspace(A: PcGroup, pres: H2Presentation | None = None, basis=None) -> np.ndarray:
    """Class coordinates (rows) spanning B(A) = beta(H^1(A)) inside H^2(A)."""
    if not _is_elementary_abelian(A):
        raise CohomologyError("%s is not elementary abelian" % A.name)
    pres = pres or h2_bar_basis(A)
    hom = pres.hom if basis is None else np.asarray(basis)
    rows = [pres.coords(bockstein1(A, x)) for x in hom]
    return np.array(rows, dtype=np.int64).reshape(len(rows), pres.dim_h2)


def _span_rank(p: int, rows, width: int) -> int:
    if width == 0:
        return 0
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, width)
    if rows.shape[0] == 0:
        return 0
    return rank(FpMatrix(p, rows))


def degree2_relations(G: PcGroup, pres: H2Presentation | None = None) -> dict:
    """Kernel K of the degree-two product map out of the free algebra on H^1.

    p = 2: source Sym^2 H^1 (monomials x_i x_j, i <= j).  Odd p: source
    Lambda^2 H^1 (x_i x_j, i < j).  ``square_span`` is the span of the x*x
    with x u x ~ 0, which is only nonzero at p = 2.
    """
    pres = pres or h2_bar_basis(G)
    p, h = G.p, pres.hom
    d = h.shape[0]
    pairs = [(i, j) for i in range(d) for j in range(i, d) if p == 2 or i < j]
    images = np.array([pres.coords(cup11(G, h[i], h[j])) for i, j in pairs], dtype=np.int64)
    images = images.reshape(len(pairs), pres.dim_h2)
    K = left_kernel(FpMatrix(p, images)) if pairs else np.zeros((0, 0), dtype=np.int64)
    square_dim = 0
    if p == 2 and d:
        # squaring is additive at p = 2, so W = {x : x^2 ~ 0} is a kernel
        sq = images[[pairs.index((i, i)) for i in range(d)]]
        W = left_kernel(FpMatrix(2, sq))
        # (sum a_i x_i)^2 = sum a_i x_i^2 in Sym^2 mod 2
        square_rows = np.zeros((W.shape[0], len(pairs)), dtype=np.int64)
        for r, w in enumerate(W):
            for i in range(d):
                square_rows[r, pairs.index((i, i))] = w[i]
        square_dim = W.shape[0]
    return {
        "h1": d,
        "h2": pres.dim_h2,
        "source_dim": len(pairs),
        "kernel_dim": int(K.shape[0]),
        "square_span_dim": square_dim,
        "image_dim": len(pairs) - int(K.shape[0]),
    }


def powerful_cohom(G: PcGroup, pres: H2Presentation | None = None) -> bool:
    """Relations in degree two are exactly the squares that vanish (p = 2), or none (odd p)."""
    rel = degree2_relations(G, pres)
    if G.p == 2:
        # the square span always lies in K
        return rel["kernel_dim"] == rel["square_span_dim"]
    return rel["kernel_dim"] == 0


def _restricted_images(G: PcGroup, pres: H2Presentation, A: Subgroup):
    H, emb = subgroup_as_pcgroup(A)
    emb = np.asarray(emb, dtype=np.int64)
    presA = h2_bar_basis(H)
    res = [presA.coords(Cocycle2(H, f.table[np.ix_(emb, emb)])) for f in pres.reps]
    res = np.array(res, dtype=np.int64).reshape(len(res), presA.dim_h2)
    return H, presA, res


def omega_extendible(G: PcGroup, pres: H2Presentation | None = None) -> dict:
    """B(A) inside the image of restriction H^2(G) -> H^2(A), per maximal elementary abelian A.

    ``verdict`` is the answer for the first A; ``consistent`` records whether
    all A agree.
    """
    pres = pres or h2_bar_basis(G)
    p = G.p
    subs, _ = maximal_elem_ab(G)
    per_A = []
    for A in subs:
        H, presA, res = _restricted_images(G, pres, A)
        B = bockstein_subspace(H, presA)
        w = presA.dim_h2
        r_res = _span_rank(p, res, w)
        r_both = _span_rank(p, np.vstack([res, B]), w)
        per_A.append({
            "order": A.order,
            "gens": [list(G.element(g)) for g in A.gens],
            "h2_dim": w,
            "res_rank": r_res,
            "b_dim": _span_rank(p, B, w),
            "contains": r_both == r_res,
        })
    verdicts = {a["contains"] for a in per_A}
    return {"verdict": per_A[0]["contains"], "consistent": len(verdicts) == 1, "per_A": per_A}


def param2_data(G: PcGroup, pres: H2Presentation | None = None) -> dict:
    """Surjectivity of res + products onto H^2(A) for each maximal A, plus the relation kernel."""
    pres = pres or h2_bar_basis(G)
    p = G.p
    subs, _ = maximal_elem_ab(G)
    rel = degree2_relations(G, pres)
    per_A = []
    for A in subs:
        H, presA, res = _restricted_images(G, pres, A)
        h = presA.hom
        m = h.shape[0]
        prods = [presA.coords(cup11(H, h[i], h[j])) for i in range(m) for j in range(i, m) if p == 2 or i < j]
        rows = np.vstack([res] + [np.array(prods, dtype=np.int64).reshape(len(prods), presA.dim_h2)])
        per_A.append({"order": A.order, "h2_dim": presA.dim_h2,
                      "surjective": _span_rank(p, rows, presA.dim_h2) == presA.dim_h2})
    if p == 2:
        relations_ok = rel["kernel_dim"] == rel["square_span_dim"]
    else:
        relations_ok = rel["kernel_dim"] == 0
    verdict = relations_ok and all(a["surjective"] for a in per_A)
    return {"verdict": verdict, "relations_ok": relations_ok, "per_A": per_A}


def param2_check(G: PcGroup, pres: H2Presentation | None = None) -> bool:
    """Parameters in degree two and only square relations (odd p)."""
    if G.p == 2:
        raise CohomologyError("param2_check is defined for odd p only")
    return param2_data(G, pres)["verdict"]


def abelian_shape_check(G: PcGroup, kmax: int = 8, dims=None) -> bool:
    """Poincare series equals (1 - t)^(-d) through degree kmax."""
    if dims is None:
        dims = minres_dims(G, kmax)
    if len(dims) < kmax + 1:
        raise CohomologyError("dimension sequence shorter than kmax + 1")
    d = d_of(G)
    return all(dims[i] == order_dim_bound(d, i) for i in range(kmax + 1))
