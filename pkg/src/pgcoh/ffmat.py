"""Exact linear algebra over the prime field F_p.

Matrices are small dense numpy arrays of residues.  When ``p == 2`` the
elimination routines switch to rows packed into Python ints (one bit per
column), which is considerably faster for the bar-complex and resolution
kernels that dominate runtime at the prime 2.

Bit layout for packed rows: column ``j`` of an ``ncols`` wide row lives in
bit ``ncols - 1 - j``, so the leading column of a row is
``ncols - row.bit_length()``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FpMatrix",
    "EchelonAccumulator",
    "rref",
    "kernel",
    "left_kernel",
    "solve",
    "rank",
    "inverse_mod",
    "pack_row",
    "unpack_row",
]


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod %d" % p)
    return pow(a, p - 2, p)


def pack_row(row: Iterable[int], ncols: int) -> int:
    v = 0
    for j, x in enumerate(row):
        if x & 1:
            v |= 1 << (ncols - 1 - j)
    return v


def unpack_row(v: int, ncols: int) -> np.ndarray:
    out = np.zeros(ncols, dtype=np.int64)
    while v:
        b = v.bit_length() - 1
        out[ncols - 1 - b] = 1
        v ^= 1 << b
    return out


def _pack_matrix(a: np.ndarray) -> list[int]:
    ncols = a.shape[1]
    if ncols == 0:
        return [0] * a.shape[0]
    rows = []
    # np.packbits is big-endian per byte, which matches our bit layout after
    # trimming the padding on the right.
    pad = (-ncols) % 8
    packed = np.packbits(a.astype(np.uint8) & 1, axis=1)
    for r in packed:
        rows.append(int.from_bytes(r.tobytes(), "big") >> pad)
    return rows


def _unpack_matrix(rows: Sequence[int], ncols: int) -> np.ndarray:
    out = np.zeros((len(rows), ncols), dtype=np.int64)
    if ncols == 0 or not rows:
        return out
    pad = (-ncols) % 8
    nbytes = (ncols + pad) // 8
    buf = b"".join((r << pad).to_bytes(nbytes, "big") for r in rows)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8).reshape(len(rows), nbytes), axis=1)
    out[:, :] = bits[:, :ncols]
    return out


@dataclass(frozen=True, eq=False)
class FpMatrix:
    """A dense matrix over F_p with entries reduced into ``[0, p)``."""

    p: int
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.int64)
        if d.ndim != 2:
            raise ValueError("FpMatrix data must be two-dimensional")
        object.__setattr__(self, "data", np.mod(d, self.p))

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[int]], cols: int | None = None) -> "FpMatrix":
        if len(rows) == 0:
            return cls(p, np.zeros((0, cols or 0), dtype=np.int64))
        return cls(p, np.array(rows, dtype=np.int64).reshape(len(rows), -1))

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "FpMatrix":
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, n: int) -> "FpMatrix":
        return cls(p, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            return FpMatrix(self.p, _matmul_mod(self.data, other.data, self.p))
        v = np.asarray(other, dtype=np.int64)
        return _matmul_mod(self.data, v.reshape(-1, 1), self.p).reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(np.all(self.data == other.data))

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.p, self.data.T.copy())

    T = property(transpose)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __repr__(self):
        return "FpMatrix(p=%d, %dx%d)" % (self.p, self.rows, self.cols)


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # float64 BLAS is exact while inner-product sums stay below 2**53.
    if a.shape[1] * (p - 1) ** 2 < 2**52:
        return np.mod(np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64), p)
    return np.mod(a @ b, p)


def _as_array(m) -> tuple[int, np.ndarray]:
    if isinstance(m, FpMatrix):
        return m.p, m.data
    raise TypeError("expected FpMatrix, got %r" % type(m))


# -- packed GF(2) elimination ----------------------------------------------


def _rref_gf2(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Return (pivot columns, reduced nonzero rows) sorted by pivot column."""
    piv: dict[int, int] = {}  # bit position -> row with that leading bit
    for r in rows:
        while r:
            b = r.bit_length() - 1
            q = piv.get(b)
            if q is None:
                piv[b] = r
                break
            r ^= q
    bits = sorted(piv, reverse=True)
    # back substitution, lowest pivot first so each reduced row is final
    reduced: dict[int, int] = {}
    done: list[int] = []
    for b in reversed(bits):
        r = piv[b]
        for c in done:
            if (r >> c) & 1:
                r ^= reduced[c]
        reduced[b] = r
        done.append(b)
    return [ncols - 1 - b for b in bits], [reduced[b] for b in bits]


# -- dense odd-p elimination -------------------------------------------------


def _rref_dense(a: np.ndarray, p: int) -> tuple[list[int], np.ndarray]:
    m = np.mod(a, p).astype(np.int64, copy=True)
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            m[[r, k]] = m[[k, r]]
        inv = inverse_mod(int(m[r, c]), p)
        if inv != 1:
            m[r] = (m[r] * inv) % p
        col = m[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            m[others] = (m[others] - np.outer(col[others], m[r])) % p
        pivots.append(c)
        r += 1
    return pivots, m[:r]


def rref(m: FpMatrix) -> tuple[int, list[int], FpMatrix]:
    """Reduced row-echelon form.

    Returns ``(rank, pivot_columns, reduced)`` where ``reduced`` keeps only
    the nonzero rows.
    """
    p, a = _as_array(m)
    if a.size == 0:
        return 0, [], FpMatrix(p, np.zeros((0, a.shape[1]), dtype=np.int64))
    if p == 2:
        piv, rows = _rref_gf2(_pack_matrix(a), a.shape[1])
        return len(piv), piv, FpMatrix(2, _unpack_matrix(rows, a.shape[1]))
    piv, red = _rref_dense(a, p)
    return len(piv), piv, FpMatrix(p, red)


def rank(m: FpMatrix) -> int:
    p, a = _as_array(m)
    if a.size == 0:
        return 0
    acc = EchelonAccumulator(p, a.shape[1])
    acc.add_rows(a)
    return acc.rank


def kernel(m: FpMatrix) -> np.ndarray:
    """Basis of ``{x : m @ x == 0}`` as the rows of a ``(k, cols)`` array."""
    p, a = _as_array(m)
    ncols = a.shape[1]
    _, piv, red = rref(m)
    red = red.data
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(piv):
            basis[k, c] = (-red[i, f]) % p
    return basis


def left_kernel(m: FpMatrix) -> np.ndarray:
    """Basis of ``{x : x @ m == 0}`` as rows, in reduced echelon form."""
    p, a = _as_array(m)
    nrows, ncols = a.shape
    if nrows == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if p == 2:
        # Eliminate [m | I]; rows whose m part vanishes span the left kernel.
        packed = _pack_matrix(a)
        rows = [(r << nrows) | (1 << (nrows - 1 - i)) for i, r in enumerate(packed)]
        piv: dict[int, int] = {}
        kern: list[int] = []
        for r in rows:
            while True:
                if r >> nrows == 0:
                    kern.append(r)
                    break
                b = r.bit_length() - 1
                q = piv.get(b)
                if q is None:
                    piv[b] = r
                    break
                r ^= q
        _, red = _rref_gf2(kern, nrows)
        return _unpack_matrix(red, nrows)
    return kernel(m.transpose())


def solve(m: FpMatrix, b: Sequence[int]) -> np.ndarray | None:
    """One solution ``x`` of ``m @ x == b`` or ``None`` if there is none."""
    p, a = _as_array(m)
    bv = np.mod(np.asarray(b, dtype=np.int64).reshape(-1), p)
    if bv.shape[0] != a.shape[0]:
        raise ValueError("dimension mismatch: matrix has %d rows, rhs has %d entries" % (a.shape[0], bv.shape[0]))
    ncols = a.shape[1]
    aug = FpMatrix(p, np.hstack([a, bv.reshape(-1, 1)]))
    _, piv, red = rref(aug)
    if ncols in piv:
        return None
    x = np.zeros(ncols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = red.data[i, ncols]
    return x


class EchelonAccumulator:
    """Incrementally maintained row echelon basis.

    Rows are streamed in with :meth:`add` / :meth:`add_rows`; at most
    ``cols`` pivot rows are ever retained, so very tall systems can be fed
    in without materialising them.  With ``track=True`` every retained row
    remembers which input rows it is a combination of, which is what
    :meth:`coordinates` uses.
    """

    def __init__(self, p: int, cols: int, track: bool = False):
        self.p = p
        self.cols = cols
        self.track = track
        self.count = 0  # number of rows offered so far
        if p == 2:
            self._piv: dict[int, int] = {}
            self._hist: dict[int, int] = {}
        else:
            self._rows = np.zeros((0, cols), dtype=np.int64)
            self._pivcols: list[int] = []
            self._hist_rows: list[dict[int, int]] = []

    @property
    def rank(self) -> int:
        return len(self._piv) if self.p == 2 else len(self._pivcols)

    @property
    def pivots(self) -> list[int]:
        if self.p == 2:
            return sorted(self.cols - 1 - b for b in self._piv)
        return sorted(self._pivcols)

    # p = 2 ---------------------------------------------------------------
    def _reduce2(self, r: int, h: int) -> tuple[int, int]:
        piv = self._piv
        hist = self._hist
        while r:
            b = r.bit_length() - 1
            q = piv.get(b)
            if q is None:
                break
            r ^= q
            if self.track:
                h ^= hist[b]
        return r, h

    # generic -------------------------------------------------------------
    def _reduce_dense(self, v: np.ndarray) -> tuple[np.ndarray, dict[int, int]]:
        p = self.p
        v = np.mod(v, p)
        h: dict[int, int] = {}
        if not self._pivcols:
            return v, h
        # pivot rows are kept in reduced form, so one pass suffices
        coeffs = v[self._pivcols]
        nz = np.flatnonzero(coeffs)
        if nz.size:
            v = np.mod(v - coeffs[nz] @ self._rows[nz], p)
            if self.track:
                for i in nz:
                    c = int(coeffs[i])
                    for k, w in self._hist_rows[i].items():
                        h[k] = (h.get(k, 0) - c * w) % p
        return v, h

    def add(self, row) -> bool:
        """Insert one row; return True if it enlarged the row space."""
        idx = self.count
        self.count += 1
        if self.p == 2:
            r = row if isinstance(row, int) else pack_row(row, self.cols)
            r, h = self._reduce2(r, (1 << idx) if self.track else 0)
            if r:
                b = r.bit_length() - 1
                self._piv[b] = r
                if self.track:
                    self._hist[b] = h
                return True
            return False
        v, h = self._reduce_dense(np.asarray(row, dtype=np.int64))
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        if self.track:
            h[idx] = (h.get(idx, 0) + 1) % self.p
        c = int(nz[0])
        inv = inverse_mod(int(v[c]), self.p)
        v = (v * inv) % self.p
        if self.track:
            h = {k: (w * inv) % self.p for k, w in h.items() if (w * inv) % self.p}
        # keep existing rows reduced with respect to the new pivot
        col = self._rows[:, c].copy()
        hit = np.flatnonzero(col)
        if hit.size:
            self._rows[hit] = np.mod(self._rows[hit] - np.outer(col[hit], v), self.p)
            if self.track:
                for i in hit:
                    f = int(col[i])
                    hi = self._hist_rows[i]
                    for k, w in h.items():
                        hi[k] = (hi.get(k, 0) - f * w) % self.p
                    self._hist_rows[i] = {k: w for k, w in hi.items() if w}
        self._rows = np.vstack([self._rows, v[None, :]])
        self._pivcols.append(c)
        if self.track:
            self._hist_rows.append(h)
        return True

    def add_rows(self, rows) -> int:
        """Insert many rows; returns how many were independent."""
        if self.p == 2:
            if isinstance(rows, np.ndarray):
                rows = _pack_matrix(rows)
            return sum(self.add(r) for r in rows)
        if self.track:
            return sum(self.add(r) for r in rows)
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] == 0:
            return 0
        gained = 0
        step = max(64, self.cols)
        for start in range(0, rows.shape[0], step):
            block = np.mod(rows[start:start + step], self.p)
            self.count += block.shape[0]
            if self._pivcols:
                coeffs = block[:, self._pivcols]
                block = np.mod(block - _matmul_mod(coeffs, self._rows, self.p), self.p)
            keep = np.flatnonzero(block.any(axis=1))
            if keep.size == 0:
                continue
            piv, red = _rref_dense(block[keep], self.p)
            self.count -= len(piv)
            for v in red:
                self.add(v)
            gained += len(piv)
        return gained

    def reduce(self, row):
        """Residue of ``row`` modulo the current row space."""
        if self.p == 2:
            r = row if isinstance(row, int) else pack_row(row, self.cols)
            r, _ = self._reduce2(r, 0)
            return r if isinstance(row, int) else unpack_row(r, self.cols)
        v, _ = self._reduce_dense(np.asarray(row, dtype=np.int64))
        return v

    def contains(self, row) -> bool:
        r = self.reduce(row)
        return (r == 0) if isinstance(r, int) else not np.any(r)

    def coordinates(self, row) -> dict[int, int] | None:
        """Express ``row`` in terms of the rows added so far (tracked mode).

        Returns ``{input_index: coefficient}`` or ``None`` if ``row`` is not
        in the span.
        """
        if not self.track:
            raise RuntimeError("coordinates() needs track=True")
        if self.p == 2:
            r = row if isinstance(row, int) else pack_row(row, self.cols)
            r, h = self._reduce2(r, 0)
            if r:
                return None
            out = {}
            while h:
                b = h.bit_length() - 1
                out[b] = 1
                h ^= 1 << b
            return out
        v, h = self._reduce_dense(np.asarray(row, dtype=np.int64))
        if np.any(v):
            return None
        return {k: (-w) % self.p for k, w in h.items() if w % self.p}

    def basis(self) -> np.ndarray:
        """Current pivot rows, sorted by pivot column (not fully reduced at p=2)."""
        if self.p == 2:
            bits = sorted(self._piv, reverse=True)
            return _unpack_matrix([self._piv[b] for b in bits], self.cols)
        order = np.argsort(self._pivcols)
        return self._rows[order].copy()
