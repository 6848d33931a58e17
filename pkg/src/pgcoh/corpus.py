"""Constructors for the standard p-group families used as test corpus."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .pcgroup import PcGroup, PcGroupError, group_to_json, validate_group

__all__ = ["CorpusEntry", "make", "default_corpus", "expected_invariants", "write_corpus", "FAMILIES"]

FAMILIES = ("cyclic", "elem_ab", "abelian", "dihedral", "semidihedral", "quaternion",
            "modular", "extraspecial", "product")


@dataclass
class CorpusEntry:
    group: PcGroup
    family: str
    params: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.group.name


def _digits(e: int, p: int, k: int) -> list[int]:
    """Base-p digits of ``e mod p^k``, least significant first."""
    e %= p**k
    out = []
    for _ in range(k):
        e, r = divmod(e, p)
        out.append(r)
    return out


def _cyclic_block(p: int, k: int, offset: int, n: int) -> list[list[int]]:
    """Power relations for ``g_{offset+i} = a^(p^i)`` generating ``C_{p^k}``."""
    rows = []
    for i in range(k):
        w = [0] * n
        if i + 1 < k:
            w[offset + i + 1] = 1
        rows.append(w)
    return rows


def _rotation_word(p: int, e: int, k: int, n: int, offset: int = 1) -> list[int]:
    """Normal form of ``a^e`` when ``g_{offset+i} = a^(p^i)`` and ``|a| = p^k``."""
    w = [0] * n
    for i, dgt in enumerate(_digits(e, p, k)):
        w[offset + i] = dgt
    return w


def _cyclic(p: int, k: int, name=None) -> PcGroup:
    return PcGroup(p, _cyclic_block(p, k, 0, k), {}, name or "C%d" % p**k)


def _abelian(p: int, exps: list[int], name=None) -> PcGroup:
    exps = sorted((e for e in exps if e > 0), reverse=True)
    n = sum(exps)
    power = []
    off = 0
    for e in exps:
        power.extend(_cyclic_block(p, e, off, n))
        off += e
    if name is None:
        parts = ["C%d" % p**e for e in exps]
        if len(set(parts)) == 1 and len(parts) > 1:
            name = "%s^%d" % (parts[0], len(parts))
        else:
            name = "x".join(parts) if parts else "C1"
    return PcGroup(p, power, {}, name)


def _metacyclic_2(k: int, kind: str) -> PcGroup:
    """Dihedral, semidihedral or quaternion group of order ``2^k``.

    ``g_1 = b``, ``g_{i+2} = a^(2^i)`` with ``|a| = 2^(k-1)``.
    """
    n = k
    m = k - 1  # a has order 2^m
    power = [[0] * n]
    power.extend(_cyclic_block(2, m, 1, n))
    if kind == "quaternion":
        power[0] = _rotation_word(2, 2 ** (m - 1), m, n)
    # b^-1 a b = a^s
    s = {"dihedral": -1, "quaternion": -1, "semidihedral": 2 ** (m - 1) - 1}[kind]
    comm = {}
    for i in range(m):
        e = 2**i
        # [a^e, b] = a^-e * a^(e s)
        comm[(i + 1, 0)] = _rotation_word(2, e * (s - 1), m, n)
    prefix = {"dihedral": "D", "semidihedral": "SD", "quaternion": "Q"}[kind]
    return PcGroup(2, power, comm, "%s%d" % (prefix, 2**k))


def _modular(p: int, k: int) -> PcGroup:
    """``M_{p^k} = <a, b | a^(p^(k-1)), b^p, b^-1 a b = a^(1+p^(k-2))>``."""
    n = k
    m = k - 1
    power = [[0] * n] + _cyclic_block(p, m, 1, n)
    s = 1 + p ** (k - 2)
    comm = {(i + 1, 0): _rotation_word(p, p**i * (s - 1), m, n) for i in range(m)}
    return PcGroup(p, power, comm, "M%d" % p**k)


def _heisenberg(p: int) -> PcGroup:
    return PcGroup(p, [[0, 0, 0]] * 3, {(1, 0): [0, 0, 1]}, "%d^1+2_exp%d" % (p, p))


def _direct_product(A: PcGroup, B: PcGroup, name=None) -> PcGroup:
    n = A.n + B.n
    power = [list(w) + [0] * B.n for w in A.power] + [[0] * A.n + list(w) for w in B.power]
    comm = {k: list(w) + [0] * B.n for k, w in A.comm.items()}
    for (j, i), w in B.comm.items():
        comm[(j + A.n, i + A.n)] = [0] * A.n + list(w)
    return PcGroup(A.p, power, comm, name or "%sx%s" % (A.name, B.name))


def _log(p: int, order: int) -> int:
    k = 0
    while order % p == 0 and order > 1:
        order //= p
        k += 1
    if order != 1:
        raise PcGroupError("order must be a power of %d" % p)
    return k


def make(family: str, p: int = 2, order: int | None = None, **params) -> CorpusEntry:
    """Construct a family member.

    ``order`` (a power of ``p``) selects cyclic, dihedral, semidihedral,
    quaternion, modular and extraspecial members; ``r`` the rank of an
    elementary abelian group; ``invariants`` the cyclic factor orders of an
    abelian group; ``factors`` two ``(family, kwargs)`` pairs for products.
    """
    if family not in FAMILIES:
        raise PcGroupError("unknown family %r" % family)
    n = params.pop("n", None)
    if n is not None and order is None:
        order = p**n
    if order is not None and order > 256:
        raise PcGroupError("orders above 256 are out of range for the corpus")
    k = _log(p, order) if order is not None else None
    info = {"p": p}
    if family == "cyclic":
        if k is None or k < 1:
            raise PcGroupError("cyclic groups need order >= p")
        G = _cyclic(p, k)
        info["order"] = order
    elif family == "elem_ab":
        r = params.pop("r")
        if not 1 <= r <= 8 or p**r > 256:
            raise PcGroupError("elementary abelian rank out of range")
        G = _abelian(p, [1] * r)
        info["r"] = r
    elif family == "abelian":
        inv = [int(x) for x in params.pop("invariants")]
        exps = [_log(p, x) for x in inv]
        if p ** sum(exps) > 256:
            raise PcGroupError("abelian group too large for the corpus")
        G = _abelian(p, exps)
        info["invariants"] = sorted(inv, reverse=True)
    elif family in ("dihedral", "semidihedral", "quaternion"):
        if p != 2:
            raise PcGroupError("%s groups are 2-groups" % family)
        lo = 4 if family == "semidihedral" else 3
        if k is None or k < lo:
            raise PcGroupError("%s groups need order >= %d" % (family, 2**lo))
        G = _metacyclic_2(k, family)
        info["order"] = order
    elif family == "modular":
        lo = 4 if p == 2 else 3
        if k is None or k < lo:
            raise PcGroupError("modular groups need order >= %d" % p**lo)
        G = _modular(p, k)
        info["order"] = order
    elif family == "extraspecial":
        exponent = params.pop("exponent", p)
        if p == 2:
            G = _metacyclic_2(3, "dihedral" if exponent == 4 and not params.pop("quaternion", False) else "quaternion")
            info["exponent"] = 4
        elif exponent == p:
            G = _heisenberg(p)
            info["exponent"] = p
        elif exponent == p * p:
            G = _modular(p, 3)
            G.name = "%d^1+2_exp%d" % (p, p * p)
            info["exponent"] = p * p
        else:
            raise PcGroupError("extraspecial exponent must be p or p^2")
        info["order"] = p**3
    else:  # product
        factors = params.pop("factors")
        parts = [make(f, p=p, **dict(kw)) for f, kw in factors]
        G = parts[0].group
        for e in parts[1:]:
            G = _direct_product(G, e.group)
        info["factors"] = [[f, dict(kw)] for f, kw in factors]
    if params:
        raise PcGroupError("unexpected parameters %r" % sorted(params))
    G = validate_group(G)
    entry = CorpusEntry(G, family, info)
    if family in ("dihedral", "semidihedral", "quaternion"):
        from .pcgroup import lower_central_series

        c = len(lower_central_series(G)) - 1
        if G.n - c != 1:
            raise PcGroupError("%s does not have coclass 1" % G.name)
    return entry


def expected_invariants(entry: CorpusEntry) -> dict:
    """Order exponent, d, class and coclass predicted by the family formulas."""
    fam, G, p = entry.family, entry.group, entry.group.p
    n = G.n
    if fam == "cyclic":
        d, c = 1, 1
    elif fam == "elem_ab":
        d, c = entry.params["r"], 1
    elif fam == "abelian":
        d, c = len(entry.params["invariants"]), 1
    elif fam in ("dihedral", "semidihedral", "quaternion"):
        d, c = 2, n - 1
    elif fam in ("modular", "extraspecial"):
        d, c = 2, 2
    else:
        parts = [expected_invariants(make(f, p=p, **dict(kw))) for f, kw in entry.params["factors"]]
        d = sum(x["d"] for x in parts)
        c = max(x["class"] for x in parts)
    return {"order_exp": n, "d": d, "class": c, "coclass": n - c}


def default_corpus(p: int) -> list[CorpusEntry]:
    """The fixed verification corpus for ``p`` in {2, 3, 5}."""
    if p == 2:
        out = [make("cyclic", 2, order=q) for q in (2, 4, 8, 16)]
        out += [make("elem_ab", 2, r=2), make("elem_ab", 2, r=3)]
        out += [make("abelian", 2, invariants=[4, 2]), make("abelian", 2, invariants=[4, 4])]
        out += [make("dihedral", 2, order=q) for q in (8, 16, 32, 64)]
        out += [make("semidihedral", 2, order=q) for q in (16, 32, 64)]
        out += [make("quaternion", 2, order=q) for q in (8, 16, 32, 64)]
        out += [make("modular", 2, order=q) for q in (16, 32)]
        out += [make("product", 2, factors=[("dihedral", {"order": 8}), ("cyclic", {"order": 2})]),
                make("product", 2, factors=[("quaternion", {"order": 8}), ("cyclic", {"order": 2})])]
        return out
    if p in (3, 5):
        out = [make("cyclic", p, order=p**k) for k in (1, 2, 3)]
        out += [make("elem_ab", p, r=r) for r in (2, 3)]
        out += [make("abelian", p, invariants=[p * p, p])]
        out += [make("extraspecial", p, exponent=p), make("extraspecial", p, exponent=p * p)]
        if p**4 <= 256:
            out.append(make("modular", p, order=p**4))
        return out
    raise PcGroupError("no built-in corpus for p=%r (supported: 2, 3, 5)" % p)


def _filename(name: str) -> str:
    return name.replace("/", "_") + ".json"


def write_corpus(p: int, out_dir) -> list[str]:
    """Write one group file per entry plus ``manifest.json``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    entries = default_corpus(p)
    paths = []
    manifest = []
    for e in entries:
        fn = _filename(e.name)
        path = os.path.join(out_dir, fn)
        with open(path, "w") as fh:
            json.dump(group_to_json(e.group), fh, indent=1, sort_keys=True)
            fh.write("\n")
        paths.append(path)
        manifest.append({"name": e.name, "file": fn, "family": e.family, "params": e.params})
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump({"p": p, "groups": manifest}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return paths + [mpath]
