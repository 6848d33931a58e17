"""Powerful / p-central predicates and the characteristic subgroup tower."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import ceil_log, tower_index_bound_exp
from .pcgroup import (
    DEFAULT_HOM_CAP, CapExceeded, PcGroup, Subgroup, _hom_iter, _join, _kernel_mask, agemo, center,
    derived_subgroup, is_normal, lower_central_series, omega, subgroup_as_pcgroup, subgroup_generated,
    subgroup_rank,
)

__all__ = ["is_powerful", "is_p_central", "characteristic_tower", "TowerReport", "kernel_intersection",
           "lower_bound_W"]


def _group_of(X) -> PcGroup:
    if isinstance(X, PcGroup):
        return X
    if X.is_whole():
        return X.parent
    return subgroup_as_pcgroup(X)[0]


def is_powerful(X) -> bool:
    """[G,G] <= G^p for odd p, [G,G] <= G^4 for p = 2."""
    G = _group_of(X)
    return derived_subgroup(G) <= agemo(G, 2 if G.p == 2 else 1)


def is_p_central(X) -> bool:
    """Omega_1(G) lies in the centre."""
    G = _group_of(X)
    return omega(G, 1) <= center(G)


def lower_bound_W(G: PcGroup, r: int) -> Subgroup:
    """gamma_r(G) G^(p^ceil(log_p r)), inside every kernel of G -> UT_r(F_p)."""
    lcs = lower_central_series(G)
    gamma = lcs[r - 1] if r - 1 < len(lcs) else lcs[-1]
    return _join(G, gamma, agemo(G, ceil_log(G.p, r)))


def kernel_intersection(G: PcGroup, r: int, cap: int = DEFAULT_HOM_CAP) -> tuple[Subgroup, int]:
    """Intersection of the kernels of all homomorphisms G -> UT_r(F_p).

    Stops early once the intersection reaches the lower bound W.  Returns
    the subgroup and the number of homomorphisms inspected.
    """
    floor = lower_bound_W(G, r).mask()
    mask = np.ones(G.order, dtype=bool)
    seen = 0
    for ut, imgs in _hom_iter(G, r, cap):
        seen += 1
        mask &= _kernel_mask(G, ut, imgs)
        if np.array_equal(mask, floor):
            break
    return subgroup_generated(G, np.flatnonzero(mask).tolist()), seen


def _log_order(S: Subgroup) -> int:
    return S.order_exp


@dataclass
class TowerReport:
    group: PcGroup
    r: int
    V: Subgroup
    H: Subgroup
    N: Subgroup
    flags: dict
    index_exp: int
    bound_exp: int
    fallback_used: bool
    primed: bool
    base_V: Subgroup | None = None  # unprimed V when the chain is primed
    alt_index_exp: int | None = None
    homs_seen: int = 0
    omega_detail: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        f = self.flags
        return (f["N_powerful"] and f["N_p_central"] and f["N_omega_extendible"] and f["N_rank_le_r"]
                and f["normal"] and self.index_exp <= self.bound_exp)

    def to_json(self) -> dict:
        G = self.group

        def sub(S):
            return {"order_exp": S.order_exp, "gens": [list(G.element(g)) for g in S.gens]}

        out = {
            "r": self.r,
            "primed": self.primed,
            "V": sub(self.V),
            "H": sub(self.H),
            "N": sub(self.N),
            "flags": dict(self.flags),
            "index_exp": self.index_exp,
            "bound_exp": self.bound_exp,
            "fallback_used": self.fallback_used,
        }
        if self.base_V is not None:
            out["base_V"] = sub(self.base_V)
        if self.alt_index_exp is not None:
            out["alt_index_exp"] = self.alt_index_exp
        return out


def characteristic_tower(G: PcGroup, r: int | None = None, hom_cap: int = DEFAULT_HOM_CAP,
                         with_omega: bool = True) -> TowerReport:
    """V = intersection of kernels into GL_r(F_p), then two (odd p) or three (p = 2) agemo steps."""
    from .cohomology import omega_extendible

    if r is None:
        r = max(1, subgroup_rank(G))
    if r < 1:
        raise ValueError("r must be >= 1")
    fallback = False
    try:
        V, seen = kernel_intersection(G, r, hom_cap)
    except CapExceeded:
        V, seen = lower_bound_W(G, r), 0
        fallback = True
    base = None
    alt = None
    if G.p == 2:
        base = V
        V = agemo(base, 1)
        alt_N = agemo(base, 3)
    H = agemo(V, 1)
    N = agemo(H, 1)
    if G.p == 2:
        alt = G.n - alt_N.order_exp
    NG = _group_of(N)
    flags = {
        "N_powerful": is_powerful(NG),
        "N_p_central": is_p_central(NG),
        "N_rank_le_r": (subgroup_rank(NG) if NG.order > 1 else 0) <= r,
        "normal": all(is_normal(S) for S in (V, H, N)),
        "chain": N <= H <= V,
    }
    detail = {}
    if with_omega:
        detail = omega_extendible(NG)
        flags["N_omega_extendible"] = bool(detail["verdict"])
    else:
        flags["N_omega_extendible"] = None
    index_exp = G.n - N.order_exp
    rep = TowerReport(G, r, V, H, N, flags, index_exp, tower_index_bound_exp(G.p, r), fallback,
                      primed=G.p == 2, base_V=base, homs_seen=seen, omega_detail=detail)
    if alt is not None and alt != index_exp:
        rep.alt_index_exp = alt
    return rep
