import pytest

from pgcoh.corpus import default_corpus, make
from pgcoh.pcgroup import CapExceeded, is_normal
from pgcoh.tower import characteristic_tower, is_p_central, is_powerful, kernel_intersection, lower_bound_W

CORPUS = {e.name: e for e in default_corpus(2) + default_corpus(3)}


def grp(name):
    return CORPUS[name].group


def test_is_powerful_examples():
    for name, e in CORPUS.items():
        if e.group.is_abelian:
            assert is_powerful(e.group), name
    assert not is_powerful(grp("D8"))
    assert is_powerful(grp("M16"))
    assert not is_powerful(grp("Q8"))
    assert not is_powerful(grp("3^1+2_exp3"))


def test_is_p_central_examples():
    assert is_p_central(grp("Q8"))
    assert not is_p_central(grp("D8"))
    for name in ("C2^3", "C3^3", "C2^2"):
        assert is_p_central(grp(name))


def test_tower_c8():
    rep = characteristic_tower(grp("C8"))
    assert rep.r == 1 and rep.primed
    assert rep.base_V.is_whole()
    assert (rep.V.order_exp, rep.H.order_exp, rep.N.order_exp) == (2, 1, 0)
    assert rep.index_exp == rep.bound_exp == 3
    assert rep.holds and not rep.fallback_used


def test_tower_c2_squared():
    rep = characteristic_tower(grp("C2^2"))
    assert rep.r == 2
    assert rep.base_V.order_exp == 0 and rep.N.order_exp == 0
    assert rep.index_exp == 2 and rep.bound_exp == 8 and rep.holds


def test_tower_c3_squared():
    rep = characteristic_tower(grp("C3^2"))
    assert rep.r == 2 and not rep.primed
    assert rep.V.order_exp == 0 and rep.N.order_exp == 0
    assert rep.index_exp == 2 <= rep.bound_exp
    assert all(v for v in rep.flags.values())


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_tower_theorem_on_corpus(name):
    G = grp(name)
    rep = characteristic_tower(G)
    assert not rep.fallback_used
    assert rep.flags["chain"] and rep.flags["normal"]
    assert rep.holds, rep.to_json()
    # the kernel intersection contains the computable floor
    assert lower_bound_W(G, rep.r) <= (rep.base_V if rep.primed else rep.V)


def test_r_monotone():
    for name in ("D8", "Q8", "D16", "C4xC2", "3^1+2_exp3", "C9xC3"):
        G = grp(name)
        prev = None
        for r in range(1, 5):
            V, _ = kernel_intersection(G, r)
            assert is_normal(V)
            if prev is not None:
                assert V <= prev
            prev = V


def test_fallback_path():
    G = grp("D16")
    with pytest.raises(CapExceeded):
        kernel_intersection(G, 2, cap=1)
    rep = characteristic_tower(G, hom_cap=1)
    assert rep.fallback_used
    assert rep.base_V == lower_bound_W(G, rep.r)


def test_to_json_shape():
    js = characteristic_tower(grp("D8")).to_json()
    for key in ("r", "V", "H", "N", "flags", "index_exp", "bound_exp", "fallback_used"):
        assert key in js
    assert js["V"]["order_exp"] >= js["H"]["order_exp"] >= js["N"]["order_exp"]


def test_rank_argument():
    G = make("cyclic", 2, order=16).group
    assert characteristic_tower(G, r=1).index_exp <= 3
    with pytest.raises(ValueError):
        characteristic_tower(G, r=0)
