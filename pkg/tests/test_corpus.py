import json
import os

import pytest

from pgcoh.corpus import default_corpus, expected_invariants, make, write_corpus
from pgcoh.pcgroup import PcGroupError, load_group, structure_invariants


@pytest.mark.parametrize("p", [2, 3, 5])
def test_invariants_match_family_formulas(p):
    for e in default_corpus(p):
        got = structure_invariants(e.group, with_rank=False).as_dict()
        exp = expected_invariants(e)
        for k, v in exp.items():
            assert got[k] == v, (e.name, k)


def test_names_unique_and_sizes():
    for p in (2, 3, 5):
        names = [e.name for e in default_corpus(p)]
        assert len(names) == len(set(names))
        assert all(e.group.order <= 256 for e in default_corpus(p))
    assert len(default_corpus(2)) >= 20


def test_coclass_one_families():
    for e in default_corpus(2):
        if e.family in ("dihedral", "semidihedral", "quaternion"):
            assert structure_invariants(e.group, with_rank=False).coclass == 1


def test_both_extraspecial_27():
    groups = {e.name: e.group for e in default_corpus(3)}
    a, b = groups["3^1+2_exp3"], groups["3^1+2_exp9"]
    assert a.order == b.order == 27
    assert a.exponent == 3 and b.exponent == 9
    for G in (a, b):
        inv = structure_invariants(G)
        assert inv.nilpotency_class == 2 and inv.d == 2


def test_make_errors():
    with pytest.raises(PcGroupError):
        make("dihedral", 3, order=27)
    with pytest.raises(PcGroupError):
        make("nonsense", 2)
    with pytest.raises(PcGroupError):
        make("cyclic", 2, order=512)
    with pytest.raises(PcGroupError):
        make("cyclic", 2, order=4, bogus=1)


@pytest.mark.parametrize("p", [2, 3])
def test_write_corpus_idempotent_and_loadable(tmp_path, p):
    paths = write_corpus(p, tmp_path / "a")
    first = {os.path.basename(x): open(x, "rb").read() for x in paths}
    write_corpus(p, tmp_path / "a")
    again = {os.path.basename(x): open(x, "rb").read() for x in paths}
    assert first == again
    manifest = json.loads(first["manifest.json"])
    assert manifest["p"] == p
    assert len(manifest["groups"]) == len(default_corpus(p))
    for item in manifest["groups"]:
        G = load_group(tmp_path / "a" / item["file"])
        assert G.p == p
