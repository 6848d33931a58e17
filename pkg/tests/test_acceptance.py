"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
under capture) or directly with ``python tests/test_acceptance.py``.
"""

import functools
import os
import subprocess
import sys
import tempfile
import time
from math import comb

import pytest

from pgcoh import bounds as B
from pgcoh.cohomology import (
    abelian_shape_check, bar_dims, degree2_relations, minres_dims, omega_extendible, param2_check, powerful_cohom,
)
from pgcoh.corpus import default_corpus
from pgcoh.pcgroup import d_of, subgroup_rank
from pgcoh.tower import characteristic_tower, is_powerful

PRIMES = (2, 3, 5)
WIDE_CAP = 8192  # lets C5^3 reach degree 8 without truncation


@functools.lru_cache(maxsize=None)
def corpus(p):
    return tuple(default_corpus(p))


def all_entries():
    return [e for p in PRIMES for e in corpus(p)]


@functools.lru_cache(maxsize=None)
def dims8(p, name):
    G = next(e.group for e in corpus(p) if e.name == name)
    d = minres_dims(G, 8, cap=WIDE_CAP)
    if d.truncated_at is not None:
        raise AssertionError("%s truncated at degree %d" % (name, d.truncated_at))
    return tuple(d.dims)


@functools.lru_cache(maxsize=None)
def omega_verdict(p, name):
    G = next(e.group for e in corpus(p) if e.name == name)
    return bool(omega_extendible(G)["verdict"])


def _report(k, ok, detail, elapsed):
    line = "CRITERION %2d: %s  (%.1fs) %s" % (k, "PASS" if ok else "FAIL", elapsed, detail)
    return line


# -- criteria ------------------------------------------------------------------------------

def criterion_1():
    bad, n = [], 0
    for e in all_entries():
        G = e.group
        if G.order > 32:
            continue
        n += 1
        bd = bar_dims(G, 3)
        md = minres_dims(G, 3).dims
        if bd != md:
            bad.append("%s bar=%s minres=%s" % (e.name, bd, md))
    return not bad, "%d groups, degrees 0-3; mismatches: %s" % (n, bad or "none"), 120


def criterion_2():
    bad = []
    for p in PRIMES:
        G = next(e.group for e in corpus(p) if e.name == "C%d" % p)
        if minres_dims(G, 10).dims != [1] * 11:
            bad.append("C%d" % p)
    if list(dims8(2, "D8")) != [i + 1 for i in range(9)]:
        bad.append("D8")
    if list(dims8(2, "Q8")) != [1, 2, 2, 1, 1, 2, 2, 1, 1]:
        bad.append("Q8")
    n_ab = 0
    for e in all_entries():
        if e.group.is_abelian:
            n_ab += 1
            d = d_of(e.group)
            if list(dims8(e.group.p, e.name)) != [comb(d + i - 1, i) for i in range(9)]:
                bad.append(e.name)
    return not bad, "C_p, D8, Q8 and %d abelian groups through degree 8; wrong: %s" % (n_ab, bad or "none"), 300


def criterion_3():
    bad, n = [], 0
    for e in all_entries():
        G = e.group
        if G.order > 64:
            continue
        n += 1
        a, b = powerful_cohom(G), is_powerful(G)
        if a != b:
            bad.append("%s cohom=%s def=%s" % (e.name, a, b))
    return not bad, "%d groups of order <= 64 over p=2,3,5; disagreements: %s" % (n, bad or "none"), None


def criterion_4():
    bad, n, skipped = [], 0, []
    for e in all_entries():
        rep = characteristic_tower(e.group)
        if rep.fallback_used:
            skipped.append(e.name)
            continue
        n += 1
        if not rep.holds:
            bad.append("%s %s index %d bound %d" % (e.name, rep.flags, rep.index_exp, rep.bound_exp))
    c8 = characteristic_tower(next(x.group for x in corpus(2) if x.name == "C8"))
    if not (c8.index_exp == c8.bound_exp == 3):
        bad.append("C8 index %d bound %d" % (c8.index_exp, c8.bound_exp))
    ok = not bad and n > 0
    return ok, "%d exact towers, %d fallbacks; C8 index=bound=3: %s; violations: %s" % (
        n, len(skipped), c8.index_exp == c8.bound_exp == 3, bad or "none"), None


def criterion_5():
    bad, strict = [], []
    for e in all_entries():
        G = e.group
        r = subgroup_rank(G)
        dims = dims8(G.p, e.name)
        for i, x in enumerate(dims):
            gt = B.gt_bound(G.p, r, i)
            od = B.order_dim_bound(G.n, i)
            if x > gt or x > od:
                bad.append("%s i=%d dim=%d gt=%d order=%d" % (e.name, i, x, gt, od))
            if x < od and e.name not in strict:
                strict.append(e.name)
    ok = not bad and bool(strict)
    return ok, "%d groups, i <= 8; violations: %s; strict below order bound: %d groups" % (
        len(all_entries()), bad or "none", len(strict)), None


def criterion_6():
    bad = []
    for e in all_entries():
        G = e.group
        shape = abelian_shape_check(G, 8, list(dims8(G.p, e.name)))
        want = is_powerful(G) and omega_verdict(G.p, e.name)
        if shape != want:
            bad.append("%s shape=%s powerful&omega=%s" % (e.name, shape, want))
    for e in corpus(3):
        G = e.group
        want = is_powerful(G) and omega_verdict(3, e.name)
        got = param2_check(G)
        if got != want:
            bad.append("%s param2=%s powerful&omega=%s" % (e.name, got, want))
    return not bad, "shape check vs powerful and Omega-extendible on all groups, param2 on p=3; mismatches: %s" % (
        bad or "none"), None


def criterion_7():
    fams = {"dihedral": [], "semidihedral": [], "quaternion": []}
    for e in corpus(2):
        if e.family in fams and 16 <= e.group.order <= 64:
            key = (dims8(2, e.name), degree2_relations(e.group)["kernel_dim"])
            fams[e.family].append((e.name, key))
    bad = []
    keys = {}
    for fam, members in fams.items():
        distinct = {k for _, k in members}
        if len(members) < 2 or len(distinct) != 1:
            bad.append("%s not constant: %s" % (fam, members))
        else:
            keys[fam] = distinct.pop()
    if len(set(keys.values())) != len(keys):
        bad.append("families share invariants: %s" % keys)
    sizes = {f: len(m) for f, m in fams.items()}
    return not bad, "members %s; problems: %s" % (sizes, bad or "none"), None


def criterion_8():
    bad = []
    for a in range(21):
        for b in range(21 - a):
            if B.series_mul(B.series_geom(a, 20), B.series_geom(b, 20), 20) != B.series_geom(a + b, 20):
                bad.append("geom %d,%d" % (a, b))
    for p in (2, 3):
        for r in range(1, 9):
            U = B.series_geom(r, 20)
            V = B.series_geom(B.tower_index_bound_exp(p, r), 20)
            if B.lhs_e2_bound(U, V, 20) != [B.gt_bound(p, r, i) for i in range(21)]:
                bad.append("lhs p=%d r=%d" % (p, r))
    return not bad, "a+b <= 20 through degree 20, LHS product for r <= 8; failures: %s" % (bad or "none"), None


def criterion_9():
    bad, n = [], 0
    for p in (2, 3):
        for k in (1, 2, 3):
            D = B.dickson(p, k)
            for i, f in enumerate(D.polys):
                n += 1
                if {sum(e) for e in f} != {p**k - p**i}:
                    bad.append("p=%d c_%d,%d degree" % (p, k, i))
                for M in B.gl_generators(p, k):
                    if B.substitute(f, M, p) != f:
                        bad.append("p=%d c_%d,%d moved" % (p, k, i))
    return not bad, "%d polynomials for p in {2,3}, n <= 3; failures: %s" % (n, bad or "none"), None


def _verify_cmd():
    exe = os.path.join(os.path.dirname(sys.executable), "pgcoh")
    if os.path.exists(exe):
        return [exe]
    return [sys.executable, "-m", "pgcoh.cli"]


def criterion_10():
    outs = {}
    with tempfile.TemporaryDirectory() as tmp:
        for t in (1, 8):
            out = os.path.join(tmp, "t%d" % t)
            subprocess.run(_verify_cmd() + ["verify", "--builtin", "2", "--max-degree", "8", "--threads", str(t),
                                            "--out", out], capture_output=True, check=False)
            outs[t] = {f: open(os.path.join(out, f), "rb").read() for f in ("report.json", "report.csv")}
    same = outs[1] == outs[8]
    return same, "threads 1 vs 8 reports byte-identical: %s" % same, 900


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(k):
    t0 = time.perf_counter()
    ok, detail, limit = CRITERIA[k - 1]()
    elapsed = time.perf_counter() - t0
    if limit is not None and elapsed > limit:
        ok = False
        detail += "; over the %ds budget" % limit
    return ok, _report(k, ok, detail, elapsed)


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, line = run_criterion(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for k in range(1, 11):
        ok, line = run_criterion(k)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
