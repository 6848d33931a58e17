"""Command-line front end: per-group analysis, corpus generation and the verification runner."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import bounds as B
from .cohomology import (
    DEFAULT_H2_CAP, CohomologyError, abelian_shape_check, bar_dims, degree2_relations, h2_bar_basis,
    minres_dims, omega_extendible, param2_data, powerful_cohom,
)
from .corpus import default_corpus, write_corpus
from .pcgroup import (
    PcGroup, PcGroupError, group_from_json, group_to_json, maximal_elem_ab, structure_invariants,
)
from .tower import characteristic_tower, is_p_central, is_powerful

CHECKS = ("LE-DIMBOUND", "GT-BOUND", "TOWER-THM4", "POWERFUL-EQ", "OMEGA-CRIT", "COHOMCHAR-12",
          "COHOMCHAR-3", "FAMILY-CONST")
GLOBAL_CHECKS = ("VANDERMONDE", "DICKSON-INV")
FAMILY_CONST_ORDERS = (16, 32, 64)
CSV_FIELDS = ("name", "p", "order_exp", "check", "verdict", "witness")


def _verdict(ok, witness=""):
    return {"verdict": "pass" if ok else "fail", "witness": "" if ok else witness}


def _skip(why):
    return {"verdict": "skipped", "witness": why}


def _family_of(name: str) -> str | None:
    m = re.fullmatch(r"(SD|D|Q)(\d+)", name)
    return {"D": "dihedral", "SD": "semidihedral", "Q": "quaternion"}[m.group(1)] if m else None


# -- per-group pipeline ----------------------------------------------------------------

def analyze_group(G: PcGroup, max_degree: int = 8, rank_override: int | None = None,
                  family: str | None = None, timings: bool = False) -> dict:
    """Structure, cohomology, tower and the per-group checks for one group."""
    clock = {}

    def tick(key, t0):
        clock[key] = round(time.perf_counter() - t0, 4)

    t0 = time.perf_counter()
    inv = structure_invariants(G)
    r = rank_override or max(1, inv.rank)
    tick("structure", t0)

    t0 = time.perf_counter()
    dims = minres_dims(G, max_degree)
    tick("minres", t0)

    rec = {
        "name": G.name,
        "p": G.p,
        "order_exp": G.n,
        "family": family or _family_of(G.name),
        **{k: v for k, v in inv.as_dict().items() if k != "order_exp"},
        "r": r,
        "dims": list(dims.dims),
    }
    if dims.truncated_at is not None:
        rec["dims_truncated_at"] = dims.truncated_at
    pw = is_powerful(G)
    pc = is_p_central(G)
    rec["powerful"] = pw
    rec["p_central"] = pc

    t0 = time.perf_counter()
    pres = None
    if G.order <= DEFAULT_H2_CAP:
        pres = h2_bar_basis(G)
        rel = degree2_relations(G, pres)
        om = omega_extendible(G, pres)
        p2 = param2_data(G, pres)
        rec["powerful_cohom"] = powerful_cohom(G, pres)
        rec["h2_dim"] = pres.dim_h2
        rec["relations"] = rel
        rec["omega_extendible"] = om["verdict"]
        rec["omega_per_A"] = om["per_A"]
        rec["omega_consistent"] = om["consistent"]
        rec["param2"] = p2["verdict"]
        rec["param2_per_A"] = p2["per_A"]
    tick("degree2", t0)

    t0 = time.perf_counter()
    tower = characteristic_tower(G, r)
    rec["tower"] = tower.to_json()
    tick("tower", t0)

    # degree bookkeeping around the tower's N (data only)
    q = G.p ** tower.index_exp
    D = max(B.chern_param_bound(q)["max_deg"], B.evens_degree_bound(G.p, r, q))
    reg = B.regularity_degree_bounds(q + r, D)
    M = sum(dims.dims[:reg["L"] + 1]) if reg["L"] < len(dims) else None
    rec["regularity"] = {"Ncount": q + r, "D": D, **reg, "M": M}
    subs, a = maximal_elem_ab(G)
    if len(dims) > 1:
        g = B.quillen_growth_check(dims.dims, max(a, 1))
        rec["growth"] = {"a": a, "max_ratio": str(g["max_ratio"]), "argmax": g["argmax"],
                         "monotone_tail": g["monotone_tail"]}

    rec["checks"] = _group_checks(G, rec, dims, tower)
    if timings:
        rec["timings"] = clock
    return rec


def _group_checks(G, rec, dims, tower) -> dict:
    p, n, r = G.p, G.n, rec["r"]
    ks = range(len(dims))
    trunc = "" if dims.truncated_at is None else " (dims through degree %d)" % (len(dims) - 1)
    out = {}

    bad = [(i, dims[i], B.order_dim_bound(n, i)) for i in ks if dims[i] > B.order_dim_bound(n, i)]
    out["LE-DIMBOUND"] = _verdict(not bad, bad and "i=%d dim=%d bound=%d" % bad[0])
    bad = [(i, dims[i], B.gt_bound(p, rec["rank"] or 1, i)) for i in ks
           if dims[i] > B.gt_bound(p, rec["rank"] or 1, i)]
    out["GT-BOUND"] = _verdict(not bad, bad and "i=%d dim=%d bound=%d" % bad[0])

    f = tower.flags
    failed = [k for k in ("N_powerful", "N_p_central", "N_omega_extendible", "N_rank_le_r", "normal", "chain")
              if not f[k]]
    if tower.index_exp > tower.bound_exp:
        failed.append("index_exp=%d>bound=%d" % (tower.index_exp, tower.bound_exp))
    if tower.fallback_used and failed:
        out["TOWER-THM4"] = {"verdict": "inconclusive", "witness": "fallback W; " + ",".join(failed)}
    else:
        out["TOWER-THM4"] = _verdict(not failed, ",".join(failed))

    if "powerful_cohom" not in rec:
        for c in ("POWERFUL-EQ", "OMEGA-CRIT", "COHOMCHAR-12", "COHOMCHAR-3"):
            out[c] = _skip("|G| above degree-2 cap")
        return out

    out["POWERFUL-EQ"] = _verdict(rec["powerful_cohom"] == rec["powerful"],
                                  "cohom=%s def=%s" % (rec["powerful_cohom"], rec["powerful"]))
    om = rec["omega_extendible"]
    problems = []
    if not rec["omega_consistent"]:
        problems.append("maximal elementary abelian subgroups disagree")
    if om and not rec["p_central"]:
        problems.append("criterion true but not p-central")
    if rec["class"] <= 1 and not om:
        problems.append("abelian group rejected")
    out["OMEGA-CRIT"] = _verdict(not problems, "; ".join(problems))

    target = rec["powerful"] and om
    shape = abelian_shape_check(G, len(dims) - 1, dims.dims)
    out["COHOMCHAR-12"] = _verdict(shape == target, "shape=%s powerful&omega=%s%s" % (shape, target, trunc))
    if trunc and out["COHOMCHAR-12"]["verdict"] == "pass":
        out["COHOMCHAR-12"]["witness"] = trunc.strip()
    if p == 2:
        out["COHOMCHAR-3"] = _skip("p=2: reported as data only")
    else:
        out["COHOMCHAR-3"] = _verdict(rec["param2"] == target, "param2=%s powerful&omega=%s" % (rec["param2"], target))
    return out


def _family_const(records: list[dict]) -> None:
    """Cross-group check: coclass-one families are constant in their dims and relation kernels."""
    keys: dict[str, dict[str, tuple]] = {}
    for rec in records:
        fam = rec.get("family")
        if "checks" not in rec:
            continue
        if fam in ("dihedral", "semidihedral", "quaternion") and rec["p"] == 2 and \
                2 ** rec["order_exp"] in FAMILY_CONST_ORDERS and "relations" in rec:
            keys.setdefault(fam, {})[rec["name"]] = (tuple(rec["dims"]), rec["relations"]["kernel_dim"])
    for rec in records:
        if "checks" not in rec:
            continue
        fam = rec.get("family")
        mine = keys.get(fam, {}).get(rec["name"])
        if mine is None:
            rec["checks"]["FAMILY-CONST"] = _skip("not a coclass-one family member of order 16-64")
            continue
        same = [nm for nm, k in keys[fam].items() if k != mine]
        clash = [f for f, members in keys.items() if f != fam and mine in members.values()]
        if len(keys[fam]) < 2:
            rec["checks"]["FAMILY-CONST"] = _skip("only one family member in this run")
        elif same:
            rec["checks"]["FAMILY-CONST"] = _verdict(False, "differs from " + ",".join(sorted(same)))
        elif clash:
            rec["checks"]["FAMILY-CONST"] = _verdict(False, "same invariants as family " + ",".join(sorted(clash)))
        else:
            rec["checks"]["FAMILY-CONST"] = _verdict(True)


def global_checks() -> dict:
    out = {}
    bad = []
    for a in range(21):
        for b in range(21 - a):
            if B.series_mul(B.series_geom(a, 20), B.series_geom(b, 20), 20) != B.series_geom(a + b, 20):
                bad.append("a=%d b=%d" % (a, b))
    for p in (2, 3):
        for r in range(1, 9):
            U = B.series_geom(r, 20)
            V = B.series_geom(B.tower_index_bound_exp(p, r), 20)
            if B.lhs_e2_bound(U, V, 20) != [B.gt_bound(p, r, i) for i in range(21)]:
                bad.append("lhs p=%d r=%d" % (p, r))
    out["VANDERMONDE"] = _verdict(not bad, "; ".join(bad[:3]))
    bad = []
    for p in (2, 3):
        for n in (1, 2, 3):
            D = B.dickson(p, n)
            for i, f in enumerate(D.polys):
                degs = {sum(e) for e in f}
                if degs != {p**n - p**i}:
                    bad.append("c_%d,%d p=%d degree %s" % (n, i, p, sorted(degs)))
                for M in B.gl_generators(p, n):
                    if B.substitute(f, M, p) != f:
                        bad.append("c_%d,%d p=%d moved by %s" % (n, i, p, M))
    out["DICKSON-INV"] = _verdict(not bad, "; ".join(bad[:3]))
    return out


# -- loading and running ---------------------------------------------------------------------

def _load(doc: dict, fallback_name: str, seed: int) -> PcGroup:
    G = group_from_json(doc, seed=seed)
    if not G.name:
        G.name = fallback_name
    return G


def _read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise PcGroupError("%s: not valid JSON (%s)" % (path, exc)) from None


def _job(args):
    doc, fallback_name, family, opts = args
    try:
        G = _load(doc, fallback_name, opts["seed"])
        return analyze_group(G, opts["max_degree"], opts["rank_override"], family, opts["timings"])
    except (PcGroupError, ValueError, KeyError, TypeError) as exc:
        return {"name": doc.get("name") if isinstance(doc, dict) and doc.get("name") else fallback_name,
                "p": doc.get("p") if isinstance(doc, dict) else None, "order_exp": None,
                "error": str(exc)}


def _corpus_jobs(args) -> list[tuple]:
    jobs = []
    if args.builtin is not None:
        for e in default_corpus(args.builtin):
            jobs.append((group_to_json(e.group), e.name, e.family))
        return jobs
    d = args.corpus
    families = {}
    mpath = os.path.join(d, "manifest.json")
    if os.path.exists(mpath):
        try:
            for g in _read_json(mpath).get("groups", []):
                families[g["file"]] = g.get("family")
        except (PcGroupError, AttributeError, KeyError, TypeError):
            pass
    for fn in sorted(os.listdir(d)):
        if not fn.endswith(".json") or fn == "manifest.json":
            continue
        stem = fn[:-5]
        try:
            doc = _read_json(os.path.join(d, fn))
        except PcGroupError as exc:
            doc = {"name": stem, "_error": str(exc)}
        jobs.append((doc, stem, families.get(fn)))
    return jobs


def _job_or_error(job):
    doc, stem, family, opts = job
    if "_error" in doc:
        return {"name": stem, "p": None, "order_exp": None, "error": doc["_error"]}
    return _job(job)


def run_verify(args) -> tuple[dict, int]:
    opts = {"seed": args.seed, "max_degree": args.max_degree, "rank_override": args.rank_override,
            "timings": args.timings}
    jobs = [(doc, stem, fam, opts) for doc, stem, fam in _corpus_jobs(args)]
    if args.threads and args.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as ex:
            records = list(ex.map(_job_or_error, jobs))
    else:
        records = [_job_or_error(j) for j in jobs]
    records.sort(key=lambda r: str(r["name"]))
    _family_const(records)
    for rec in records:
        if "checks" in rec:
            rec["checks"] = {k: rec["checks"][k] for k in sorted(rec["checks"])}
    glob = global_checks()
    counts = {}
    for rec in records:
        if "error" in rec:
            counts["error"] = counts.get("error", 0) + 1
            continue
        for c in rec["checks"].values():
            counts[c["verdict"]] = counts.get(c["verdict"], 0) + 1
    for c in glob.values():
        counts[c["verdict"]] = counts.get(c["verdict"], 0) + 1
    report = {
        "max_degree": args.max_degree,
        "seed": args.seed,
        "source": ("builtin:%d" % args.builtin) if args.builtin is not None else os.path.basename(
            os.path.normpath(args.corpus)),
        "groups": records,
        "global": glob,
        "summary": {k: counts[k] for k in sorted(counts)},
    }
    failed = counts.get("fail", 0) or counts.get("error", 0)
    return report, (1 if failed else 0)


def report_rows(report: dict) -> list[list]:
    rows = []
    for name, c in report.get("global", {}).items():
        rows.append(["(global)", "", "", name, c["verdict"], c["witness"]])
    for rec in report["groups"]:
        if "error" in rec:
            rows.append([rec["name"], rec.get("p") or "", rec.get("order_exp") or "", "LOAD", "fail", rec["error"]])
            continue
        for cid, c in rec["checks"].items():
            rows.append([rec["name"], rec["p"], rec["order_exp"], cid, c["verdict"], c["witness"]])
    rows.sort(key=lambda r: (str(r[0]), r[3]))
    return rows


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    w.writerows(report_rows(report))
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------------

def _load_file(args) -> PcGroup:
    doc = _read_json(args.group)
    stem = os.path.splitext(os.path.basename(args.group))[0]
    return _load(doc, stem, args.seed)


def cmd_analyze(args) -> int:
    G = _load_file(args)
    rec = analyze_group(G, args.max_degree, args.rank_override, timings=args.timings)
    _family_const([rec])
    rec["checks"] = {k: rec["checks"][k] for k in sorted(rec["checks"])}
    if args.format == "csv":
        _emit(to_csv({"groups": [rec], "global": {}}), args.out)
    else:
        _emit(to_json(rec), args.out)
    failed = any(c["verdict"] == "fail" for c in rec["checks"].values())
    return 1 if (failed and args.strict) else 0


def cmd_tower(args) -> int:
    G = _load_file(args)
    rep = characteristic_tower(G, args.rank_override)
    out = rep.to_json()
    out["name"] = G.name
    out["holds"] = rep.holds
    _emit(to_json(out), args.out)
    return 1 if (args.strict and not rep.holds) else 0


def cmd_cohomology(args) -> int:
    G = _load_file(args)
    dims = minres_dims(G, args.max_degree)
    out = {"name": G.name, "p": G.p, "order_exp": G.n, **dims.to_json()}
    if args.bar is not None:
        out["bar_dims"] = bar_dims(G, args.bar)
    if G.order <= DEFAULT_H2_CAP:
        pres = h2_bar_basis(G)
        out["h1_dim"] = pres.dim_h1
        out["h2_dim"] = pres.dim_h2
        out["relations"] = degree2_relations(G, pres)
        out["powerful_cohom"] = powerful_cohom(G, pres)
        out["omega_extendible"] = omega_extendible(G, pres)
        out["param2"] = param2_data(G, pres)
        out["abelian_shape"] = abelian_shape_check(G, len(dims) - 1, dims.dims)
    _emit(to_json(out), args.out)
    return 0


def cmd_bounds(args) -> int:
    p, r, n, i, kmax = args.p, args.r, args.n, args.i, args.kmax
    out = {"p": p, "r": r, "n": n, "i": i, "kmax": kmax}
    out["gt_bound"] = B.gt_bound(p, r, i)
    out["gt_series"] = [B.gt_bound(p, r, k) for k in range(kmax + 1)]
    out["tower_index_bound_exp"] = B.tower_index_bound_exp(p, r)
    if n is not None:
        out["order_dim_bound"] = B.order_dim_bound(n, i)
        out["order_dim_series"] = B.series_geom(n, kmax)
        out["evens_degree_bound_index1"] = B.evens_degree_bound(p, n, 1)
        try:
            out["dickson"] = B.dickson(p, n).to_json()
        except B.BoundsError as exc:
            out["dickson"] = {"error": str(exc)}
    _emit(to_json(out), args.out)
    return 0


def cmd_verify(args) -> int:
    if (args.builtin is None) == (args.corpus is None):
        raise PcGroupError("give a corpus directory or --builtin P")
    if args.corpus is not None and not os.path.isdir(args.corpus):
        raise PcGroupError("%s is not a directory" % args.corpus)
    report, code = run_verify(args)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            fh.write(to_json(report))
        with open(os.path.join(args.out, "report.csv"), "w") as fh:
            fh.write(to_csv(report))
    else:
        sys.stdout.write(to_csv(report) if args.format == "csv" else to_json(report))
    return code


def cmd_corpus(args) -> int:
    if args.action != "generate":
        raise PcGroupError("unknown corpus action %r" % args.action)
    paths = write_corpus(args.p, args.out)
    sys.stdout.write("\n".join(paths) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-degree", type=int, default=8)
    common.add_argument("--rank-override", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None)
    common.add_argument("--strict", action="store_true")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings (not deterministic)")

    ap = argparse.ArgumentParser(prog="pgcoh", description="Cohomology and structure of finite p-groups.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, fn in (("analyze", cmd_analyze), ("tower", cmd_tower), ("cohomology", cmd_cohomology)):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("group")
        sp.set_defaults(func=fn)
        if name == "cohomology":
            sp.add_argument("--bar", type=int, default=None, help="also compute bar-complex dims to this degree")
    sp = sub.add_parser("bounds", parents=[common])
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--kmax", type=int, default=8)
    sp.set_defaults(func=cmd_bounds)
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("corpus", nargs="?", default=None)
    sp.add_argument("--builtin", type=int, choices=(2, 3, 5), default=None)
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("corpus", parents=[common])
    sp.add_argument("action", choices=("generate",))
    sp.add_argument("--p", type=int, choices=(2, 3, 5), required=True)
    sp.set_defaults(func=cmd_corpus)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.cmd == "corpus" and not args.out:
        ap.error("corpus generate needs --out")
    try:
        return args.func(args)
    except (PcGroupError, CohomologyError, B.BoundsError, OSError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
