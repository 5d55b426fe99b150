"""Regenerate the threshold, boosting and averaging tables and compare them
with the reference copies shipped in ``ethresh/data``."""

from __future__ import annotations

import csv
import io
from importlib import resources

from .ebh import boost_lcs_ad, boost_lcs_pr
from .merging import avg_threshold
from .thresholds import EClass, threshold

TABLE_ALPHAS = (0.001, 0.01, 0.02, 0.05, 0.1, 0.2)
BOOST_ALPHAS = (0.01, 0.02, 0.05, 0.10)
AVG_TS = (1, 2, 5, 10, 20)

TABLE1_ROWS = (
    (EClass.E0, EClass.LS),
    (EClass.D, EClass.U),
    (EClass.DGT1,),
    (EClass.LCD, EClass.LCS),
    (EClass.LUS, EClass.LD),
    (EClass.LDGT0,),
    (EClass.LN,),
)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def table1() -> dict:
    """``{class: [T_alpha for alpha in TABLE_ALPHAS]}`` for every class in
    the table (rows grouping two classes list both)."""
    return {c: [threshold(c, a).value for a in TABLE_ALPHAS] for row in TABLE1_ROWS for c in row}


def table2() -> dict:
    out = {}
    for a in BOOST_ALPHAS:
        ad, pr = boost_lcs_ad(a), boost_lcs_pr(a)
        out[a] = [ad.lower, ad.upper, pr.lower, pr.upper]
    return out


def table7() -> dict:
    return {T: [avg_threshold(T, a) for a in TABLE_ALPHAS] for T in AVG_TS}


def table_csv(which: int) -> str:
    if which == 1:
        t = table1()
        rows = [[";".join(c.value for c in row)] + [_fmt(v) for v in t[row[0]]] for row in TABLE1_ROWS]
        return _to_csv(["classes", *map(str, TABLE_ALPHAS)], rows)
    if which == 2:
        rows = [[f"{a:.2f}"] + [_fmt(v) for v in vals] for a, vals in table2().items()]
        return _to_csv(["alpha", "c1_ad", "c2_ad", "c1_pr", "c2_pr"], rows)
    if which == 7:
        rows = [[str(T)] + [_fmt(v) for v in vals] for T, vals in table7().items()]
        return _to_csv(["T", *map(str, TABLE_ALPHAS)], rows)
    raise ValueError(f"no table {which}; choose 1, 2 or 7")


def golden(which: int) -> list[dict]:
    """Reference table as a list of row dicts (strings)."""
    text = resources.files("ethresh.data").joinpath(f"table{which}.csv").read_text(encoding="utf-8")
    return list(csv.DictReader(io.StringIO(text)))


def compare(which: int) -> list[tuple]:
    """``(row label, column, computed, reference, tolerance, ok)`` for each
    cell. Reference entries of 100 or more in the first table are checked
    to +-0.5, everything else to +-0.01."""
    ref = golden(which)
    got = list(csv.DictReader(io.StringIO(table_csv(which))))
    out = []
    if which == 1:
        t = table1()
        for r in ref:
            for cls in r["classes"].split(";"):
                c = EClass.parse(cls)
                for j, a in enumerate(TABLE_ALPHAS):
                    want = float(r[str(a)])
                    tol = 0.5 if want >= 100 else 0.01
                    out.append((c.value, a, t[c][j], want, tol, abs(t[c][j] - want) <= tol))
        return out
    key = "alpha" if which == 2 else "T"
    for r, g in zip(ref, got):
        for col in r:
            if col == key:
                continue
            want, have = float(r[col]), float(g[col])
            out.append((r[key], col, have, want, 0.01, abs(have - want) <= 0.01))
    return out
