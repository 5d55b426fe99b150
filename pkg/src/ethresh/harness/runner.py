"""Chunked, seeded replication fan-out and CSV output."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..numerics import RngStream

CHUNK = 256


def run_chunked(work: Callable[[int, int], object], replications: int, threads: int = 1, chunk: int = CHUNK) -> list:
    """Call ``work(start, stop)`` on fixed replication blocks and return the
    results in block order.

    Block boundaries do not depend on ``threads``, and each replication
    draws from its own :class:`RngStream`, so the combined output is the
    same for any worker count.
    """
    blocks = [(s, min(s + chunk, replications)) for s in range(0, replications, chunk)]
    if threads <= 1 or len(blocks) == 1:
        return [work(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: work(*ab), blocks))


def stream_rows(seed: int, start: int, stop: int, draw: Callable[[np.random.Generator], np.ndarray], offset: int = 0):
    """Stack one draw per replication ``start..stop-1`` from its own stream."""
    return np.stack([draw(RngStream(seed, offset + r).generator()) for r in range(start, stop)])


@dataclass(frozen=True)
class ScenarioRow:
    keys: dict
    metric: str
    value: float
    se: float | None = None


def proportion_row(keys: dict, metric: str, hits: int, reps: int) -> ScenarioRow:
    p = hits / reps
    return ScenarioRow(keys, metric, p, math.sqrt(p * (1.0 - p) / reps))


def mean_row(keys: dict, metric: str, total: float, total_sq: float, reps: int) -> ScenarioRow:
    m = total / reps
    var = max(total_sq / reps - m * m, 0.0)
    se = math.sqrt(var / (reps - 1)) if reps > 1 else math.nan
    return ScenarioRow(keys, metric, m, se)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.6g}"
    return str(v)


def rows_to_csv(rows: Sequence[ScenarioRow], key_columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*key_columns, "metric", "value", "se"])
    for r in rows:
        w.writerow([_fmt(r.keys.get(k)) for k in key_columns] + [r.metric, _fmt(r.value), _fmt(r.se)])
    return buf.getvalue()


def write_csv(path, rows: Sequence[ScenarioRow], key_columns: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, key_columns))
