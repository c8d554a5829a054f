"""
CSV emission for PageRank vectors, sweeps, limit tables, predictions and
search records. Floats are written with 17 significant digits so that every
value parses back to the same double.
"""
from __future__ import annotations
from typing import Iterable, Sequence, TextIO, Tuple
import csv

from config import CSV_SIGNIFICANT_DIGITS
from core.discrepancy import LimitRow, SearchRecord, SweepResult
from core.pagerank import PagerankVector


def fmt(value: float) -> str:
    """Locale-independent float text that parses back to the same double."""
    return format(float(value), f".{CSV_SIGNIFICANT_DIGITS}g")


def _writer(stream: TextIO):
    return csv.writer(stream, lineterminator="\n")


def write_pagerank_csv(vector: PagerankVector, stream: TextIO) -> None:
    """Header "vertex,pi", one row per vertex."""
    writer = _writer(stream)
    writer.writerow(["vertex", "pi"])
    for v, value in enumerate(vector.values):
        writer.writerow([v, fmt(value)])


def write_sweep_csv(result: SweepResult, stream: TextIO) -> None:
    """Header "alpha,d1,d2,dinf"."""
    writer = _writer(stream)
    writer.writerow(["alpha", "d1", "d2", "dinf"])
    for sample in result.samples:
        writer.writerow([fmt(sample.alpha), fmt(sample.d1), fmt(sample.d2), fmt(sample.dinf)])


def write_limit_csv(rows: Iterable[LimitRow], stream: TextIO) -> None:
    """Header "k,pi_A,pi_C,norm_sq,d1,d2,dinf"."""
    writer = _writer(stream)
    writer.writerow(["k", "pi_A", "pi_C", "norm_sq", "d1", "d2", "dinf"])
    for row in rows:
        writer.writerow([row.k, fmt(row.pi_A), fmt(row.pi_C), fmt(row.norm_sq),
                         fmt(row.d1), fmt(row.d2), fmt(row.dinf)])


def write_prediction_csv(rows: Iterable[Tuple[float, float, float]], stream: TextIO) -> None:
    """Header "m,f_m,c_mass"."""
    writer = _writer(stream)
    writer.writerow(["m", "f_m", "c_mass"])
    for m, f_m, c_mass in rows:
        writer.writerow([fmt(m), fmt(f_m), fmt(c_mass)])


def write_search_records(records: Sequence[SearchRecord], stream: TextIO) -> None:
    """One line per record: rank,bitmask,alpha1,alpha2,d2 (rank starts at 1)."""
    writer = _writer(stream)
    for rank, record in enumerate(records, start=1):
        writer.writerow([rank, record.bitmask, fmt(record.alpha1), fmt(record.alpha2), fmt(record.d2)])
