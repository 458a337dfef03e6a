"""CSV and JSON serialization of simulation reports."""

from __future__ import annotations

import csv
import io
from typing import Iterable, TextIO

from .engine import SimReport

CSV_HEADER = (
    "line_size", "set_size", "assoc", "accesses", "hits", "misses", "miss_rate",
    "p1_hits", "p2_hits", "p3_hits", "dup_hits",
)


def csv_rows(reports: Iterable[SimReport]) -> list[list]:
    rows = []
    for report in sorted(reports, key=lambda r: r.grid.line_size):
        line = report.grid.line_size
        for s in report.stats:
            rows.append([
                line, s.set_size, s.assoc, s.accesses, s.hits, s.misses, f"{s.miss_rate:.6f}",
                s.p1_hits, s.p2_hits, s.p3_hits, s.dup_hits,
            ])
    return rows


def write_csv(reports: Iterable[SimReport], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(csv_rows(reports))


def to_csv(reports: Iterable[SimReport]) -> str:
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()


def engine_summary(report: SimReport) -> dict:
    return {
        "line_size": report.grid.line_size,
        "engine": report.engine,
        "wall_time": report.wall_time,
        "distinct_blocks": report.distinct_blocks,
        "configs": report.grid.num_configs,
        "totals": report.totals(),
        **report.extra,
    }
