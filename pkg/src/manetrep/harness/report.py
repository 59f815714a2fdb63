"""CSV and trace output.  Files are UTF-8 with LF line endings."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .metrics import MetricsReport

SUMMARY_HEADER = (
    "malicious_count",
    "rep_efficiency",
    "dmg_selfish",
    "dmg_malicious",
    "detection_rate_pct",
    "paper_literal_pct",
)

RUN_HEADER = (
    "malicious_count",
    "run",
    "seed",
    "rep_efficiency",
    "dmg_selfish",
    "dmg_malicious",
    "energy_dmg_selfish",
    "energy_dmg_malicious",
    "detection_rate_pct",
    "paper_literal_pct",
    "act_mal",
    "mal_det",
    "allegations",
    "network_blacklists",
    "local_blacklists",
    "trace_hash",
)


class ReportError(OSError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def summary_rows(reports: Iterable[MetricsReport]) -> list[list[str]]:
    return [[_fmt(getattr(r, c)) for c in SUMMARY_HEADER] for r in reports]


def run_rows(reports: Iterable[MetricsReport]) -> list[list[str]]:
    out = []
    for r in reports:
        for idx, row in enumerate(r.runs):
            values = {c: getattr(row, c, None) for c in RUN_HEADER}
            values.update(malicious_count=r.malicious_count, run=idx)
            out.append([_fmt(values[c]) for c in RUN_HEADER])
    return out


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def emit_report(
    reports: Sequence[MetricsReport],
    out_dir: str | Path,
    name: str = "summary",
    traces: Optional[Sequence[Sequence[str]]] = None,
) -> list[Path]:
    """Write ``<name>.csv`` and ``<name>_runs.csv`` and, when given, one
    trace file per run."""
    out = Path(out_dir)
    written = [
        _write(out / f"{name}.csv", render_csv(SUMMARY_HEADER, summary_rows(reports))),
        _write(out / f"{name}_runs.csv", render_csv(RUN_HEADER, run_rows(reports))),
    ]
    for idx, lines in enumerate(traces or ()):
        written.append(_write(out / f"{name}_trace_{idx}.txt", "".join(f"{l}\n" for l in lines)))
    return written
