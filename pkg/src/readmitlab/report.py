"""Deterministic report rendering: percent formatting with half-up rounding,
TSV tables, aligned text tables, and the files a CLI run writes.

Reports never embed timestamps or absolute paths, so re-running an identical
config produces byte-identical files.
"""

from __future__ import annotations

import decimal
import json
from pathlib import Path

import numpy as np

from .evaluate import ConfusionMatrix, MetricsReport


def format_percent(fraction: float, decimals: int = 2) -> str:
    """Render a [0,1] fraction as a percentage, half-up at `decimals` places."""
    value = decimal.Decimal(repr(float(fraction))) * 100
    quantum = decimal.Decimal(1).scaleb(-decimals)
    return str(value.quantize(quantum, rounding=decimal.ROUND_HALF_UP))


def format_number(value: float, decimals: int = 6) -> str:
    quantum = decimal.Decimal(1).scaleb(-decimals)
    return str(decimal.Decimal(repr(float(value))).quantize(
        quantum, rounding=decimal.ROUND_HALF_UP))


def tsv_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def aligned_table(header: list[str], rows: list[list[str]]) -> str:
    """Fixed-width text table; first column left-aligned, the rest right."""
    table = [header] + rows
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    out = []
    for row in table:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[i]) for i, cell in enumerate(row) if i > 0]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"


def metrics_rows(report: MetricsReport) -> list[list[str]]:
    rows = [
        ["accuracy", format_percent(report.accuracy)],
        ["macro_precision", format_percent(report.macro_precision)],
        ["macro_recall", format_percent(report.macro_recall)],
        ["macro_f", format_percent(report.macro_f)],
    ]
    for c in report.class_ids:
        rows.append([f"recall_{c}", format_percent(report.per_class_recall[c])])
        rows.append([f"precision_{c}", format_percent(report.per_class_precision[c])])
    return rows


def confusion_rows(cm: ConfusionMatrix) -> tuple[list[str], list[list[str]]]:
    """Predicted-by-actual layout: one row per predicted class."""
    header = ["predicted\\actual"] + [str(c) for c in cm.class_ids]
    rows = []
    for i, c in enumerate(cm.class_ids):
        rows.append([str(c)] + [str(int(n)) for n in cm.counts[i]])
    return header, rows


class RunReport:
    """Accumulates the sections of one run and writes the three report files:
    config.json (resolved config echo), report.tsv, report.txt."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self._sections: list[tuple[str, list[str], list[list[str]]]] = []
        self._lines: list[str] = []

    def add_line(self, text: str) -> None:
        self._lines.append(text)

    def add_table(self, title: str, header: list[str], rows: list[list[str]]) -> None:
        self._sections.append((title, header, rows))

    def add_metrics(self, title: str, report: MetricsReport) -> None:
        self.add_table(title, ["metric", "value"], metrics_rows(report))
        for note in report.notes:
            self.add_line(f"note [{title}]: {note}")

    def add_confusion(self, title: str, cm: ConfusionMatrix) -> None:
        header, rows = confusion_rows(cm)
        self.add_table(title, header, rows)

    def render_tsv(self) -> str:
        parts = [f"# command\t{self.command}\n"]
        for title, header, rows in self._sections:
            parts.append(f"# {title}\n")
            parts.append(tsv_table(header, rows))
        if self._lines:
            parts.append("# notes\n")
            parts.append("".join(line + "\n" for line in self._lines))
        return "".join(parts)

    def render_text(self) -> str:
        parts = [f"command: {self.command}\n"]
        for title, header, rows in self._sections:
            parts.append(f"\n== {title} ==\n")
            parts.append(aligned_table(header, rows))
        if self._lines:
            parts.append("\n")
            parts.append("".join(line + "\n" for line in self._lines))
        return "".join(parts)

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(
            json.dumps(self.config, indent=2, sort_keys=True) + "\n")
        (out / "report.tsv").write_text(self.render_tsv())
        (out / "report.txt").write_text(self.render_text())
        return out


def class_stats_section(feature_names, classes, means: np.ndarray,
                        variances: np.ndarray) -> tuple[list[str], list[list[str]]]:
    """Per-feature rows of class means then class variances, 6 decimals."""
    header = ["feature"]
    header += [f"mean_{c}" for c in classes]
    header += [f"var_{c}" for c in classes]
    rows = []
    for i, name in enumerate(feature_names):
        row = [name]
        row += [format_number(means[i, j]) for j in range(len(classes))]
        row += [format_number(variances[i, j]) for j in range(len(classes))]
        rows.append(row)
    return header, rows
