"""Serialization of power tables: legend-layout Markdown and long-form CSV."""
from __future__ import annotations

import csv
import io

from .runner import LEGEND_LEFT, LEGEND_RIGHT, MISSFOREST, CellResult, PowerTable

CSV_FIELDS = ("scenario", "x", "y", "procedure", "percent", "missing_x", "missing_y", "status")
PROCEDURE_SLOTS = LEGEND_LEFT + tuple(p or MISSFOREST for p in LEGEND_RIGHT)


def _num(value):
    return "NA" if value is None else repr(float(value))


def _pct(value):
    return "n/a" if value is None else f"{value:.0f}"


def _cell_lines(cell: CellResult, logistic):
    """Rows of one cell as (left, right) strings in legend order."""
    if cell is None:
        rows = 4 + logistic
        return [("", "")] * rows
    if not cell.ok:
        rows = [("fail", "fail")] * (4 + logistic)
        return rows
    lines = []
    if logistic:
        lines.append((f"_{_pct(cell.missing_x)}_", f"_{_pct(cell.missing_y)}_"))
    for left, right in zip(LEGEND_LEFT, LEGEND_RIGHT):
        lines.append((_pct(cell.percent(left)),
                      "n/a" if right is None else _pct(cell.percent(right))))
    return lines


def to_markdown(table: PowerTable) -> str:
    header = ["%"]
    for y in table.y_labels:
        header += [y, ""]
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for x in table.x_labels:
        blocks = [_cell_lines(table.cell(x, y), table.logistic) for y in table.y_labels]
        for r in range(4 + table.logistic):
            row = [x if r == 0 else ""]
            for block in blocks:
                row += list(block[r])
            out.append("| " + " | ".join(row) + " |")
    return "\n".join(out) + "\n"


def to_csv(table: PowerTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for cell in table.cells:
        for slot in PROCEDURE_SLOTS:
            pct = None if slot == MISSFOREST else cell.percent(slot)
            writer.writerow([
                table.name, cell.x, cell.y, slot, _num(pct),
                _num(cell.missing_x), _num(cell.missing_y), cell.status,
            ])
    return buf.getvalue()


def emit_table(table: PowerTable, format="markdown") -> str:
    """Deterministic text rendering of ``table`` ("markdown" or "csv")."""
    if format == "markdown":
        return to_markdown(table)
    if format == "csv":
        return to_csv(table)
    raise ValueError(f"unknown format {format!r}")


def read_csv_table(text):
    """Parse :func:`to_csv` output into {(x, y, procedure): percent or None}."""
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        pct = row["percent"]
        out[(row["x"], row["y"], row["procedure"])] = None if pct == "NA" else float(pct)
    return out
