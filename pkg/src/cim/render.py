"""Result-relation rendering: table, CSV, and JSON forms.

Rows are sorted by the full row value so output is stable for a fixed
workspace.  Decimals and dates are rendered in their lexical forms (in
JSON as strings, keeping decimal results exact).
"""

from __future__ import annotations

import csv
import io
import json

from .model import scalar_to_text
from .storage import Relation


def relation_to_dict(relation: Relation) -> dict:
    return {
        "columns": [name for name, _ in relation.schema],
        "types": [dtype.value for _, dtype in relation.schema],
        "rows": [[_json_scalar(v) for v in row] for row in relation.sorted_rows()],
    }


def _json_scalar(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return scalar_to_text(value)


def relation_to_json(relation: Relation) -> str:
    return json.dumps(relation_to_dict(relation), ensure_ascii=False, indent=2)


def relation_to_csv(relation: Relation) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow([name for name, _ in relation.schema])
    for row in relation.sorted_rows():
        writer.writerow([scalar_to_text(v) for v in row])
    return buffer.getvalue()


def relation_to_table(relation: Relation) -> str:
    headers = [name for name, _ in relation.schema]
    rows = [[scalar_to_text(v) if v is not None else "" for v in row] for row in relation.sorted_rows()]
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    lines.append(f"({len(rows)} row{'s' if len(rows) != 1 else ''})")
    return "\n".join(lines)
