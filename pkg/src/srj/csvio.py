"""Versioned CSV output shared by the CLI and the data-collection tooling.

Every file starts with a ``# schema=1`` comment followed by a header line;
reals are written with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

SCHEMA_LINE = "# schema=1"


def fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(fh, header: list[str], rows, comments: list[str] = ()) -> None:
    fh.write(SCHEMA_LINE + "\n")
    for comment in comments:
        fh.write(f"# {comment}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """Read a schema=1 CSV; returns (header, rows of raw strings)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise ValueError(f"{path}: missing '{SCHEMA_LINE}' marker")
    body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    if not body:
        raise ValueError(f"{path}: no header line")
    header = body[0].split(",")
    return header, [ln.split(",") for ln in body[1:]]
