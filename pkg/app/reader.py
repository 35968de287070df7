"""
Abundance file → list of (immigration_time, abundance) rows.

Accepts the CSV written by `simulate` (first replicate only), any CSV with
`immigration_time` and `abundance` columns, or plain text with one
"time abundance" pair or one abundance per line (then already age-ordered).
"""

import csv
import io

from app.errors import MalformedInputError


def read_abundances(filename: str, file_bytes: bytes) -> list[tuple[float, int]]:
    try:
        text = file_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInputError(f"{filename or 'upload'}: not UTF-8 text") from exc
    if not text.strip():
        raise MalformedInputError(f"{filename or 'upload'}: no abundance data")
    first = text.lstrip().splitlines()[0]
    if "abundance" in first:
        return _read_csv(text)
    return _read_plain(text, filename)


def _read_csv(text: str) -> list[tuple[float, int]]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    first_replicate = None
    for record in reader:
        replicate = record.get("replicate")
        if first_replicate is None:
            first_replicate = replicate
        if replicate != first_replicate:
            break
        try:
            time = float(record.get("immigration_time") or len(rows))
            rows.append((time, int(float(record["abundance"]))))
        except (KeyError, ValueError) as exc:
            raise MalformedInputError(f"bad abundance row {record}: {exc}") from exc
    return rows


def _read_plain(text: str, filename: str) -> list[tuple[float, int]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.replace(",", " ").split()
        if not fields or fields[0].startswith("#"):
            continue
        try:
            if len(fields) == 1:
                rows.append((float(len(rows)), int(float(fields[0]))))
            else:
                rows.append((float(fields[0]), int(float(fields[1]))))
        except ValueError as exc:
            raise MalformedInputError(f"{filename or 'upload'} line {lineno}: {exc}") from exc
    return rows
