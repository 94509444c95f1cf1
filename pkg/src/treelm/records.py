"""Surprisal records: the TSV interchange format between scoring and analysis."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

COLUMNS = ("suite", "item", "condition", "region", "token_idx", "token", "surprisal_bits", "model")


def fmt_float(x) -> str:
    """Shortest round-trip decimal for a float, independent of numpy scalar types."""
    return repr(float(x))


@dataclass(frozen=True)
class SurprisalRecord:
    suite: str
    item: str
    condition: str
    region: str
    token_idx: int  # position within the whole sentence, 0-based
    token: str
    surprisal_bits: float
    model: str

    def row(self) -> list[str]:
        return [
            self.suite,
            self.item,
            self.condition,
            self.region,
            str(self.token_idx),
            self.token,
            fmt_float(self.surprisal_bits),
            self.model,
        ]


class RecordError(ValueError):
    pass


def write_records(path, records: list[SurprisalRecord], header_meta: dict | None = None):
    """Write records as TSV; header_meta becomes leading '# key: value' lines."""
    buf = io.StringIO()
    for key in sorted(header_meta or {}):
        buf.write(f"# {key}: {(header_meta or {})[key]}\n")
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    os.replace(tmp, path)


def read_records(path) -> tuple[list[SurprisalRecord], dict]:
    meta: dict[str, str] = {}
    records: list[SurprisalRecord] = []
    with open(path, encoding="utf-8", newline="") as f:
        rows = []
        for line in f:
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip()] = value.strip()
                continue
            rows.append(line)
    reader = csv.reader(rows, delimiter="\t")
    try:
        header = next(reader)
    except StopIteration:
        raise RecordError(f"{path}: empty record file") from None
    if tuple(header) != COLUMNS:
        raise RecordError(f"{path}: unexpected columns {header}; expected {list(COLUMNS)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(COLUMNS):
            raise RecordError(f"{path}: row {lineno} has {len(row)} fields, expected {len(COLUMNS)}")
        records.append(
            SurprisalRecord(
                suite=row[0],
                item=row[1],
                condition=row[2],
                region=row[3],
                token_idx=int(row[4]),
                token=row[5],
                surprisal_bits=float(row[6]),
                model=row[7],
            )
        )
    return records, meta
