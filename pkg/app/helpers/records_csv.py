#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import io
import json
from typing import Iterable, List, Optional

from app.helpers.points_parser import ParseError
from app.helpers.spectra import PSLRecord

HEADER = ["q", "t", "p", "n", "betti", "lambda_min"]


def _real(value: float) -> str:
    # 17 significant digits round-trip every double
    return format(value, ".17g")


def write_records_csv(records: Iterable[PSLRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for record in sorted(records, key=PSLRecord.sort_key):
        writer.writerow(
            [
                record.q,
                _real(record.t),
                _real(record.p),
                record.n,
                record.betti,
                "" if record.lambda_min is None else _real(record.lambda_min),
            ]
        )
    return buffer.getvalue()


def parse_records_csv(text: str) -> List[PSLRecord]:
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != HEADER:
        raise ParseError("Records CSV must start with the header " + ",".join(HEADER))
    records = []
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            q, t, p, n, betti, lambda_min = row
            lambda_value: Optional[float] = float(lambda_min) if lambda_min else None
            records.append(
                PSLRecord(int(q), float(t), float(p), int(n), int(betti), lambda_value)
            )
        except ValueError:
            raise ParseError(f"Line {line_number}: malformed record", line=line_number)
    return records


def write_spectra_json(records: Iterable[PSLRecord]) -> str:
    return json.dumps(
        [
            {
                "q": record.q,
                "t": record.t,
                "p": record.p,
                "n": record.n,
                "betti": record.betti,
                "lambda_min": record.lambda_min,
                "spectrum": list(record.spectrum) if record.spectrum is not None else None,
            }
            for record in records
        ],
        indent=2,
    )
