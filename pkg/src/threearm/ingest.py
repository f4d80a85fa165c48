"""Reading and writing per-arm trial summaries as CSV."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

from .analysis import ARMS, ArmSummary, arms_by_label
from .errors import InputError

SUMMARY_COLUMNS = ("arm", "n", "mean", "sd")
PATIENT_COLUMNS = ("arm", "value")


def _cell(row: Dict[str, str], column: str, line: int, where: str, conv):
    raw = (row.get(column) or "").strip()
    try:
        return conv(raw)
    except ValueError:
        raise InputError(f"{where} line {line}, column '{column}': cannot parse {raw!r}") from None


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


def read_summaries(path) -> List[ArmSummary]:
    """Load ``arm,n,mean,sd`` rows, or per-patient ``arm,value`` rows which are
    reduced to summaries (sample sd with n - 1)."""
    path = Path(path)
    where = str(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"data file not found: {path}") from None
    with handle:
        reader = csv.DictReader(handle)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        if set(SUMMARY_COLUMNS) <= set(header):
            mode = "summary"
        elif set(PATIENT_COLUMNS) <= set(header):
            mode = "patient"
        else:
            missing = [c for c in SUMMARY_COLUMNS if c not in header]
            raise InputError(f"{where}: missing column(s) {', '.join(missing)} (expected arm,n,mean,sd or arm,value)")
        summaries = []
        values: Dict[str, List[float]] = defaultdict(list)
        for line, row in enumerate(reader, start=2):
            arm = (row.get("arm") or "").strip()
            if arm not in ARMS:
                raise InputError(f"{where} line {line}, column 'arm': expected one of {ARMS}, got {arm!r}")
            if mode == "summary":
                try:
                    summaries.append(ArmSummary(
                        arm,
                        _cell(row, "n", line, where, _int),
                        _cell(row, "mean", line, where, float),
                        _cell(row, "sd", line, where, float),
                    ))
                except InputError as exc:
                    if str(exc).startswith(where):
                        raise
                    raise InputError(f"{where} line {line}: {exc}") from None
            else:
                values[arm].append(_cell(row, "value", line, where, float))
    if mode == "patient":
        for arm, xs in values.items():
            n = len(xs)
            if n < 2:
                raise InputError(f"{where}: arm {arm} has fewer than two patients")
            mean = math.fsum(xs) / n
            sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
            summaries.append(ArmSummary(arm, n, mean, sd))
    try:
        arms = arms_by_label(summaries)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None
    return [arms[a] for a in ARMS]


def write_summaries(path, summaries) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        w = csv.writer(handle)
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow([s.label, s.n, repr(s.mean), repr(s.sd)])
