"""Run reports (versioned JSON) and CSV ingestion for the command line."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError

SCHEMA = 1


@dataclass
class RunReport:
    """Outcome of one partition run as written to disk.

    ``blocks`` use 1-based element numbers; ``labels`` (if any) name the
    variables in input column order.
    """

    input: dict
    method: str
    blocks: list[list[int]]
    loss: float
    oracle_calls: int
    wall_time: float
    jitter: float
    version: str
    seed: int
    optimal: bool = True
    labels: list[str] | None = None
    extra: dict = field(default_factory=dict)
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        if d.get("schema") != SCHEMA:
            raise InputError(f"unsupported report schema {d.get('schema')!r}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(f"malformed report: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"report is not valid JSON: {exc}") from None

    @classmethod
    def read(cls, path) -> RunReport:
        return cls.from_json(Path(path).read_text())

    def zero_based(self) -> list[list[int]]:
        return [[i - 1 for i in b] for b in self.blocks]


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_matrix_csv(path) -> tuple[np.ndarray, list[str] | None]:
    """Numeric matrix from a comma-separated file.

    The first row is taken as a header when any of its cells is not a
    number.  Returns ``(matrix, header)``.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise InputError(f"{path} is empty")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path} has a header but no data")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from None
    if header is not None and len(header) != width:
        raise InputError(f"{path}: header has {len(header)} names for {width} columns")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: non-finite entries")
    return data, header


def write_matrix_csv(path, data: np.ndarray, header: list[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        w.writerows([repr(float(v)) for v in row] for row in np.asarray(data))


def write_rows_csv(path, rows: list[dict]) -> None:
    """Tidy CSV from a list of flat dicts sharing the same keys."""
    if not rows:
        raise InputError("nothing to write")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
