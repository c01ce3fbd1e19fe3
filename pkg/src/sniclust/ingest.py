"""Connection-record ingestion, TCP fingerprints, and the client metric.

Input rows describe one TLS handshake each.  A row is usable only when its
SNI field is populated; everything else may be missing.  Seven TCP/IP
parameters are concatenated into a fingerprint that stands in for the
physical client device, and duplicates are deliberately kept: the mapping
stage counts connection events, not distinct clients.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyDatasetError, FormatError, IoError

# Fingerprint field order is fixed; position 3 (flags) and 5 (options) are
# opaque strings, the rest are integers.
FINGERPRINT_FIELDS = (
    "tcp_header_length",
    "ip_ttl",
    "tcp_window_size",
    "tcp_flags",
    "tcp_mss",
    "tcp_options",
    "tcp_window_scaling",
)
NUMERIC_SLOTS = (0, 1, 2, 4, 6)
CATEGORICAL_SLOTS = (3, 5)
_NUM_SLOTS = len(FINGERPRINT_FIELDS)


@dataclass(frozen=True)
class ConnectionRecord:
    """One TLS handshake's TCP/IP parameters plus its SNI."""

    conn_id: str
    sni: str
    tcp_header_length: Optional[int] = None
    ip_ttl: Optional[int] = None
    tcp_window_size: Optional[int] = None
    tcp_flags: Optional[str] = None
    tcp_mss: Optional[int] = None
    tcp_options: Optional[str] = None
    tcp_window_scaling: Optional[int] = None


def _escape(value: str) -> str:
    # Escape the join separator (and the escape char itself) so that the
    # canonical form is injective over the field tuple.
    return value.replace("\\", "\\\\").replace("|", "\\|")


@dataclass(frozen=True)
class TcpFingerprint:
    """Ordered 7-field client identifier; missing fields are empty strings."""

    fields: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.fields) != _NUM_SLOTS:
            raise ValueError(f"fingerprint needs {_NUM_SLOTS} fields, got {len(self.fields)}")

    @property
    def canonical(self) -> str:
        return "|".join(_escape(f) for f in self.fields)


def fingerprint(record: ConnectionRecord) -> TcpFingerprint:
    """Build the 7-field fingerprint; unpopulated fields become ""."""
    values = []
    for name in FINGERPRINT_FIELDS:
        v = getattr(record, name)
        values.append("" if v is None else str(v))
    return TcpFingerprint(fields=tuple(values))


@dataclass
class Dataset:
    """Duplicate-preserving record, client, and domain lists.

    Record i produced clients[i] and domains[i]; nothing is ever collapsed.
    """

    records: list[ConnectionRecord]
    clients: list[TcpFingerprint]
    domains: list[str]
    client_of: dict[str, int]
    domain_of: dict[str, int]
    skipped_rows: int = field(default=0, compare=False)

    @classmethod
    def from_records(cls, records: Sequence[ConnectionRecord], skipped_rows: int = 0) -> "Dataset":
        records = list(records)
        if not records:
            raise EmptyDatasetError("no usable records")
        seen: set[str] = set()
        for r in records:
            if r.conn_id in seen:
                raise FormatError(f"duplicate conn_id {r.conn_id!r}")
            seen.add(r.conn_id)
        clients = [fingerprint(r) for r in records]
        domains = [r.sni for r in records]
        index = {r.conn_id: i for i, r in enumerate(records)}
        return cls(
            records=records,
            clients=clients,
            domains=domains,
            client_of=index,
            domain_of=dict(index),
            skipped_rows=skipped_rows,
        )

    def __len__(self) -> int:
        return len(self.records)

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                row = {"conn_id": r.conn_id, "sni": r.sni}
                for name in FINGERPRINT_FIELDS:
                    v = getattr(r, name)
                    if v is not None:
                        row[name] = v
                fh.write(json.dumps(row, sort_keys=True) + "\n")


_INT_RANGES = {
    "tcp_header_length": (0, None),
    "ip_ttl": (0, 255),
    "tcp_window_size": (0, None),
    "tcp_mss": (0, None),
    "tcp_window_scaling": (0, None),
}


def _parse_int(value: object, name: str, row: int) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        if isinstance(value, bool):
            raise ValueError
        n = int(value)
    except (TypeError, ValueError):
        raise FormatError(f"row {row}: field {name!r} is not an integer: {value!r}") from None
    lo, hi = _INT_RANGES[name]
    if n < lo or (hi is not None and n > hi):
        raise FormatError(f"row {row}: field {name!r} out of range: {n}")
    return n


def _record_from_row(row: dict, rownum: int) -> Optional[ConnectionRecord]:
    sni = row.get("sni")
    if sni is None or sni == "":
        return None
    conn_id = row.get("conn_id")
    if conn_id is None or conn_id == "":
        conn_id = f"row-{rownum}"
    kwargs: dict[str, object] = {}
    for name in _INT_RANGES:
        kwargs[name] = _parse_int(row.get(name), name, rownum)
    for name in ("tcp_flags", "tcp_options"):
        v = row.get(name)
        kwargs[name] = None if v in (None, "") else str(v)
    return ConnectionRecord(conn_id=str(conn_id), sni=str(sni), **kwargs)


def parse_dataset(path: str | Path, format: str = "jsonl", strict: bool = False) -> Dataset:
    """Parse a JSONL or CSV file of connection rows into a Dataset.

    Rows without an SNI are skipped (counted in ``Dataset.skipped_rows``)
    unless ``strict`` is set, in which case they raise FormatError.
    """
    path = Path(path)
    if not path.is_file():
        raise IoError(f"cannot read {path}")
    if format not in ("jsonl", "csv"):
        raise FormatError(f"unknown format {format!r}")

    records: list[ConnectionRecord] = []
    skipped = 0

    def handle(row: dict, rownum: int) -> None:
        nonlocal skipped
        rec = _record_from_row(row, rownum)
        if rec is None:
            if strict:
                raise FormatError(f"row {rownum}: missing SNI")
            skipped += 1
        else:
            records.append(rec)

    if format == "jsonl":
        with open(path, "r", encoding="utf-8") as fh:
            for rownum, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"row {rownum}: invalid JSON: {exc}") from None
                if not isinstance(row, dict):
                    raise FormatError(f"row {rownum}: expected an object")
                handle(row, rownum)
    else:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise EmptyDatasetError("CSV file has no header row")
            for rownum, row in enumerate(reader, start=2):
                if None in row:
                    raise FormatError(f"row {rownum}: wrong number of columns")
                handle(row, rownum)

    if not records:
        raise EmptyDatasetError(f"no usable rows in {path} ({skipped} skipped)")
    return Dataset.from_records(records, skipped_rows=skipped)


# --------------------------------------------------------------------------
# Client metric
#
# Per-field distance: |a-b|/range for the five numeric fields (0 when both
# empty or the dataset range is zero, 1 when exactly one side is empty) and
# {0,1} exact match for flags/options.  Overall distance is the Euclidean
# combination scaled by sqrt(7) so it lands in [0,1] and is 0 iff the
# fingerprints are identical.


@dataclass(frozen=True)
class FieldContext:
    """Dataset-wide field ranges and categorical catalogs."""

    numeric_min: tuple[float, ...]   # per NUMERIC_SLOTS entry; nan when never populated
    numeric_max: tuple[float, ...]
    catalogs: tuple[tuple[str, ...], ...]  # per CATEGORICAL_SLOTS entry, sorted

    @classmethod
    def from_fingerprints(cls, fps: Iterable[TcpFingerprint]) -> "FieldContext":
        fps = list(fps)
        mins, maxs = [], []
        for slot in NUMERIC_SLOTS:
            vals = [float(fp.fields[slot]) for fp in fps if fp.fields[slot] != ""]
            mins.append(min(vals) if vals else math.nan)
            maxs.append(max(vals) if vals else math.nan)
        catalogs = []
        for slot in CATEGORICAL_SLOTS:
            catalogs.append(tuple(sorted({fp.fields[slot] for fp in fps})))
        return cls(tuple(mins), tuple(maxs), tuple(catalogs))

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "FieldContext":
        return cls.from_fingerprints(ds.clients)


def client_feature_vector(fp: TcpFingerprint, ctx: FieldContext) -> list[float]:
    """Numeric slots min-max normalized; categorical slots as catalog index.

    The categorical entries are nominal codes: the metric maps them to
    {0,1} match/mismatch pairwise, never to a magnitude.
    """
    out = [0.0] * _NUM_SLOTS
    for k, slot in enumerate(NUMERIC_SLOTS):
        raw = fp.fields[slot]
        if raw == "":
            continue
        lo, hi = ctx.numeric_min[k], ctx.numeric_max[k]
        out[slot] = 0.0 if hi == lo else (float(raw) - lo) / (hi - lo)
    for k, slot in enumerate(CATEGORICAL_SLOTS):
        out[slot] = float(ctx.catalogs[k].index(fp.fields[slot]))
    return out


def client_distance(a: TcpFingerprint, b: TcpFingerprint, ctx: FieldContext) -> float:
    """Normalized mixed Euclidean distance between two fingerprints."""
    total = 0.0
    for k, slot in enumerate(NUMERIC_SLOTS):
        ra, rb = a.fields[slot], b.fields[slot]
        if ra == "" and rb == "":
            d = 0.0
        elif ra == "" or rb == "":
            d = 1.0
        else:
            span = ctx.numeric_max[k] - ctx.numeric_min[k]
            d = 0.0 if span == 0 else abs(float(ra) - float(rb)) / span
        total += d * d
    for slot in CATEGORICAL_SLOTS:
        if a.fields[slot] != b.fields[slot]:
            total += 1.0
    return math.sqrt(total) / math.sqrt(_NUM_SLOTS)


def unique_by_first_seen(keys: Sequence[str]) -> tuple[list[int], np.ndarray]:
    """First-occurrence positions of each distinct key, plus per-item index.

    Returns (first_positions, uindex) where uindex[i] points at the unique
    slot of item i and first_positions preserves input order.
    """
    order: dict[str, int] = {}
    firsts: list[int] = []
    uindex = np.empty(len(keys), dtype=np.intp)
    for i, k in enumerate(keys):
        u = order.get(k)
        if u is None:
            u = len(firsts)
            order[k] = u
            firsts.append(i)
        uindex[i] = u
    return firsts, uindex


def client_distance_matrix(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise distances over distinct fingerprints (first-seen order).

    Returns (matrix, uindex); uindex expands unique-level cluster labels
    back to the duplicate-preserving record list.
    """
    ctx = FieldContext.from_dataset(ds)
    firsts, uindex = unique_by_first_seen([fp.canonical for fp in ds.clients])
    fps = [ds.clients[i] for i in firsts]
    u = len(fps)

    num = np.full((u, len(NUMERIC_SLOTS)), np.nan)
    for i, fp in enumerate(fps):
        for k, slot in enumerate(NUMERIC_SLOTS):
            if fp.fields[slot] != "":
                num[i, k] = float(fp.fields[slot])
    spans = np.array([ctx.numeric_max[k] - ctx.numeric_min[k] for k in range(len(NUMERIC_SLOTS))])
    spans = np.where(np.isnan(spans) | (spans == 0), 1.0, spans)

    present = ~np.isnan(num)
    both = present[:, None, :] & present[None, :, :]
    one = present[:, None, :] ^ present[None, :, :]
    diff = np.abs(np.nan_to_num(num)[:, None, :] - np.nan_to_num(num)[None, :, :]) / spans
    sq = np.where(both, diff**2, 0.0) + np.where(one, 1.0, 0.0)
    total = sq.sum(axis=2)

    for k, slot in enumerate(CATEGORICAL_SLOTS):
        codes = np.array([ctx.catalogs[k].index(fp.fields[slot]) for fp in fps])
        total += (codes[:, None] != codes[None, :]).astype(float)

    matrix = np.sqrt(total) / math.sqrt(_NUM_SLOTS)
    np.fill_diagonal(matrix, 0.0)
    return matrix, uindex
