"""Persistence: binary field snapshots, CSV tables, key = value configs, manifests."""
from __future__ import annotations

import json
import math
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .domain import Field, GridSpec

SNAPSHOT_MAGIC = "LOGNS1"
_PAYLOAD_DTYPE = np.dtype("<c16")
_HEADER_RE = re.compile(
    r"^LOGNS1 d=(?P<d>\d+) n=(?P<n>\d+) nx=(?P<nx>\d+) ny=(?P<ny>\d+) L=(?P<L>\S+)$"
)


class SnapshotError(ValueError):
    """Base class for unreadable snapshot files."""


class SnapshotMagicError(SnapshotError):
    pass


class SnapshotTruncatedError(SnapshotError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"snapshot payload has {actual} bytes, expected {expected}")
        self.expected = expected
        self.actual = actual


class SnapshotDimensionError(SnapshotError):
    pass


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


class NonFiniteRowError(ValueError):
    """A CSV row holds NaN or infinity."""


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def snapshot_header(grid: GridSpec) -> str:
    return f"{SNAPSHOT_MAGIC} d={grid.d} n={grid.n} nx={grid.points_x} ny={grid.points_y} L={grid.L!r}"


def write_field_snapshot(field: Field, path) -> None:
    header = (snapshot_header(field.grid) + "\n").encode("ascii")
    payload = np.ascontiguousarray(field.samples, dtype=_PAYLOAD_DTYPE).tobytes(order="C")
    _atomic_write(Path(path), header + payload)


def read_field_snapshot(path, expect: GridSpec | None = None) -> Field:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if not raw.startswith(SNAPSHOT_MAGIC.encode()) or nl < 0:
        raise SnapshotMagicError(f"{path}: not a {SNAPSHOT_MAGIC} snapshot")
    try:
        header = raw[:nl].decode("ascii")
    except UnicodeDecodeError as exc:
        raise SnapshotMagicError(f"{path}: header is not ASCII") from exc
    m = _HEADER_RE.match(header)
    if m is None:
        raise SnapshotMagicError(f"{path}: malformed header {header!r}")
    try:
        grid = GridSpec(d=int(m["d"]), n=int(m["n"]), L=float(m["L"]), points_x=int(m["nx"]), points_y=int(m["ny"]))
    except ValueError as exc:
        raise SnapshotDimensionError(f"{path}: invalid grid in header: {exc}") from exc
    if expect is not None and grid != expect:
        raise SnapshotDimensionError(f"{path}: snapshot grid {grid} does not match expected {expect}")
    payload = raw[nl + 1 :]
    expected = grid.size * _PAYLOAD_DTYPE.itemsize
    if len(payload) != expected:
        raise SnapshotTruncatedError(expected, len(payload))
    samples = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE).reshape(grid.shape).astype(np.complex128)
    return Field(grid, samples)


def _format_cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise NonFiniteRowError(f"refusing to write non-finite value {v}")
        return "%.17g" % v
    if isinstance(v, str):
        if any(c in v for c in ",\n\r\""):
            raise ValueError(f"string cell {v!r} would need quoting")
        return v
    raise TypeError(f"cannot format {type(v).__name__} as a CSV cell")


def format_csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, schema has {len(header)}")
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_csv(rows: Iterable[Sequence], header: Sequence[str], path) -> None:
    """Write a CSV with 17 significant digits and LF endings; nothing is written if any cell is non-finite."""
    _atomic_write(Path(path), format_csv(rows, header).encode("ascii"))


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment; duplicate keys are rejected."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            raise ConfigError(f"line {lineno}: invalid key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def write_manifest(path, manifest: dict) -> None:
    data = json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n"
    _atomic_write(Path(path), data.encode("utf-8"))
