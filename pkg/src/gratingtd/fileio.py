"""FLD1 field snapshots, CSV time traces and line-oriented reports."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SnapshotError", "FieldSnapshot", "write_snapshot", "read_snapshot", "write_trace_csv", "write_report",
           "write_rows_csv"]

MAGIC = b"FLD1"


class SnapshotError(ValueError):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code


@dataclass(eq=False)
class FieldSnapshot:
    """Real nodal field on the strip mesh at time ``t``; ``values[k * nx + i]``."""

    nx: int
    nz: int
    period: float
    h1: float
    h2: float
    t: float
    values: np.ndarray

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.nz + 1, self.nx)


def write_snapshot(snap: FieldSnapshot, path: str | Path) -> None:
    """``FLD1`` magic, one text header line ``Nx Nz period h1 h2 t``, then little-endian float64 payload."""
    vals = np.asarray(snap.values, dtype=float)
    if vals.size != snap.nx * (snap.nz + 1):
        raise SnapshotError("mesh_mismatch", f"{vals.size} values for a {snap.nx} x {snap.nz + 1} node grid")
    if not np.all(np.isfinite(vals)):
        raise SnapshotError("non_finite", "snapshot values must be finite")
    header = f"{snap.nx} {snap.nz} {snap.period!r} {snap.h1!r} {snap.h2!r} {snap.t!r}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(vals.astype("<f8").tobytes())


def read_snapshot(path: str | Path, expect: tuple | None = None) -> FieldSnapshot:
    """Read an ``FLD1`` file; ``expect=(nx, nz, period, h1, h2)`` enforces the mesh."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise SnapshotError("bad_magic", f"{path} does not start with FLD1")
    end = data.find(b"\n", 4)
    if end < 0:
        raise SnapshotError("snapshot_truncated", "header line incomplete")
    try:
        parts = data[4:end].decode("ascii").split()
        nx, nz = int(parts[0]), int(parts[1])
        period, h1, h2, t = (float(v) for v in parts[2:6])
    except (ValueError, IndexError, UnicodeDecodeError):
        raise SnapshotError("bad_header", f"cannot parse header of {path}") from None
    payload = data[end + 1 :]
    need = 8 * nx * (nz + 1)
    if len(payload) < need:
        raise SnapshotError("snapshot_truncated", f"payload has {len(payload)} bytes, expected {need}")
    if len(payload) > need:
        raise SnapshotError("trailing_bytes", f"payload has {len(payload) - need} extra bytes")
    snap = FieldSnapshot(nx, nz, period, h1, h2, t, np.frombuffer(payload, dtype="<f8").astype(float))
    if expect is not None and tuple(expect) != (nx, nz, period, h1, h2):
        raise SnapshotError("mesh_mismatch", f"file mesh {(nx, nz, period, h1, h2)} vs expected {tuple(expect)}")
    return snap


def _fmt(v: float) -> str:
    # 17 significant digits, independent of locale
    return f"{v:.16e}"


def write_trace_csv(times, series: dict[str, np.ndarray], path: str | Path) -> None:
    """Header ``t,name1,...`` then one row per time sample."""
    names = list(series)
    cols = [np.asarray(series[n], dtype=float) for n in names]
    times = np.asarray(times, dtype=float)
    if any(c.shape != times.shape for c in cols):
        raise ValueError("all series must have the same length as the time axis")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        if not names:
            return
        for k in range(times.size):
            fh.write(",".join(_fmt(v) for v in [times[k]] + [c[k] for c in cols]) + "\n")


def write_rows_csv(header: list[str], rows, path: str | Path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def write_report(lines, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line.rstrip("\n") + "\n")
