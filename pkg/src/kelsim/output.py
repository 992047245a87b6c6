"""CSV and PGM emission with exact round-trip guarantees.

All CSV is RFC-4180-style: header row, comma separators, ``.`` decimal
point, LF line endings, floats printed with 17 significant digits so
parsing the text back reproduces the binary values exactly.

Snapshots of 2D fields are 16-bit binary PGM (P5, maxval 65535,
big-endian samples) with the linear scaling recorded in a comment line,
plus a companion CSV holding the raw values.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Field, Grid
from .integrator import RunOutcome


def fmt(x: float) -> str:
    """17 significant digits: enough for exact float64 round-trips."""
    return f"{x:.17g}"


def _lp_label(p: float) -> str:
    return f"l{int(p)}_u" if float(p).is_integer() else f"l{p:g}_u"


def timeseries_header(lp_track: tuple[float, ...]) -> list[str]:
    extra = sorted(set(float(p) for p in lp_track) - {2.0})
    return (["t", "dt", "mass", "linf_u", "min_u", "l2_u"]
            + [_lp_label(p) for p in extra] + ["l2_v"])


def emit_timeseries(outcome: RunOutcome, path: str | Path) -> Path:
    """One CSV row per diagnostics record."""
    path = Path(path)
    recs = outcome.records
    track: tuple[float, ...] = tuple(recs[0].lp_norms.keys()) if recs else (2.0,)
    header = timeseries_header(track)
    extra = sorted(set(float(p) for p in track) - {2.0})
    lines = [",".join(header)]
    for r in recs:
        row = [fmt(r.t), fmt(r.dt), fmt(r.mass), fmt(r.linf_u), fmt(r.min_u),
               fmt(r.lp_norms[2.0])]
        row += [fmt(r.lp_norms[p]) for p in extra]
        row.append(fmt(r.l2_v))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def read_timeseries(path: str | Path) -> dict[str, np.ndarray]:
    """Parse an emitted timeseries back into column arrays."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    cols = {h: [] for h in header}
    for line in lines[1:]:
        for h, cell in zip(header, line.split(",")):
            cols[h].append(float(cell))
    return {h: np.array(v) for h, v in cols.items()}


def emit_snapshot(field: Field, grid: Grid, base: str | Path) -> list[Path]:
    """Write <base>.csv always; <base>.pgm additionally for 2D grids.

    PGM rows run over the second grid axis (row r holds cells (i, r)),
    columns over the first. Returns the list of files written; on a 1D
    grid only the CSV appears.
    """
    base = Path(base)
    written = [_snapshot_csv(field, grid, base.parent / (base.name + ".csv"))]
    if grid.dim == 2:
        written.append(_snapshot_pgm(field, grid, base.parent / (base.name + ".pgm")))
    return written


def _snapshot_csv(field: Field, grid: Grid, path: Path) -> Path:
    lines = []
    if grid.dim == 1:
        lines.append("i,value")
        for i, val in enumerate(field):
            lines.append(f"{i},{fmt(val)}")
    else:
        lines.append("i,j,value")
        nx, ny = grid.shape
        for i in range(nx):
            for j in range(ny):
                lines.append(f"{i},{j},{fmt(field[i, j])}")
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def read_snapshot_csv(path: str | Path) -> Field:
    """Reload a snapshot CSV into an array of the original shape."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if header == ["i", "value"]:
        out = np.empty(len(rows))
        for cells in rows:
            out[int(cells[0])] = float(cells[1])
        return out
    nx = max(int(c[0]) for c in rows) + 1
    ny = max(int(c[1]) for c in rows) + 1
    out = np.empty((nx, ny))
    for cells in rows:
        out[int(cells[0]), int(cells[1])] = float(cells[2])
    return out


def _snapshot_pgm(field: Field, grid: Grid, path: Path) -> Path:
    nx, ny = grid.shape
    lo = float(np.min(field))
    hi = float(np.max(field))
    if hi > lo:
        scaled = np.rint((field - lo) * (65535.0 / (hi - lo)))
        comment = f"# scale min={fmt(lo)} max={fmt(hi)}"
    else:
        scaled = np.zeros_like(field)
        comment = f"# scale degenerate constant={fmt(lo)}"
    pixels = np.clip(scaled, 0, 65535).astype(">u2")
    # row r of the raster holds cells (0..nx-1, j=r)
    raster = pixels.T.tobytes()
    header = f"P5\n{comment}\n{nx} {ny}\n65535\n"
    path.write_bytes(header.encode("ascii") + raster)
    return path


def read_pgm(path: str | Path) -> tuple[np.ndarray, str]:
    """Read back a P5 snapshot; returns (uint16 array shaped (nx, ny), comment)."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 4)
    if parts[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM")
    comment = parts[1].decode("ascii")
    w, h = (int(x) for x in parts[2].split())
    maxval = int(parts[3])
    if maxval != 65535:
        raise ValueError(f"expected maxval 65535, got {maxval}")
    raster = np.frombuffer(parts[4], dtype=">u2", count=w * h).reshape(h, w)
    return raster.T.astype(np.uint16), comment
