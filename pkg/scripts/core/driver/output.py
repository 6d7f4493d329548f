"""
output.py - Snapshot and plot-ready exports

This module handles:
- Binary snapshots: ASCII header followed by little-endian float64 data,
  interior cells only, cell-major (all components of a cell together,
  cells in C order of the extents)
- CSV slices (x, y, value) and gnuplot matrix grids of derived fields
- Schlieren images of the density
- The diagnostics time series and the run summary
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from scripts.core import physics
from scripts.core.ct import potential_components
from scripts.core.diagnostics import schlieren
from scripts.core.mesh import GridSpec
from scripts.utils.io_helpers import write_json
from scripts.utils.logging_helper import get_logger

log = get_logger()

MAGIC = "PIFWENO-MHD-SNAP v1"
END_HEADER = "end_header"
SERIES_COLUMNS = ["step", "t", "dt", "energy_error", "max_divB", "min_rho", "min_p",
                  "limited_faces", "min_theta", "shock_front_x"]


def component_names(ndim: int, with_potential: bool = True) -> List[str]:
    names = list(physics.COMPONENT_NAMES)
    if with_potential:
        names += ["A" + "xyz"[c] for c in potential_components(ndim)]
    return names


def write_snapshot(path: Path, problem: str, t: float, spec: GridSpec, q: np.ndarray,
                   A: Optional[np.ndarray] = None) -> Path:
    """Write one snapshot file and return its path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = [q[spec.cinterior]]
    if A is not None:
        fields.append(A[spec.cinterior])
    data = np.concatenate(fields, axis=0)
    names = component_names(spec.ndim, A is not None)
    header = [
        MAGIC,
        f"problem {problem}",
        f"t {t!r}",
        "dims " + " ".join(str(n) for n in spec.dims),
        "bounds " + " ".join(f"{lo!r} {hi!r}" for lo, hi in spec.bounds),
        "components " + " ".join(names),
        END_HEADER,
    ]
    payload = np.ascontiguousarray(np.moveaxis(data, 0, -1)).astype("<f8")
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(payload.tobytes())
    return path


def read_snapshot(path: Path) -> Dict:
    """Parse a snapshot into header fields plus ``data`` of shape (comps, *dims)."""
    raw = Path(path).read_bytes()
    marker = (END_HEADER + "\n").encode("ascii")
    cut = raw.index(marker) + len(marker)
    lines = raw[:cut].decode("ascii").splitlines()
    if lines[0] != MAGIC:
        raise ValueError(f"{path} is not a snapshot (magic '{lines[0]}')")
    meta = dict(line.split(" ", 1) for line in lines[1:-1])
    dims = tuple(int(v) for v in meta["dims"].split())
    b = [float(v) for v in meta["bounds"].split()]
    names = meta["components"].split()
    data = np.frombuffer(raw[cut:], dtype="<f8").reshape(dims + (len(names),))
    return {
        "problem": meta["problem"],
        "t": float(meta["t"]),
        "dims": dims,
        "bounds": tuple(zip(b[0::2], b[1::2])),
        "components": names,
        "data": np.moveaxis(data, -1, 0).copy(),
    }


def _plane(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Interior 2D plane of a cell array (z mid-plane for 3D grids)."""
    inner = values[spec.interior] if values.shape == spec.shape else values
    if spec.ndim == 3:
        inner = inner[:, :, spec.dims[2] // 2]
    return inner


def _plane_coords(spec: GridSpec):
    g = spec.ghost
    xs = spec.centers(0)[g:g + spec.dims[0]]
    ys = spec.centers(1)[g:g + spec.dims[1]]
    return xs, ys


def write_csv_slice(path: Path, spec: GridSpec, values: np.ndarray, name: str = "value") -> Path:
    """x, y, value rows for every cell of the interior (mid-)plane."""
    plane = _plane(values, spec)
    xs, ys = _plane_coords(spec)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["x", "y", name])
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                w.writerow([f"{x:.10g}", f"{y:.10g}", f"{plane[i, j]:.16g}"])
    return path


def write_gnuplot_grid(path: Path, spec: GridSpec, values: np.ndarray) -> Path:
    """``x y value`` lines with a blank line after each x row (splot/pm3d layout)."""
    plane = _plane(values, spec)
    xs, ys = _plane_coords(spec)
    lines = []
    for i, x in enumerate(xs):
        lines.extend(f"{x:.10g} {y:.10g} {plane[i, j]:.16g}" for j, y in enumerate(ys))
        lines.append("")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def derived_fields(q: np.ndarray, gamma: float) -> Dict[str, np.ndarray]:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = physics.raw_pressure(q, gamma)
        u = q[physics.MOM] / q[physics.RHO]
    B = q[physics.MAG]
    return {
        "density": q[physics.RHO],
        "pressure": p,
        "bmag": np.sqrt(np.sum(B * B, axis=0)),
        "umag": np.sqrt(np.sum(u * u, axis=0)),
    }


def export_snapshot(out_dir: Path, index: int, problem: str, t: float, spec: GridSpec,
                    q: np.ndarray, A: Optional[np.ndarray], gamma: float,
                    schlieren_k: float = 20.0) -> List[Path]:
    """Snapshot plus CSV slices, gnuplot grid and Schlieren for one output time."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"snap_{index:04d}"
    written = [write_snapshot(out_dir / f"{stem}.bin", problem, t, spec, q, A)]
    if spec.ndim >= 2:
        for name, values in derived_fields(q, gamma).items():
            written.append(write_csv_slice(out_dir / f"{stem}_{name}.csv", spec, values, name))
        written.append(write_gnuplot_grid(out_dir / f"{stem}_density.dat", spec, q[physics.RHO]))
        image = schlieren(q[physics.RHO], spec, k=schlieren_k)
        written.append(write_csv_slice(out_dir / f"{stem}_schlieren.csv", spec, image, "schlieren"))
    log.debug("wrote snapshot %d at t=%.6g to %s", index, t, out_dir)
    return written


def write_series(path: Path, rows: Iterable[Dict], columns: Sequence[str] = SERIES_COLUMNS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    return path


def write_summary(path: Path, summary) -> Path:
    write_json(Path(path), summary.model_dump(mode="json"))
    return Path(path)
