"""
Field dump format.

A dump is a raw little-endian float64 body (row-major over the axes) plus a
sidecar JSON header next to it:

    f.bin   N^dim * 8 bytes
    f.json  {"dim": 1, "N": 256, "L": 6.283..., "dtype": "f64-le", "layout": "row-major"}

Writing the same field twice produces identical bytes.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .littlewood_paley import LPFamily
from .spectral import GridSpec, RealField, SpectralError

logger = logging.getLogger(__name__)

DTYPE = "f64-le"
LAYOUT = "row-major"
HEADER_KEYS = ("L", "N", "dim", "dtype", "layout")


class FieldDumpError(Exception):
    """Exception raised for unreadable or malformed field dumps."""

    def __init__(self, message: str, path: str | Path | None = None) -> None:
        self.message = message
        self.path = str(path) if path is not None else None
        super().__init__(message)

    def __str__(self) -> str:
        if self.path:
            return f"{self.message} ({self.path})"
        return self.message


def header_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def grid_header(grid: GridSpec) -> dict[str, object]:
    return {
        "dim": grid.dim,
        "N": grid.points_per_axis,
        "L": grid.period,
        "dtype": DTYPE,
        "layout": LAYOUT,
    }


def write_field(f: RealField, path: str | Path) -> Path:
    """
    Write a field body to `path` and its header to the sibling .json file.

    Returns:
        The body path.
    """
    body = Path(path)
    body.parent.mkdir(parents=True, exist_ok=True)
    body.write_bytes(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    header_path(body).write_text(json.dumps(grid_header(f.grid), indent=2, sort_keys=True) + "\n")
    logger.debug("Wrote field dump %s", body)
    return body


def _read_header(path: Path) -> dict[str, object]:
    sidecar = header_path(path)
    try:
        header = json.loads(sidecar.read_text())
    except OSError as e:
        raise FieldDumpError(f"Cannot read header: {e.strerror}", sidecar) from e
    except json.JSONDecodeError as e:
        raise FieldDumpError(f"Header is not valid JSON: {e.msg}", sidecar) from e
    if not isinstance(header, dict):
        raise FieldDumpError("Header must be a JSON object", sidecar)
    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise FieldDumpError(f"Header lacks {', '.join(missing)}", sidecar)
    if header["dtype"] != DTYPE or header["layout"] != LAYOUT:
        raise FieldDumpError(
            f"Unsupported dtype/layout {header['dtype']}/{header['layout']}", sidecar
        )
    return header


def read_field(path: str | Path) -> RealField:
    """
    Read a field dump.

    Raises:
        FieldDumpError: If the header is missing or malformed, or the body
            length differs from N^dim float64 values.
    """
    body = Path(path)
    header = _read_header(body)
    try:
        grid = GridSpec(int(header["dim"]), int(header["N"]), float(header["L"]))
    except (SpectralError, TypeError, ValueError) as e:
        raise FieldDumpError(f"Invalid grid in header: {e}", header_path(body)) from e

    try:
        raw = body.read_bytes()
    except OSError as e:
        raise FieldDumpError(f"Cannot read body: {e.strerror}", body) from e
    expected = grid.size * 8
    if len(raw) != expected:
        raise FieldDumpError(f"Body holds {len(raw)} bytes, header implies {expected}", body)
    values = np.frombuffer(raw, dtype="<f8").astype(float).reshape(grid.shape)
    return RealField(grid, values)


def write_family_tables(fam: LPFamily, out_dir: str | Path) -> list[Path]:
    """Dump every phi_j and psi_j multiplier table of a family, in FFT order."""
    root = Path(out_dir)
    return [
        write_field(RealField(fam.grid, table), root / f"{name}.bin")
        for name, table in sorted(fam.multiplier_tables().items())
    ]
