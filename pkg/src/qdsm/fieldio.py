"""Text and binary serialization of fields and measurement matrices.

Every object is written twice: a text table (17 significant digits, one row per
sample, ``#`` header) and a flat little-endian binary companion that round-trips
bit-exactly.

Binary field layout::

    b"QDSMFLD1"  int64 dim  int64 counts[dim]  float64 axis_min[dim]  float64 axis_max[dim]
    complex128 values[prod(counts)]   (interleaved re/im, row-major)

Binary measurement layout::

    b"QDSMMEA1"  int64 dim  int64 kind (0 far, 1 near)  int64 n_theta  int64 n_k  int64 seed (-1 none)
    float64 radius (nan for far)  float64 direction weight  float64 k_min  float64 k_max
    float64 dk  float64 noise_level
    float64 dirs[n_theta, dim]  float64 k[n_k]  complex128 data[n_theta, n_k]
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .forward import MeasurementSet
from .geometry import DirectionSet, FieldKind, MeasurementGeometry, SamplingGrid, WavenumberSet
from .phantoms import ComplexField

FIELD_MAGIC = b"QDSMFLD1"
MEAS_MAGIC = b"QDSMMEA1"
_I8 = np.dtype("<i8")
_F8 = np.dtype("<f8")
_C16 = np.dtype("<c16")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, payload, mode: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, mode) as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".txt", ".bin") else path


# ---------------------------------------------------------------------------
# fields


def field_text(f: ComplexField) -> str:
    g = f.grid
    lines = ["# qdsm field",
             f"# dim {g.dim}",
             "# counts " + " ".join(str(c) for c in g.counts),
             "# axis_min " + " ".join(fmt(v) for v in g.axis_min),
             "# axis_max " + " ".join(fmt(v) for v in g.axis_max),
             "# columns " + " ".join(f"x{i + 1}" for i in range(g.dim)) + " re im"]
    pts = g.points()
    vals = f.flat
    for p, v in zip(pts, vals):
        lines.append(" ".join(fmt(c) for c in p) + f" {fmt(v.real)} {fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def field_bytes(f: ComplexField) -> bytes:
    g = f.grid
    head = (FIELD_MAGIC + np.array([g.dim, *g.counts], _I8).tobytes()
            + np.array(g.axis_min, _F8).tobytes() + np.array(g.axis_max, _F8).tobytes())
    return head + np.ascontiguousarray(f.flat, dtype=_C16).tobytes()


def export_field(f: ComplexField, path) -> tuple[Path, Path]:
    """Write ``<stem>.txt`` and ``<stem>.bin``; returns both paths."""
    stem = _stem(path)
    txt, binp = stem.with_suffix(".txt"), stem.with_suffix(".bin")
    _write(txt, field_text(f), "w")
    _write(binp, field_bytes(f), "wb")
    return txt, binp


def read_field_binary(path) -> ComplexField:
    raw = _read(path)
    if raw[:8] != FIELD_MAGIC:
        raise DomainError(f"{path}: not a qdsm field file")
    off = 8
    dim = int(np.frombuffer(raw, _I8, 1, off)[0])
    if dim not in (2, 3):
        raise DomainError(f"{path}: bad dimension {dim}")
    off += 8
    counts = tuple(int(c) for c in np.frombuffer(raw, _I8, dim, off))
    off += 8 * dim
    lo = np.frombuffer(raw, _F8, dim, off)
    off += 8 * dim
    hi = np.frombuffer(raw, _F8, dim, off)
    off += 8 * dim
    n = int(np.prod(counts))
    if len(raw) != off + 16 * n:
        raise DomainError(f"{path}: payload size does not match header")
    vals = np.frombuffer(raw, _C16, n, off).copy()
    grid = SamplingGrid(dim, tuple(float(v) for v in lo), tuple(float(v) for v in hi), counts)
    return ComplexField(grid, vals)


def _header(lines):
    head = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) >= 1:
                head[parts[0]] = parts[1:]
        elif line.strip():
            body.append(line)
    return head, body


def read_field_text(path) -> ComplexField:
    text = _read(path).decode()
    head, body = _header(text.splitlines())
    try:
        dim = int(head["dim"][0])
        counts = tuple(int(c) for c in head["counts"])
        lo = tuple(float(v) for v in head["axis_min"])
        hi = tuple(float(v) for v in head["axis_max"])
    except (KeyError, IndexError, ValueError) as exc:
        raise DomainError(f"{path}: malformed field header") from exc
    table = np.loadtxt(body, ndmin=2) if body else np.zeros((0, dim + 2))
    grid = SamplingGrid(dim, lo, hi, counts)
    if table.shape != (grid.size, dim + 2):
        raise DomainError(f"{path}: expected {grid.size} rows of {dim + 2} columns")
    return ComplexField(grid, table[:, dim] + 1j * table[:, dim + 1])


# ---------------------------------------------------------------------------
# measurements


def measurement_text(m: MeasurementSet) -> str:
    dim = m.dim
    ks = m.wavenumbers
    lines = ["# qdsm measurements",
             f"# dim {dim}",
             f"# kind {m.kind.value}",
             f"# radius {fmt(m.geometry.radius) if m.geometry.radius is not None else 'none'}",
             f"# n_theta {len(m.directions)}",
             f"# direction_weight {fmt(m.directions.weight)}",
             f"# k_min {fmt(ks.k_min)}",
             f"# k_max {fmt(ks.k_max)}",
             f"# n_k {ks.n_k}",
             f"# dk {fmt(ks.dk)}",
             f"# noise_level {fmt(m.noise_level)}",
             f"# seed {m.seed if m.seed is not None else 'none'}",
             "# columns j m k_m " + " ".join(f"theta{i + 1}" for i in range(dim)) + " re im"]
    for j, th in enumerate(m.directions.dirs):
        tcols = " ".join(fmt(c) for c in th)
        for mm, k in enumerate(ks.values):
            v = m.data[j, mm]
            lines.append(f"{j + 1} {mm + 1} {fmt(k)} {tcols} {fmt(v.real)} {fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def measurement_bytes(m: MeasurementSet) -> bytes:
    ks = m.wavenumbers
    radius = m.geometry.radius if m.geometry.radius is not None else np.nan
    ints = [m.dim, 0 if m.kind is FieldKind.FAR else 1, len(m.directions), ks.n_k,
            -1 if m.seed is None else int(m.seed)]
    floats = [radius, m.directions.weight, ks.k_min, ks.k_max, ks.dk, m.noise_level]
    return (MEAS_MAGIC + np.array(ints, _I8).tobytes() + np.array(floats, _F8).tobytes()
            + np.ascontiguousarray(m.directions.dirs, _F8).tobytes()
            + np.ascontiguousarray(ks.values, _F8).tobytes()
            + np.ascontiguousarray(m.data, _C16).tobytes())


def export_measurements(m: MeasurementSet, path) -> tuple[Path, Path]:
    stem = _stem(path)
    txt, binp = stem.with_suffix(".txt"), stem.with_suffix(".bin")
    _write(txt, measurement_text(m), "w")
    _write(binp, measurement_bytes(m), "wb")
    return txt, binp


def read_measurements(path) -> MeasurementSet:
    """Read the binary measurement companion written by ``export_measurements``."""
    raw = _read(path)
    if raw[:8] != MEAS_MAGIC:
        raise DomainError(f"{path}: not a qdsm measurement file")
    off = 8
    dim, kind, n_theta, n_k, seed = (int(v) for v in np.frombuffer(raw, _I8, 5, off))
    off += 40
    radius, weight, k_min, k_max, dk, noise = (float(v) for v in np.frombuffer(raw, _F8, 6, off))
    off += 48
    expected = off + 8 * n_theta * dim + 8 * n_k + 16 * n_theta * n_k
    if dim not in (2, 3) or len(raw) != expected:
        raise DomainError(f"{path}: payload size does not match header")
    dirs = np.frombuffer(raw, _F8, n_theta * dim, off).reshape(n_theta, dim).copy()
    off += 8 * n_theta * dim
    kv = np.frombuffer(raw, _F8, n_k, off).copy()
    off += 8 * n_k
    data = np.frombuffer(raw, _C16, n_theta * n_k, off).reshape(n_theta, n_k).copy()
    kv.setflags(write=False)
    geometry = MeasurementGeometry.far() if kind == 0 else MeasurementGeometry.near(radius)
    return MeasurementSet(geometry, DirectionSet(dim, dirs, weight),
                          WavenumberSet(k_min, k_max, n_k, kv, dk), data,
                          noise_level=noise, seed=None if seed < 0 else seed)
