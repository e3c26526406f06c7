"""Plain-text PPM slices of complex fields with a fixed diverging colormap."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .phantoms import ComplexField

# blue - neutral - red anchors at t = 0, 0.5, 1
ANCHORS = ((0.0, (59, 76, 192)), (0.5, (221, 221, 221)), (1.0, (180, 4, 38)))
_PART_NAMES = {"re": "re", "real": "re", "im": "im", "imag": "im", "abs": "abs"}


def colormap(t: np.ndarray) -> np.ndarray:
    """Map t in [0, 1] to uint8 RGB by piecewise-linear interpolation of ANCHORS."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    xs = [a[0] for a in ANCHORS]
    rgb = [np.interp(t, xs, [a[1][c] for a in ANCHORS]) for c in range(3)]
    return np.rint(np.stack(rgb, axis=-1)).astype(np.uint8)


def normalise(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi > lo:
        return (values - lo) / (hi - lo)
    return np.full(values.shape, 0.5)


def take_slice(field: ComplexField, axis: int | None = None, coordinate: float | None = None):
    """Return the 2D complex array to draw and the two in-plane axis indices."""
    g = field.grid
    if g.dim == 2:
        if axis is not None or coordinate is not None:
            raise DomainError("2D fields are rendered whole; no slice spec allowed")
        return field.values, (0, 1)
    if axis not in (0, 1, 2) or coordinate is None:
        raise DomainError("3D slices need an axis in {0, 1, 2} and a coordinate")
    ax = g.axis(axis)
    idx = int(np.argmin(np.abs(ax - coordinate)))
    if abs(ax[idx] - coordinate) > 1e-9 * g.spacing[axis]:
        near = sorted(np.argsort(np.abs(ax - coordinate))[:2])
        planes = ", ".join(repr(float(ax[i])) for i in near)
        raise DomainError(f"coordinate {coordinate} is not a grid plane on axis {axis}; "
                          f"nearest planes: {planes}")
    plane = np.take(field.values, idx, axis=axis)
    return plane, tuple(i for i in range(3) if i != axis)


def ppm_text(rgb: np.ndarray) -> str:
    h, w, _ = rgb.shape
    rows = [" ".join(" ".join(str(int(c)) for c in px) for px in row) for row in rgb]
    return f"P3\n{w} {h}\n255\n" + "\n".join(rows) + "\n"


def render_slices(field: ComplexField, part: str, path, axis: int | None = None,
                  coordinate: float | None = None) -> tuple[Path, Path]:
    """Write ``<path>.ppm`` and a ``<path>.txt`` sidecar; returns both paths.

    One pixel per grid point. The first in-plane axis runs left to right and the
    second bottom to top. The colour scale spans [min, max] of the selected part.
    """
    which = _PART_NAMES.get(part)
    if which is None:
        raise DomainError(f"part must be re, im or abs, got {part!r}")
    plane, (a, b) = take_slice(field, axis, coordinate)
    vals = {"re": plane.real, "im": plane.imag, "abs": np.abs(plane)}[which]
    lo, hi = float(vals.min()), float(vals.max())
    # rows = second in-plane axis, top row is its largest coordinate
    img = colormap(normalise(vals, lo, hi)).transpose(1, 0, 2)[::-1]
    path = Path(path)
    stem = path.with_suffix("") if path.suffix in (".ppm", ".txt") else path
    ppm, side = stem.with_suffix(".ppm"), stem.with_suffix(".txt")
    g = field.grid
    sidecar = [f"part {which}",
               f"min {lo:.17g}",
               f"max {hi:.17g}",
               f"width_axis {a} {g.axis_min[a]:.17g} {g.axis_max[a]:.17g}",
               f"height_axis {b} {g.axis_min[b]:.17g} {g.axis_max[b]:.17g}"]
    if g.dim == 3:
        sidecar.append(f"slice_axis {axis} {coordinate:.17g}")
    sidecar += [f"anchor {t:g} {r} {gg} {bb}" for t, (r, gg, bb) in ANCHORS]
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        ppm.write_text(ppm_text(img))
        side.write_text("\n".join(sidecar) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {stem}: {exc.strerror or exc}") from exc
    return ppm, side


def read_ppm(path) -> np.ndarray:
    """Parse a plain P3 file back into an (h, w, 3) uint8 array."""
    tokens = Path(path).read_text().split()
    if tokens[0] != "P3":
        raise DomainError(f"{path}: not a plain PPM")
    w, h = int(tokens[1]), int(tokens[2])
    px = np.array(tokens[4:4 + 3 * w * h], dtype=np.uint8)
    return px.reshape(h, w, 3)
