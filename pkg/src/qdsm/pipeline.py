"""End-to-end runs: rasterize, synthesize, add noise, invert, score, write artifacts.

Every artifact is listed in a JSON manifest with its sha256. Nothing time- or
host-dependent is written, so repeated runs of one config produce identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from .analysis import rel_errors
from .config import RunConfig
from .errors import QDSMError, StageError
from .fieldio import export_field, export_measurements, read_measurements
from .forward import MeasurementSet, add_noise, synthesize
from .inversion import indicator
from .phantoms import ComplexField, rasterize
from .render import render_slices

log = logging.getLogger(__name__)

ERROR_PARTS = ("complex", "re", "im")


def _stage(name, fn, *args, **kwargs):
    log.info("stage %s", name)
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (QDSMError, ValueError, ArithmeticError, OSError) as exc:
        raise StageError(name, exc) from exc


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _json_dump(obj, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _slice_specs(cfg: RunConfig, field: ComplexField):
    if cfg.dim == 2:
        return [(None, None, "")]
    specs = cfg.render.slices or [
        {"axis": ax, "coordinate": float(field.grid.axis(ax)[field.grid.counts[ax] // 2])}
        for ax in range(3)]
    return [(s["axis"], s["coordinate"], f"_ax{s['axis']}_{s['coordinate']:+.6f}") for s in specs]


def render_field(cfg: RunConfig, field: ComplexField, name: str) -> list[Path]:
    out = []
    img_dir = Path(cfg.output_dir) / "images"
    for part in cfg.render.parts:
        for axis, coord, tag in _slice_specs(cfg, field):
            out += render_slices(field, part, img_dir / f"{name}_{part}{tag}", axis, coord)
    return out


def write_manifest(cfg: RunConfig, artifacts, name: str = "manifest.json", extra=None) -> dict:
    root = Path(cfg.output_dir)
    entries = []
    for p in sorted({Path(a) for a in artifacts}):
        entries.append({"path": p.relative_to(root).as_posix(), "sha256": sha256(p),
                        "bytes": p.stat().st_size})
    manifest = {"config": cfg.to_dict(), "artifacts": entries}
    if extra:
        manifest.update(extra)
    _json_dump(manifest, root / name)
    return manifest


# ---------------------------------------------------------------------------
# stages


def stage_truth(cfg: RunConfig) -> tuple[ComplexField, list[Path]]:
    phantom = _stage("phantom", cfg.build_phantom)
    truth = _stage("phantom", rasterize, phantom, cfg.sampling_grid())
    root = Path(cfg.output_dir)
    files = list(_stage("write", export_field, truth, root / "truth"))
    files += _stage("render", render_field, cfg, truth, "truth")
    return truth, files


def stage_measurements(cfg: RunConfig) -> tuple[MeasurementSet, list[Path]]:
    phantom = _stage("phantom", cfg.build_phantom)
    clean = _stage("synthesize", synthesize, phantom, cfg.build_geometry(), cfg.build_directions(),
                   cfg.build_wavenumbers(), cfg.forward_grid(), model=cfg.forward.model,
                   **({"tol": cfg.forward.tol} if cfg.forward.model == "ls" else {}))
    noisy = _stage("add_noise", add_noise, clean, cfg.noise.delta, cfg.noise.seed)
    files = list(_stage("write", export_measurements, noisy, Path(cfg.output_dir) / "measurements"))
    return noisy, files


def stage_reconstruction(cfg: RunConfig, m: MeasurementSet) -> tuple[ComplexField, list[Path]]:
    if m.dim != cfg.dim:
        raise StageError("indicator", ValueError(f"measurements are {m.dim}D, config is {cfg.dim}D"))
    rec = _stage("indicator", indicator, m, cfg.sampling_grid())
    files = list(_stage("write", export_field, rec, Path(cfg.output_dir) / "reconstruction"))
    files += _stage("render", render_field, cfg, rec, "reconstruction")
    return rec, files


def stage_errors(cfg: RunConfig, rec: ComplexField, truth: ComplexField) -> tuple[dict, Path]:
    reports = {p: _stage("rel_errors", rel_errors, rec, truth, p).to_dict() for p in ERROR_PARTS}
    path = _stage("write", _json_dump, reports, Path(cfg.output_dir) / "errors.json")
    return reports, path


# ---------------------------------------------------------------------------
# entry points


def run_phantom(cfg: RunConfig) -> dict:
    _, files = stage_truth(cfg)
    return write_manifest(cfg, files, "phantom_manifest.json")


def run_synthesize(cfg: RunConfig) -> dict:
    _, files = stage_measurements(cfg)
    return write_manifest(cfg, files, "synthesize_manifest.json")


def run_invert(cfg: RunConfig) -> dict:
    m = _stage("read", read_measurements, cfg.measurements_path())
    _, files = stage_reconstruction(cfg, m)
    return write_manifest(cfg, files, "invert_manifest.json")


def run_pipeline(cfg: RunConfig) -> dict:
    """synthesize -> add_noise -> indicator -> rel_errors, writing every artifact."""
    cfg.validate()
    files = [_json_dump(cfg.to_dict(), Path(cfg.output_dir) / "config.json")]
    truth, f = stage_truth(cfg)
    files += f
    m, f = stage_measurements(cfg)
    files += f
    rec, f = stage_reconstruction(cfg, m)
    files += f
    reports, path = stage_errors(cfg, rec, truth)
    files.append(path)
    return write_manifest(cfg, files, "manifest.json", {"errors": reports})
