"""Run configuration: a JSON tree plus dotted ``key=value`` overrides, validated up front."""

from __future__ import annotations

import copy
import inspect
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError, QDSMError
from .forward import resolves
from .geometry import MeasurementGeometry, SamplingGrid, directions_for, make_wavenumbers
from .phantoms import PHANTOMS, ContrastPhantom, make_phantom

# dense LS collocation stores an N x N complex matrix on the support
LS_MAX_POINTS = 6000
PARTS = ("re", "im", "abs")


@dataclass
class PhantomSpec:
    name: str = "gaussian_bump"
    params: dict = field(default_factory=lambda: {"amplitude": 0.01, "center": [0.0, 0.0],
                                                  "a": 100.0})


@dataclass
class GeometrySpec:
    kind: str = "far"
    radius: float | None = None


@dataclass
class ForwardSpec:
    model: str = "born"
    half_width: float = 0.6
    count: int = 97
    tol: float = 1e-10


@dataclass
class NoiseSpec:
    delta: float = 0.0
    seed: int = 0


@dataclass
class SamplingSpec:
    half_width: float = 0.35
    count: int = 101


@dataclass
class RenderSpec:
    parts: list = field(default_factory=lambda: ["re", "im"])
    # 3D only: list of {"axis": i, "coordinate": c}; empty means the central plane of each axis
    slices: list = field(default_factory=list)


@dataclass
class RunConfig:
    phantom: PhantomSpec = field(default_factory=PhantomSpec)
    dim: int = 2
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    n_directions: int = 256
    k_min: float = 1.0
    k_max: float = 121.0
    n_k: int = 241
    forward: ForwardSpec = field(default_factory=ForwardSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    sampling: SamplingSpec = field(default_factory=SamplingSpec)
    render: RenderSpec = field(default_factory=RenderSpec)
    measurements: str | None = None
    output_dir: str = "qdsm_out"

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, tree: dict) -> "RunConfig":
        if not isinstance(tree, dict):
            raise ConfigError("configuration root must be an object")
        tree = copy.deepcopy(tree)
        nested = {"phantom": PhantomSpec, "geometry": GeometrySpec, "forward": ForwardSpec,
                  "noise": NoiseSpec, "sampling": SamplingSpec, "render": RenderSpec}
        kwargs = {}
        for key, value in tree.items():
            if key not in cls.__dataclass_fields__:
                raise ConfigError(f"unknown configuration key {key!r}")
            if key in nested:
                if not isinstance(value, dict):
                    raise ConfigError(f"{key} must be an object")
                sub = nested[key]
                extra = set(value) - set(sub.__dataclass_fields__)
                if extra:
                    raise ConfigError(f"unknown keys in {key}: {sorted(extra)}")
                value = sub(**value)
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path, overrides=()) -> "RunConfig":
        try:
            tree = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        for item in overrides:
            apply_override(tree, item)
        cfg = cls.from_dict(tree)
        cfg.validate()
        return cfg

    # -- derived objects ----------------------------------------------------

    def build_phantom(self) -> ContrastPhantom:
        params = dict(self.phantom.params)
        factory = PHANTOMS.get(self.phantom.name)
        if factory is not None and "dim" in inspect.signature(factory).parameters:
            params.setdefault("dim", self.dim)
        return make_phantom(self.phantom.name, **params)

    def build_geometry(self) -> MeasurementGeometry:
        if self.geometry.kind == "near":
            return MeasurementGeometry.near(self.geometry.radius)
        return MeasurementGeometry.far()

    def build_directions(self):
        return directions_for(self.dim, self.n_directions)

    def build_wavenumbers(self):
        return make_wavenumbers(self.k_min, self.k_max, self.n_k)

    def forward_grid(self) -> SamplingGrid:
        return SamplingGrid.cube(self.dim, self.forward.half_width, self.forward.count)

    def sampling_grid(self) -> SamplingGrid:
        return SamplingGrid.cube(self.dim, self.sampling.half_width, self.sampling.count)

    def measurements_path(self) -> Path:
        if self.measurements:
            return Path(self.measurements)
        return Path(self.output_dir) / "measurements.bin"

    # -- validation -----------------------------------------------------------

    def validate(self) -> None:
        """Raise ConfigError for the first precondition any later stage would reject."""
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        def number(name, value):
            need(isinstance(value, (int, float)) and not isinstance(value, bool)
                 and math.isfinite(value), f"{name} must be a finite number, got {value!r}")

        def integer(name, value, low):
            need(isinstance(value, int) and not isinstance(value, bool) and value >= low,
                 f"{name} must be an integer >= {low}, got {value!r}")

        need(self.dim in (2, 3), f"dim must be 2 or 3, got {self.dim!r}")
        need(isinstance(self.phantom.name, str) and self.phantom.name in PHANTOMS,
             f"phantom.name must be one of {sorted(PHANTOMS)}, got {self.phantom.name!r}")
        need(isinstance(self.phantom.params, dict), "phantom.params must be an object")
        try:
            ph = self.build_phantom()
        except (QDSMError, TypeError, ValueError) as exc:
            raise ConfigError(f"phantom {self.phantom.name!r}: {exc}") from exc
        need(ph.dim == self.dim, f"phantom {self.phantom.name!r} is {ph.dim}D but dim is {self.dim}")

        need(self.geometry.kind in ("far", "near"),
             f"geometry.kind must be 'far' or 'near', got {self.geometry.kind!r}")
        if self.geometry.kind == "near":
            number("geometry.radius", self.geometry.radius)
            need(self.geometry.radius > ph.support_radius,
                 f"geometry.radius {self.geometry.radius} must exceed the phantom support "
                 f"radius {ph.support_radius:.6g}")
        else:
            need(self.geometry.radius is None, "geometry.radius is only allowed for near fields")

        integer("n_directions", self.n_directions, self.dim)
        number("k_min", self.k_min)
        number("k_max", self.k_max)
        need(self.k_min > 0, f"k_min must be positive, got {self.k_min}")
        need(self.k_max > self.k_min, f"k_max ({self.k_max}) must exceed k_min ({self.k_min})")
        integer("n_k", self.n_k, 2)

        fw = self.forward
        need(fw.model in ("born", "ls"), f"forward.model must be 'born' or 'ls', got {fw.model!r}")
        number("forward.half_width", fw.half_width)
        integer("forward.count", fw.count, 2)
        need(fw.half_width > 0, "forward.half_width must be positive")
        number("forward.tol", fw.tol)
        need(0 < fw.tol < 1, f"forward.tol must lie in (0, 1), got {fw.tol}")
        grid = self.forward_grid()
        need(grid.contains_ball(ph.support_radius),
             f"forward grid of half width {fw.half_width} does not cover the support radius "
             f"{ph.support_radius:.6g}")
        need(resolves(grid, self.k_max),
             f"forward grid spacing {max(grid.spacing):.4g} is too coarse for k_max={self.k_max}; "
             f"need spacing < pi/(2 k_max) = {math.pi / (2 * self.k_max):.4g}")
        if fw.model == "ls":
            need(grid.size <= LS_MAX_POINTS,
                 f"forward.model 'ls' is limited to {LS_MAX_POINTS} grid points, got {grid.size}")

        number("noise.delta", self.noise.delta)
        need(self.noise.delta >= 0, f"noise.delta must be nonnegative, got {self.noise.delta}")
        integer("noise.seed", self.noise.seed, 0)

        number("sampling.half_width", self.sampling.half_width)
        need(self.sampling.half_width > 0, "sampling.half_width must be positive")
        integer("sampling.count", self.sampling.count, 2)

        need(isinstance(self.render.parts, list) and self.render.parts
             and all(p in PARTS for p in self.render.parts),
             f"render.parts must be a nonempty list drawn from {PARTS}")
        need(isinstance(self.render.slices, list), "render.slices must be a list")
        sgrid = self.sampling_grid()
        for s in self.render.slices:
            need(self.dim == 3, "render.slices applies to 3D runs only")
            need(isinstance(s, dict) and set(s) == {"axis", "coordinate"},
                 "each slice needs exactly 'axis' and 'coordinate'")
            need(s["axis"] in (0, 1, 2), f"slice axis must be 0, 1 or 2, got {s['axis']!r}")
            number("slice coordinate", s["coordinate"])
            need(_on_grid(sgrid, s["axis"], s["coordinate"]),
                 f"slice coordinate {s['coordinate']} is not a plane of the sampling grid")
        need(isinstance(self.output_dir, str) and self.output_dir, "output_dir must be a path")
        need(self.measurements is None or isinstance(self.measurements, str),
             "measurements must be a path or null")


def _on_grid(grid: SamplingGrid, axis: int, coord: float) -> bool:
    ax = grid.axis(axis)
    return bool(abs(ax - coord).min() <= 1e-9 * grid.spacing[axis])


def parse_value(text: str):
    """JSON literal when possible (numbers, lists, null, booleans), else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(tree: dict, item: str) -> None:
    """Apply ``a.b.c=value`` to a nested dict in place."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"bad override key {key!r}")
    node = tree
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"override {key!r} descends into non-object {p!r}")
        node = nxt
    node[parts[-1]] = parse_value(raw)
