"""Sampling grids, direction sets and wavenumber sets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SamplingGrid:
    """Closed rectangular grid; both endpoints of every axis are grid points."""

    dim: int
    axis_min: tuple[float, ...]
    axis_max: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DomainError(f"grid dimension must be 2 or 3, got {self.dim}")
        for name in ("axis_min", "axis_max", "counts"):
            value = tuple(getattr(self, name))
            if len(value) != self.dim:
                raise DomainError(f"{name} needs {self.dim} entries, got {len(value)}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "axis_min", tuple(float(v) for v in self.axis_min))
        object.__setattr__(self, "axis_max", tuple(float(v) for v in self.axis_max))
        object.__setattr__(self, "counts", tuple(int(v) for v in self.counts))
        for lo, hi, n in zip(self.axis_min, self.axis_max, self.counts):
            if not lo < hi:
                raise DomainError(f"axis_min {lo} must be below axis_max {hi}")
            if n < 2:
                raise DomainError(f"each axis needs at least 2 points, got {n}")

    @classmethod
    def cube(cls, dim: int, half_width: float, count: int, center: Sequence[float] | None = None) -> "SamplingGrid":
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        return cls(dim, tuple(c - half_width), tuple(c + half_width), (count,) * dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for lo, hi, n in zip(self.axis_min, self.axis_max, self.counts))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def axis(self, i: int) -> np.ndarray:
        step = self.spacing[i]
        return self.axis_min[i] + np.arange(self.counts[i]) * step

    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.dim)]

    def point(self, index: Sequence[int]) -> np.ndarray:
        return np.array([self.axis_min[d] + index[d] * self.spacing[d] for d in range(self.dim)])

    def points(self) -> np.ndarray:
        """All grid points as an (N, dim) array in row-major multi-index order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def contains_ball(self, radius: float, center: Sequence[float] | None = None) -> bool:
        c = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        return all(lo <= ci - radius and ci + radius <= hi
                   for lo, hi, ci in zip(self.axis_min, self.axis_max, c))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "axis_min": list(self.axis_min),
                "axis_max": list(self.axis_max), "counts": list(self.counts)}


@dataclass(frozen=True)
class DirectionSet:
    dim: int
    dirs: np.ndarray
    weight: float

    def __post_init__(self):
        dirs = np.asarray(self.dirs, dtype=float)
        if dirs.ndim != 2 or dirs.shape[1] != self.dim:
            raise DomainError(f"directions must have shape (N, {self.dim}), got {dirs.shape}")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise DomainError("all directions must be unit vectors")
        object.__setattr__(self, "dirs", _frozen(dirs))

    def __len__(self) -> int:
        return self.dirs.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self), self.weight)


def uniform_circle_directions(n_theta: int) -> DirectionSet:
    """Equally spaced angles ``t_j = (j-1) 2pi / n_theta`` on the unit circle."""
    if n_theta < 1:
        raise DomainError(f"need at least one direction, got {n_theta}")
    t = np.arange(n_theta) * (2 * np.pi / n_theta)
    dirs = np.stack([np.cos(t), np.sin(t)], axis=1)
    return DirectionSet(2, dirs, 2 * np.pi / n_theta)


def fibonacci_sphere_directions(L: int) -> DirectionSet:
    """Fibonacci lattice on the unit sphere, index l = 1..L, uniform weight 4pi/L.

    The last point (l = L) is the south pole; there is no point at the north pole.
    """
    if L < 1:
        raise DomainError(f"need at least one lattice point, got {L}")
    ell = np.arange(1, L + 1, dtype=float)
    x3 = 1.0 - 2.0 * ell / L
    rho = np.sqrt(np.clip(1.0 - x3 * x3, 0.0, None))
    angle = (np.sqrt(5.0) - 1.0) * np.pi * ell
    dirs = np.stack([rho * np.cos(angle), rho * np.sin(angle), x3], axis=1)
    return DirectionSet(3, dirs, 4 * np.pi / L)


def directions_for(dim: int, count: int) -> DirectionSet:
    if dim == 2:
        return uniform_circle_directions(count)
    if dim == 3:
        return fibonacci_sphere_directions(count)
    raise DomainError(f"dimension must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class WavenumberSet:
    k_min: float
    k_max: float
    n_k: int
    values: np.ndarray = field(repr=False)
    dk: float

    def __len__(self) -> int:
        return self.n_k


def make_wavenumbers(k_min: float, k_max: float, n_k: int) -> WavenumberSet:
    """Equidistant wavenumbers ``k_m = k_min + (m-1) dk`` with both endpoints included."""
    if not k_min > 0:
        raise DomainError(f"k_min must be positive, got {k_min}")
    if not k_max > k_min:
        raise DomainError(f"k_max ({k_max}) must exceed k_min ({k_min})")
    if n_k < 2:
        raise DomainError(f"n_k must be at least 2, got {n_k}")
    k_min, k_max = float(k_min), float(k_max)
    dk = (k_max - k_min) / (n_k - 1)
    values = k_min + np.arange(n_k) * dk
    values[-1] = k_max
    return WavenumberSet(k_min, k_max, int(n_k), _frozen(values), dk)


def wavenumbers_from_step(k_min: float, k_max: float, dk: float) -> WavenumberSet:
    """Convenience for configurations quoted as (k_min, k_max, dk)."""
    n = (k_max - k_min) / dk
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise DomainError(f"dk={dk} does not divide [{k_min}, {k_max}]")
    return make_wavenumbers(k_min, k_max, int(round(n)) + 1)


class FieldKind(str, enum.Enum):
    FAR = "far"
    NEAR = "near"


@dataclass(frozen=True)
class MeasurementGeometry:
    kind: FieldKind
    radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FieldKind(self.kind))
        if self.kind is FieldKind.NEAR:
            if self.radius is None or not self.radius > 0:
                raise DomainError("near-field geometry needs a positive radius")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.radius is not None:
            raise DomainError("far-field geometry takes no radius")

    @classmethod
    def far(cls) -> "MeasurementGeometry":
        return cls(FieldKind.FAR)

    @classmethod
    def near(cls, radius: float) -> "MeasurementGeometry":
        return cls(FieldKind.NEAR, radius)

    def check_support(self, support_radius: float) -> None:
        if self.kind is FieldKind.NEAR and not self.radius > support_radius:
            raise DomainError(
                f"measurement radius {self.radius} must exceed the support radius {support_radius}")
