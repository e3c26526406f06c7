"""Analytic contrast functions and their rasterization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .geometry import SamplingGrid

# Envelope level (relative to peak) at which Gaussian terms are treated as zero.
ENVELOPE_CUTOFF = 1e-14


@dataclass(frozen=True)
class ComplexField:
    """Complex values on a SamplingGrid; ``values`` has shape ``grid.shape``."""

    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise DomainError(f"field has {values.size} values but the grid has {self.grid.size} points")
        object.__setattr__(self, "values", values.reshape(self.grid.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def part(self, which: str) -> np.ndarray:
        if which in ("re", "real"):
            return self.values.real
        if which in ("im", "imag"):
            return self.values.imag
        if which == "abs":
            return np.abs(self.values)
        if which == "complex":
            return self.values
        raise DomainError(f"unknown field part {which!r}")

    def __mul__(self, a) -> "ComplexField":
        return ComplexField(self.grid, self.values * a)

    __rmul__ = __mul__

    def __add__(self, other: "ComplexField") -> "ComplexField":
        if other.grid != self.grid:
            raise DomainError("fields live on different grids")
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return self + (-1.0) * other


@dataclass(frozen=True)
class ContrastPhantom:
    """Pointwise contrast q with a ball of radius ``support_radius`` containing its support.

    ``func`` maps an (N, dim) array of points to N complex values. Calling the
    phantom clamps everything outside the support ball to zero.
    """

    dim: int
    support_radius: float
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str = "phantom"
    metadata: dict = field(default_factory=dict, compare=False)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise DomainError(f"{self.label} is {self.dim}D, got points with {pts.shape[1]} coordinates")
        out = np.asarray(self.func(pts), dtype=complex)
        out = np.where(np.sum(pts * pts, axis=1) <= self.support_radius**2, out, 0.0)
        return complex(out[0]) if single else out

    def eval(self, points):
        return self(points)

    def __mul__(self, a) -> "ContrastPhantom":
        f = self.func
        return ContrastPhantom(self.dim, self.support_radius, lambda p: a * f(p),
                               f"{a}*{self.label}", dict(self.metadata))

    __rmul__ = __mul__

    def __add__(self, other: "ContrastPhantom") -> "ContrastPhantom":
        if other.dim != self.dim:
            raise DomainError("cannot add phantoms of different dimension")
        # clamp each summand to its own support before adding
        return ContrastPhantom(self.dim, max(self.support_radius, other.support_radius),
                               lambda p: self(p) + other(p), f"{self.label}+{other.label}")


def _gaussian_radius(decay: float, amplitude_factor: float = 1.0) -> float:
    return math.sqrt(math.log(amplitude_factor / ENVELOPE_CUTOFF) / decay)


def zero_phantom(dim: int) -> ContrastPhantom:
    return ContrastPhantom(dim, 0.0, lambda p: np.zeros(len(p), dtype=complex), "zero")


def gaussian_bump(dim: int, amplitude: complex, center: Sequence[float], a: float) -> ContrastPhantom:
    """q(x) = amplitude * exp(-a |x - center|^2).

    Its Fourier integral is closed form, which makes it the oracle phantom:
    int q(y) e^{i xi.y} dy = amplitude (pi/a)^{n/2} e^{-|xi|^2/(4a)} e^{i xi.center}.
    """
    if not a > 0:
        raise DomainError(f"decay a must be positive, got {a}")
    if dim not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {dim}")
    c = np.asarray(center, dtype=float)
    if c.shape != (dim,):
        raise DomainError(f"center must have {dim} coordinates")
    amp = complex(amplitude)

    def f(p):
        d = p - c
        return amp * np.exp(-a * np.sum(d * d, axis=1))

    radius = float(np.linalg.norm(c)) + _gaussian_radius(a)
    return ContrastPhantom(dim, radius, f, "gaussian_bump",
                           {"amplitude": [amp.real, amp.imag], "center": c.tolist(), "a": a})


def gaussian_fourier(amplitude: complex, a: float, center, xi) -> np.ndarray:
    """Closed-form int amplitude e^{-a|y-c|^2} e^{i xi.y} dy for rows of ``xi``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    n = xi.shape[1]
    c = np.asarray(center, dtype=float)
    return (complex(amplitude) * (np.pi / a) ** (n / 2)
            * np.exp(-np.sum(xi * xi, axis=1) / (4 * a)) * np.exp(1j * xi @ c))


def complex_mountain_2d() -> ContrastPhantom:
    """Smooth complex contrast with a sign-changing real part and four imaginary bumps."""

    def f(p):
        x1, x2 = p[:, 0], p[:, 1]
        re = (1.1e-2 * np.exp(-200 * ((x1 - 0.01) ** 2 + (x2 - 0.12) ** 2))
              - (x2**2 - x1**2) * np.exp(-90 * (x1**2 + x2**2)))
        im = 1e-2 * (0.9 * np.exp(-100 * ((x1 - 0.2) ** 2 + (x2 - 0.2) ** 2))
                     + 1.1 * np.exp(-250 * ((x1 + 0.15) ** 2 + (x2 - 0.15) ** 2))
                     + 1.3 * np.exp(-150 * ((x1 + 0.2) ** 2 + 2 * (x2 + 0.2) ** 2))
                     + np.exp(-50 * ((x1 - 0.25) ** 2 + x2**2)))
        return re + 1j * im

    # slowest-decaying term is centred at (0.25, 0) with decay 50
    radius = 0.25 + _gaussian_radius(50.0)
    return ContrastPhantom(2, radius, f, "complex_mountain_2d")


_BOX_LO, _BOX_HI, _BOX_HALF = -3 / 16, 1 / 4, 1 / 16


def _in_box(p, long_axis):
    inside = np.ones(len(p), dtype=bool)
    for ax in range(3):
        lo, hi = (_BOX_LO, _BOX_HI) if ax == long_axis else (-_BOX_HALF, _BOX_HALF)
        inside &= (p[:, ax] >= lo) & (p[:, ax] <= hi)
    return inside


def cross_3d(hollow: bool = False) -> ContrastPhantom:
    """Three perpendicular bars (length 7/16, width 1/8) with block-wise constant values.

    Solid: 8e-3 on bar1\\bar2, 6e-3 on bar2\\bar1, 1e-2 on bar3.
    Hollow: the centre cube bar1 & bar2 is removed from bar3.
    """

    def f(p):
        b1, b2, b3 = _in_box(p, 0), _in_box(p, 1), _in_box(p, 2)
        q = 8e-3 * (b1 & ~b2) + 6e-3 * (b2 & ~b1)
        if hollow:
            q = q + 1e-2 * (b3 & ~(b1 & b2))
        else:
            q = q + 1e-2 * b3
        return q.astype(complex)

    radius = math.sqrt(_BOX_HI**2 + 2 * _BOX_HALF**2)
    return ContrastPhantom(3, radius, f, "cross_3d_hollow" if hollow else "cross_3d",
                           {"hollow": bool(hollow)})


def cross_3d_mass(hollow: bool = False) -> float:
    """Exact integral of the cross contrast from the box volumes."""
    bar = (_BOX_HI - _BOX_LO) * (2 * _BOX_HALF) ** 2
    centre = (2 * _BOX_HALF) ** 3
    arm = bar - centre
    return 8e-3 * arm + 6e-3 * arm + 1e-2 * (arm if hollow else bar)


def smooth_3d(scale: float = 1e-2) -> ContrastPhantom:
    """Smooth complex 3D contrast C_s * q*(x).

    The source formula writes ``10(x/5 - x1^3 - x2^5)`` with a bare ``x``; it is
    read here as ``x1/5`` (recorded in ``metadata['x_over_5']``).
    """
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")

    def f(p):
        x1, x2, x3 = p[:, 0], p[:, 1], p[:, 2]
        re = (3 * (1 - x1) ** 2 * np.exp(-500 * x1**2 - 800 * (x2 - 0.1) ** 2 - 600 * x3**2)
              - 10 * (x1 / 5 - x1**3 - x2**5) * np.exp(-400 * (x1 - 0.1) ** 2 - 300 * x2**2 - 500 * x3**2)
              - np.exp(-450 * (x1 - 0.1) ** 2 - 600 * x2**2 - 700 * x3**2) / 3)
        im = (3 * np.exp(-300 * x1**2 - 200 * (x2 + 0.05) ** 2 - 350 * x3**2)
              + 5 * np.exp(-180 * (x1 - 0.1) ** 2 - 350 * x2**2 - 250 * x3**2))
        return scale * (re + 1j * im)

    # slowest term: imaginary bump at (0.1, 0, 0) with decay 180 along x1
    radius = 0.1 + _gaussian_radius(180.0, 5.0)
    return ContrastPhantom(3, radius, f, "smooth_3d", {"scale": scale, "x_over_5": "x1/5"})


# Modified Shepp-Logan table: value, semi-axis a, semi-axis b, x0, y0, angle (deg).
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


def shepp_logan_2d(scale: float = 1e-2, extent: float = 0.6) -> ContrastPhantom:
    """Modified Shepp-Logan head scaled so the outer ellipse reaches ``extent`` (<= 0.7).

    Intensities lie in [0, 1] before multiplication by ``scale``.
    """
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    if not 0 < extent <= 0.7:
        raise DomainError(f"extent must lie in (0, 0.7], got {extent}")
    s = extent / 0.92

    def f(p):
        x, y = p[:, 0] / s, p[:, 1] / s
        out = np.zeros(len(p))
        for val, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
            th = math.radians(deg)
            c, sn = math.cos(th), math.sin(th)
            u = (x - x0) * c + (y - y0) * sn
            v = -(x - x0) * sn + (y - y0) * c
            out += val * ((u / a) ** 2 + (v / b) ** 2 <= 1.0)
        return scale * out

    return ContrastPhantom(2, extent, f, "shepp_logan_2d", {"scale": scale, "extent": extent})


def blocks_sparse_2d(scale: float = 1e-2) -> ContrastPhantom:
    """Corner/ball/sparse-blocks test object inside [-0.7, 0.7]^2.

    * an L-shaped corner whose value falls linearly from ``scale`` at the corner
      to ``scale/2`` at the arm tips,
    * a disk of constant value ``0.8 scale``,
    * a broken corner of five small squares and a thin bar at ``0.6 scale``.
    """

    def f(p):
        x, y = p[:, 0], p[:, 1]
        q = np.zeros(len(p))
        arm1 = (x >= -0.55) & (x <= -0.15) & (y >= -0.55) & (y <= -0.45)
        arm2 = (x >= -0.55) & (x <= -0.45) & (y >= -0.55) & (y <= -0.15)
        t = np.clip(((x + 0.55) + (y + 0.55)) / 0.4, 0.0, 1.0)
        q = np.where(arm1 | arm2, scale * (1.0 - 0.5 * t), q)
        disk = (x - 0.25) ** 2 + (y - 0.25) ** 2 <= 0.15**2
        q = np.where(disk, 0.8 * scale, q)
        for cx, cy in ((0.15, -0.5), (0.27, -0.5), (0.39, -0.5), (0.5, -0.38), (0.5, -0.26)):
            sq = (np.abs(x - cx) <= 0.035) & (np.abs(y - cy) <= 0.035)
            q = np.where(sq, 0.6 * scale, q)
        bar = (np.abs(x - 0.5) <= 0.01) & (y >= -0.18) & (y <= 0.0)
        q = np.where(bar, 0.6 * scale, q)
        return q.astype(complex)

    radius = math.hypot(0.55, 0.55) + 1e-9
    return ContrastPhantom(2, radius, f, "blocks_sparse_2d", {"scale": scale})


def rasterize(phantom: ContrastPhantom, grid: SamplingGrid) -> ComplexField:
    """Sample the phantom at every grid point (no cell averaging)."""
    if grid.dim != phantom.dim:
        raise DomainError(f"grid is {grid.dim}D but phantom {phantom.label} is {phantom.dim}D")
    pts = grid.points()
    out = np.empty(len(pts), dtype=complex)
    chunk = 1 << 18
    for s in range(0, len(pts), chunk):
        out[s:s + chunk] = phantom(pts[s:s + chunk])
    return ComplexField(grid, out)


PHANTOMS = {
    "zero": zero_phantom,
    "gaussian_bump": gaussian_bump,
    "complex_mountain_2d": complex_mountain_2d,
    "cross_3d": cross_3d,
    "smooth_3d": smooth_3d,
    "shepp_logan_2d": shepp_logan_2d,
    "blocks_sparse_2d": blocks_sparse_2d,
}


def make_phantom(name: str, **params) -> ContrastPhantom:
    try:
        factory = PHANTOMS[name]
    except KeyError:
        raise DomainError(f"unknown phantom {name!r}; choose from {sorted(PHANTOMS)}") from None
    if name == "gaussian_bump" and "amplitude" in params:
        amp = params["amplitude"]
        if isinstance(amp, (list, tuple)):
            params = dict(params, amplitude=complex(amp[0], amp[1]))
    return factory(**params)
