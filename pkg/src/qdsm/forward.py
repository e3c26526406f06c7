"""Synthetic backscattering data.

Two forward models are provided:

* Born: midpoint quadrature of the linearised far/near-field integrals on a
  forward raster. This is the model class the indicators invert.
* Lippmann-Schwinger: a dense collocation of the volume integral equation
  solved by GMRES, used to measure how far the Born model is from exact data.

The forward grid is always a separate object from the inversion grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.sparse.linalg import gmres

from ._parallel import chunks, ordered_map
from .errors import DomainError, SolverError
from .geometry import (DirectionSet, FieldKind, MeasurementGeometry, SamplingGrid,
                       WavenumberSet)
from .phantoms import ComplexField, ContrastPhantom, rasterize
from .specialfun import gamma_n, hankel0_h1, phi_of_distance, self_cell_integral

# forward points handled per block; fixed so results do not depend on thread count
_POINT_BLOCK = 4096
_DIR_BLOCK = 16
# re-anchor the phase recurrence with an exact exponential this often
_REANCHOR = 32


@dataclass(frozen=True)
class MeasurementSet:
    """Backscattering samples; ``data[j, m]`` belongs to direction j and wavenumber m."""

    geometry: MeasurementGeometry
    directions: DirectionSet
    wavenumbers: WavenumberSet
    data: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        expected = (len(self.directions), len(self.wavenumbers))
        if data.shape != expected:
            raise DomainError(f"data has shape {data.shape}, expected {expected}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.directions.dim

    @property
    def kind(self) -> FieldKind:
        return self.geometry.kind

    def with_data(self, data, **changes) -> "MeasurementSet":
        return replace(self, data=data, **changes)


def _support(q_raster: ComplexField):
    """Grid points where the contrast is nonzero, their values, and the cell volume."""
    mask = q_raster.flat != 0
    pts = q_raster.grid.points()[mask]
    return pts, q_raster.flat[mask], q_raster.grid.cell_volume


def _check_k(k):
    if not np.all(np.asarray(k) > 0):
        raise DomainError(f"wavenumbers must be positive, got {k}")


def born_far_backscatter(q_raster: ComplexField, theta, k: float) -> complex:
    """k^2 gamma_n(k) sum_y q(y) e^{2ik theta.y} dV, the Born far field at x = -theta."""
    _check_k(k)
    dim = q_raster.grid.dim
    theta = np.asarray(theta, dtype=float)
    pts, qv, dv = _support(q_raster)
    if len(qv) == 0:
        return 0j
    s = np.sum(qv * np.exp(2j * k * (pts @ theta))) * dv
    return complex(k * k * gamma_n(k, dim) * s)


def born_far_closure(q_raster: ComplexField):
    """``f(thetas, k)`` returning Born far-field backscattering for each row of ``thetas``."""
    pts, qv, dv = _support(q_raster)
    dim = q_raster.grid.dim

    def f(thetas, k):
        _check_k(k)
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if len(qv) == 0:
            return np.zeros(len(thetas), dtype=complex)
        s = np.exp(2j * k * (thetas @ pts.T)) @ qv * dv
        return k * k * gamma_n(k, dim) * s

    return f


def gaussian_far_closure(amplitude: complex, a: float, center, dim: int):
    """Closed-form Born far field of ``amplitude * exp(-a|y - center|^2)``."""
    c = np.asarray(center, dtype=float)

    def f(thetas, k):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        return (k * k * gamma_n(k, dim) * complex(amplitude) * (np.pi / a) ** (dim / 2)
                * np.exp(-k * k / a) * np.exp(2j * k * (thetas @ c)))

    return f


def _check_near_point(q_raster: ComplexField, x, support_radius=None):
    R = float(np.linalg.norm(x))
    pts, _, _ = _support(q_raster)
    reach = support_radius
    if reach is None:
        reach = float(np.max(np.linalg.norm(pts, axis=1))) if len(pts) else 0.0
    if not R > reach:
        raise DomainError(f"measurement point at radius {R} lies inside the support ball (radius {reach})")
    return R


def born_near_backscatter(q_raster: ComplexField, x, k: float, support_radius=None) -> complex:
    """k^2 sum_y q(y) Phi(x, y, k)^2 dV, the Born backscattered field with source = receiver = x."""
    _check_k(k)
    dim = q_raster.grid.dim
    x = np.asarray(x, dtype=float)
    _check_near_point(q_raster, x, support_radius)
    pts, qv, dv = _support(q_raster)
    if len(qv) == 0:
        return 0j
    r = np.linalg.norm(pts - x, axis=1)
    phi = phi_of_distance(r, k, dim)
    return complex(k * k * np.sum(qv * phi * phi) * dv)


def _recurrence_sums(phase_dist, weights, ks: WavenumberSet, factor: float):
    """S[j, m] = sum_y weights[y] exp(i factor k_m phase_dist[j, y]) for equidistant k_m."""
    n_dir = phase_dist.shape[0]
    out = np.zeros((n_dir, len(ks)), dtype=complex)
    kv = ks.values
    step = np.exp(1j * factor * ks.dk * phase_dist)
    cur = None
    for m in range(len(kv)):
        if m % _REANCHOR == 0:
            cur = np.exp(1j * factor * kv[m] * phase_dist)
        else:
            cur *= step
        out[:, m] = cur @ weights
    return out


def born_far_matrix(q_raster: ComplexField, dirs: DirectionSet, ks: WavenumberSet) -> np.ndarray:
    """Born far-field backscattering matrix of shape (N_theta, N_k)."""
    _check_k(ks.values)
    dim = q_raster.grid.dim
    pts, qv, dv = _support(q_raster)
    out = np.zeros((len(dirs), len(ks)), dtype=complex)
    if len(qv) == 0:
        return out
    blocks = chunks(len(dirs), _DIR_BLOCK)

    def work(block):
        a, b = block
        acc = np.zeros((b - a, len(ks)), dtype=complex)
        for s, e in chunks(len(qv), _POINT_BLOCK):
            acc += _recurrence_sums(dirs.dirs[a:b] @ pts[s:e].T, qv[s:e], ks, 2.0)
        return acc

    for (a, b), acc in zip(blocks, ordered_map(work, blocks)):
        out[a:b] = acc
    kv = ks.values
    return out * (kv * kv * gamma_n(kv, dim) * dv)[None, :]


def born_near_matrix(q_raster: ComplexField, dirs: DirectionSet, ks: WavenumberSet,
                     radius: float, support_radius=None) -> np.ndarray:
    """Born near-field backscattering matrix for transceivers at radius * theta_j."""
    _check_k(ks.values)
    dim = q_raster.grid.dim
    pts, qv, dv = _support(q_raster)
    out = np.zeros((len(dirs), len(ks)), dtype=complex)
    if len(qv) == 0:
        return out
    _check_near_point(q_raster, radius * dirs.dirs[0], support_radius)
    blocks = chunks(len(dirs), _DIR_BLOCK)
    kv = ks.values

    def work(block):
        a, b = block
        xs = radius * dirs.dirs[a:b]
        acc = np.zeros((b - a, len(ks)), dtype=complex)
        for s, e in chunks(len(qv), _POINT_BLOCK):
            r = np.linalg.norm(xs[:, None, :] - pts[None, s:e, :], axis=2)
            if dim == 3:
                acc += _near3d(r, qv[s:e], ks)
            else:
                w = qv[s:e]
                for m, k in enumerate(kv):
                    h = hankel0_h1(k * r)
                    acc[:, m] += (h * h) @ w * (-1.0 / 16.0)
        return acc

    for (a, b), acc in zip(blocks, ordered_map(work, blocks)):
        out[a:b] = acc
    return out * (kv * kv * dv)[None, :]


def _near3d(r, qv, ks):
    # Phi^2 = e^{2ikr} / (16 pi^2 r^2)
    n_dir = r.shape[0]
    out = np.zeros((n_dir, len(ks)), dtype=complex)
    amp = 1.0 / (16.0 * np.pi**2 * r * r)
    step = np.exp(2j * ks.dk * r)
    cur = None
    for m, k in enumerate(ks.values):
        if m % _REANCHOR == 0:
            cur = np.exp(2j * k * r)
        else:
            cur *= step
        out[:, m] = (cur * amp) @ qv
    return out


def _check_forward_grid(phantom: ContrastPhantom, grid: SamplingGrid):
    if grid.dim != phantom.dim:
        raise DomainError(f"forward grid is {grid.dim}D but the phantom is {phantom.dim}D")
    if not grid.contains_ball(phantom.support_radius):
        raise DomainError(
            f"forward grid {grid.axis_min}..{grid.axis_max} does not cover the support ball "
            f"of radius {phantom.support_radius}")


def resolves(grid: SamplingGrid, k_max: float) -> bool:
    """True when the midpoint rule on ``grid`` samples e^{2ik theta.y} above Nyquist at k_max."""
    return 2.0 * k_max * max(grid.spacing) < np.pi


def synthesize(phantom: ContrastPhantom, geometry: MeasurementGeometry, dirs: DirectionSet,
               ks: WavenumberSet, forward_grid: SamplingGrid, model: str = "born",
               **ls_options) -> MeasurementSet:
    """Fill the (N_theta, N_k) backscattering matrix for ``phantom``."""
    if dirs.dim != phantom.dim:
        raise DomainError("direction set and phantom dimensions differ")
    _check_forward_grid(phantom, forward_grid)
    geometry.check_support(phantom.support_radius)
    if not resolves(forward_grid, ks.k_max):
        warnings.warn(f"forward grid spacing {max(forward_grid.spacing):.4g} aliases the phase "
                      f"at k_max={ks.k_max}; data will be under-resolved", RuntimeWarning,
                      stacklevel=2)
    q_raster = rasterize(phantom, forward_grid)
    if model == "born":
        if geometry.kind is FieldKind.FAR:
            data = born_far_matrix(q_raster, dirs, ks)
        else:
            data = born_near_matrix(q_raster, dirs, ks, geometry.radius, phantom.support_radius)
    elif model in ("ls", "lippmann_schwinger"):
        disc = LSDiscretization.from_raster(q_raster)
        data = ls_matrix(disc, geometry, dirs, ks, **ls_options)
    else:
        raise DomainError(f"unknown forward model {model!r}")
    return MeasurementSet(geometry, dirs, ks, data,
                          metadata={"phantom": phantom.label, "model": model,
                                    "forward_grid": forward_grid.to_dict()})


def add_noise(m: MeasurementSet, delta: float, seed=None) -> MeasurementSet:
    """Add complex Gaussian noise G scaled so that ||noise||_F = delta ||data||_F exactly."""
    if not delta >= 0:
        raise DomainError(f"noise level must be nonnegative, got {delta}")
    data = np.array(m.data)
    if delta > 0:
        rng = np.random.default_rng(seed)
        g = rng.standard_normal(data.shape) + 1j * rng.standard_normal(data.shape)
        norm = np.linalg.norm(data)
        if norm > 0:
            data = data + (delta * norm / np.linalg.norm(g)) * g
    return m.with_data(data, noise_level=float(delta), seed=seed)


# ---------------------------------------------------------------------------
# Lippmann-Schwinger reference solver


@dataclass(frozen=True)
class PlaneWave:
    direction: np.ndarray

    def __call__(self, points, k, dim):
        return np.exp(1j * k * (points @ np.asarray(self.direction, dtype=float)))


@dataclass(frozen=True)
class PointSource:
    source: np.ndarray

    def __call__(self, points, k, dim):
        r = np.linalg.norm(points - np.asarray(self.source, dtype=float), axis=1)
        return phi_of_distance(r, k, dim)


Incident = Union[PlaneWave, PointSource]


@dataclass(frozen=True)
class LSDiscretization:
    """Collocation of (I - k^2 T_q) on the forward raster.

    Off-diagonal kernel entries use midpoint values Phi(y_i, y_j) dV; the
    self-cell entry is the exact integral of Phi over a disk/ball with the cell's
    area/volume.
    """

    raster: ComplexField
    points: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    cell_volume: float

    @classmethod
    def from_raster(cls, raster: ComplexField) -> "LSDiscretization":
        mask = raster.flat != 0
        return cls(raster, raster.grid.points()[mask], raster.flat[mask],
                   np.flatnonzero(mask), raster.grid.cell_volume)

    @property
    def dim(self) -> int:
        return self.raster.grid.dim

    def kernel(self, k: float) -> np.ndarray:
        """Matrix K with (T_q u)(y_i) ~ sum_j K_ij q_j u_j on the support points."""
        diff = self.points[:, None, :] - self.points[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=2))
        n = len(self.points)
        np.fill_diagonal(r, 1.0)
        kmat = phi_of_distance(r, k, self.dim) * self.cell_volume
        kmat[np.arange(n), np.arange(n)] = self_cell_integral(k, self.cell_volume, self.dim)
        return kmat

    def system(self, k: float) -> np.ndarray:
        kmat = self.kernel(k)
        return np.eye(len(self.q), dtype=complex) - (k * k) * kmat * self.q[None, :]


def _gmres_solve(a: np.ndarray, b: np.ndarray, tol: float, maxiter: int):
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0.0
    x, info = gmres(a, b, rtol=tol * 1e-2, atol=0.0, restart=min(len(b), 200), maxiter=maxiter)
    res = np.linalg.norm(a @ x - b) / bnorm
    if res > tol:
        raise SolverError(f"GMRES stopped at relative residual {res:.3e} (info={info})", residual=res)
    return x, res


def _solve_support(disc: LSDiscretization, incident: Incident, k: float, tol: float = 1e-10,
                   maxiter: int = 50, system=None):
    _check_k(k)
    u_inc = incident(disc.points, k, disc.dim)
    if len(disc.q) == 0:
        return u_inc, 0.0
    a = disc.system(k) if system is None else system
    return _gmres_solve(a, u_inc, tol, maxiter)


def ls_total_field(disc: LSDiscretization, incident: Incident, k: float,
                   tol: float = 1e-10, maxiter: int = 50) -> ComplexField:
    """Total field u^t = (I - k^2 T_q)^{-1} u^inc on every forward-grid point."""
    u_sup, _ = _solve_support(disc, incident, k, tol, maxiter)
    grid = disc.raster.grid
    all_pts = grid.points()
    u = np.asarray(incident(all_pts, k, disc.dim), dtype=complex).copy()
    if len(disc.q) == 0:
        return ComplexField(grid, u)
    src = disc.q * u_sup
    for s, e in chunks(len(all_pts), 1024):
        diff = all_pts[s:e, None, :] - disc.points[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=2))
        self_hit = r == 0
        r[self_hit] = 1.0
        kmat = phi_of_distance(r, k, disc.dim) * disc.cell_volume
        kmat[self_hit] = self_cell_integral(k, disc.cell_volume, disc.dim)
        u[s:e] += k * k * (kmat @ src)
    return ComplexField(grid, u)


def ls_residual(disc: LSDiscretization, u: ComplexField, incident: Incident, k: float) -> float:
    """||u - u^inc - k^2 T_q u|| / ||u^inc|| on the support points."""
    u_sup = u.flat[disc.index]
    u_inc = incident(disc.points, k, disc.dim)
    if len(disc.q) == 0:
        return float(np.linalg.norm(u_sup - u_inc) / max(np.linalg.norm(u_inc), 1e-300))
    r = u_sup - u_inc - (k * k) * (disc.kernel(k) @ (disc.q * u_sup))
    return float(np.linalg.norm(r) / np.linalg.norm(u_inc))


def ls_backscatter(disc: LSDiscretization, geometry: MeasurementGeometry, where, k: float,
                   tol: float = 1e-10, system=None) -> complex:
    """Exact (LS) backscattering datum.

    Far field: ``where`` is the incident direction theta; returns u^inf(-theta, theta, k).
    Near field: ``where`` is the transceiver position x; returns u^s(x, x, k).
    """
    _check_k(k)
    if len(disc.q) == 0:
        return 0j
    where = np.asarray(where, dtype=float)
    dv = disc.cell_volume
    if geometry.kind is FieldKind.FAR:
        u, _ = _solve_support(disc, PlaneWave(where), k, tol, system=system)
        s = np.sum(disc.q * np.exp(1j * k * (disc.points @ where)) * u) * dv
        return complex(k * k * gamma_n(k, disc.dim) * s)
    r_max = float(np.max(np.linalg.norm(disc.points, axis=1)))
    if not np.linalg.norm(where) > r_max:
        raise DomainError("near-field transceiver must lie outside the contrast support")
    u, _ = _solve_support(disc, PointSource(where), k, tol, system=system)
    phi = phi_of_distance(np.linalg.norm(disc.points - where, axis=1), k, disc.dim)
    return complex(k * k * np.sum(disc.q * phi * u) * dv)


def ls_matrix(disc: LSDiscretization, geometry: MeasurementGeometry, dirs: DirectionSet,
              ks: WavenumberSet, tol: float = 1e-10) -> np.ndarray:
    """LS backscattering matrix; the dense system is assembled once per wavenumber."""
    out = np.zeros((len(dirs), len(ks)), dtype=complex)
    if len(disc.q) == 0:
        return out

    def column(m):
        k = ks.values[m]
        a = disc.system(k)
        col = np.empty(len(dirs), dtype=complex)
        for j, theta in enumerate(dirs.dirs):
            where = theta if geometry.kind is FieldKind.FAR else geometry.radius * theta
            col[j] = ls_backscatter(disc, geometry, where, k, tol, system=a)
        return col

    for m, col in enumerate(ordered_map(column, range(len(ks)))):
        out[:, m] = col
    return out
