"""Error metrics, norms, the wavenumber-truncation bound and low-frequency moments."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import DirectionSet, SamplingGrid
from .phantoms import ComplexField
from .specialfun import gamma_n


@dataclass
class ErrorReport:
    rel_l2: float
    rel_linf: float
    truncation_bound: float | None = None
    absolute: bool = False
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"rel_l2": self.rel_l2, "rel_linf": self.rel_linf,
                "truncation_bound": self.truncation_bound, "absolute": self.absolute,
                "metadata": self.metadata}


def rel_errors(reconstruction: ComplexField, truth: ComplexField, part: str = "complex",
               **metadata) -> ErrorReport:
    """Relative l2 and max-norm errors of ``reconstruction`` against ``truth``.

    When ``truth`` vanishes identically the errors are absolute and ``absolute`` is set.
    """
    if reconstruction.grid != truth.grid:
        raise DomainError("reconstruction and truth live on different grids")
    rec = reconstruction.part(part)
    ref = truth.part(part)
    diff = np.abs(rec - ref).ravel()
    n2, ninf = np.linalg.norm(ref), np.max(np.abs(ref))
    if n2 == 0:
        return ErrorReport(float(np.linalg.norm(diff)), float(diff.max(initial=0.0)),
                           absolute=True, metadata=dict(metadata, part=part))
    return ErrorReport(float(np.linalg.norm(diff) / n2), float(diff.max() / ninf),
                       metadata=dict(metadata, part=part))


def l2_norm(f: ComplexField) -> float:
    return float(math.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def _boundary_max(values: np.ndarray) -> float:
    out = 0.0
    for ax in range(values.ndim):
        for idx in (0, -1):
            out = max(out, float(np.max(np.abs(np.take(values, idx, axis=ax)))))
    return out


def h2_norm(f: ComplexField, pad_factor: int = 2) -> float:
    """(2 pi)^{-n} ( int (1 + |xi|^2)^2 |f^(xi)|^2 dxi )^{1/2} via a zero-padded FFT.

    The field should vanish near the grid boundary; otherwise a warning is emitted
    because periodisation makes the result unreliable.
    """
    vals = f.values
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    if peak == 0:
        return 0.0
    if _boundary_max(vals) > 1e-8 * peak:
        warnings.warn("h2_norm: field does not decay at the grid boundary; norm unreliable",
                      stacklevel=2)
    h = f.grid.spacing
    shape = tuple(pad_factor * n for n in vals.shape)
    spec = np.fft.fftn(vals, s=shape, axes=tuple(range(len(shape)))) * f.grid.cell_volume
    xi2 = np.zeros(shape)
    for ax, (n, hx) in enumerate(zip(shape, h)):
        xi = 2 * np.pi * np.fft.fftfreq(n, d=hx)
        sl = [None] * len(shape)
        sl[ax] = slice(None)
        xi2 = xi2 + xi[tuple(sl)] ** 2
    dxi = math.prod(2 * np.pi / (n * hx) for n, hx in zip(shape, h))
    total = np.sum((1 + xi2) ** 2 * np.abs(spec) ** 2) * dxi
    return float(math.sqrt(total) / (2 * np.pi) ** f.grid.dim)


def truncation_bound(h2: float, l2: float, k_min: float, k_max: float, dim: int) -> float:
    """Uniform bound on |I_K(z) - I(z)| from restricting k to [k_min, k_max]."""
    if min(h2, l2, k_min, k_max) < 0 or not k_max > 0:
        raise DomainError("truncation_bound needs nonnegative norms and positive wavenumbers")
    if dim == 2:
        return math.sqrt(math.pi) * (h2 / k_max + k_min * l2)
    if dim == 3:
        return 2 * math.sqrt(math.pi) * (k_max**-0.5 * h2 + math.sqrt(3) / 3 * k_min**1.5 * l2)
    raise DomainError(f"dimension must be 2 or 3, got {dim}")


# ---------------------------------------------------------------------------
# low-frequency moments


@dataclass
class MomentEstimate:
    mass: complex
    first_moment: np.ndarray


def default_probe_wavenumbers(support_radius: float, n: int = 3, scale: float = 0.05) -> np.ndarray:
    """``n`` equally spaced probes up to ``scale / support_radius``."""
    k_top = scale / support_radius
    return k_top * np.arange(1, n + 1) / n


def low_freq_moments(born_far, dirs: DirectionSet, k_probe) -> MomentEstimate:
    """Estimate int q and int q y from backscattering far fields at small k.

    Dividing the data by k^2 gamma_n(k) leaves int q e^{2ik theta.y} dy =
    int q + 2ik theta.int(q y) + O(k^2). A straight line in k is fitted per
    direction; the intercepts are averaged into the mass and the slopes are
    solved across directions for the first moment.
    """
    k_probe = np.asarray(k_probe, dtype=float)
    if len(k_probe) < 2:
        raise DomainError("need at least two probe wavenumbers")
    if len(dirs) < dirs.dim:
        raise DomainError(f"need at least {dirs.dim} directions to recover the first moment")
    if np.any(k_probe <= 0):
        raise DomainError("probe wavenumbers must be positive")
    cols = []
    for k in k_probe:
        u = np.asarray(born_far(dirs.dirs, k), dtype=complex)
        cols.append(u / (k * k * gamma_n(k, dirs.dim)))
    f = np.stack(cols, axis=1)  # (N_theta, n_probe)
    design = np.stack([np.ones_like(k_probe), k_probe], axis=1)
    coef, *_ = np.linalg.lstsq(design.astype(complex), f.T, rcond=None)
    intercept, slope = coef[0], coef[1]
    mass = complex(np.mean(intercept))
    moment, *_ = np.linalg.lstsq(dirs.dirs.astype(complex), slope / 2j, rcond=None)
    return MomentEstimate(mass, moment)


@dataclass
class MomentCheck:
    mass_numeric: complex
    mass_exact: complex
    thetas: np.ndarray
    first_numeric: np.ndarray
    first_exact: np.ndarray

    @property
    def mass_discrepancy(self) -> float:
        return abs(self.mass_numeric - self.mass_exact)

    @property
    def first_discrepancy(self) -> float:
        return float(np.max(np.abs(self.first_numeric - self.first_exact)))


def ball_second_moment(R: float, dim: int) -> float:
    """A = int_{B_R} y_1^2 dy."""
    if dim == 2:
        return math.pi * R**4 / 4
    return 4 * math.pi * R**5 / 15


def ball_volume(R: float, dim: int) -> float:
    return math.pi * R**2 if dim == 2 else 4 * math.pi * R**3 / 3


def uniqueness_moment_check(alpha, c: complex, R: float, quad_grid: SamplingGrid,
                            n_theta: int = 8, seed: int = 0) -> MomentCheck:
    """Check the two moment identities for r(y) = alpha.y + c on the ball B_R.

    int r = c |B_R| and int r (theta.y) = (alpha.theta) A, with A = int y_1^2.
    """
    dim = quad_grid.dim
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (dim,):
        raise DomainError(f"alpha must have {dim} components")
    if not quad_grid.contains_ball(R):
        raise DomainError("quadrature grid must cover the ball B_R")
    pts = quad_grid.points()
    inside = np.sum(pts * pts, axis=1) <= R * R
    y = pts[inside]
    dv = quad_grid.cell_volume
    r = y @ alpha + c
    rng = np.random.default_rng(seed)
    thetas = rng.standard_normal((n_theta, dim))
    thetas /= np.linalg.norm(thetas, axis=1, keepdims=True)
    first_num = (thetas @ y.T) @ r * dv
    first_exact = (thetas @ alpha) * ball_second_moment(R, dim)
    return MomentCheck(complex(np.sum(r) * dv), complex(c) * ball_volume(R, dim),
                       thetas, first_num, first_exact)
