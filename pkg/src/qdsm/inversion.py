"""Quantitative direct-sampling indicators for far- and near-field backscattering data.

Both indicators are weighted double sums over directions theta_j and
wavenumbers k_m of the measured data against an explicit phase kernel:

    far,  2D:  2(1-i) dtheta dk / pi^{3/2} * sum_m k_m^{-1/2} sum_j u[j,m] e^{-2i k_m theta_j.z}
    far,  3D:  4 dtheta dk / pi^2          * sum_m sum_j u[j,m] e^{-2i k_m theta_j.z}
    near, 2D: -8i R dtheta dk / pi         * sum_m sum_j u[j,m] e^{2i k_m (theta_j.z - R)}
    near, 3D:  16 R^2 dtheta dk / pi       * sum_m sum_j u[j,m] e^{2i k_m (theta_j.z - R)}

Under the Born model the far indicator integrated over all k > 0 reproduces
the contrast exactly; the near indicator does so up to O(1/R).
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad_vec

from ._parallel import chunks, ordered_map
from .errors import AccuracyError, DomainError
from .forward import MeasurementSet
from .geometry import FieldKind, SamplingGrid
from .phantoms import ComplexField
from .specialfun import gamma_n

_Z_BLOCK = 128


def _weights(m: MeasurementSet) -> tuple[complex, np.ndarray, float, float]:
    """Prefactor, per-wavenumber weights, phase sign and phase offset for ``m``."""
    dim = m.dim
    dth, dk = m.directions.weight, m.wavenumbers.dk
    kv = m.wavenumbers.values
    if m.kind is FieldKind.FAR:
        if dim == 2:
            return 2 * (1 - 1j) * dth * dk / np.pi**1.5, kv**-0.5, -1.0, 0.0
        return 4 * dth * dk / np.pi**2, np.ones_like(kv), -1.0, 0.0
    R = m.geometry.radius
    if dim == 2:
        return -8j * R * dth * dk / np.pi, np.ones_like(kv), 1.0, R
    return 16 * R * R * dth * dk / np.pi, np.ones_like(kv), 1.0, R


def _block_direct(coef, dirs, kv, sign, offset, z):
    p = z @ dirs.T - offset
    out = np.zeros(len(z), dtype=complex)
    for m, k in enumerate(kv):
        out += np.exp(1j * sign * 2.0 * k * p) @ coef[:, m]
    return out


def _block_horner(coef, dirs, kv, dk, sign, offset, z):
    p = z @ dirs.T - offset
    w = np.exp(1j * sign * 2.0 * dk * p)
    acc = np.broadcast_to(coef[:, -1], p.shape).astype(complex)
    for m in range(len(kv) - 2, -1, -1):
        acc *= w
        acc += coef[:, m]
    acc *= np.exp(1j * sign * 2.0 * kv[0] * p)
    return acc.sum(axis=1)


def _evaluate(m: MeasurementSet, grid: SamplingGrid, method: str) -> ComplexField:
    if grid.dim != m.dim:
        raise DomainError(f"sampling grid is {grid.dim}D but the data are {m.dim}D")
    pre, w, sign, offset = _weights(m)
    coef = m.data * w[None, :]
    dirs = m.directions.dirs
    kv = m.wavenumbers.values
    z = grid.points()
    blocks = chunks(len(z), _Z_BLOCK)
    if method == "horner":
        work = lambda b: _block_horner(coef, dirs, kv, m.wavenumbers.dk, sign, offset, z[b[0]:b[1]])
    elif method == "direct":
        work = lambda b: _block_direct(coef, dirs, kv, sign, offset, z[b[0]:b[1]])
    else:
        raise DomainError(f"unknown evaluation method {method!r}")
    values = np.concatenate(ordered_map(work, blocks)) if blocks else np.zeros(0, complex)
    return ComplexField(grid, pre * values)


def indicator_far(m: MeasurementSet, grid: SamplingGrid, method: str = "horner") -> ComplexField:
    """Far-field indicator on every point of ``grid``."""
    if m.kind is not FieldKind.FAR:
        raise DomainError("indicator_far needs far-field measurements")
    return _evaluate(m, grid, method)


def indicator_near(m: MeasurementSet, grid: SamplingGrid, method: str = "horner") -> ComplexField:
    """Near-field indicator on every point of ``grid`` (uses the radius stored in ``m``)."""
    if m.kind is not FieldKind.NEAR:
        raise DomainError("indicator_near needs near-field measurements")
    return _evaluate(m, grid, method)


def indicator(m: MeasurementSet, grid: SamplingGrid, method: str = "horner") -> ComplexField:
    if m.kind is FieldKind.FAR:
        return indicator_far(m, grid, method)
    return indicator_near(m, grid, method)


# ---------------------------------------------------------------------------
# continuous reference


def _sphere_nodes(dim, n):
    """Quadrature nodes/weights on the unit circle/sphere with resolution ``n``."""
    if dim == 2:
        t = np.arange(n) * (2 * np.pi / n)
        return np.stack([np.cos(t), np.sin(t)], axis=1), np.full(n, 2 * np.pi / n)
    mu, wmu = np.polynomial.legendre.leggauss(n)
    phi = np.arange(2 * n) * (np.pi / n)
    s = np.sqrt(1 - mu * mu)
    nodes = np.stack([np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel(),
                      np.repeat(mu, 2 * n)], axis=1)
    return nodes, np.repeat(wmu, 2 * n) * (np.pi / n)


def _angular_integral(closure, k, z, dim, tol=1e-13, n0=None, n_max=1 << 14):
    n = n0 or (64 if dim == 2 else 16)
    prev = None
    while n <= n_max:
        nodes, wts = _sphere_nodes(dim, n)
        vals = np.asarray(closure(nodes, k), dtype=complex) * np.exp(-2j * k * (nodes @ z))
        cur = np.sum(wts * vals)
        if prev is not None:
            scale = max(np.sum(wts * np.abs(vals)), 1e-300)
            if abs(cur - prev) <= tol * scale:
                return cur
        prev = cur
        n *= 2
    raise AccuracyError(f"angular quadrature did not converge at k={k}")


def continuous_indicator_oracle(farfield_closure, z, k_min: float, k_max: float, dim: int,
                                rtol: float = 1e-8) -> complex:
    """Far-field indicator with the k-integral truncated to [k_min, k_max], by adaptive quadrature.

    ``farfield_closure(thetas, k)`` returns the backscattering far field
    u^inf(-theta, theta, k) for each row of ``thetas``.
    """
    if not 0 < k_min < k_max:
        raise DomainError("need 0 < k_min < k_max")
    z = np.asarray(z, dtype=float)
    if z.shape != (dim,):
        raise DomainError(f"sampling point must have {dim} coordinates")

    def integrand(k):
        inner = _angular_integral(farfield_closure, k, z, dim)
        val = inner * k ** (dim - 3) / gamma_n(k, dim) / np.pi**dim
        return np.array([val.real, val.imag])

    res, err = quad_vec(integrand, k_min, k_max, epsabs=1e-300, epsrel=rtol * 1e-2, norm="max",
                        limit=4000)
    value = complex(res[0], res[1])
    if err > rtol * abs(value):
        raise AccuracyError(f"oracle quadrature error estimate {err:.2e} exceeds tolerance")
    return value
