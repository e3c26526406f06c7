"""Hankel functions, the Helmholtz fundamental solution and the far-field constant gamma_n.

H_0^(1) and H_1^(1) are evaluated for real positive arguments only:

* ``x <= 12``: ascending power series (40 terms),
* ``x > 12``: Hankel's large-argument expansion truncated after 24 terms,
  which is close to the optimal truncation point at the seam.

Both branches agree with a multiprecision reference to better than 1e-11
relative over (0, 1e4].
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SingularityError

EULER_GAMMA = 0.57721566490153286061
CROSSOVER = 12.0
SERIES_TERMS = 40
ASYMPTOTIC_TERMS = 24


def _asymptotic_coefficients(order: int, n_terms: int) -> np.ndarray:
    # a_k(nu) = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k)
    nu2 = 4 * order * order
    a = np.empty(n_terms + 1)
    a[0] = 1.0
    for k in range(1, n_terms + 1):
        a[k] = a[k - 1] * (nu2 - (2 * k - 1) ** 2) / (8.0 * k)
    return a


_ASYM = {order: _asymptotic_coefficients(order, ASYMPTOTIC_TERMS) for order in (0, 1)}


def _series(x: np.ndarray, order: int) -> np.ndarray:
    t = 0.25 * x * x
    if order == 0:
        term = np.ones_like(x)
        j = term.copy()
        s = np.zeros_like(x)
        harmonic = 0.0
        for m in range(1, SERIES_TERMS):
            term = term * (-t) / (m * m)
            harmonic += 1.0 / m
            j += term
            s += harmonic * term
        y = (2.0 / np.pi) * ((np.log(0.5 * x) + EULER_GAMMA) * j - s)
        return j + 1j * y
    # order 1, with psi(m+1) + psi(m+2) = H_m + H_{m+1} - 2 gamma
    term = 0.5 * x
    j = term.copy()
    s = (1.0 - 2.0 * EULER_GAMMA) * term
    h_m, h_m1 = 0.0, 1.0
    for m in range(1, SERIES_TERMS):
        term = term * (-t) / (m * (m + 1))
        h_m += 1.0 / m
        h_m1 += 1.0 / (m + 1)
        j += term
        s += (h_m + h_m1 - 2.0 * EULER_GAMMA) * term
    y = -2.0 / (np.pi * x) + (2.0 / np.pi) * np.log(0.5 * x) * j - s / np.pi
    return j + 1j * y


def _asymptotic(x: np.ndarray, order: int) -> np.ndarray:
    a = _ASYM[order]
    inv = 1.0 / x
    # sum_k i^k a_k / x^k split into real (even k) and imaginary (odd k) parts
    even = a[0::2] * (-1.0) ** np.arange(len(a[0::2]))
    odd = a[1::2] * (-1.0) ** np.arange(len(a[1::2]))
    inv2 = inv * inv
    p = np.zeros_like(x)
    for c in even[::-1]:
        p = p * inv2 + c
    q = np.zeros_like(x)
    for c in odd[::-1]:
        q = q * inv2 + c
    q *= inv
    phase = x - (0.5 * order + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p + 1j * q) * np.exp(1j * phase)


def _hankel(x, order: int):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("Hankel functions are evaluated for positive real arguments only")
    if arr.ndim == 0:
        flat = arr.reshape(1)
    else:
        flat = arr.ravel()
    out = np.empty(flat.shape, dtype=complex)
    small = flat <= CROSSOVER
    if np.any(small):
        out[small] = _series(flat[small], order)
    if not np.all(small):
        big = ~small
        out[big] = _asymptotic(flat[big], order)
    if arr.ndim == 0:
        return complex(out[0])
    return out.reshape(arr.shape)


def hankel0_h1(x):
    """H_0^(1)(x) = J_0(x) + i Y_0(x) for real x > 0 (scalar or array)."""
    return _hankel(x, 0)


def hankel1_h1(x):
    """H_1^(1)(x) = J_1(x) + i Y_1(x) for real x > 0 (scalar or array)."""
    return _hankel(x, 1)


def gamma_n(k, dim: int):
    """Far-field constant: e^{i pi/4}/sqrt(8 pi k) in 2D, 1/(4 pi) in 3D."""
    karr = np.asarray(k, dtype=float)
    if np.any(~(karr > 0)):
        raise DomainError("gamma_n needs k > 0")
    if dim == 2:
        val = np.exp(0.25j * np.pi) / np.sqrt(8.0 * np.pi * karr)
    elif dim == 3:
        val = np.full(karr.shape, 1.0 / (4.0 * np.pi), dtype=complex)
    else:
        raise DomainError(f"dimension must be 2 or 3, got {dim}")
    return complex(val) if karr.ndim == 0 else val


def phi_of_distance(r, k: float, dim: int):
    """Fundamental solution as a function of the distance r = |x - z| > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularityError("fundamental solution is singular at x = z")
    if dim == 3:
        val = np.exp(1j * k * r) / (4.0 * np.pi * r)
    elif dim == 2:
        val = 0.25j * hankel0_h1(k * r)
    else:
        raise DomainError(f"dimension must be 2 or 3, got {dim}")
    return complex(val) if np.ndim(val) == 0 else val


def fundamental_solution(x, z, k: float, dim: int):
    """Outgoing Helmholtz fundamental solution Phi(x, z, k).

    ``x`` and ``z`` broadcast against each other along leading axes; the last
    axis holds the coordinates.
    """
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape[-1] != dim or z.shape[-1] != dim:
        raise DomainError(f"points must have {dim} coordinates")
    r = np.sqrt(np.sum((x - z) ** 2, axis=-1))
    return phi_of_distance(r, k, dim)


def ball_radius_for_volume(volume: float, dim: int) -> float:
    if dim == 2:
        return math.sqrt(volume / math.pi)
    return (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)


def self_cell_integral(k: float, cell_volume: float, dim: int) -> complex:
    """Integral of Phi(0, y, k) over a disk/ball of the given area/volume centred at 0.

    2D: (i pi rho / 2k) H_1^(1)(k rho) - 1/k^2
    3D: ((1 - i k rho) e^{i k rho} - 1) / k^2
    """
    rho = ball_radius_for_volume(cell_volume, dim)
    if dim == 2:
        return 1j * np.pi * rho * hankel1_h1(k * rho) / (2.0 * k) - 1.0 / k**2
    return ((1.0 - 1j * k * rho) * np.exp(1j * k * rho) - 1.0) / k**2
