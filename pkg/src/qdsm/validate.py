"""Built-in oracle suite behind ``qdsm validate``.

Each check compares a library result against an independent closed form and
returns (name, passed, detail). Sizes are small so the suite runs in seconds.
"""

from __future__ import annotations

import math

import numpy as np

from .analysis import (h2_norm, l2_norm, low_freq_moments, truncation_bound,
                       uniqueness_moment_check)
from .forward import (LSDiscretization, MeasurementSet, PlaneWave, born_far_backscatter,
                      born_far_closure, born_far_matrix, gaussian_far_closure, ls_residual,
                      ls_total_field)
from .geometry import (MeasurementGeometry, SamplingGrid, fibonacci_sphere_directions,
                       make_wavenumbers, uniform_circle_directions)
from .inversion import continuous_indicator_oracle, indicator_far
from .phantoms import gaussian_bump, rasterize
from .specialfun import hankel0_h1, hankel1_h1


def check_wronskian():
    x = np.linspace(0.5, 50, 400)
    h0, h1 = hankel0_h1(x), hankel1_h1(x)
    # J1 Y0 - J0 Y1 = 2 / (pi x)
    w = h1.real * h0.imag - h0.real * h1.imag
    err = float(np.max(np.abs(w * np.pi * x / 2 - 1)))
    return "hankel wronskian", err <= 1e-8, f"max rel err {err:.2e}"


def check_hankel_large():
    x = np.array([100.0, 1e3, 1e4])
    ref = np.sqrt(2 / (np.pi * x)) * np.exp(1j * (x - np.pi / 4)) * (1 - 1j / (8 * x))
    err = float(np.max(np.abs(hankel0_h1(x) / ref - 1)))
    return "hankel large-argument leading terms", err <= 1e-4, f"max rel err {err:.2e}"


def check_fibonacci():
    d = fibonacci_sphere_directions(256)
    s = float(np.sum(d.weights))
    m3 = float(np.sum(d.weights * d.dirs[:, 2]))
    ok = abs(s - 4 * np.pi) <= 1e-12 and abs(m3) <= 0.05
    return "fibonacci quadrature", ok, f"sum w - 4pi = {s - 4 * np.pi:.1e}, sum w x3 = {m3:.3e}"


def check_born_fourier():
    q = gaussian_bump(2, 0.01, (0.05, -0.02), 100.0)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 121))
    th = np.array([0.6, 0.8])
    k = 20.0
    got = born_far_backscatter(r, th, k)
    ref = gaussian_far_closure(0.01, 100.0, (0.05, -0.02), 2)(th[None], k)[0]
    err = abs(got / ref - 1)
    return "born far field vs gaussian fourier", err <= 1e-8, f"rel err {err:.2e}"


def check_indicator_oracle():
    a, amp = 100.0, 0.01
    dirs = uniform_circle_directions(256)
    ks = make_wavenumbers(1.0, 41.0, 321)
    f = gaussian_far_closure(amp, a, (0.0, 0.0), 2)
    data = np.stack([f(dirs.dirs, k) for k in ks.values], axis=1)
    m = MeasurementSet(MeasurementGeometry.far(), dirs, ks, data)
    grid = SamplingGrid(2, (0.0, 0.0), (0.05, 0.05), (2, 2))
    disc = indicator_far(m, grid).flat[0]
    cont = continuous_indicator_oracle(f, np.zeros(2), 1.0, 41.0, 2)
    err = abs(disc - cont) / abs(cont)
    # rectangle rule: O(dk) endpoint error of size dk f(k_min) / 2
    return "discrete indicator vs continuous oracle", err <= 5e-3, f"rel err {err:.2e}"


def check_truncation_bound():
    a, amp = 100.0, 0.01
    q = gaussian_bump(2, amp, (0.0, 0.0), a)
    grid = SamplingGrid.cube(2, 0.6, 257)
    r = rasterize(q, grid)
    bound = truncation_bound(h2_norm(r), l2_norm(r), 1.0, 41.0, 2)
    f = gaussian_far_closure(amp, a, (0.0, 0.0), 2)
    worst = 0.0
    for z in ([0.0, 0.0], [0.05, 0.0], [0.1, -0.07]):
        z = np.array(z)
        val = continuous_indicator_oracle(f, z, 1.0, 41.0, 2)
        worst = max(worst, abs(val - q(z[None])[0]))
    return "truncation bound holds", worst <= bound, f"defect {worst:.2e} <= bound {bound:.2e}"


def check_moments():
    q = gaussian_bump(2, 0.01, (0.0, 0.0), 100.0)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 97))
    est = low_freq_moments(born_far_closure(r), uniform_circle_directions(16), [0.02, 0.04, 0.06])
    mass = 0.01 * math.pi / 100.0
    err = abs(est.mass - mass) / mass
    fm = float(np.linalg.norm(est.first_moment))
    return "low-frequency moments", err <= 1e-3 and fm <= 1e-6, \
        f"mass rel err {err:.2e}, |first moment| {fm:.1e}"


def check_uniqueness_identity():
    chk = uniqueness_moment_check([1.0, 0.0], 0.5, 0.3, SamplingGrid.cube(2, 0.31, 401))
    rel = max(chk.mass_discrepancy / abs(chk.mass_exact),
              chk.first_discrepancy / (math.pi * 0.3**4 / 4))
    return "moment identities on a ball", rel <= 2e-2, f"max rel discrepancy {rel:.2e}"


def check_ls_residual():
    q = gaussian_bump(2, 0.01, (0.0, 0.0), 100.0)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 32))
    disc = LSDiscretization.from_raster(r)
    inc = PlaneWave(np.array([1.0, 0.0]))
    u = ls_total_field(disc, inc, 5.0)
    res = ls_residual(disc, u, inc, 5.0)
    return "lippmann-schwinger residual", res <= 1e-9, f"residual {res:.1e}"


def check_born_matrix():
    q = gaussian_bump(2, 0.01, (0.03, 0.0), 100.0)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 97))
    dirs = uniform_circle_directions(8)
    ks = make_wavenumbers(1.0, 30.0, 59)
    got = born_far_matrix(r, dirs, ks)
    f = gaussian_far_closure(0.01, 100.0, (0.03, 0.0), 2)
    ref = np.stack([f(dirs.dirs, k) for k in ks.values], axis=1)
    err = float(np.max(np.abs(got / ref - 1)))
    return "born matrix vs closed form", err <= 1e-6, f"max rel err {err:.2e}"


CHECKS = (check_wronskian, check_hankel_large, check_fibonacci, check_born_fourier,
          check_born_matrix, check_indicator_oracle, check_truncation_bound, check_moments,
          check_uniqueness_identity, check_ls_residual)


def run_checks():
    return [(name, bool(ok), detail) for name, ok, detail in (c() for c in CHECKS)]
