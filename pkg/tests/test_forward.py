import math
import warnings

import numpy as np
import pytest

from qdsm.errors import DomainError, SolverError
from qdsm.forward import (LSDiscretization, MeasurementSet, PlaneWave, PointSource, add_noise,
                          born_far_backscatter, born_far_closure, born_far_matrix,
                          born_near_backscatter, born_near_matrix, gaussian_far_closure,
                          ls_backscatter, ls_matrix, ls_residual, ls_total_field, synthesize)
from qdsm.geometry import (MeasurementGeometry, SamplingGrid, directions_for,
                           fibonacci_sphere_directions, make_wavenumbers,
                           uniform_circle_directions)
from qdsm.phantoms import (ContrastPhantom, complex_mountain_2d, gaussian_bump, rasterize,
                           smooth_3d, zero_phantom)
from qdsm.specialfun import gamma_n

FAR = MeasurementGeometry.far()


def bump(dim=2, amp=0.01, center=None, a=100.0):
    return gaussian_bump(dim, amp, center if center is not None else (0.0,) * dim, a)


def raster(q, half=0.6, n=97):
    return rasterize(q, SamplingGrid.cube(q.dim, half, n))


def test_zero_contrast_gives_zero_data():
    r = raster(zero_phantom(2), n=11)
    assert born_far_backscatter(r, [1.0, 0.0], 3.0) == 0
    assert born_near_backscatter(r, [5.0, 0.0], 3.0) == 0
    dirs, ks = uniform_circle_directions(4), make_wavenumbers(1, 3, 3)
    m = synthesize(zero_phantom(2), FAR, dirs, ks, SamplingGrid.cube(2, 0.5, 11))
    assert not np.any(m.data)
    disc = LSDiscretization.from_raster(r)
    assert ls_backscatter(disc, FAR, [1.0, 0.0], 2.0) == 0
    u = ls_total_field(disc, PlaneWave(np.array([1.0, 0.0])), 2.0)
    np.testing.assert_array_equal(u.flat, np.exp(2j * r.grid.points()[:, 0]))


def test_gaussian_far_value_k1():
    r = raster(bump())
    theta = np.array([math.cos(0.3), math.sin(0.3)])
    got = born_far_backscatter(r, theta, 1.0)
    ref = gamma_n(1.0, 2) * 0.01 * math.pi / 100 * math.exp(-0.01)
    assert abs(got - ref) <= 1e-10 * abs(ref)
    assert abs(abs(got / gamma_n(1.0, 2)) - 3.1103e-4) < 1e-8


def test_conjugate_symmetry_real_contrast():
    r = raster(bump(center=(0.1, -0.05)))
    th = np.array([0.6, 0.8])
    k = 7.0
    a = born_far_backscatter(r, th, k) / (k * k * gamma_n(k, 2))
    b = born_far_backscatter(r, -th, k) / (k * k * gamma_n(k, 2))
    assert abs(a - np.conj(b)) <= 1e-14 * abs(a)


@pytest.mark.parametrize("dim", [2, 3])
def test_near_tends_to_far(dim):
    q = bump(dim, center=(0.05, 0.02, -0.03)[:dim], a=100.0)
    r = raster(q, n=97 if dim == 2 else 41)
    k = 3.0
    xhat = np.array([0.6, 0.8, 0.0][:dim])
    far = born_far_backscatter(r, -xhat, k) / (k * k * gamma_n(k, dim))
    res = []
    for R in (1e2, 1e3):
        near = born_near_backscatter(r, R * xhat, k)
        scaled = R ** (dim - 1) * np.exp(-2j * k * R) / gamma_n(k, dim) ** 2 * near / (k * k)
        res.append(abs(scaled - far))
    assert 7 <= res[0] / res[1] <= 13


def test_near_inside_support_rejected():
    r = raster(bump())
    with pytest.raises(DomainError):
        born_near_backscatter(r, [0.3, 0.0], 1.0)
    with pytest.raises(DomainError):
        born_far_backscatter(r, [1.0, 0.0], 0.0)


def test_born_doubling():
    r = raster(complex_mountain_2d(), half=1.1, n=89)
    th = np.array([0.0, 1.0])
    assert born_far_backscatter(r * 2, th, 5.0) == pytest.approx(2 * born_far_backscatter(r, th, 5.0), rel=1e-14)
    x = np.array([0.0, 5.0])
    assert born_near_backscatter(r * 2, x, 5.0) == pytest.approx(2 * born_near_backscatter(r, x, 5.0), rel=1e-14)


@pytest.mark.parametrize("dim", [2, 3])
def test_far_matrix_matches_closed_form(dim):
    c = (0.03, -0.02, 0.01)[:dim]
    q = bump(dim, amp=0.01 + 0.004j, center=c)
    grid = SamplingGrid.cube(dim, 0.65, 161 if dim == 2 else 61)
    dirs = directions_for(dim, 16)
    ks = make_wavenumbers(1.0, 40.0, 40)
    m = synthesize(q, FAR, dirs, ks, grid)
    f = gaussian_far_closure(0.01 + 0.004j, 100.0, c, dim)
    ref = np.stack([f(dirs.dirs, k) for k in ks.values], axis=1)
    assert np.max(np.abs(m.data / ref - 1)) <= 1e-6


@pytest.mark.parametrize("dim", [2, 3])
def test_matrices_match_pointwise_sums(dim):
    q = smooth_3d(0.01) if dim == 3 else complex_mountain_2d()
    half = 0.55 if dim == 3 else 1.06
    r = rasterize(q, SamplingGrid.cube(dim, half, 25 if dim == 3 else 61))
    dirs = directions_for(dim, 5)
    ks = make_wavenumbers(1.0, 21.0, 70)  # long enough to cross several re-anchors
    far = born_far_matrix(r, dirs, ks)
    near = born_near_matrix(r, dirs, ks, 5.0, q.support_radius)
    for j, th in enumerate(dirs.dirs):
        for m in (0, 33, 69):
            k = ks.values[m]
            assert abs(far[j, m] - born_far_backscatter(r, th, k)) <= 1e-11 * abs(far[j, m])
            ref = born_near_backscatter(r, 5.0 * th, k)
            assert abs(near[j, m] - ref) <= 1e-10 * abs(ref)


def test_synthesize_linear():
    p, q = bump(center=(0.1, 0.0)), complex_mountain_2d()
    g = SamplingGrid.cube(2, 1.1, 101)
    dirs, ks = uniform_circle_directions(8), make_wavenumbers(1, 20, 20)
    for geo in (FAR, MeasurementGeometry.near(5.0)):
        mp = synthesize(p, geo, dirs, ks, g).data
        mq = synthesize(q, geo, dirs, ks, g).data
        mpq = synthesize(2.5 * p + (-1j) * q, geo, dirs, ks, g).data
        np.testing.assert_allclose(mpq, 2.5 * mp - 1j * mq, rtol=1e-12,
                                   atol=1e-14 * np.abs(mpq).max())


def test_translation_covariance():
    t = np.array([0.0625, -0.03125])
    g = SamplingGrid.cube(2, 0.75, 121)
    dirs, ks = uniform_circle_directions(12), make_wavenumbers(1, 30, 30)
    a = synthesize(bump(), FAR, dirs, ks, g).data
    b = synthesize(bump(center=t), FAR, dirs, ks, g).data
    phase = np.exp(2j * np.outer(dirs.dirs @ t, ks.values))
    np.testing.assert_allclose(b, a * phase, rtol=1e-9)


def test_quadrature_converges_at_least_second_order():
    # C^2 compactly supported bump: midpoint errors come from the support boundary
    rad = 0.4
    q = ContrastPhantom(2, rad, lambda p: 0.01 * np.clip(1 - np.sum(p * p, 1) / rad**2, 0, None) ** 3)
    th, k = np.array([0.6, 0.8]), 12.0
    vals = [born_far_backscatter(rasterize(q, SamplingGrid.cube(2, 0.5, n)), th, k)
            for n in (26, 51, 101, 401)]
    e1, e2 = abs(vals[0] - vals[3]), abs(vals[1] - vals[3])
    assert e1 / e2 >= 3.5


def test_add_noise_contract():
    dirs, ks = uniform_circle_directions(16), make_wavenumbers(1, 10, 10)
    m = synthesize(bump(), FAR, dirs, ks, SamplingGrid.cube(2, 0.6, 49))
    same = add_noise(m, 0.0, seed=3)
    np.testing.assert_array_equal(same.data, m.data)
    n1 = add_noise(m, 0.05, seed=3)
    assert abs(np.linalg.norm(n1.data - m.data) / np.linalg.norm(m.data) - 0.05) < 1e-13
    np.testing.assert_array_equal(n1.data, add_noise(m, 0.05, seed=3).data)
    assert not np.array_equal(n1.data, add_noise(m, 0.05, seed=4).data)
    assert n1.noise_level == 0.05 and n1.seed == 3
    with pytest.raises(DomainError):
        add_noise(m, -0.01, seed=1)


def test_synthesize_preconditions():
    dirs, ks = uniform_circle_directions(4), make_wavenumbers(1, 3, 3)
    with pytest.raises(DomainError):
        synthesize(bump(), FAR, dirs, ks, SamplingGrid.cube(2, 0.3, 11))
    with pytest.raises(DomainError):
        synthesize(bump(), MeasurementGeometry.near(0.5), dirs, ks, SamplingGrid.cube(2, 0.6, 11))
    with pytest.raises(DomainError):
        synthesize(bump(), FAR, dirs, ks, SamplingGrid.cube(2, 0.6, 11), model="exact")
    with pytest.raises(DomainError):
        synthesize(bump(3), FAR, dirs, ks, SamplingGrid.cube(3, 0.6, 11))
    with pytest.warns(RuntimeWarning, match="under-resolved"):
        synthesize(bump(), FAR, dirs, make_wavenumbers(1, 100, 3), SamplingGrid.cube(2, 0.6, 11))


def test_measurement_set_shape_and_readonly():
    dirs, ks = uniform_circle_directions(3), make_wavenumbers(1, 2, 2)
    with pytest.raises(DomainError):
        MeasurementSet(FAR, dirs, ks, np.zeros((2, 3)))
    m = MeasurementSet(FAR, dirs, ks, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        m.data[0, 0] = 1


def test_thread_count_does_not_change_results(monkeypatch):
    q = complex_mountain_2d()
    g = SamplingGrid.cube(2, 1.06, 81)
    dirs, ks = uniform_circle_directions(40), make_wavenumbers(1, 30, 30)
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("QDSM_NUM_THREADS", n)
        out.append(synthesize(q, MeasurementGeometry.near(5.0), dirs, ks, g).data)
    np.testing.assert_array_equal(out[0], out[1])


# ---------------------------------------------------------------------------
# Lippmann-Schwinger


def ls_setup(s=1.0, n=48, dim=2):
    q = bump(dim, amp=0.01 * s)
    r = rasterize(q, SamplingGrid.cube(dim, 0.6, n))
    return r, LSDiscretization.from_raster(r)


def test_ls_residual_and_born_consistency():
    k = 5.0
    inc = PlaneWave(np.array([0.6, 0.8]))
    scat, corr = [], []
    for s in (1.0, 0.5):
        r, disc = ls_setup(s, n=32)
        u = ls_total_field(disc, inc, k)
        assert ls_residual(disc, u, inc, k) <= 1e-9
        sup = disc.index
        u_inc = inc(disc.points, k, 2)
        born = (k * k) * (disc.kernel(k) @ (disc.q * u_inc))
        scat.append(np.linalg.norm(u.flat[sup] - u_inc))
        corr.append(np.linalg.norm(u.flat[sup] - u_inc - born))
    assert 1.8 <= scat[0] / scat[1] <= 2.2
    assert 3.6 <= corr[0] / corr[1] <= 4.4


@pytest.mark.parametrize("kind", ["far", "near"])
def test_ls_data_approach_born_linearly(kind):
    k = 5.0
    geo = FAR if kind == "far" else MeasurementGeometry.near(3.0)
    dirs = uniform_circle_directions(4)
    ratios = []
    for s in (1.0, 0.5):
        r, disc = ls_setup(s, n=32)
        ls = np.array([ls_backscatter(disc, geo, th if kind == "far" else 3.0 * th, k)
                       for th in dirs.dirs])
        born = np.array([born_far_backscatter(r, th, k) if kind == "far"
                         else born_near_backscatter(r, 3.0 * th, k) for th in dirs.dirs])
        ratios.append(np.linalg.norm(ls - born) / np.linalg.norm(born))
    assert 1.7 <= ratios[0] / ratios[1] <= 2.3


def test_ls_matrix_matches_single_solves():
    r, disc = ls_setup(n=24)
    dirs, ks = uniform_circle_directions(3), make_wavenumbers(2, 4, 2)
    mat = ls_matrix(disc, FAR, dirs, ks)
    for j, th in enumerate(dirs.dirs):
        for m, k in enumerate(ks.values):
            assert abs(mat[j, m] - ls_backscatter(disc, FAR, th, k)) <= 1e-9 * abs(mat[j, m])
    m = synthesize(bump(), FAR, dirs, ks, SamplingGrid.cube(2, 0.6, 24), model="ls")
    np.testing.assert_allclose(m.data, mat, rtol=1e-12)


def test_ls_3d_and_point_source():
    r, disc = ls_setup(n=14, dim=3)
    src = PointSource(np.array([0.0, 0.0, 2.0]))
    u = ls_total_field(disc, src, 4.0)
    assert ls_residual(disc, u, src, 4.0) <= 1e-9
    assert np.all(np.isfinite(np.diag(disc.kernel(4.0))))


def test_ls_reports_non_convergence():
    _, disc = ls_setup(n=20)
    # a tolerance below rounding cannot be met
    with pytest.raises(SolverError) as info:
        ls_total_field(disc, PlaneWave(np.array([1.0, 0.0])), 5.0, tol=1e-20)
    assert info.value.residual > 1e-20
