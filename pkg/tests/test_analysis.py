import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from qdsm.analysis import (ball_second_moment, default_probe_wavenumbers, h2_norm, l2_norm,
                           low_freq_moments, rel_errors, truncation_bound,
                           uniqueness_moment_check)
from qdsm.errors import DomainError
from qdsm.forward import born_far_closure, gaussian_far_closure
from qdsm.geometry import SamplingGrid, fibonacci_sphere_directions, uniform_circle_directions
from qdsm.inversion import continuous_indicator_oracle
from qdsm.phantoms import (ComplexField, cross_3d, cross_3d_mass, gaussian_bump, rasterize,
                           zero_phantom)


def field(seed=0, n=9):
    g = SamplingGrid.cube(2, 1.0, n)
    rng = np.random.default_rng(seed)
    return ComplexField(g, rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size))


def test_rel_errors_basic():
    t = field()
    r = rel_errors(t, t)
    assert (r.rel_l2, r.rel_linf) == (0.0, 0.0)
    assert rel_errors(t * 2, t).rel_l2 == pytest.approx(1.0, rel=1e-15)


def test_rel_errors_constant_offset():
    t = field(1)
    t = t * (1 / np.linalg.norm(t.flat))
    c = 0.3 - 0.1j
    shifted = ComplexField(t.grid, t.flat + c)
    expect = abs(c) * math.sqrt(t.grid.size) / np.linalg.norm(t.flat)
    assert rel_errors(shifted, t).rel_l2 == pytest.approx(expect, rel=1e-12)


def test_rel_errors_zero_truth_and_mismatch():
    g = SamplingGrid.cube(2, 1.0, 5)
    zero = ComplexField(g, np.zeros(g.size))
    rep = rel_errors(ComplexField(g, np.full(g.size, 0.5)), zero)
    assert rep.absolute and rep.rel_l2 == pytest.approx(0.5 * 5)
    with pytest.raises(DomainError):
        rel_errors(field(n=9), field(n=7))
    assert rel_errors(field(), field(), part="re", tag="x").metadata == {"part": "re", "tag": "x"}


def test_l2_norm_gaussian():
    q = gaussian_bump(2, 0.01, (0, 0), 100.0)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 121))
    # int |A e^{-a|x|^2}|^2 = A^2 pi / (2a)
    assert l2_norm(r) == pytest.approx(0.01 * math.sqrt(math.pi / 200), rel=1e-10)


def h2_gaussian_reference(A, a):
    # (2 pi)^-2 ( int (1+rho^2)^2 A^2 (pi/a)^2 e^{-rho^2/(2a)} 2 pi rho drho )^{1/2}
    radial, _ = quad(lambda r: (1 + r * r) ** 2 * math.exp(-r * r / (2 * a)) * 2 * math.pi * r,
                     0, np.inf, epsrel=1e-12)
    b = 2 * a
    assert radial == pytest.approx(math.pi * (b + 2 * b * b + 2 * b**3), rel=1e-9)
    return A * (math.pi / a) * math.sqrt(radial) / (2 * math.pi) ** 2


def test_h2_norm_gaussian():
    A, a = 0.01, 100.0
    r = rasterize(gaussian_bump(2, A, (0, 0), a), SamplingGrid.cube(2, 0.6, 256))
    assert h2_norm(r) == pytest.approx(h2_gaussian_reference(A, a), rel=0.01)


def test_h2_norm_zero_scaling_and_warning():
    g = SamplingGrid.cube(2, 0.6, 64)
    assert h2_norm(rasterize(zero_phantom(2), g)) == 0
    r = rasterize(gaussian_bump(2, 0.01, (0, 0), 100.0), g)
    assert h2_norm(r * (3 - 4j)) == pytest.approx(5 * h2_norm(r), rel=1e-12)
    with pytest.warns(UserWarning, match="boundary"):
        h2_norm(ComplexField(g, np.ones(g.size)))


def test_truncation_bound_formula():
    assert truncation_bound(1, 1, 1, 121, 2) == pytest.approx(math.sqrt(math.pi) * (1 / 121 + 1))
    b3 = truncation_bound(2.0, 3.0, 0.5, 64.0, 3)
    assert b3 == pytest.approx(2 * math.sqrt(math.pi) * (2 / 8 + math.sqrt(3) / 3 * 0.5**1.5 * 3))
    first = lambda kmax: truncation_bound(1, 0, 1, kmax, 2)
    assert first(242) == pytest.approx(first(121) / 2)
    assert truncation_bound(1, 1, 1e-12, 1e12, 2) < 1e-10
    for dim in (2, 3):
        assert truncation_bound(1, 1, 1, 200, dim) < truncation_bound(1, 1, 1, 100, dim)
        assert truncation_bound(1, 1, 0.5, 100, dim) < truncation_bound(1, 1, 1, 100, dim)
    with pytest.raises(DomainError):
        truncation_bound(-1, 1, 1, 2, 2)
    with pytest.raises(DomainError):
        truncation_bound(1, 1, 1, 2, 4)


def test_bound_holds_for_continuous_indicator():
    A, a, k0, k1 = 0.01, 100.0, 2.0, 30.0
    q = gaussian_bump(2, A, (0.0, 0.0), a)
    r = rasterize(q, SamplingGrid.cube(2, 0.6, 256))
    bound = truncation_bound(h2_norm(r), l2_norm(r), k0, k1, 2)
    f = gaussian_far_closure(A, a, (0.0, 0.0), 2)
    for z in ([0.0, 0.0], [0.08, 0.0], [0.05, -0.12], [0.2, 0.2]):
        z = np.array(z)
        assert abs(continuous_indicator_oracle(f, z, k0, k1, 2) - q(z)) <= bound


def test_moments_zero_and_gaussian():
    g = SamplingGrid.cube(2, 0.6, 97)
    dirs = uniform_circle_directions(16)
    est = low_freq_moments(born_far_closure(rasterize(zero_phantom(2), g)), dirs, [0.01, 0.02, 0.03])
    assert est.mass == 0 and not np.any(est.first_moment)
    q = gaussian_bump(2, 0.01, (0, 0), 100.0)
    est = low_freq_moments(born_far_closure(rasterize(q, g)), dirs,
                           default_probe_wavenumbers(q.support_radius))
    assert abs(est.mass - 0.01 * math.pi / 100) <= 1e-4 * 0.01 * math.pi / 100
    assert np.linalg.norm(est.first_moment) <= 1e-12


def test_moments_first_moment_of_shifted_bump():
    c = np.array([0.1, -0.05, 0.02])
    q = gaussian_bump(3, 0.01, c, 100.0)
    r = rasterize(q, SamplingGrid.cube(3, 0.75, 61))
    est = low_freq_moments(born_far_closure(r), fibonacci_sphere_directions(64),
                           default_probe_wavenumbers(q.support_radius))
    mass = 0.01 * (math.pi / 100) ** 1.5
    assert np.linalg.norm(est.first_moment - mass * c) <= 1e-3 * mass * np.linalg.norm(c)


def cross_setup():
    g = SamplingGrid.cube(3, 39 / 128, 40)  # h = 1/64, faces on cell boundaries
    return born_far_closure(rasterize(cross_3d(), g)), fibonacci_sphere_directions(64)


def test_moments_cross_mass_and_k2_remainder():
    f, dirs = cross_setup()
    kp = default_probe_wavenumbers(cross_3d().support_radius)
    e1 = abs(low_freq_moments(f, dirs, kp).mass - cross_3d_mass())
    e2 = abs(low_freq_moments(f, dirs, kp / 2).mass - cross_3d_mass())
    assert e1 <= 0.01 * cross_3d_mass()
    assert 3.5 <= e1 / e2 <= 4.5


def test_moments_preconditions():
    f, dirs = cross_setup()
    with pytest.raises(DomainError):
        low_freq_moments(f, dirs, [0.1])
    with pytest.raises(DomainError):
        low_freq_moments(f, fibonacci_sphere_directions(2), [0.1, 0.2])
    with pytest.raises(DomainError):
        low_freq_moments(f, dirs, [-0.1, 0.2])


def test_uniqueness_identities_2d():
    g = SamplingGrid.cube(2, 0.51, 1001)
    R = 0.5
    z = uniqueness_moment_check([0, 0], 0, R, g)
    assert z.mass_numeric == 0 and np.all(z.first_numeric == 0)
    one = uniqueness_moment_check([0, 0], 1, R, g)
    assert one.mass_exact == pytest.approx(math.pi * R * R)
    assert one.mass_discrepancy <= 2e-3 * math.pi * R * R
    e1 = uniqueness_moment_check([1, 0], 0, R, g)
    np.testing.assert_allclose(e1.first_exact, e1.thetas[:, 0] * math.pi * R**4 / 4)
    assert e1.first_discrepancy <= 5e-3 * math.pi * R**4 / 4
    with pytest.raises(DomainError):
        uniqueness_moment_check([0, 0], 0, 1.0, g)


def test_uniqueness_identities_3d():
    g = SamplingGrid.cube(3, 0.42, 141)
    chk = uniqueness_moment_check([0.3, -1.0, 0.5], 2.0 + 1j, 0.4, g)
    assert chk.mass_discrepancy <= 1e-2 * abs(chk.mass_exact)
    assert chk.first_discrepancy <= 2e-2 * ball_second_moment(0.4, 3) * 1.2
