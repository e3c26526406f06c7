import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdsm.errors import DomainError
from qdsm.geometry import (DirectionSet, FieldKind, MeasurementGeometry, SamplingGrid,
                           fibonacci_sphere_directions, make_wavenumbers,
                           uniform_circle_directions, wavenumbers_from_step)


def test_grid_points_closed_interval():
    g = SamplingGrid.cube(2, 0.7, 201)
    assert g.shape == (201, 201)
    assert g.size == 201 * 201
    pts = g.points()
    assert pts[0].tolist() == [-0.7, -0.7]
    assert pts[-1].tolist() == [0.7, 0.7]
    # row-major: last axis runs fastest
    assert pts[1, 0] == -0.7 and pts[1, 1] > -0.7


def test_grid_point_formula_bit_exact():
    g = SamplingGrid(3, (-0.35, -0.2, 0.0), (0.35, 0.4, 1.0), (101, 7, 3))
    idx = (17, 3, 2)
    expect = [g.axis_min[i] + idx[i] * (g.axis_max[i] - g.axis_min[i]) / (g.counts[i] - 1)
              for i in range(3)]
    assert g.point(idx).tolist() == expect
    flat = np.ravel_multi_index(idx, g.shape)
    assert g.points()[flat].tolist() == expect


@pytest.mark.parametrize("kwargs", [
    dict(dim=4, axis_min=(0,) * 4, axis_max=(1,) * 4, counts=(2,) * 4),
    dict(dim=2, axis_min=(0, 0), axis_max=(1, 0), counts=(2, 2)),
    dict(dim=2, axis_min=(0, 0), axis_max=(1, 1), counts=(2, 1)),
    dict(dim=2, axis_min=(0, 0), axis_max=(1, 1), counts=(2,)),
])
def test_grid_rejects_bad_fields(kwargs):
    with pytest.raises(DomainError):
        SamplingGrid(**kwargs)


def test_contains_ball():
    g = SamplingGrid.cube(2, 0.6, 11)
    assert g.contains_ball(0.6)
    assert not g.contains_ball(0.61)


def test_circle_directions_four():
    d = uniform_circle_directions(4)
    np.testing.assert_allclose(d.dirs, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    assert d.weight == math.pi / 2


def test_circle_directions_single_and_256():
    d = uniform_circle_directions(1)
    assert d.dirs.tolist() == [[1.0, 0.0]] and d.weight == 2 * math.pi
    assert uniform_circle_directions(256).weight == 2 * math.pi / 256
    with pytest.raises(DomainError):
        uniform_circle_directions(0)


def test_fibonacci_two_points():
    d = fibonacci_sphere_directions(2)
    np.testing.assert_allclose(d.dirs[1], [0, 0, -1], atol=1e-15)
    assert d.dirs[0, 2] == 0.0
    assert abs(np.linalg.norm(d.dirs[0]) - 1) < 1e-15
    with pytest.raises(DomainError):
        fibonacci_sphere_directions(0)


def test_fibonacci_formula_and_weights():
    L = 256
    d = fibonacci_sphere_directions(L)
    ell = np.arange(1, L + 1)
    x3 = 1 - 2 * ell / L
    ang = (math.sqrt(5) - 1) * math.pi * ell
    ref = np.stack([np.sqrt(1 - x3**2) * np.cos(ang), np.sqrt(1 - x3**2) * np.sin(ang), x3], 1)
    np.testing.assert_allclose(d.dirs, ref, atol=1e-15)
    assert abs(np.sum(d.weights) - 4 * math.pi) < 1e-12


@pytest.mark.parametrize("L", [64, 256, 1024])
def test_fibonacci_odd_moment_exact(L):
    # sum_l x3_l = sum_l (1 - 2l/L) = -1, so the weighted odd moment is exactly -4 pi / L
    d = fibonacci_sphere_directions(L)
    assert abs(np.sum(d.weights * d.dirs[:, 2]) + 4 * math.pi / L) < 1e-12


def test_direction_set_rejects_non_unit():
    with pytest.raises(DomainError):
        DirectionSet(2, np.array([[1.0, 1e-5]]), 1.0)


def test_wavenumbers_reference_cases():
    ks = make_wavenumbers(1, 121, 61)
    assert ks.dk == 2.0
    assert ks.values.tolist() == list(range(1, 122, 2))
    two = make_wavenumbers(1, 121, 2)
    assert two.values.tolist() == [1.0, 121.0] and two.dk == 120
    half = make_wavenumbers(1, 61, 121)
    assert half.dk == 0.5 and half.values[1] == 1.5


@pytest.mark.parametrize("args", [(0, 1, 3), (-1, 1, 3), (2, 1, 3), (1, 2, 1)])
def test_wavenumbers_reject(args):
    with pytest.raises(DomainError):
        make_wavenumbers(*args)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50), st.floats(0.01, 200), st.integers(2, 500))
def test_wavenumbers_invertible(k_min, width, n_k):
    ks = make_wavenumbers(k_min, k_min + width, n_k)
    v = ks.values
    assert np.all(np.diff(v) > 0)
    back = make_wavenumbers(v[0], v[-1], len(v))
    assert back.values.tolist() == v.tolist()
    assert v[0] == k_min and v[-1] == k_min + width


def test_wavenumbers_from_step():
    assert wavenumbers_from_step(1, 121, 0.5).n_k == 241
    with pytest.raises(DomainError):
        wavenumbers_from_step(1, 2, 0.3)


def test_measurement_geometry():
    assert MeasurementGeometry.far().kind is FieldKind.FAR
    near = MeasurementGeometry.near(5)
    near.check_support(4.9)
    with pytest.raises(DomainError):
        near.check_support(5.0)
    with pytest.raises(DomainError):
        MeasurementGeometry.near(0)
    with pytest.raises(DomainError):
        MeasurementGeometry("far", 3.0)
