import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from xlarray import ArrayGeometry, ElementIndex, UserPose, element_distance, element_position
from xlarray.geometry import direction_cosines, element_distances, grid_blocks, index_offsets

angles = st.tuples(st.floats(0, math.pi), st.floats(-math.pi / 2, math.pi / 2))


def test_direction_cosines_known_values():
    assert direction_cosines(UserPose(1, math.pi / 2, 0)) == (1.0, 0.0, 0.0)
    assert direction_cosines(UserPose(1, 0, 0)) == (0.0, 0.0, 1.0)
    assert_allclose(direction_cosines(UserPose(1, math.pi / 6, math.pi / 3)),
                    [0.25, 0.4330127, 0.8660254], rtol=1e-6)


@given(angles)
def test_direction_cosines_unit_norm(ang):
    c = direction_cosines(UserPose(3.0, *ang))
    assert abs(sum(x * x for x in c) - 1) < 1e-12


@given(angles, st.floats(0.1, 1e6))
def test_direction_cosines_scale_free(ang, r):
    assert direction_cosines(UserPose(r, *ang)) == direction_cosines(UserPose(1.0, *ang))


def test_in_plane_cosine_is_exact_zero():
    assert UserPose(5, math.pi / 2, math.pi / 2).cos_x == 0.0
    assert UserPose(5, math.pi, 0.3).cos_x == 0.0
    assert UserPose(5, math.pi / 2, 0.2).cos_z == 0.0


@pytest.mark.parametrize("kwargs", [dict(r=0, theta=1, phi=0), dict(r=-1, theta=1, phi=0),
                                    dict(r=math.inf, theta=1, phi=0), dict(r=1, theta=-0.1, phi=0),
                                    dict(r=1, theta=3.2, phi=0), dict(r=1, theta=1, phi=1.6)])
def test_pose_rejects_out_of_range(kwargs):
    with pytest.raises(ValueError):
        UserPose(**kwargs)


def test_geometry_derived_quantities():
    g = ArrayGeometry(3, 4, 0.5, 0.2)
    assert g.m == 12
    assert g.l_y == 1.5 and g.l_z == 2.0
    assert g.l_d == pytest.approx(2.5)
    assert g.occupation_ratio == pytest.approx(0.8)
    assert ArrayGeometry(3, 4, 0.5, 0.25).occupation_ratio == 1.0


@pytest.mark.parametrize("kwargs", [dict(m_y=0, m_z=1, d=1, a=0.5), dict(m_y=1.5, m_z=1, d=1, a=0.5),
                                    dict(m_y=1, m_z=1, d=0, a=0.5), dict(m_y=1, m_z=1, d=1, a=0),
                                    dict(m_y=1, m_z=1, d=1, a=1.01), dict(m_y=1, m_z=1, d=1, a=0.5, e_a=0)])
def test_geometry_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        ArrayGeometry(**kwargs)


def test_continuous_surface_allowed_despite_rounding():
    d = 0.0628
    assert ArrayGeometry(2, 2, d, d * d).occupation_ratio == 1.0


def test_offsets_centred():
    assert_allclose(index_offsets(3), [-1, 0, 1])
    assert_allclose(index_offsets(4), [-1.5, -0.5, 0.5, 1.5])


def test_element_position():
    g = ArrayGeometry(5, 5, 0.5, 0.1)
    assert_allclose(element_position(g, ElementIndex(0, 0)), [0, 0, 0])
    assert_allclose(element_position(g, ElementIndex(1, 2)), [0, 0.5, 1.0])
    even = ArrayGeometry(2, 1, 0.0628, 0.001)
    assert_allclose(element_position(even, ElementIndex(0.5, 0)), [0, 0.0314, 0])


@pytest.mark.parametrize("idx", [ElementIndex(3, 0), ElementIndex(0.5, 0), ElementIndex(0, -3)])
def test_element_position_off_grid(idx):
    with pytest.raises(IndexError):
        element_position(ArrayGeometry(5, 5, 0.5, 0.1), idx)


def test_element_distance_centre_and_symmetry():
    g = ArrayGeometry(201, 201, 0.0628, 0.001)
    pose = UserPose(25, math.pi / 2, 0)
    assert element_distance(g, pose, ElementIndex(0, 0)) == 25
    assert element_distance(g, pose, ElementIndex(7, -3)) == pytest.approx(
        element_distance(g, pose, ElementIndex(-7, 3)), rel=1e-15)


def test_element_distance_matches_coordinate_norm():
    g = ArrayGeometry(201, 201, 0.0628, 0.001)
    pose = UserPose(25, math.pi / 6, math.pi / 3)
    q = 25 * np.array([math.sin(math.pi / 6) * math.cos(math.pi / 3),
                       math.sin(math.pi / 6) * math.sin(math.pi / 3), math.cos(math.pi / 6)])
    w = np.array([0, 100 * 0.0628, 100 * 0.0628])
    assert element_distance(g, pose, ElementIndex(100, 100)) == pytest.approx(
        np.linalg.norm(q - w), rel=1e-10)


@settings(max_examples=200)
@given(angles, st.floats(0.05, 1e4), st.integers(-50, 50), st.integers(-50, 50))
def test_distance_forms_agree_and_bounded_by_height(ang, r, i_y, i_z):
    g = ArrayGeometry(101, 101, 0.0628, 0.001)
    pose = UserPose(r, *ang)
    scalar = element_distance(g, pose, ElementIndex(i_y, i_z))
    vector = float(element_distances(g, pose, np.array(i_y, float), np.array(i_z, float)))
    assert scalar == pytest.approx(vector, rel=1e-10)
    assert scalar >= r * pose.cos_x * (1 - 1e-12)


@pytest.mark.parametrize("shape,block", [((7, 5), 10), ((3, 1000), 7), ((1, 4), 1), ((9, 9), 1 << 20)])
def test_grid_blocks_cover_row_major(shape, block):
    g = ArrayGeometry(*shape, 1.0, 0.5)
    ys, zs = zip(*[(y.ravel(), z.ravel()) for y, z in grid_blocks(g, block)])
    iy, iz = np.concatenate(ys), np.concatenate(zs)
    mesh_y, mesh_z = np.meshgrid(g.offsets_y(), g.offsets_z())
    assert_allclose(iy, mesh_y.ravel())
    assert_allclose(iz, mesh_z.ravel())
