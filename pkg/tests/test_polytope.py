"""Geometry layer: containment, support, redundancy, images."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symmpc.errors import EmptyPolytope, NonPositiveOffset, SingularMap
from symmpc.polytope import Polytope

from oracles import polygon_redundancy


def rot(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def test_box_rows_and_containment():
    box = Polytope.box([1.0, 2.0])
    assert box.dim == 2
    assert box.nrows == 4
    assert box.contains([0.5, -1.5])
    assert box.contains([1.0, 2.0])
    assert not box.contains([1.1, 0.0])


def test_support_of_box():
    box = Polytope.box([1.0, 2.0])
    assert box.support([1.0, 0.0]) == pytest.approx(1.0)
    assert box.support([0.0, -1.0]) == pytest.approx(2.0)
    assert box.support([1.0, 1.0]) == pytest.approx(3.0)


def test_chebyshev_center_of_shifted_box():
    poly = Polytope(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
                    np.array([3.0, 1.0, 1.0, 1.0]))
    center, radius = poly.chebyshev()
    assert radius == pytest.approx(1.0)
    # center need not be unique along x1; it must clear every facet by radius
    norms = np.linalg.norm(poly.normals, axis=1)
    assert np.all(poly.offsets - poly.normals @ center >= radius * norms - 1e-9)


def test_chebyshev_detects_empty():
    poly = Polytope(np.array([[1.0], [-1.0]]), np.array([1.0, -2.0]))
    _, radius = poly.chebyshev()
    assert radius < 0


def test_normalize_unit_offsets():
    poly = Polytope(np.array([[2.0, 0.0], [0.0, -4.0]]), np.array([4.0, 8.0]))
    normed = poly.normalize()
    assert np.allclose(normed.offsets, 1.0)
    # same set
    assert poly.support([1.0, 0.0]) == pytest.approx(normed.support([1.0, 0.0]))


def test_normalize_rejects_nonpositive_offset():
    poly = Polytope(np.array([[1.0, 0.0]]), np.array([0.0]))
    with pytest.raises(NonPositiveOffset):
        poly.normalize()


def test_remove_redundancy_drops_dominated_rows():
    base = Polytope.box([1.0, 1.0])
    loose = Polytope(
        np.vstack([base.normals, [[1.0, 1.0], [1.0, 0.0]]]),
        np.concatenate([base.offsets, [5.0, 3.0]]),
    )
    cleaned = loose.remove_redundancy()
    assert cleaned.nrows == 4
    assert cleaned.set_equal(base)


def test_remove_redundancy_keeps_duplicates_once():
    box = Polytope.box([1.0, 1.0])
    doubled = Polytope(np.vstack([box.normals, 2.0 * box.normals]),
                       np.concatenate([box.offsets, 2.0 * box.offsets]))
    cleaned = doubled.remove_redundancy()
    assert cleaned.nrows == 4


def test_remove_redundancy_raises_on_empty():
    poly = Polytope(np.array([[1.0], [-1.0]]), np.array([-2.0, 1.0]))
    with pytest.raises(EmptyPolytope):
        poly.remove_redundancy()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0),
                          st.floats(0.6, 3.0)),
                min_size=0, max_size=8))
def test_remove_redundancy_matches_vertex_oracle(extra_rows):
    """Random rows around the unit box; oracle = vertex enumeration."""
    normals = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
    offsets = [1.0, 1.0, 1.0, 1.0]
    for ax, ay, b in extra_rows:
        if abs(ax) + abs(ay) < 1e-3:
            continue
        normals.append([ax, ay])
        offsets.append(b)
    poly = Polytope(np.array(normals), np.array(offsets))
    keep = polygon_redundancy(normals, offsets)
    cleaned = poly.remove_redundancy()
    expected = Polytope(np.array(normals)[keep], np.array(offsets)[keep])
    assert cleaned.set_equal(expected)


def test_image_of_box_under_rotation():
    box = Polytope.box([1.0, 1.0])
    quarter = box.image(rot(np.pi / 4))
    assert quarter.contains(rot(np.pi / 4) @ np.array([1.0, 1.0]))
    assert not quarter.contains([1.0, 1.0])


def test_image_rejects_singular_map():
    box = Polytope.box([1.0, 1.0])
    with pytest.raises(SingularMap):
        box.image(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_linear_image_equals_box_symmetry():
    box = Polytope.box([1.0, 1.0])
    assert box.linear_image_equals(rot(np.pi / 2))
    assert box.linear_image_equals(-np.eye(2))
    assert not box.linear_image_equals(2.0 * np.eye(2))
    assert not box.linear_image_equals(rot(np.pi / 5))


def test_set_equal_modulo_row_scaling_and_order():
    box = Polytope.box([1.0, 1.0])
    other = Polytope(np.array([[0.0, -2.0], [2.0, 0.0],
                               [0.0, 2.0], [-2.0, 0.0]]),
                     np.array([2.0, 2.0, 2.0, 2.0]))
    assert box.set_equal(other)
    assert not box.set_equal(Polytope.box([1.0, 1.1]))


def test_json_round_trip():
    box = Polytope.box([1.0, 2.0])
    again = Polytope.from_json(box.to_json())
    assert np.array_equal(box.normals, again.normals)
    assert np.array_equal(box.offsets, again.offsets)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.2, 4.0), min_size=1, max_size=4))
def test_normalize_idempotent(radii):
    poly = Polytope.box(radii).normalize()
    again = poly.normalize()
    assert np.allclose(poly.normals, again.normals)
    assert np.allclose(poly.offsets, again.offsets)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2 * np.pi))
def test_support_invariant_under_rotation_pair(angle):
    """sup over R(box) in direction d equals sup over box in R'd."""
    box = Polytope.box([1.0, 0.5])
    mat = rot(angle)
    image = box.image(mat)
    direction = np.array([0.3, -0.8])
    lhs = image.support(direction)
    rhs = box.support(mat.T @ direction)
    assert lhs == pytest.approx(rhs, abs=1e-9)
