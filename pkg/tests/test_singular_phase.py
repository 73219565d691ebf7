import numpy as np
import pytest

from srcube.errors import GeometryError
from srcube.geometry import BoundaryData, Face, uniform_collocation
from srcube.singular_phase import hs_boundary, hs_boundary_batch, hs_interior, hs_interior_batch


def test_zero_data_gives_exact_zero():
    zero = BoundaryData.piecewise_constant({})
    ev = hs_interior((0.3, 0.4, 0.5), zero)
    assert ev.value == 0.0
    assert set(ev.depths.values()) == {-1}
    assert hs_boundary((0.5, 0.5, 1.0), zero).value == 0.0


def test_center_value_is_stable_in_the_base_order(hot_top):
    values = [hs_interior((0.5, 0.5, 0.5), hot_top, k).value for k in (8, 16, 24, 32)]
    assert max(values) - min(values) < 1e-8
    assert 0.0 < values[0] < 1.0


def test_only_nonzero_faces_are_integrated(hot_top):
    ev = hs_interior((0.5, 0.5, 0.9), hot_top)
    assert ev.depths["z1"] >= 1
    assert all(ev.depths[label] == -1 for label in ("x0", "x1", "y0", "y1", "z0"))
    assert ev.d == pytest.approx(0.1)


def test_near_face_value_tends_to_the_boundary_limit(hot_top):
    limit = hs_boundary((0.5, 0.5, 1.0), hot_top).value
    prev = None
    for eps in (1e-2, 1e-3, 1e-4):
        value = hs_interior((0.5, 0.5, 1.0 - eps), hot_top).value
        assert 0.0 < value < 1.1
        gap = abs(value - limit)
        if prev is not None:
            assert gap < prev
        prev = gap
    assert prev < 1e-3


def test_boundary_limit_agrees_with_extrapolated_interior_values(hot_top):
    colloc = uniform_collocation(5)
    for idx in range(0, colloc.count, 7)[:20]:
        p = colloc.points[idx]
        inward = -colloc.faces[idx].normal
        h1 = hs_interior(p + 1e-3 * inward, hot_top).value
        h2 = hs_interior(p + 1e-4 * inward, hot_top).value
        extrapolated = (10.0 * h2 - h1) / 9.0
        assert hs_boundary(p, hot_top).value == pytest.approx(extrapolated, abs=1e-4)


def test_linear_in_the_data():
    f1 = BoundaryData.hot_face("z1")
    f2 = BoundaryData.hot_face("x0", 2.0)
    both = BoundaryData.piecewise_constant({"z1": 1.0, "x0": 2.0})
    x = (0.3, 0.6, 0.7)
    assert hs_interior(x, both).value == pytest.approx(hs_interior(x, f1).value + hs_interior(x, f2).value,
                                                       abs=1e-12)


def test_commutes_with_cube_symmetry():
    x = np.array([0.21, 0.64, 0.37])
    a = hs_interior(x, BoundaryData.hot_face("x0")).value
    b = hs_interior(x[[1, 0, 2]], BoundaryData.hot_face("y0")).value
    assert a == pytest.approx(b, abs=1e-12)


def test_telles_and_simpson_options_agree(hot_top):
    x = (0.4, 0.55, 0.97)
    base = hs_interior(x, hot_top).value
    assert hs_interior(x, hot_top, telles=True).value == pytest.approx(base, abs=1e-6)
    assert hs_interior(x, hot_top, 32, rule="simpson").value == pytest.approx(base, abs=1e-3)


def test_harmonic_data_uses_every_face():
    ev = hs_interior((0.5, 0.5, 0.5), BoundaryData.harmonic("u1"))
    assert all(depth == 0 for depth in ev.depths.values())


def test_rejects_points_off_their_domain(hot_top):
    with pytest.raises(GeometryError):
        hs_interior((0.5, 0.5, 1.0), hot_top)
    with pytest.raises(GeometryError):
        hs_boundary((0.5, 0.5, 0.5), hot_top)
    with pytest.raises(GeometryError):
        hs_boundary((0.0, 0.0, 0.5), hot_top)


def test_batches_keep_input_order_across_threads(hot_top):
    pts = np.array([[0.2, 0.3, 0.4], [0.9, 0.1, 0.5], [0.5, 0.5, 0.95], [0.2, 0.3, 0.4]])
    serial = hs_interior_batch(pts, hot_top, threads=1)
    threaded = hs_interior_batch(pts, hot_top, threads=3)
    assert np.array_equal(serial, threaded)
    assert serial[0] == serial[3]

    colloc = uniform_collocation(2)
    on_faces = hs_boundary_batch(colloc.points, hot_top, threads=2)
    assert on_faces.shape == (24,)
    assert on_faces[20] == hs_boundary(colloc.points[20], hot_top).value
    assert face_block_is_hot(on_faces, colloc)


def face_block_is_hot(values, colloc):
    top = np.array([f is Face.Z1 for f in colloc.faces])
    return np.all(values[top] > 0.5) and np.all(values[~top] < 0.5)
