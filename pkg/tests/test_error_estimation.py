import numpy as np
import pytest

from srcube.error_estimation import (ErrorReport, assess, closed_grid, e_max, error_bound, interior_grid,
                                     observation_check)
from srcube.errors import GeometryError
from srcube.geometry import ReferenceSet, harmonic_target, midpoint_reference, uniform_collocation
from srcube.regular_phase import ResidualData, build_mfs


def _fit(name, n=5):
    colloc = uniform_collocation(n)
    P, _ = build_mfs(ResidualData(colloc, harmonic_target(name)(colloc.points)))
    return P


def test_error_bound_doubles():
    report = error_bound(1e-5)
    assert report.e_r == 2e-5
    assert report.label == "estimated bound"
    assert error_bound(0.0).e_r == 0.0
    with pytest.raises(GeometryError):
        error_bound(-1e-9)


def test_e_max_of_an_accurate_fit():
    P = _fit("u2")
    ref = midpoint_reference(uniform_collocation(5))
    values = harmonic_target("u2")(ref.points)
    assert 0.0 < e_max(P, (ref, values)) <= 6e-5


def test_e_max_perturbation_and_subsets():
    P = _fit("u1", 3)
    ref = midpoint_reference(uniform_collocation(3))
    values = harmonic_target("u1")(ref.points)
    base = e_max(P, (ref, values))
    bumped = values.copy()
    bumped[7] += 1e-3
    assert e_max(P, (ref, bumped)) <= base + 1e-3
    sub = ReferenceSet(ref.points[:50], ref.faces[:50], ref.n)
    assert e_max(P, (sub, values[:50])) <= base


def test_empty_or_mismatched_reference_sets_are_rejected():
    P = _fit("u1", 2)
    empty = ReferenceSet(np.empty((0, 3)), (), 0)
    with pytest.raises(GeometryError):
        e_max(P, (empty, np.empty(0)))
    ref = midpoint_reference(uniform_collocation(2))
    with pytest.raises(GeometryError):
        e_max(P, (ref, np.zeros(3)))


def test_assess_reports_the_worst_point():
    P = _fit("u1", 3)
    ref = midpoint_reference(uniform_collocation(3))
    values = harmonic_target("u1")(ref.points)
    values[11] += 0.5
    report = assess(P, ref, values)
    assert report.worst_point == tuple(ref.points[11])
    assert report.J == 216
    assert report.e_r == 2 * report.e_max
    assert ErrorReport.from_dict(report.to_dict()) == report


def test_grids():
    assert interior_grid(21).shape == (19 ** 3, 3)
    assert closed_grid(21).shape == (21 ** 3, 3)
    assert interior_grid(21).min() > 0.0 and interior_grid(21).max() < 1.0


@pytest.mark.slow
@pytest.mark.parametrize("name", ["u1", "u2"])
@pytest.mark.parametrize("n", [5, 7])
def test_interior_error_stays_below_the_estimated_bound(name, n):
    P = _fit(name, n)
    interior, e_r = observation_check(P, name)
    assert interior <= e_r + 1e-9
