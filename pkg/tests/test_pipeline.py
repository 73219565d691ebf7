import numpy as np
import pytest
from numpy.testing import assert_allclose

import srcube.pipeline as pipeline
from oracles import hot_top_series
from srcube.errors import ConfigError, GeometryError, SolveError, StepError
from srcube.error_estimation import closed_grid, interior_grid
from srcube.geometry import BoundaryData, Point3, harmonic_target, uniform_collocation
from srcube.pipeline import (ProblemSpec, check_bands, compare_backends, corner_slice, corner_slice_points,
                             evaluate, evaluate_many, load_solution, save_solution, series_oracle, solve,
                             superposition)
from srcube.regular_phase import ResidualData, build_mfs


# --- problem configuration ---
@pytest.mark.parametrize("kwargs", [
    {"n": 0}, {"placement": "random"}, {"backend": "fem"}, {"alpha": 1.0}, {"backend": "poly", "degree": 12},
    {"n_cheb": 2}, {"base_k": 65}, {"rule": "trapezoid"}, {"condition": "exact"}, {"threads": 0},
])
def test_problem_spec_validation(hot_top, kwargs):
    with pytest.raises(ConfigError):
        ProblemSpec(hot_top, **kwargs)


def test_problem_spec_dict_round_trip(hot_top):
    spec = ProblemSpec(hot_top, n=7, backend="poly", degree=9, telles=True)
    again = ProblemSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()


# --- the series oracle ---
def test_series_oracle_matches_an_explicit_double_sum():
    pts = np.array([[0.3, 0.6, 0.8], [0.5, 0.5, 0.5], [0.15, 0.9, 0.2]])
    fast = series_oracle(pts)
    for p, v in zip(pts, fast):
        assert v == pytest.approx(hot_top_series(*p), abs=1e-12)
    assert fast[1] == pytest.approx(1.0 / 6.0, abs=1e-12)


# --- quick solves ---
def test_zero_data_solves_to_zero():
    sol = solve(ProblemSpec(BoundaryData.piecewise_constant({}), n=2, base_k=8))
    assert np.all(sol.residual.values == 0.0)
    assert np.all(sol.approximant.coeffs == 0.0)
    assert evaluate(sol, (0.4, 0.5, 0.6)) == 0.0
    assert sol.error.e_max == 0.0


def test_evaluate_rejects_boundary_points(small_hot_top_solution):
    with pytest.raises(GeometryError):
        evaluate(small_hot_top_solution, (0.5, 0.5, 1.0))
    with pytest.raises(GeometryError):
        evaluate_many(small_hot_top_solution, [(0.5, 0.5, 0.5), (0.0, 0.2, 0.2)])


def test_evaluate_many_matches_pointwise(small_hot_top_solution):
    pts = np.array([[0.2, 0.3, 0.4], [0.5, 0.5, 0.95], [0.8, 0.1, 0.6]])
    batch = evaluate_many(small_hot_top_solution, pts, threads=2)
    for p, v in zip(pts, batch):
        assert evaluate(small_hot_top_solution, p) == pytest.approx(v, abs=1e-14)


def test_failures_are_tagged_with_their_step(hot_top, monkeypatch):
    def broken(*args, **kwargs):
        raise SolveError("singular")

    monkeypatch.setattr(pipeline, "build_mfs", broken)
    with pytest.raises(StepError) as info:
        solve(ProblemSpec(hot_top, n=2, base_k=8, estimate_error=False))
    assert info.value.step == 4
    assert isinstance(info.value.cause, SolveError)


def test_solution_file_round_trip(small_hot_top_solution, tmp_path):
    path = tmp_path / "solution.txt"
    save_solution(small_hot_top_solution, path)
    assert path.read_text().startswith("SRCUBE-SOLUTION 1\n")
    again = load_solution(path)
    pts = np.array([[0.2, 0.3, 0.4], [0.5, 0.5, 0.9]])
    assert np.array_equal(evaluate_many(again, pts), evaluate_many(small_hot_top_solution, pts))
    assert again.spec.to_dict() == small_hot_top_solution.spec.to_dict()
    assert again.diagnostics.condition == small_hot_top_solution.diagnostics.condition


def test_load_solution_rejects_other_files(tmp_path):
    path = tmp_path / "other.txt"
    path.write_text("hello\n")
    with pytest.raises(ConfigError):
        load_solution(path)


def test_report_fields(small_hot_top_solution):
    report = small_hot_top_solution.report()
    assert report["backend"] == "mfs"
    assert report["N"] == 24
    assert report["e_r"] is None
    assert set(report["timings"]) >= {"collocation", "singular", "regular"}


# --- corner slices ---
def test_corner_slice_geometry():
    pts = corner_slice_points((0.0, 0.0, 1.0), 0.0866, 1)
    assert pts.shape == (1, 3)
    leg = 0.0866 * np.sqrt(3.0)
    assert_allclose(pts[0], [leg / 3, leg / 3, 1.0 - leg / 3])
    many = corner_slice_points((0.0, 0.0, 1.0), 0.0866, 8)
    assert many.shape == (64, 3)
    # every sample lies on the plane at the requested distance from the corner
    distance = (many[:, 0] + many[:, 1] + (1.0 - many[:, 2])) / np.sqrt(3.0)
    assert_allclose(distance, 0.0866, atol=1e-14)


@pytest.mark.parametrize("args", [((0.5, 0.0, 1.0), 0.1, 4), ((0.0, 0.0, 1.0), 0.0, 4),
                                  ((0.0, 0.0, 1.0), 0.6, 4), ((0.0, 0.0, 1.0), 0.1, 0)])
def test_corner_slice_rejects_bad_arguments(args):
    with pytest.raises(GeometryError):
        corner_slice_points(*args)


def test_corner_slice_values(small_hot_top_solution):
    samples = corner_slice(small_hot_top_solution, resolution=3)
    assert len(samples) == 9
    assert all(isinstance(p, Point3) for p, _ in samples)
    by_point = {(round(p.x, 12), round(p.y, 12), round(p.z, 12)): v for p, v in samples}
    for (x, y, z), v in by_point.items():
        assert by_point[(y, x, z)] == pytest.approx(v, abs=1e-8)


# --- full hot-top solve ---
@pytest.mark.slow
def test_hot_top_center_value(hot_top_solution):
    assert evaluate(hot_top_solution, (0.5, 0.5, 0.5)) == pytest.approx(1.0 / 6.0, abs=5e-5)
    near = evaluate(hot_top_solution, (0.5, 0.5, 0.9))
    assert 1.0 / 6.0 < near < 1.0


@pytest.mark.slow
def test_hot_top_error_estimate(hot_top_solution):
    err = hot_top_solution.error
    assert err.J == 600
    assert err.e_r <= 1e-4
    assert err.label == "estimated bound"


@pytest.mark.slow
def test_hot_top_matches_the_series(hot_top_solution):
    g = np.linspace(0.1, 0.9, 10)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    assert np.max(np.abs(evaluate_many(hot_top_solution, pts) - series_oracle(pts))) <= 5e-5


@pytest.mark.slow
def test_hot_top_corner_slice_full_resolution(hot_top_solution):
    samples = corner_slice(hot_top_solution, (0.0, 0.0, 1.0), 0.0866, 60)
    assert len(samples) == 3600
    values = np.array([v for _, v in samples])
    assert np.all((values >= -1e-3) & (values <= 1.0 + 1e-3))


@pytest.mark.slow
def test_closed_form_data_reproduces_the_target():
    sol = solve(ProblemSpec(BoundaryData.harmonic("u1"), n=5, threads=4))
    assert evaluate(sol, (0.5, 0.5, 0.5)) == pytest.approx(0.0, abs=1e-4)
    x = np.array([0.3, 0.7, 0.2])
    assert evaluate(sol, x) == pytest.approx(float(BoundaryData.harmonic("u1").target(x)), abs=1e-4)


@pytest.mark.slow
def test_six_hot_faces_sum_to_one():
    pts = np.array([[0.5, 0.5, 0.5], [0.2, 0.7, 0.4], [0.9, 0.15, 0.85]])
    assert_allclose(superposition(pts, n=5, threads=4), 1.0, atol=3e-4)


@pytest.mark.slow
def test_backend_comparison_rows():
    rows = compare_backends()
    assert [(r["backend"], r["target"]) for r in rows] == [("mfs", "u1"), ("mfs", "u2"),
                                                          ("poly", "u1"), ("poly", "u2")]
    by_key = {(r["backend"], r["target"]): r for r in rows}
    assert by_key["mfs", "u2"]["error"] <= 6e-5
    assert by_key["mfs", "u1"]["error"] <= 1e-4
    assert 1e15 <= by_key["poly", "u1"]["condition"] <= 1e20
    assert check_bands(rows, 5) == []
    bad = check_bands([{"backend": "mfs", "target": "u2", "error": 1.0, "condition": 1e8}], 5)
    assert bad == [("mfs", "u2", "error", 1.0, 2e-6, 6e-5)]


def test_backend_comparison_counts_boundary_nodes():
    spec = ProblemSpec(BoundaryData.harmonic("u2"), n=3, estimate_error=False)
    (row,) = compare_backends([spec], grid=11)
    colloc = uniform_collocation(3)
    target = harmonic_target("u2")
    P, _ = build_mfs(ResidualData(colloc, target(colloc.points)))
    closed = np.max(np.abs(P.evaluate(closed_grid(11)) - target(closed_grid(11))))
    inside = np.max(np.abs(P.evaluate(interior_grid(11)) - target(interior_grid(11))))
    assert row["error"] == closed
    assert inside <= closed


def test_load_solution_wraps_read_and_parse_failures(small_hot_top_solution, tmp_path):
    with pytest.raises(ConfigError):
        load_solution(tmp_path / "absent.txt")
    path = tmp_path / "solution.txt"
    save_solution(small_hot_top_solution, path)
    lines = path.read_text().splitlines()
    for broken in (lines[:3], [lines[0], "PROBLEM {oops"] + lines[2:], lines[:-3]):
        path.write_text("\n".join(broken) + "\n")
        with pytest.raises(ConfigError):
            load_solution(path)
    with pytest.raises(ConfigError):
        save_solution(small_hot_top_solution, tmp_path / "no" / "such" / "dir" / "solution.txt")


def test_spectral_backend_through_the_pipeline():
    data = BoundaryData.harmonic("u1")
    sol = solve(ProblemSpec(data, backend="cheb", n_cheb=8, estimate_error=False))
    assert sol.diagnostics.backend == "cheb"
    x = np.array([0.5, 0.5, 0.5])
    assert evaluate(sol, x) == pytest.approx(float(data.target(x)), abs=1e-2)
    (row,) = compare_backends([ProblemSpec(data, backend="cheb", n_cheb=12, estimate_error=False)])
    assert row["error"] <= 1e-7
