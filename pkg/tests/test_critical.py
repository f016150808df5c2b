"""Critical-point search, classification, and stable-set sampling."""

import numpy as np
import pytest

from descentlab import (
    Classification,
    ContractViolationError,
    DiagonalQuadratic,
    GradientMap,
    NesterovExample,
    QuarticCopositive,
    classify,
    find_critical_points,
    sample_local_stable_set,
    stable_subspace,
)


def test_classify_saddle_of_nesterov_example():
    rec = classify(NesterovExample(), np.array([0.0, 0.0]))
    assert rec.classification is Classification.STRICT_SADDLE
    assert rec.is_strict_saddle
    assert not rec.is_degenerate
    np.testing.assert_allclose(rec.hessian_eigenvalues, [-1.0, 1.0])
    assert rec.stable_dimension == 1
    # stable direction is the x-axis (eigenvalue +1)
    np.testing.assert_allclose(np.abs(rec.stable_subspace_basis[:, 0]), [1.0, 0.0])


def test_classify_minimum_of_nesterov_example():
    rec = classify(NesterovExample(), np.array([0.0, 1.0]))
    assert rec.classification is Classification.LOCAL_MIN
    assert not rec.is_strict_saddle
    assert not rec.is_degenerate
    np.testing.assert_allclose(rec.hessian_eigenvalues, [1.0, 2.0])
    assert rec.stable_dimension == 2


def test_classify_degenerate_quartic_origin():
    rec = classify(QuarticCopositive(np.eye(2)), np.array([0.0, 0.0]))
    assert rec.classification is Classification.DEGENERATE
    assert rec.is_degenerate
    assert not rec.is_strict_saddle
    np.testing.assert_allclose(rec.hessian_eigenvalues, [0.0, 0.0], atol=1e-15)
    assert rec.stable_dimension == 2


def test_classify_local_max_also_flags_strict_saddle():
    # the min-eigenvalue test is what the avoidance theory consumes, and a
    # maximum satisfies it; the headline class still says LocalMax
    rec = classify(DiagonalQuadratic([-1.0, -2.0]), np.array([0.0, 0.0]))
    assert rec.classification is Classification.LOCAL_MAX
    assert rec.is_strict_saddle
    assert rec.stable_dimension == 0
    assert rec.stable_subspace_basis.shape == (2, 0)


def test_classify_saddle_with_degenerate_direction():
    rec = classify(DiagonalQuadratic([-1.0, 0.0]), np.array([0.0, 0.0]))
    assert rec.classification is Classification.STRICT_SADDLE
    assert rec.is_strict_saddle
    assert rec.is_degenerate
    assert rec.stable_dimension == 1


def test_classify_rejects_noncritical_points():
    with pytest.raises(ContractViolationError):
        classify(NesterovExample(), np.array([0.5, 0.5]))
    # within a loosened gradient tolerance the same call goes through
    rec = classify(DiagonalQuadratic([1.0, 1.0]), np.array([1e-7, 0.0]))
    assert rec.grad_norm <= 1e-6


def test_record_spectral_factorization_invariants():
    obj = NesterovExample()
    for point in obj.known_critical_points():
        rec = classify(obj, point.location)
        w, v = rec.hessian_eigenvalues, rec.hessian_eigenvectors
        hess = obj.hessian(rec.location)
        assert np.max(np.abs(v @ np.diag(w) @ v.T - hess)) <= 1e-12
        assert np.max(np.abs(v.T @ v - np.eye(2))) <= 1e-12
        assert np.all(np.diff(w) >= 0.0)


def test_record_to_dict_is_json_friendly():
    rec = classify(NesterovExample(), np.array([0.0, 0.0]))
    d = rec.to_dict()
    assert d["classification"] == "StrictSaddle"
    assert d["location"] == [0.0, 0.0]
    assert d["stable_dimension"] == 1
    assert isinstance(d["hessian_eigenvalues"][0], float)


def test_find_critical_points_of_nesterov_example():
    records = find_critical_points(NesterovExample(), n_seeds=100, seed=0)
    assert len(records) == 3
    locations = np.array([rec.location for rec in records])
    np.testing.assert_allclose(
        locations, [[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]], atol=1e-9
    )
    assert [rec.classification for rec in records] == [
        Classification.LOCAL_MIN,
        Classification.STRICT_SADDLE,
        Classification.LOCAL_MIN,
    ]
    assert all(rec.grad_norm <= 1e-9 for rec in records)
    assert records.n_seeds == 100
    assert records.n_dropped == 0


def test_find_critical_points_of_quadratic():
    records = find_critical_points(DiagonalQuadratic([1.0, -1.0]), n_seeds=40, seed=1)
    assert len(records) == 1
    np.testing.assert_allclose(records[0].location, [0.0, 0.0], atol=1e-10)
    assert records[0].classification is Classification.STRICT_SADDLE


def test_find_critical_points_of_degenerate_quartic():
    # Newton contracts only linearly at the quartic's flat origin; the
    # polish phase must still pin every seed to one deduplicated root
    records = find_critical_points(QuarticCopositive(np.eye(2)), n_seeds=60, seed=2)
    assert len(records) == 1
    np.testing.assert_allclose(records[0].location, [0.0, 0.0], atol=1e-8)
    assert records[0].classification is Classification.DEGENERATE


def test_find_critical_points_validates_seed_count():
    with pytest.raises(ContractViolationError):
        find_critical_points(NesterovExample(), n_seeds=0)


def test_jacobian_spectrum_is_one_minus_alpha_times_hessian_spectrum():
    from descentlab import eigh_jacobi

    obj = NesterovExample()
    gmap = GradientMap(obj, 0.09)
    for point in obj.known_critical_points():
        rec = classify(obj, point.location)
        mu, _ = eigh_jacobi(gmap.jacobian(rec.location))
        expected = np.sort(1.0 - gmap.alpha * rec.hessian_eigenvalues)
        np.testing.assert_allclose(mu, expected, atol=1e-10)


def test_stable_subspace_of_saddle_is_the_contracting_axis():
    obj = NesterovExample()
    rec = classify(obj, np.array([0.0, 0.0]))
    # alpha = 0.1 sits outside the certified regime on the default box but
    # the subspace algebra is step-size independent; check both ways
    for gmap in [GradientMap(obj, 0.1, validate=False), GradientMap(obj, 0.09)]:
        basis = stable_subspace(gmap, rec)
        assert basis.shape == (2, 1)
        np.testing.assert_allclose(np.abs(basis[:, 0]), [1.0, 0.0], atol=1e-12)


def test_stable_subspace_of_minimum_is_everything():
    obj = NesterovExample()
    rec = classify(obj, np.array([0.0, 1.0]))
    basis = stable_subspace(GradientMap(obj, 0.09), rec)
    assert basis.shape == (2, 2)
    assert np.max(np.abs(basis.T @ basis - np.eye(2))) <= 1e-12


def test_stable_subspace_matches_record_basis_span():
    obj = DiagonalQuadratic([1.0, -1.0])
    rec = classify(obj, np.array([0.0, 0.0]))
    basis = stable_subspace(GradientMap(obj, 0.5), rec)
    record_basis = rec.stable_subspace_basis
    # same subspace: equal orthogonal projectors
    np.testing.assert_allclose(
        basis @ basis.T, record_basis @ record_basis.T, atol=1e-12
    )


def test_stable_subspace_of_degenerate_point_is_full():
    obj = QuarticCopositive(np.eye(2))
    rec = classify(obj, np.array([0.0, 0.0]))
    basis = stable_subspace(GradientMap(obj, 0.05), rec)
    assert basis.shape == (2, 2)


def test_stable_set_sample_of_nesterov_saddle_lies_on_axis():
    obj = NesterovExample()
    gmap = GradientMap(obj, 0.09)
    rec = classify(obj, np.array([0.0, 0.0]))
    sample = sample_local_stable_set(gmap, rec, radius=0.5, grid=41)
    assert sample.grid_spacing == pytest.approx(0.025)
    hits = sample.converged_points
    # every converging start sits exactly on the x-axis: one grid row
    assert hits.shape[0] == 41
    assert np.all(hits[:, 1] == 0.0)
    assert sample.max_subspace_distance <= 1e-12
    assert sample.max_subspace_distance <= sample.grid_spacing


def test_stable_set_sample_radius_zero_is_the_saddle_itself():
    obj = NesterovExample()
    gmap = GradientMap(obj, 0.09)
    rec = classify(obj, np.array([0.0, 0.0]))
    sample = sample_local_stable_set(gmap, rec, radius=0.0)
    assert sample.points.shape == (1, 2)
    np.testing.assert_array_equal(sample.points[0], rec.location)
    assert sample.converged.tolist() == [True]
    assert sample.max_subspace_distance == 0.0


def test_stable_set_sample_on_exact_linear_dynamics():
    obj = DiagonalQuadratic([1.0, -1.0])
    gmap = GradientMap(obj, 0.5)
    rec = classify(obj, np.array([0.0, 0.0]))
    sample = sample_local_stable_set(gmap, rec, radius=1.0, grid=21)
    hits = sample.converged_points
    assert hits.shape[0] == 21
    assert np.all(hits[:, 1] == 0.0)
    assert sample.max_subspace_distance == 0.0


def test_stable_set_sampling_rejects_bad_inputs():
    obj = NesterovExample()
    gmap = GradientMap(obj, 0.09)
    minimum = classify(obj, np.array([0.0, 1.0]))
    saddle = classify(obj, np.array([0.0, 0.0]))
    with pytest.raises(ContractViolationError):
        sample_local_stable_set(gmap, minimum, radius=0.5)
    with pytest.raises(ContractViolationError):
        sample_local_stable_set(gmap, saddle, radius=-0.1)
    with pytest.raises(ContractViolationError):
        sample_local_stable_set(gmap, saddle, radius=0.5, grid=0)
    obj3 = DiagonalQuadratic([1.0, -1.0, 1.0])
    rec3 = classify(obj3, np.zeros(3))
    with pytest.raises(ContractViolationError):
        sample_local_stable_set(GradientMap(obj3, 0.5), rec3, radius=0.5)


def test_stable_set_csv_layout(tmp_path):
    obj = DiagonalQuadratic([1.0, -1.0])
    gmap = GradientMap(obj, 0.5)
    rec = classify(obj, np.array([0.0, 0.0]))
    sample = sample_local_stable_set(gmap, rec, radius=0.5, grid=5)
    path = tmp_path / "stable_set.csv"
    sample.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x_1,x_2,converged_to_saddle"
    assert len(lines) == 1 + sample.points.shape[0]
    flags = [int(line.split(",")[-1]) for line in lines[1:]]
    assert sum(flags) == int(np.count_nonzero(sample.converged))
