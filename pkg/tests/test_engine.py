"""Gradient map and iteration engine: hand-checked steps, the closed-form
quadratic oracle, stop reasons, and batch/single equivalence."""

import numpy as np
import pytest

from descentlab import (
    ContractViolationError,
    DiagonalQuadratic,
    GradientMap,
    NesterovExample,
    QuarticCopositive,
    StopPolicy,
    StopReason,
    Trajectory,
    alpha_from_theta,
    closed_form_quadratic,
    descent_violations,
    run,
    run_many,
)

RECORD_ALL = StopPolicy(tol=0.0, divergence_radius=1e300, max_iters=50)


def test_step_by_hand_on_diagonal_quadratic():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    np.testing.assert_allclose(gmap.step(np.array([1.0, 1.0])), [0.5, 1.5])


def test_step_by_hand_outside_certified_regime():
    # alpha * L = 1.1 needs the validation bypass; the algebra still holds
    gmap = GradientMap(NesterovExample(), 0.1, validate=False)
    np.testing.assert_allclose(gmap.step(np.array([1.0, 2.0])), [0.9, 1.4])


def test_jacobian_by_hand():
    gmap = GradientMap(DiagonalQuadratic([2.0, -0.5]), 0.25)
    np.testing.assert_allclose(
        gmap.jacobian(np.array([0.0, 0.0])), np.diag([0.5, 1.125])
    )
    identity = GradientMap(NesterovExample(), 0.0, validate=False)
    np.testing.assert_allclose(identity.jacobian(np.array([1.0, 2.0])), np.eye(2))


def test_alpha_times_lipschitz_must_stay_below_one():
    with pytest.raises(ContractViolationError):
        GradientMap(DiagonalQuadratic([1.0, -1.0]), 1.0)
    with pytest.raises(ContractViolationError):
        GradientMap(DiagonalQuadratic([1.0, -1.0]), 1.5)
    with pytest.raises(ContractViolationError):
        GradientMap(NesterovExample(), 0.1)
    with pytest.raises(ContractViolationError):
        GradientMap(NesterovExample(), -0.01)
    assert GradientMap(NesterovExample(), 0.09).alpha == 0.09


def test_alpha_from_theta():
    assert alpha_from_theta(NesterovExample(), 0.99) == pytest.approx(0.09, abs=1e-15)
    assert alpha_from_theta(DiagonalQuadratic([2.0, -0.5]), 0.5) == 0.25
    with pytest.raises(ContractViolationError):
        alpha_from_theta(NesterovExample(), 1.0)
    with pytest.raises(ContractViolationError):
        alpha_from_theta(NesterovExample(), 0.0)
    with pytest.raises(ContractViolationError):
        alpha_from_theta(QuarticCopositive(np.zeros((1, 1))), 0.5)


def test_closed_form_quadratic_by_hand():
    np.testing.assert_allclose(
        closed_form_quadratic([1.0, -1.0], 0.5, [1.0, 0.0], 3), [0.125, 0.0]
    )
    np.testing.assert_allclose(
        closed_form_quadratic([1.0, -1.0], 0.5, [0.0, 1.0], 3), [0.0, 3.375]
    )
    np.testing.assert_allclose(
        closed_form_quadratic([1.0, -1.0], 0.5, [1.0, 1.0], 0), [1.0, 1.0]
    )
    with pytest.raises(ContractViolationError):
        closed_form_quadratic([1.0], 0.5, [1.0], -1)
    with pytest.raises(ContractViolationError):
        closed_form_quadratic([1.0, 2.0], 0.5, [1.0], 4)


def test_engine_matches_closed_form_oracle_bitwise_for_dyadic_steps():
    # alpha * lambda in {0.5, -0.5}: per-step arithmetic rounds identically
    obj = DiagonalQuadratic([1.0, -1.0])
    gmap = GradientMap(obj, 0.5)
    rng = np.random.default_rng(11)
    for x0 in rng.uniform(-2.0, 2.0, size=(20, 2)):
        traj = run(gmap, x0, RECORD_ALL)
        assert traj.n_steps == 50
        for k in (1, 7, 50):
            oracle = closed_form_quadratic(obj.lambdas, 0.5, x0, k)
            assert np.array_equal(traj.iterates[k], oracle)


def test_engine_matches_closed_form_oracle_generic_spectrum():
    obj = DiagonalQuadratic([1.3, -0.7])
    gmap = GradientMap(obj, 0.3)
    rng = np.random.default_rng(12)
    for x0 in rng.uniform(-2.0, 2.0, size=(20, 2)):
        traj = run(gmap, x0, RECORD_ALL)
        oracle = closed_form_quadratic(obj.lambdas, 0.3, x0, 50)
        scale = np.maximum(1.0, np.abs(oracle))
        assert np.max(np.abs(traj.iterates[50] - oracle) / scale) <= 1e-12


def test_recorded_iterates_follow_the_map_bitwise():
    gmap = GradientMap(NesterovExample(), 0.09)
    traj = run(gmap, np.array([0.7, -0.4]), StopPolicy(tol=0.0, max_iters=30))
    for k in range(traj.n_steps):
        assert np.array_equal(traj.iterates[k + 1], gmap.step(traj.iterates[k]))
    np.testing.assert_array_equal(traj.f_values, gmap.objective.value(traj.iterates))


def test_critical_points_are_fixed_points():
    gmap = GradientMap(NesterovExample(), 0.09)
    for point in gmap.objective.known_critical_points():
        np.testing.assert_array_equal(gmap.step(point.location), point.location)


def test_stop_reason_grad_norm_below_tol():
    gmap = GradientMap(DiagonalQuadratic([1.0, 2.0]), 0.4)
    traj = run(gmap, np.array([1.0, 1.0]))
    assert traj.stop_reason is StopReason.GRAD_NORM_BELOW_TOL
    assert traj.final_grad_norm <= 1e-10
    np.testing.assert_allclose(traj.final_x, [0.0, 0.0], atol=1e-10)


def test_stop_reason_diverged_on_expanding_mode():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    traj = run(gmap, np.array([0.0, 1.0]))
    assert traj.stop_reason is StopReason.DIVERGED
    assert float(np.sqrt(np.sum(traj.final_x**2))) >= 1e6
    # 1.5^k first exceeds 1e6 at k = 35
    assert traj.n_steps == 35


def test_stop_reason_max_iters():
    gmap = GradientMap(DiagonalQuadratic([1.0, 2.0]), 0.4)
    traj = run(gmap, np.array([1.0, 1.0]), StopPolicy(tol=0.0, max_iters=5))
    assert traj.stop_reason is StopReason.MAX_ITERS
    assert traj.n_steps == 5


def test_stop_reason_left_domain_box_when_certificate_is_local():
    obj = NesterovExample(domain_box=[[-0.5, 0.5], [-0.5, 0.5]])
    assert obj.lipschitz_bound() == 1.0
    gmap = GradientMap(obj, 0.9)
    traj = run(gmap, np.array([0.0, 0.4]))
    assert traj.stop_reason is StopReason.LEFT_DOMAIN_BOX
    # y <- y(1.9 - 0.9 y^2) pushes 0.4 to 0.7024 in one step
    np.testing.assert_allclose(traj.final_x, [0.0, 0.7024])


def test_quadratics_may_leave_the_box_without_stopping():
    # global certificate: the diverging mode passes ||x|| = 2 silently
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    traj = run(gmap, np.array([0.0, 1.0]))
    assert not np.all(gmap.objective.contains(traj.iterates))
    assert traj.stop_reason is StopReason.DIVERGED


def test_start_outside_local_box_rejected():
    gmap = GradientMap(NesterovExample(), 0.09)
    with pytest.raises(ContractViolationError):
        run(gmap, np.array([3.0, 0.0]))
    with pytest.raises(ContractViolationError):
        run(gmap, np.array([1.0, 2.0, 3.0]))


def test_stop_policy_validation():
    with pytest.raises(ContractViolationError):
        StopPolicy(tol=-1e-3)
    with pytest.raises(ContractViolationError):
        StopPolicy(divergence_radius=0.0)
    with pytest.raises(ContractViolationError):
        StopPolicy(max_iters=-1)


def test_run_many_matches_single_runs_bitwise():
    gmap = GradientMap(NesterovExample(), 0.09)
    rng = np.random.default_rng(5)
    x0s = rng.uniform(-2.0, 2.0, size=(12, 2))
    policy = StopPolicy(tol=1e-10, max_iters=4000)
    batch = run_many(gmap, x0s, policy)
    for i, x0 in enumerate(x0s):
        traj = run(gmap, x0, policy)
        assert np.array_equal(batch.final_x[i], traj.final_x)
        assert batch.final_f[i] == traj.f_values[-1]
        assert batch.final_grad_norm[i] == traj.final_grad_norm
        assert batch.iterations[i] == traj.n_steps
        assert batch.stop_reasons[i] is traj.stop_reason


def test_run_many_mixed_stop_reasons():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    x0s = np.array([[1.0, 0.0], [0.0, 1.0]])
    batch = run_many(gmap, x0s, StopPolicy(tol=1e-10, divergence_radius=1e6))
    assert batch.stop_reasons[0] is StopReason.GRAD_NORM_BELOW_TOL
    assert batch.stop_reasons[1] is StopReason.DIVERGED


def test_run_many_validates_batch_shape():
    gmap = GradientMap(NesterovExample(), 0.09)
    with pytest.raises(ContractViolationError):
        run_many(gmap, np.zeros((4, 3)))
    with pytest.raises(ContractViolationError):
        run_many(gmap, np.array([[3.0, 0.0]]))


def test_descent_inequality_holds_along_certified_runs():
    for obj, alpha in [
        (NesterovExample(), 0.09),
        (DiagonalQuadratic([1.0, 2.0]), 0.4),
        (QuarticCopositive(np.eye(2)), 0.99 / 12.0),
    ]:
        traj = run(GradientMap(obj, alpha), 0.25 * np.ones(obj.dimension),
                   StopPolicy(tol=0.0, max_iters=500))
        assert descent_violations(traj, obj) == 0


def test_descent_violations_counts_fabricated_increase():
    obj = DiagonalQuadratic([1.0, 1.0])
    traj = Trajectory(
        iterates=np.array([[1.0, 0.0], [1.0, 0.0]]),
        f_values=np.array([0.5, 0.9]),
        grad_norms=np.array([1.0, 1.0]),
        stop_reason=StopReason.MAX_ITERS,
        alpha=0.1,
    )
    assert descent_violations(traj, obj) == 1


def test_gradient_map_run_method_delegates():
    gmap = GradientMap(DiagonalQuadratic([1.0, 2.0]), 0.4)
    a = gmap.run(np.array([1.0, 1.0]))
    b = run(gmap, np.array([1.0, 1.0]))
    assert np.array_equal(a.iterates, b.iterates)
    assert a.stop_reason is b.stop_reason


def test_trajectory_csv_layout(tmp_path):
    gmap = GradientMap(NesterovExample(), 0.09)
    traj = run(gmap, np.array([0.5, 0.3]), StopPolicy(tol=0.0, max_iters=4))
    path = tmp_path / "trajectory.csv"
    traj.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k,x_1,x_2,f,grad_norm"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == 0.5
    assert float(first[4]) == traj.grad_norms[0]
