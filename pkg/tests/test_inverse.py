"""Gradient-map inversion, injectivity margins, and round trips."""

import numpy as np
import pytest

from descentlab import (
    ContractViolationError,
    DiagonalQuadratic,
    GradientMap,
    NesterovExample,
    NonConvergenceError,
    QuarticCopositive,
    StronglyConvexQuadratic,
    injectivity_margin_check,
    invert,
    roundtrip_check,
)


def test_linear_map_inverts_by_hand():
    # g(x, y) = (0.5 x, 1.5 y), so (0.5, 1.5) pulls back to (1, 1)
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    report = invert(gmap, np.array([0.5, 1.5]))
    np.testing.assert_allclose(report.solution, [1.0, 1.0], atol=1e-12)
    assert report.residual <= 1e-10
    assert report.subproblem_modulus == 0.5


def test_nonlinear_map_recovers_known_preimage():
    gmap = GradientMap(NesterovExample(), 0.05)
    y = gmap.step(np.array([1.0, 2.0]))
    np.testing.assert_allclose(y, [0.95, 1.7])
    report = invert(gmap, y)
    np.testing.assert_allclose(report.solution, [1.0, 2.0], atol=1e-9)
    assert report.residual <= 1e-10
    assert report.subproblem_modulus == pytest.approx(0.45)
    assert 0 <= report.inner_iterations <= 200


def test_critical_points_are_their_own_preimages():
    gmap = GradientMap(NesterovExample(), 0.09)
    for point in gmap.objective.known_critical_points():
        report = invert(gmap, point.location)
        np.testing.assert_allclose(report.solution, point.location, atol=1e-9)


def test_preimage_is_unique_regardless_of_start():
    gmap = GradientMap(NesterovExample(), 0.05)
    y = gmap.step(np.array([1.0, 2.0]))
    a = invert(gmap, y)
    b = invert(gmap, y, x0=y + np.array([0.1, -0.1]))
    gap = float(np.max(np.abs(a.solution - b.solution)))
    assert gap <= 10 * 1e-10


def test_invert_validates_target():
    gmap = GradientMap(NesterovExample(), 0.09)
    with pytest.raises(ContractViolationError):
        invert(gmap, np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ContractViolationError):
        invert(gmap, np.array([np.nan, 0.0]))


def test_invert_budget_exhaustion_reports_best_residual():
    gmap = GradientMap(NesterovExample(), 0.09)
    with pytest.raises(NonConvergenceError) as excinfo:
        invert(gmap, gmap.step(np.array([1.0, 2.0])), max_inner=1)
    assert np.isfinite(excinfo.value.best_residual)
    assert excinfo.value.best_residual > 0.0


def test_prox_solve_report_to_dict():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    d = invert(gmap, np.array([0.5, 1.5])).to_dict()
    assert set(d) == {"solution", "residual", "inner_iterations", "subproblem_modulus"}
    assert d["subproblem_modulus"] == 0.5


def test_injectivity_margin_on_linear_map():
    # ratio of ||g(x) - g(y)|| to ||x - y|| lives in [0.5, 1.5] exactly
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    report = injectivity_margin_check(gmap, n_pairs=1000, seed=0)
    assert report.violations == 0
    assert report.n_used == 1000
    assert report.threshold == pytest.approx(0.5 - 1e-9)
    assert 0.5 <= report.min_ratio <= 1.5


def test_injectivity_margin_on_nesterov_example():
    gmap = GradientMap(NesterovExample(), 0.99 / 11.0)
    report = injectivity_margin_check(gmap, n_pairs=1000, seed=0)
    assert report.violations == 0
    assert report.min_ratio >= report.threshold
    assert report.threshold == pytest.approx(0.01 - 1e-9)


def test_injectivity_margin_validates_pair_count():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    with pytest.raises(ContractViolationError):
        injectivity_margin_check(gmap, n_pairs=0)


@pytest.mark.parametrize(
    "objective",
    [
        DiagonalQuadratic([1.0, -1.0]),
        StronglyConvexQuadratic([1.0, 3.0]),
        NesterovExample(),
        QuarticCopositive(np.eye(2)),
    ],
    ids=lambda o: o.name,
)
def test_roundtrip_residuals_stay_small(objective):
    gmap = GradientMap(objective, 0.5 / objective.lipschitz_bound())
    report = roundtrip_check(gmap, n_samples=50, seed=3)
    assert report.max_forward_residual <= 1e-8
    assert report.max_backward_residual <= 1e-8


def test_roundtrip_on_linear_map_is_machine_exact():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    report = roundtrip_check(gmap, n_samples=50, seed=0)
    assert report.max_forward_residual <= 1e-12
    assert report.max_backward_residual <= 1e-12


def test_roundtrip_validates_sample_count():
    gmap = GradientMap(DiagonalQuadratic([1.0, -1.0]), 0.5)
    with pytest.raises(ContractViolationError):
        roundtrip_check(gmap, n_samples=0)
