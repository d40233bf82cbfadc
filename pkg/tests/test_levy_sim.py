import math

import numpy as np
import pytest
from scipy import stats

from levylab import constants as K
from levylab import levy_sim as ls
from levylab import manifold as mf


def cfg(M=None, alpha=0.5, delta=1e-2, seed=3, **kw):
    return ls.JumpProcessConfig(alpha, delta, M or mf.torus(2), seed=seed, **kw)


def test_config_validation():
    with pytest.raises(ValueError):
        ls.JumpProcessConfig(1.0, 1e-3, mf.torus(2))
    with pytest.raises(ValueError):
        ls.JumpProcessConfig(0.5, 0.0, mf.torus(2))
    with pytest.raises(ValueError):
        ls.JumpProcessConfig(0.5, 1e-3, mf.torus(2), seed=-1)


def test_jump_rate_matches_levy_measure_tail():
    c = cfg(alpha=0.3, delta=0.01)
    expected = K.levy_constant(2, 0.3) * 2 * math.pi * 0.01 ** (-0.6) / 0.6
    assert ls.jump_rate(c) == pytest.approx(expected, rel=1e-14)


def test_sample_radius_is_pareto():
    rng = np.random.default_rng(0)
    r = ls.sample_radius(0.4, 0.01, 1.0 - rng.random(200000))
    assert r.min() >= 0.01
    # P(R > r) = (delta / r)^{2α}
    ks = stats.kstest((0.01 / r) ** 0.8, "uniform")
    assert ks.pvalue > 1e-3


def test_sample_jump_on_sphere_stays_on_sphere():
    c = cfg(mf.sphere(2))
    rng = np.random.default_rng(0)
    for _ in range(100):
        w, q = ls.sample_jump(c, np.array([0.0, 0.0, 1.0]), rng)
        assert w > 0
        assert abs(np.linalg.norm(q) - 1) < 1e-12


def test_trajectory_streams_are_distinct_and_reproducible():
    a = ls.trajectory_rng(5, 0).random(4)
    b = ls.trajectory_rng(5, 0).random(4)
    c = ls.trajectory_rng(5, 1).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_results_independent_of_worker_count():
    c = cfg(delta=0.02)
    t1 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 300, workers=1)
    t2 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 300, workers=2)
    np.testing.assert_array_equal(t1.tau, t2.tau)
    np.testing.assert_array_equal(t1.n_jumps, t2.n_jumps)


def test_results_independent_of_batch_size(monkeypatch):
    c = cfg(delta=0.02)
    t1 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 300)
    monkeypatch.setattr(ls, "BATCH", 7)
    t2 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 300)
    np.testing.assert_array_equal(t1.tau, t2.tau)


def test_prefix_of_larger_run_is_identical():
    c = cfg(delta=0.02)
    t1 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 100)
    t2 = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.1, 250)
    np.testing.assert_array_equal(t1.tau, t2.tau[:100])


def test_start_inside_target_is_captured_at_zero():
    tau, cens = ls.simulate_capture(cfg(), [0.5, 0.5], [0.52, 0.5], 0.05, np.random.default_rng(0))
    assert tau == 0.0 and not cens


def test_censoring_at_t_max():
    c = cfg()
    tab = ls.simulate_trajectories(c, None, [0.5, 0.5], 0.01, 200, t_max=0.01)
    assert tab.censored.any()
    assert np.all(tab.tau[tab.censored] == 0.01)
    est = ls.estimate_capture(c, "uniform", [0.5, 0.5], 0.01, 200, t_max=0.01)
    assert est.censoring_biased


def test_estimate_requires_enough_samples_and_known_start():
    with pytest.raises(ValueError):
        ls.estimate_capture(cfg(), "uniform", [0.5, 0.5], 0.1, 50)
    with pytest.raises(ValueError):
        ls.estimate_capture(cfg(), "everywhere", [0.5, 0.5], 0.1, 500)


def test_default_horizon_is_fifty_predictions():
    c = cfg()
    assert ls.default_t_max(c, 0.1) == pytest.approx(50 * K.capture_constant(2, 0.5) / 0.1)
    e = cfg(mf.euclidean(2))
    assert ls.default_t_max(e, 1.0) == pytest.approx(50 * 2 / math.pi)


def test_torus_translation_symmetry():
    # start and target shifted by the same lattice reflection give the same law
    c = cfg(delta=0.01, seed=11)
    a = ls.estimate_capture(c, [0.2, 0.3], [0.5, 0.5], 0.1, 3000)
    b = ls.estimate_capture(ls.JumpProcessConfig(0.5, 0.01, mf.torus(2), seed=12), [0.8, 0.7], [0.5, 0.5], 0.1, 3000)
    assert abs(a.mean - b.mean) < 3 * math.hypot(a.half_width_95, b.half_width_95)


def test_getoor_exit_time_three_dim():
    c = cfg(mf.euclidean(3), delta=3e-3, seed=5)
    est = ls.estimate_capture(c, [0, 0, 0], [0, 0, 0], 1.0, 6000)
    assert est.n_censored == 0
    assert abs(est.mean - 0.5) < 3 * est.half_width_95


def test_exit_time_scales_with_radius():
    # self-similarity: exit time from the ball of radius eps scales as eps^{2α}
    c = cfg(mf.euclidean(2), alpha=0.5, delta=1e-3, seed=9)
    est = ls.estimate_capture(c, [0, 0], [0, 0], 0.5, 5000)
    assert abs(est.mean - 0.5 * 2 / math.pi) < 3 * est.half_width_95


def test_gaussian_correction_runs_and_stays_close():
    c = cfg(mf.euclidean(2), delta=2e-2, seed=4, gaussian_correction=True)
    est = ls.estimate_capture(c, [0, 0], [0, 0], 1.0, 4000)
    assert abs(est.mean - 2 / math.pi) < 3 * est.half_width_95 + 0.02


def test_small_jump_variance_formula():
    c = cfg(alpha=0.5, delta=0.1)
    # ∫_{|v|<δ} v_1² C |v|^{-2-2α} dv
    expected = K.levy_constant(2, 0.5) * 2 * math.pi * 0.1 / (2 * 1.0)
    assert ls.small_jump_variance(c) == pytest.approx(expected)


def test_positions_at_sphere_norm():
    pts = ls.positions_at(cfg(mf.sphere(2)), [0, 0, 1], 0.05, 500)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_refinement_study():
    c = cfg(mf.euclidean(2), seed=1)
    st = ls.delta_refinement_study(c, [0, 0], [0, 0], 1.0, [0.1, 0.03, 0.01], 2000)
    assert len(st.rows()) == 3
    assert st.rate == pytest.approx(1.0)
    assert abs(st.extrapolated - 2 / math.pi) < 0.1
    with pytest.raises(ValueError):
        ls.delta_refinement_study(c, [0, 0], [0, 0], 1.0, [0.01, 0.1], 200)


def test_refinement_warns_on_coarse_cutoff():
    with pytest.warns(UserWarning):
        ls.delta_refinement_study(cfg(), "uniform", [0.5, 0.5], 0.05, [0.1, 0.08], 100)
