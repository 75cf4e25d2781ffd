"""Posterior statistics and both Thompson samplers.

Selection-frequency checks compare loops of real select calls against a
vectorized joint-draw oracle built here; the d = 1 identity test pins that
the scalar baseline and the multivariate sampler consume primitives in the
same order.
"""
import math

import numpy as np
import pytest

from mobandit.environments import NoiseStream, Observation
from mobandit.policies import (
    PosteriorState,
    ScalarPosteriorState,
    argmax_ties,
    empirical_covariance,
    gaussian_ts_select,
    initial_scalar_state,
    initial_state,
    mvn_ts_select,
    posterior_matrix,
    posterior_params,
    sample_posterior_matrix,
    scalar_update,
    update,
)
from mobandit.preferences import EpsilonConstraintPreference, LinearPreference


def state_with(counts, sums) -> PosteriorState:
    counts = np.asarray(counts, dtype=np.int64)
    sums = np.asarray(sums, dtype=float)
    outers = np.zeros((sums.shape[0], sums.shape[1], sums.shape[1]))
    return PosteriorState(counts=counts, sums=sums, outers=outers)


def selection_oracle(state, pref, n_draws, rng) -> np.ndarray:
    """Joint-draw estimate of Pr[a maximizes f(theta)], all actions at once."""
    means = state.sums / (state.counts + 1.0)[:, None]
    stds = 1.0 / np.sqrt(state.counts + 1.0)
    z = rng.standard_normal((n_draws, state.n_actions, state.dimension))
    thetas = means + stds[:, None] * z
    scores = pref.values(thetas.reshape(-1, state.dimension))
    winners = np.argmax(scores.reshape(n_draws, state.n_actions), axis=1)
    return np.bincount(winners, minlength=state.n_actions) / n_draws


class TestPosteriorParams:
    def test_unplayed_action_has_flat_posterior(self):
        state = initial_state(3, 2)
        mean, cov = posterior_params(state, 0)
        assert mean.values == (0.0, 0.0)
        assert np.array_equal(cov, np.eye(2))

    def test_single_observation(self):
        state = update(initial_state(2, 2), 0, (0.8, 0.4))
        mean, cov = posterior_params(state, 0)
        assert mean.values == pytest.approx((0.4, 0.2), abs=1e-15)
        assert np.allclose(cov, np.eye(2) / 2, atol=0.0)

    def test_four_observations(self):
        state = initial_state(1, 2)
        for _ in range(4):
            state = update(state, 0, (0.5, 0.5))
        mean, cov = posterior_params(state, 0)
        assert mean.values == pytest.approx((0.4, 0.4), abs=1e-15)
        assert np.allclose(cov, np.eye(2) / 5, atol=1e-15)

    def test_covariance_trace_decreases_with_count(self):
        state = initial_state(1, 3)
        traces = []
        for _ in range(6):
            _, cov = posterior_params(state, 0)
            traces.append(np.trace(cov))
            state = update(state, 0, (0.1, 0.2, 0.3))
        for n, tr in enumerate(traces):
            assert tr == pytest.approx(3.0 / (n + 1), abs=1e-12)
        assert all(b < a for a, b in zip(traces, traces[1:]))

    def test_general_conjugate_form_reduces_to_default(self):
        state = update(update(initial_state(2, 2), 0, (0.9, 0.1)), 0, (0.3, 0.7))
        mean_d, cov_d = posterior_params(state, 0)
        mean_g, cov_g = posterior_params(
            state,
            0,
            prior_mean=(0.0, 0.0),
            prior_cov=np.eye(2),
            outcome_cov=np.eye(2),
        )
        assert mean_g.values == pytest.approx(mean_d.values, abs=1e-12)
        assert np.allclose(cov_g, cov_d, atol=1e-12)

    def test_general_conjugate_form_matches_solve_oracle(self):
        rng = np.random.default_rng(17)
        state = initial_state(1, 2)
        for _ in range(5):
            state = update(state, 0, rng.random(2))
        mu0 = np.array([0.3, -0.2])
        s0 = np.array([[2.0, 0.5], [0.5, 1.0]])
        sa = np.array([[0.5, 0.0], [0.0, 0.25]])
        mean, cov = posterior_params(
            state, 0, prior_mean=mu0, prior_cov=s0, outcome_cov=sa
        )
        n = 5
        prec = np.linalg.solve(s0, np.eye(2)) + n * np.linalg.solve(sa, np.eye(2))
        cov_want = np.linalg.solve(prec, np.eye(2))
        mean_want = cov_want @ (
            np.linalg.solve(s0, mu0) + np.linalg.solve(sa, state.sums[0])
        )
        assert np.allclose(cov, cov_want, atol=1e-12)
        assert np.allclose(mean.as_array(), mean_want, atol=1e-12)

    def test_posterior_matrix_agrees_with_per_action_params(self):
        state = state_with([0, 3], [[0.0, 0.0], [1.2, 0.6]])
        means, stds = posterior_matrix(state)
        for a in range(2):
            mean, cov = posterior_params(state, a)
            assert np.allclose(means[a], mean.as_array(), atol=0.0)
            assert stds[a] == pytest.approx(math.sqrt(cov[0, 0]), abs=1e-15)


class TestUpdate:
    def test_first_observation(self):
        state = update(initial_state(2, 2), 1, (0.8, 0.4))
        assert state.counts.tolist() == [0, 1]
        assert state.sums[1].tolist() == [0.8, 0.4]

    def test_empirical_mean_after_two_updates(self):
        state = update(update(initial_state(1, 2), 0, (1.0, 0.0)), 0, (0.0, 1.0))
        assert (state.sums[0] / state.counts[0]).tolist() == [0.5, 0.5]
        mean, _ = posterior_params(state, 0)
        assert mean.values == pytest.approx((1 / 3, 1 / 3), abs=1e-15)

    def test_other_actions_untouched(self):
        base = update(initial_state(4, 2), 2, (0.5, 0.5))
        after = update(base, 3, (0.9, 0.9))
        for a in (0, 1, 2):
            assert after.counts[a] == base.counts[a]
            assert np.array_equal(after.sums[a], base.sums[a])
            assert np.array_equal(after.outers[a], base.outers[a])

    def test_update_is_functional(self):
        base = initial_state(2, 2)
        update(base, 0, (1.0, 1.0))
        assert base.counts.tolist() == [0, 0]
        assert not base.sums.any()

    def test_accepts_observations(self):
        obs = Observation(episode=1, action=0, values=(0.2, 0.9))
        state = update(initial_state(1, 2), 0, obs)
        assert state.sums[0].tolist() == [0.2, 0.9]

    def test_order_insensitive_statistics(self):
        rng = np.random.default_rng(8)
        draws = [tuple(rng.random(2)) for _ in range(20)]
        forward = initial_state(1, 2)
        for z in draws:
            forward = update(forward, 0, z)
        backward = initial_state(1, 2)
        for z in reversed(draws):
            backward = update(backward, 0, z)
        assert np.allclose(forward.sums, backward.sums, atol=1e-12)
        assert np.allclose(forward.outers, backward.outers, atol=1e-12)

    def test_dimension_and_index_validated(self):
        with pytest.raises(ValueError):
            update(initial_state(2, 2), 0, (0.5,))
        with pytest.raises(ValueError):
            update(initial_state(2, 2), 2, (0.5, 0.5))
        with pytest.raises(ValueError):
            scalar_update(initial_scalar_state(2), 2, 0.5)


class TestEmpiricalCovariance:
    def test_two_point_example(self):
        state = update(update(initial_state(1, 2), 0, (0.0, 0.0)), 0, (1.0, 1.0))
        assert np.allclose(
            empirical_covariance(state, 0), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15
        )

    def test_single_observation_rejected(self):
        state = update(initial_state(1, 2), 0, (0.5, 0.5))
        with pytest.raises(ValueError):
            empirical_covariance(state, 0)

    def test_repeated_observations_give_zero(self):
        state = initial_state(1, 2)
        for _ in range(5):
            state = update(state, 0, (0.3, 0.8))
        assert np.allclose(empirical_covariance(state, 0), np.zeros((2, 2)), atol=1e-12)

    def test_matches_numpy_cov(self):
        rng = np.random.default_rng(13)
        draws = rng.random((40, 3))
        state = initial_state(1, 3)
        for z in draws:
            state = update(state, 0, z)
        assert np.allclose(
            empirical_covariance(state, 0), np.cov(draws.T, ddof=1), atol=1e-10
        )


class TestSampling:
    def test_posterior_draw_moments(self):
        # 1e5 draws at a fixed state: empirical mean within 4 posterior
        # standard errors, empirical variance within 5% of 1/(N+1).
        state = state_with([0, 4], [[0.0, 0.0], [2.0, 2.5]])
        rng = np.random.default_rng(71)
        n = 100_000
        draws = np.array([sample_posterior_matrix(state, rng) for _ in range(n)])
        means, stds = posterior_matrix(state)
        for a in range(2):
            tol = 4.0 / math.sqrt(n * (state.counts[a] + 1))
            assert np.all(np.abs(draws[:, a, :].mean(axis=0) - means[a]) < tol)
            var = draws[:, a, :].var(axis=0, ddof=1)
            assert np.all(np.abs(var - stds[a] ** 2) < 0.05 * stds[a] ** 2)

    def test_argmax_ties(self):
        assert argmax_ties([0.0, 1.0, 1.0, 0.5]) == (1, 2)
        assert argmax_ties([2.0]) == (0,)
        assert argmax_ties([0.5, 0.5, 0.5]) == (0, 1, 2)

    def test_select_returns_member_of_option_set(self):
        state = state_with([2, 2, 2], [[1.0, 1.0], [0.5, 0.5], [0.2, 0.2]])
        pref = LinearPreference((0.4, 0.6))
        rng = np.random.default_rng(5)
        for _ in range(50):
            chosen, estimate = mvn_ts_select(state, pref, rng)
            assert chosen in estimate.option_set
            scores = [pref.value(theta) for theta in estimate.thetas]
            assert estimate.option_set == argmax_ties(scores)

    def test_select_replays_from_the_same_generator_state(self):
        state = state_with([3, 1], [[1.5, 0.9], [0.1, 0.1]])
        pref = LinearPreference((0.4, 0.6))
        chosen, estimate = mvn_ts_select(state, pref, np.random.default_rng(42))
        replay = np.random.default_rng(42)
        thetas = sample_posterior_matrix(state, replay)
        options = argmax_ties(pref.values(thetas))
        pick = options[int(replay.integers(len(options)))]
        assert chosen == pick
        assert np.allclose(
            [t.values for t in estimate.thetas], thetas, atol=0.0
        )

    def test_tie_break_draw_always_consumed(self):
        # Even a singleton option set costs one integer draw, keeping paired
        # runs aligned; the generator must sit at the same point afterwards.
        state = state_with([5, 0], [[3.0, 3.0], [0.0, 0.0]])
        pref = LinearPreference((0.5, 0.5))
        rng = np.random.default_rng(7)
        mvn_ts_select(state, pref, rng)
        manual = np.random.default_rng(7)
        sample_posterior_matrix(state, manual)
        manual.integers(1)
        assert rng.integers(10**9) == manual.integers(10**9)

        srng = np.random.default_rng(9)
        gaussian_ts_select(ScalarPosteriorState(np.array([5, 0]), np.array([3.0, 0.0])), srng)
        smanual = np.random.default_rng(9)
        smanual.standard_normal(2)
        smanual.integers(1)
        assert srng.integers(10**9) == smanual.integers(10**9)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mvn_ts_select(initial_state(2, 2), LinearPreference((1.0,)), np.random.default_rng(0))


class TestSelectionFrequencies:
    def test_identical_actions_split_evenly(self):
        state = state_with([3, 3], [[1.0, 0.8], [1.0, 0.8]])
        pref = LinearPreference((0.4, 0.6))
        rng = np.random.default_rng(33)
        picks = np.array([mvn_ts_select(state, pref, rng)[0] for _ in range(10_000)])
        assert abs((picks == 0).mean() - 0.5) < 0.02

    def test_fresh_state_is_uniform(self):
        state = initial_state(4, 2)
        pref = LinearPreference((0.4, 0.6))
        rng = np.random.default_rng(34)
        picks = np.array([mvn_ts_select(state, pref, rng)[0] for _ in range(10_000)])
        freqs = np.bincount(picks, minlength=4) / 10_000
        assert np.all(np.abs(freqs - 0.25) < 0.02)

    def test_fresh_scalar_state_is_uniform(self):
        state = initial_scalar_state(5)
        rng = np.random.default_rng(35)
        picks = np.array([gaussian_ts_select(state, rng) for _ in range(10_000)])
        freqs = np.bincount(picks, minlength=5) / 10_000
        assert np.all(np.abs(freqs - 0.2) < 0.02)

    def test_separated_scalar_posteriors_pick_the_leader(self):
        n = 1_000_000
        state = ScalarPosteriorState(
            counts=np.array([n, n, n]), sums=np.array([float(n), 0.0, 0.0])
        )
        rng = np.random.default_rng(36)
        picks = [gaussian_ts_select(state, rng) for _ in range(5000)]
        assert np.mean(np.asarray(picks) == 0) >= 0.999

    def test_concentrated_posteriors_pick_the_true_argmax(self):
        n = 10**8
        means = np.array([[0.5, 0.3], [0.4, 0.45], [0.45, 0.4]])
        state = state_with([n, n, n], means * (n + 1))
        pref = LinearPreference((0.4, 0.6))
        rng = np.random.default_rng(37)
        picks = [mvn_ts_select(state, pref, rng)[0] for _ in range(2000)]
        assert set(picks) == {1}

    def test_frequencies_match_joint_draw_oracle(self):
        state = state_with(
            [3, 8, 15],
            [[2.0, 1.2], [3.6, 4.05], [7.2, 6.4]],
        )
        pref = LinearPreference((0.4, 0.6))
        oracle = selection_oracle(state, pref, 1_000_000, np.random.default_rng(90))
        rng = np.random.default_rng(91)
        picks = np.array([mvn_ts_select(state, pref, rng)[0] for _ in range(20_000)])
        freqs = np.bincount(picks, minlength=3) / 20_000
        assert np.all(np.abs(freqs - oracle) < 0.015)

    def test_constraint_scores_tie_at_zero_and_split_uniformly(self):
        # Infeasible draws all score exactly 0; the tie rule must spread the
        # choice over every tied action rather than favor low indices.
        n = 10**8
        means = np.array([[0.05, 0.9], [0.05, 0.2], [0.05, 0.4]])
        state = state_with([n, n, n], means * (n + 1))
        pref = EpsilonConstraintPreference(target=2, epsilons={1: 0.9})
        rng = np.random.default_rng(38)
        picks = np.array([mvn_ts_select(state, pref, rng)[0] for _ in range(6000)])
        freqs = np.bincount(picks, minlength=3) / 6000
        assert np.all(np.abs(freqs - 1 / 3) < 0.02)


class TestScalarIdentity:
    def test_matches_multivariate_path_in_one_dimension(self):
        # Same stream cells, same scalarized rewards: the baseline must pick
        # the same actions as the d = 1 multivariate sampler, step for step.
        pref = LinearPreference((1.0,))
        vec_state = initial_state(4, 1)
        sca_state = initial_scalar_state(4)
        stream = NoiseStream(seed=2024, repetition=0)
        for episode in range(1, 301):
            a_vec, _ = mvn_ts_select(vec_state, pref, stream.policy_rng(episode))
            a_sca = gaussian_ts_select(sca_state, stream.policy_rng(episode))
            assert a_vec == a_sca
            z = float(stream.outcome_rng(episode).random())
            vec_state = update(vec_state, a_vec, (z,))
            sca_state = scalar_update(sca_state, a_sca, pref.value((z,)))
