"""EnKF analysis tests.

The 1-D posterior check is against the analytic Kalman filter: prior
N(10, 4), observation 12 with error variance 1 gives posterior
N(11.6, 0.8). Monte-Carlo tolerances were measured over the frozen seeds
before the filter was wired into the engine.
"""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsbench.assimilation import (
    AnalysisResult,
    EnKFConfig,
    _isotonic4,
    analysis_step,
    realization_from_state,
    repair,
    state_vector,
    update_after_stand,
)
from gsbench.geomodel import (
    Ensemble,
    LateralGrid,
    PriorConfig,
    Realization,
    sample_prior,
    sample_truth,
)
from gsbench.measurement import Observation, ToolConfig

GRID2 = LateralGrid(np.array([0.0, 10.0]))
GRID = LateralGrid(np.arange(0.0, 421.0, 10.0))


def scalar_ensemble(seed, mean=10.0, std=2.0, n=120):
    """Members varying only in b1 (constant along x); b2..b4 fixed far away."""
    rng = np.random.default_rng(seed)
    b1 = rng.normal(mean, std, size=n)
    members = [
        Realization(np.array([[v, v], [30.0, 30.0], [40.0, 40.0], [50.0, 50.0]]))
        for v in b1
    ]
    return Ensemble(members, GRID2), b1


class TestEnKFConfig:
    @pytest.mark.parametrize("kwargs", [{"obs_error_std": 0.0}, {"inflation": 0.9}])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            EnKFConfig(**kwargs)


class TestStateVector:
    def test_round_trip_lossless(self):
        real = sample_truth(PriorConfig(), GRID, seed=5)
        back = realization_from_state(state_vector(real), GRID)
        np.testing.assert_array_equal(back.boundaries, real.boundaries)

    def test_boundary_major_layout(self):
        real = Realization(np.arange(8.0).reshape(4, 2))
        np.testing.assert_array_equal(state_vector(real), np.arange(8.0))


class TestAnalysisStep:
    TOOL = ToolConfig(look_around=50.0, noise_std=1.0)

    def test_zero_spread_skips_with_warning(self):
        members = [
            Realization(np.array([[10.0, 10.0], [13.0, 13.0], [20.0, 20.0], [23.0, 23.0]]))
            for _ in range(20)
        ]
        ens = Ensemble(members, GRID2, generation=4)
        obs = [Observation(0.0, 0.0, [12.0, 13.0, 20.0, 23.0])]
        with pytest.warns(UserWarning):
            res = analysis_step(ens, obs, EnKFConfig(obs_error_std=1.0), self.TOOL)
        assert not res.updated
        assert res.ensemble.generation == 5
        for a, b in zip(res.ensemble.members, members):
            np.testing.assert_array_equal(a.boundaries, b.boundaries)

    def test_analytic_posterior_all_frozen_seeds(self):
        obs = [Observation(0.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        for seed in range(20):
            ens, _ = scalar_ensemble(seed)
            res = analysis_step(
                ens, obs, EnKFConfig(obs_error_std=1.0, seed=seed), self.TOOL
            )
            post = np.array([m.boundaries[0, 0] for m in res.ensemble.members])
            assert res.updated
            assert post.mean() == pytest.approx(11.6, abs=0.35)
            assert post.var(ddof=1) == pytest.approx(0.8, abs=0.3)

    def test_spurious_update_of_unobserved_boundary_is_noise_level(self):
        # b3 varies independently of b1 and its component is censored for
        # every member and the truth, so only sampling noise can move it
        tool = ToolConfig(look_around=15.0, noise_std=1.0)
        obs = [Observation(0.0, 0.0, [12.0, 15.0, 15.0, 15.0])]

        def mean_shift(seed):
            rng = np.random.default_rng(seed)
            b1 = rng.normal(10.0, 2.0, size=120)
            b3 = rng.normal(40.0, 2.0, size=120)
            members = [
                Realization(np.array([[a, a], [30.0, 30.0], [b, b], [60.0, 60.0]]))
                for a, b in zip(b1, b3)
            ]
            res = analysis_step(
                Ensemble(members, GRID2),
                obs,
                EnKFConfig(obs_error_std=1.0, seed=seed),
                tool,
            )
            post3 = np.array([m.boundaries[2, 0] for m in res.ensemble.members])
            return np.abs(post3 - b3).mean()

        shifts = [mean_shift(s) for s in range(10)]
        floor = np.mean(shifts)
        assert max(shifts) < 3 * floor

    def test_constant_censored_components_unchanged_exactly(self):
        tool = ToolConfig(look_around=15.0, noise_std=1.0)
        obs = [Observation(0.0, 0.0, [12.0, 15.0, 15.0, 15.0])]
        ens, _ = scalar_ensemble(3)
        res = analysis_step(ens, obs, EnKFConfig(obs_error_std=1.0, seed=3), tool)
        post = res.ensemble.as_array()
        np.testing.assert_array_equal(post[:, 1], 30.0)
        np.testing.assert_array_equal(post[:, 3], 50.0)

    def test_huge_obs_error_means_negligible_update(self):
        ens, b1 = scalar_ensemble(1)
        obs = [Observation(0.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        res = analysis_step(
            ens, obs, EnKFConfig(obs_error_std=1e6, seed=1), self.TOOL
        )
        post = np.array([m.boundaries[0, 0] for m in res.ensemble.members])
        assert np.abs(post - b1).max() < 1e-3

    def test_deterministic_given_seed(self):
        ens, _ = scalar_ensemble(2)
        obs = [Observation(0.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        cfg = EnKFConfig(obs_error_std=1.0, seed=11)
        a = analysis_step(ens, obs, cfg, self.TOOL)
        b = analysis_step(ens, obs, cfg, self.TOOL)
        c = analysis_step(ens, obs, EnKFConfig(obs_error_std=1.0, seed=12), self.TOOL)
        for ma, mb in zip(a.ensemble.members, b.ensemble.members):
            np.testing.assert_array_equal(ma.boundaries, mb.boundaries)
        assert not np.array_equal(
            a.ensemble.members[0].boundaries, c.ensemble.members[0].boundaries
        )

    def test_member_count_and_grid_preserved(self):
        ens, _ = scalar_ensemble(0, n=37)
        obs = [Observation(0.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        res = analysis_step(ens, obs, EnKFConfig(obs_error_std=1.0), self.TOOL)
        assert res.ensemble.size == 37
        assert res.ensemble.grid is ens.grid or np.array_equal(
            res.ensemble.grid.x, ens.grid.x
        )

    def test_inflation_widens_posterior(self):
        obs = [Observation(0.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        ens, _ = scalar_ensemble(5)
        plain = analysis_step(
            ens, obs, EnKFConfig(obs_error_std=1.0, seed=5), self.TOOL
        )
        wide = analysis_step(
            ens, obs, EnKFConfig(obs_error_std=1.0, inflation=1.5, seed=5), self.TOOL
        )

        def var1(res):
            return np.var([m.boundaries[0, 0] for m in res.ensemble.members], ddof=1)

        assert var1(wide) > var1(plain)

    def test_empty_observations_rejected(self):
        ens, _ = scalar_ensemble(0)
        with pytest.raises(ValueError):
            analysis_step(ens, [], EnKFConfig(obs_error_std=1.0), self.TOOL)

    def test_observation_outside_grid_rejected(self):
        ens, _ = scalar_ensemble(0)
        obs = [Observation(99.0, 0.0, [12.0, 30.0, 40.0, 50.0])]
        with pytest.raises(ValueError):
            analysis_step(ens, obs, EnKFConfig(obs_error_std=1.0), self.TOOL)


class TestUpdateAfterStand:
    def test_generation_increments_by_one(self):
        ens = sample_prior(PriorConfig(seed=8), GRID, 30)
        truth = sample_truth(PriorConfig(), GRID, seed=9)
        res, obs = update_after_stand(
            ens, truth, (0.0, 11.0), (30.0, 11.0), ToolConfig(), EnKFConfig(), 0
        )
        assert res.ensemble.generation == 1
        assert len(obs) == 3

    def test_noise_mismatch_rejected(self):
        ens = sample_prior(PriorConfig(seed=8), GRID, 10)
        truth = sample_truth(PriorConfig(), GRID, seed=9)
        with pytest.raises(ValueError):
            update_after_stand(
                ens,
                truth,
                (0.0, 11.0),
                (30.0, 11.0),
                ToolConfig(noise_std=0.2),
                EnKFConfig(obs_error_std=0.1),
                0,
            )

    def test_observed_node_error_non_increasing_per_stand(self):
        # near-zero tool noise; truth drawn from the ensemble's own prior
        noise = 1e-4
        good = 0
        for t in range(50):
            tool = ToolConfig(noise_std=noise, seed=t)
            ek = EnKFConfig(obs_error_std=noise, seed=t)
            ens = sample_prior(PriorConfig(seed=1000 + t), GRID, 120)
            truth = sample_truth(PriorConfig(), GRID, seed=2000 + t)
            ok = True
            for k in range(5):
                x0, x1 = 30.0 * k, 30.0 * (k + 1)
                nodes = [int(round((x0 + 10 * (i + 1)) / 10)) for i in range(3)]
                t_b1 = truth.boundaries[0][nodes]
                before = np.abs(
                    ens.as_array()[:, 0, nodes].mean(axis=0) - t_b1
                ).mean()
                res, _ = update_after_stand(
                    ens, truth, (x0, 11.0), (x1, 11.0), tool, ek, stand_index=k
                )
                ens = res.ensemble
                after = np.abs(
                    ens.as_array()[:, 0, nodes].mean(axis=0) - t_b1
                ).mean()
                if after > before + 1e-9:
                    ok = False
            good += ok
        assert good >= 45  # >= 90% of 50 trials

    def test_variance_contracts_at_observed_components(self):
        deltas = []
        for seed in range(20):
            ens = sample_prior(PriorConfig(seed=3000 + seed), GRID, 120)
            truth = sample_truth(PriorConfig(), GRID, seed=4000 + seed)
            res, _ = update_after_stand(
                ens,
                truth,
                (0.0, 11.0),
                (30.0, 11.0),
                ToolConfig(seed=seed),
                EnKFConfig(seed=seed),
                0,
            )
            before = ens.as_array()[:, 0, 1:4].var(axis=0, ddof=1)
            after = res.ensemble.as_array()[:, 0, 1:4].var(axis=0, ddof=1)
            deltas.append((after - before).mean())
        assert np.mean(deltas) < 0

    def test_invariants_restored_after_updates(self):
        ens = sample_prior(PriorConfig(seed=21), GRID, 60)
        truth = sample_truth(PriorConfig(), GRID, seed=22)
        for k in range(3):
            res, _ = update_after_stand(
                ens,
                truth,
                (30.0 * k, 11.0),
                (30.0 * (k + 1), 11.0),
                ToolConfig(seed=k),
                EnKFConfig(seed=k),
                k,
            )
            ens = res.ensemble
            arr = ens.as_array()
            assert np.all(arr[:, 1] - arr[:, 0] >= 0.5)
            assert np.all(arr[:, 2] >= arr[:, 1])
            assert np.all(arr[:, 3] - arr[:, 2] >= 0.5)


def brute_pav(y):
    blocks = [[v, 1] for v in y]
    i = 0
    while i < len(blocks) - 1:
        if blocks[i][0] > blocks[i + 1][0]:
            v0, w0 = blocks[i]
            v1, w1 = blocks[i + 1]
            blocks[i] = [(v0 * w0 + v1 * w1) / (w0 + w1), w0 + w1]
            del blocks[i + 1]
            i = max(i - 1, 0)
        else:
            i += 1
    out = []
    for v, w in blocks:
        out.extend([v] * w)
    return np.array(out)


class TestRepair:
    def test_symmetric_shift_apart(self):
        fixed = repair(np.array([[10.2], [10.5], [20.0], [23.0]]), 0.5)
        np.testing.assert_allclose(fixed[:, 0], [10.1, 10.6, 20.0, 23.0])

    def test_valid_columns_bitwise_untouched(self):
        arr = sample_prior(PriorConfig(seed=2), GRID, 10).as_array()
        np.testing.assert_array_equal(repair(arr, 0.5), arr)

    def test_isotonic_matches_brute_pav(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(500, 4))
        brute = np.array([brute_pav(r) for r in z])
        np.testing.assert_allclose(_isotonic4(z), brute, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5.0, 5.0), min_size=4, max_size=4))
def test_repair_enforces_invariants(values):
    col = np.array(values).reshape(4, 1)
    fixed = repair(col, 0.5)
    b1, b2, b3, b4 = fixed[:, 0]
    assert b2 - b1 >= 0.5
    assert b3 >= b2
    assert b4 - b3 >= 0.5
