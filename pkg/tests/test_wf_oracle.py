import math

import numpy as np
import pytest
from scipy.stats import binom

from neutral_kimura import kimura
from neutral_kimura.wf_oracle import (
    WfConfig, WfConfigError, generation_for_time, simulate, time_map, transition_cdf,
)

N_POP = 200


@pytest.fixture(scope="module")
def runs():
    out = {}
    for x0 in (0.1, 0.3, 0.5):
        cfg = WfConfig(population_size=N_POP, x0=x0, generations=2 * N_POP * 5, replicates=100_000, seed=11)
        out[x0] = simulate(cfg)
    return out


def exact_absorption(n_pop, x0, generations, boundary=-1):
    """Absorbed mass at ``boundary`` per generation, from powers of the exact transition matrix."""
    k = np.arange(n_pop + 1)
    P = binom.pmf(k[None, :], n_pop, (k / n_pop)[:, None])
    p = np.zeros(n_pop + 1)
    p[round(n_pop * x0)] = 1.0
    fixed = np.empty(generations + 1)
    for g in range(generations + 1):
        fixed[g] = p[boundary]
        p = p @ P
    return fixed


class TestTimeMap:
    def test_examples(self):
        assert time_map(0, 50) == 0.0
        assert time_map(400, 200) == 1.0
        assert time_map(2 * 37, 37) == 1.0
        np.testing.assert_array_equal(time_map(np.array([0, 200, 400]), 200), [0.0, 0.5, 1.0])

    def test_inverse(self):
        for t in (0.0, 0.05, 0.1, 1.0, 10.0):
            assert time_map(generation_for_time(t, 200), 200) == pytest.approx(t, abs=1 / 400)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(population_size=9),
        dict(replicates=9_999),
        dict(x0=0.0),
        dict(x0=1.0),
        dict(x0=0.001),
        dict(x0=0.999),
        dict(seed=-1),
        dict(seed=2 ** 64),
        dict(generations=-1),
    ])
    def test_rejected(self, kwargs):
        base = dict(population_size=200, x0=0.3, generations=10, replicates=10_000, seed=0)
        base.update(kwargs)
        with pytest.raises(WfConfigError):
            WfConfig(**base)

    def test_initial_count(self):
        cfg = WfConfig(population_size=30, x0=0.1, generations=5, replicates=10_000)
        assert cfg.initial_count == 3
        assert cfg.start_frequency == pytest.approx(0.1)

    def test_transition_rows_are_cdfs(self):
        cdf = transition_cdf(40)
        assert np.all(np.diff(cdf, axis=1) >= 0)
        assert np.all(cdf[:, -1] == 1.0)
        assert cdf[0, 0] == 1.0 and cdf[40, 39] == 0.0


class TestSimulate:
    def test_determinism(self):
        cfg = WfConfig(population_size=50, x0=0.3, generations=80, replicates=10_000, seed=123)
        s1, s2 = simulate(cfg), simulate(cfg)
        for name in ("fixed_count", "extinct_count", "frequency_sum", "heterozygosity_sum",
                     "frequency_sq_sum", "heterozygosity_sq_sum"):
            np.testing.assert_array_equal(getattr(s1, name), getattr(s2, name))

    def test_seed_changes_output(self):
        base = dict(population_size=50, x0=0.3, generations=80, replicates=10_000)
        a = simulate(WfConfig(seed=1, **base))
        b = simulate(WfConfig(seed=2, **base))
        assert not np.array_equal(a.heterozygosity_sum, b.heterozygosity_sum)

    def test_replicate_prefix_is_stable(self):
        # replicate i depends only on (seed, i): 20000 replicates contain the 10000-replicate run
        base = dict(population_size=20, x0=0.5, generations=1, seed=5)
        small = simulate(WfConfig(replicates=10_000, **base))
        large = simulate(WfConfig(replicates=20_000, **base))
        assert small.heterozygosity_sum[1] <= large.heterozygosity_sum[1]

    def test_shapes_and_start(self):
        s = simulate(WfConfig(population_size=20, x0=0.25, generations=30, replicates=10_000))
        assert s.fixed_fraction.shape == (31,)
        assert s.fixed_fraction[0] == 0.0 and s.extinct_fraction[0] == 0.0
        assert s.mean_frequency[0] == 0.25
        assert s.mean_heterozygosity[0] == pytest.approx(0.25 * 0.75)
        np.testing.assert_allclose(s.diffusion_times, np.arange(31) / 40)

    def test_invariants(self, runs):
        for s in runs.values():
            assert np.all(np.diff(s.fixed_fraction) >= 0)
            assert np.all(np.diff(s.extinct_fraction) >= 0)
            assert np.all(s.fixed_fraction + s.extinct_fraction <= 1.0)

    def test_symmetric_start(self, runs):
        s = runs[0.5]
        p = 0.5 * (s.fixed_fraction + s.extinct_fraction)
        se = np.sqrt(2 * p / s.replicates)  # stderr of the difference of two multinomial cells, upper bound
        assert np.all(np.abs(s.fixed_fraction - s.extinct_fraction) <= 3 * np.maximum(se, 1 / s.replicates))

    def test_martingale(self, runs):
        for x0, s in runs.items():
            se = s.mean_frequency_stderr
            assert np.all(np.abs(s.mean_frequency - x0) <= 3 * se + 1e-15)

    def test_fixation_limit(self):
        cfg = WfConfig(population_size=20, x0=0.3, generations=600, replicates=100_000, seed=3)
        s = simulate(cfg)
        assert s.fixed_fraction[-1] + s.extinct_fraction[-1] == 1.0
        assert abs(s.fixed_fraction[-1] - 0.3) <= 3 * s.fraction_stderr(0.3)

    def test_absorption_consistency(self, runs):
        for x0, s in runs.items():
            sol = kimura.solve(kimura.Delta(x0), 60)
            t = s.diffusion_times
            b = kimura.fixation_probability(sol, t)
            allow = 1.0 / N_POP
            assert np.all(np.abs(s.fixed_fraction - b) <= 3 * s.fraction_stderr(b) + allow)

    def test_extinction_tracks_exact_chain(self, runs):
        # near the boundary the finite chain and the diffusion differ by several 1/N,
        # so the Monte Carlo extinction fraction is checked against the exact chain instead
        s = runs[0.1]
        gens = np.arange(0, 401, 10)
        exact = exact_absorption(N_POP, 0.1, 400, boundary=0)[gens]
        se = s.fraction_stderr(exact)
        assert np.all(np.abs(s.extinct_fraction[gens] - exact) <= 4 * se + 1e-12)

    def test_heterozygosity_ratio(self, runs):
        for s in runs.values():
            h0 = s.mean_heterozygosity[0]
            ratio = s.mean_heterozygosity / h0
            se = s.mean_heterozygosity_stderr / h0
            assert np.all(np.abs(ratio - np.exp(-2 * s.diffusion_times)) <= 3 * se + 1.0 / N_POP)

    def test_heterozygosity_discrete_decay(self, runs):
        # exact discrete law: E[k(N-k)] shrinks by (1 - 1/N) per generation
        for s in runs.values():
            h0 = s.mean_heterozygosity[0]
            expected = h0 * (1 - 1 / N_POP) ** s.generations
            assert np.all(np.abs(s.mean_heterozygosity - expected) <= 4 * s.mean_heterozygosity_stderr + 1e-15)


class TestDiscretizationGap:
    """The finite-N process differs from the diffusion by O(1/N); checked with the exact chain."""

    TIMES = np.array([0.05, 0.1, 0.5, 1.0, 2.0])

    def _gaps(self, x0, boundary, prob):
        sol = kimura.solve(kimura.Delta(x0), 60)
        gaps = {}
        for n_pop in (200, 400):
            gens = [generation_for_time(t, n_pop) for t in self.TIMES]
            chain = exact_absorption(n_pop, x0, max(gens), boundary)[gens]
            diff = prob(sol, time_map(np.array(gens), n_pop))
            gaps[n_pop] = np.max(np.abs(chain - diff))
        return gaps

    @pytest.mark.parametrize("x0", [0.1, 0.3, 0.5])
    def test_fixation_gap_bounded_and_shrinking(self, x0):
        gaps = self._gaps(x0, -1, kimura.fixation_probability)
        assert gaps[200] <= 1.0 / 200 and gaps[400] <= 1.0 / 400
        assert gaps[400] < gaps[200]

    def test_extinction_gap_shrinking(self):
        gaps = self._gaps(0.1, 0, kimura.extinction_probability)
        assert gaps[400] < 0.6 * gaps[200]
