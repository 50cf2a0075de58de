"""Neutral Wright-Fisher Monte Carlo, used as a stochastic check on a(t) and b(t).

Each replicate draws k_{g+1} ~ Binomial(N, k_g / N) by inverting a
precomputed binomial CDF with one uniform per generation.  Uniforms come
from a splitmix64 hash of (seed, replicate, generation), so replicate i is
reproducible on its own and all per-generation tallies are integer sums,
identical under any execution order or backend.

Time calibration: E[x(1-x)] shrinks by (1 - 1/N) per generation, while the
diffusion's heterozygosity decays as exp(-2t) (slowest mode, eigenvalue 2).
Matching (1 - 1/N)^g ~ exp(-g/N) to exp(-2t) gives t = g / (2N).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .kernels import replicate_keys, wf_kernel

MIN_POPULATION = 10
MIN_REPLICATES = 10_000


class WfConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WfConfig:
    population_size: int
    x0: float
    generations: int
    replicates: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if int(self.population_size) != self.population_size or self.population_size < MIN_POPULATION:
            raise WfConfigError(f"population_size must be an integer >= {MIN_POPULATION}")
        if int(self.replicates) != self.replicates or self.replicates < MIN_REPLICATES:
            raise WfConfigError(f"replicates must be an integer >= {MIN_REPLICATES}")
        if int(self.generations) != self.generations or self.generations < 0:
            raise WfConfigError("generations must be a nonnegative integer")
        if not 0 <= self.seed < 2**64:
            raise WfConfigError("seed must fit in an unsigned 64-bit integer")
        if not 0 < self.initial_count < self.population_size:
            raise WfConfigError(
                f"x0={self.x0!r} rounds to {self.initial_count} copies; need 0 < k0 < {self.population_size}"
            )

    @property
    def initial_count(self):
        return int(round(self.population_size * self.x0))

    @property
    def start_frequency(self):
        return self.initial_count / self.population_size


@dataclass(frozen=True, eq=False)
class WfTrajectoryStats:
    population_size: int
    replicates: int
    fixed_count: np.ndarray
    extinct_count: np.ndarray
    frequency_sum: np.ndarray
    heterozygosity_sum: np.ndarray
    frequency_sq_sum: np.ndarray
    heterozygosity_sq_sum: np.ndarray

    @property
    def generations(self):
        return np.arange(self.fixed_count.shape[0])

    @property
    def diffusion_times(self):
        return time_map(self.generations, self.population_size)

    @property
    def fixed_fraction(self):
        return self.fixed_count / self.replicates

    @property
    def extinct_fraction(self):
        return self.extinct_count / self.replicates

    @property
    def mean_frequency(self):
        return self.frequency_sum / (self.replicates * self.population_size)

    @property
    def mean_heterozygosity(self):
        return self.heterozygosity_sum / (self.replicates * self.population_size ** 2)

    @property
    def mean_frequency_stderr(self):
        n = self.population_size
        second = self.frequency_sq_sum / (self.replicates * n * n)
        var = np.maximum(second - self.mean_frequency ** 2, 0.0)
        return np.sqrt(var / self.replicates)

    @property
    def mean_heterozygosity_stderr(self):
        n2 = float(self.population_size) ** 2
        second = self.heterozygosity_sq_sum / (self.replicates * n2 * n2)
        var = np.maximum(second - self.mean_heterozygosity ** 2, 0.0)
        return np.sqrt(var / self.replicates)

    def fraction_stderr(self, p):
        """Binomial standard error of a replicate fraction with success probability ``p``."""
        p = np.clip(np.asarray(p, dtype=np.float64), 0.0, 1.0)
        return np.sqrt(p * (1.0 - p) / self.replicates)


def time_map(generation, population_size):
    """Diffusion time of a Wright-Fisher generation: t = g / (2N)."""
    if np.ndim(generation):
        return np.asarray(generation, dtype=np.float64) / (2.0 * population_size)
    return generation / (2.0 * population_size)


def generation_for_time(t, population_size):
    """Nearest generation to diffusion time ``t``."""
    return int(math.floor(2.0 * population_size * t + 0.5))


def transition_cdf(population_size):
    """Row k is the CDF of Binomial(N, k/N); the last column is forced to 1."""
    n = population_size
    k = np.arange(n + 1)
    cdf = binom.cdf(k[None, :], n, (k / n)[:, None])
    cdf[:, -1] = 1.0
    return np.ascontiguousarray(cdf)


def simulate(cfg):
    """Run ``cfg.replicates`` independent neutral Wright-Fisher chains."""
    cdf = transition_cdf(cfg.population_size)
    keys = replicate_keys(cfg.seed, cfg.replicates)
    fixed_at, extinct_at, sum_k, sum_het, sum_k2, sum_het2 = wf_kernel(
        cdf, cfg.initial_count, cfg.generations, keys
    )
    fixed = np.cumsum(fixed_at)
    extinct = np.cumsum(extinct_at)
    n = cfg.population_size
    return WfTrajectoryStats(
        population_size=n,
        replicates=cfg.replicates,
        fixed_count=fixed,
        extinct_count=extinct,
        frequency_sum=sum_k + n * fixed,
        heterozygosity_sum=sum_het,
        frequency_sq_sum=sum_k2 + n * n * fixed,
        heterozygosity_sq_sum=sum_het2,
    )
