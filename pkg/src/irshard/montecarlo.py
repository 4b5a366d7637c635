"""Seeded Monte Carlo campaigns over channel realizations.

Realizations are grouped in fixed-size blocks. Block ``b`` always draws from
the substream ``SeedSequence(seed, spawn_key=(b,))``, so the sample set is a
function of ``(seed, block_size)`` alone and does not depend on how many
workers share the blocks.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .analytic import CapacityStatistics, ScalingModel, analytic_capacity_stats
from .capacity import compose_end_to_end, capacity, optimal_phases, PhaseProfile
from .channel import (
    CovarianceMatrix,
    SystemParams,
    build_los_T,
    build_los_h_bar,
    build_sinc_covariance,
    complex_normal,
    shape_reflect,
)
from .errors import DomainError
from .geometry import ArrayGeometry

__all__ = [
    "CampaignConfig",
    "RunningMoments",
    "Histogram",
    "EmpiricalStats",
    "SweepRecord",
    "ChannelSetup",
    "block_rng",
    "run_campaign",
    "ks_against_gaussian",
    "histogram",
    "sweep_N",
]

DEFAULT_BLOCK_SIZE = 1024


@dataclass(frozen=True)
class CampaignConfig:
    system: SystemParams
    tx_geometry: ArrayGeometry
    irs_geometry: ArrayGeometry
    scaling: ScalingModel | None = None
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    bins: int = 100
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError(f"samples must be at least 1, got {self.samples}")
        if self.workers < 1 or self.block_size < 1 or self.bins < 1:
            raise DomainError("workers, block_size and bins must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class RunningMoments:
    """Count, mean and sum of squared deviations, mergeable in any grouping."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_values(cls, values) -> "RunningMoments":
        x = np.asarray(values, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mean = float(x.mean())
        return cls(x.size, mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.count == 0:
            return dataclasses.replace(self)
        if self.count == 0:
            return dataclasses.replace(other)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return RunningMoments(n, mean, m2)

    @staticmethod
    def merge_all(parts) -> "RunningMoments":
        """Pairwise (tree) merge in the given order."""
        parts = list(parts)
        if not parts:
            return RunningMoments()
        while len(parts) > 1:
            parts = [
                parts[i].merge(parts[i + 1]) if i + 1 < len(parts) else parts[i]
                for i in range(0, len(parts), 2)
            ]
        return parts[0]

    @property
    def variance(self) -> float:
        """Unbiased sample variance; zero for fewer than two values."""
        return max(self.m2, 0.0) / (self.count - 1) if self.count > 1 else 0.0


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        total = self.counts.sum()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(widths > 0, self.counts / (total * widths), 0.0)


@dataclass(eq=False)
class EmpiricalStats:
    mean: float
    variance: float
    histogram: Histogram
    ks_distance: float | None
    sample_count: int
    samples: np.ndarray
    analytic: CapacityStatistics | None = None


@dataclass(eq=False)
class SweepRecord:
    N: int
    nx: int
    ny: int
    spacing_x: float
    spacing_y: float
    q: float
    lambda_max: float
    analytic: CapacityStatistics
    empirical: EmpiricalStats


@dataclass(frozen=True, eq=False)
class ChannelSetup:
    """Everything about a configuration that does not change between draws."""

    params: SystemParams
    tx_geometry: ArrayGeometry
    irs_geometry: ArrayGeometry
    cov: CovarianceMatrix
    T: np.ndarray
    h_bar_r: np.ndarray
    phases: PhaseProfile

    @classmethod
    def build(cls, params, tx_geometry, irs_geometry, cov=None) -> "ChannelSetup":
        if cov is None:
            cov = build_sinc_covariance(irs_geometry)
        return cls(
            params,
            tx_geometry,
            irs_geometry,
            cov,
            build_los_T(params, tx_geometry, irs_geometry),
            build_los_h_bar(irs_geometry, params.aod_irs),
            optimal_phases(irs_geometry, params.aoa_irs, params.aod_irs),
        )

    def analytic(self) -> CapacityStatistics:
        return analytic_capacity_stats(
            self.params, self.irs_geometry.total, self.tx_geometry.total, self.cov, self.h_bar_r
        )

    def draw_capacities(self, rng, n: int) -> np.ndarray:
        p = self.params
        h_d = math.sqrt(p.alpha_d * p.area_tx_element) * complex_normal(rng, (n, self.tx_geometry.total))
        _, h_r = shape_reflect(p, self.cov, self.h_bar_r, complex_normal(rng, (n, self.cov.dim)))
        return capacity(compose_end_to_end(h_d, self.T, h_r, self.phases), p.rho)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def ks_against_gaussian(samples, mu_C: float, sigma_C: float) -> float:
    """Kolmogorov-Smirnov distance between the samples and N(mu_C, sigma_C^2)."""
    if not sigma_C > 0:
        raise DomainError(f"sigma_C must be positive, got {sigma_C}")
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 100:
        raise DomainError(f"need at least 100 samples, got {n}")
    cdf = ndtr((x - mu_C) / sigma_C)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def histogram(samples, bins: int) -> Histogram:
    """Equal-width histogram spanning ``[min, max]``; degenerate data gives one bin."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot histogram an empty sample")
    if bins < 1:
        raise DomainError(f"bins must be positive, got {bins}")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return Histogram(np.array([lo, hi]), np.array([x.size]))
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return Histogram(edges, counts)


def run_campaign(config: CampaignConfig, setup: ChannelSetup | None = None) -> EmpiricalStats:
    """Draw ``config.samples`` capacities and summarize them.

    ``setup`` may be passed to reuse a covariance already decomposed by the
    caller; it must match ``config``.
    """
    if setup is None:
        setup = ChannelSetup.build(config.system, config.tx_geometry, config.irs_geometry)
    bs = config.block_size
    n_blocks = -(-config.samples // bs)
    sizes = [min(bs, config.samples - b * bs) for b in range(n_blocks)]

    def work(b):
        return setup.draw_capacities(block_rng(config.seed, b), sizes[b])

    if config.workers == 1:
        chunks = [work(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(work, range(n_blocks)))

    moments = RunningMoments.merge_all(RunningMoments.from_values(c) for c in chunks)
    samples = np.concatenate(chunks)
    stats = setup.analytic()
    ks = None
    if stats.sigma_C > 0 and samples.size >= 100:
        ks = ks_against_gaussian(samples, stats.mu_C, stats.sigma_C)
    return EmpiricalStats(
        mean=moments.mean,
        variance=moments.variance,
        histogram=histogram(samples, config.bins),
        ks_distance=ks,
        sample_count=moments.count,
        samples=samples,
        analytic=stats,
    )


SWEEP_MODES = ("fixed-spacing", "fixed-aperture", "exponent")


def _sweep_point(base: CampaignConfig, n: int, mode: str):
    irs = base.irs_geometry
    if mode == "fixed-spacing":
        side = _square_side(n)
        geom = ArrayGeometry(side, side, irs.dx, irs.dy, irs.wavelength)
        return geom, base.system, 0.0
    if mode == "fixed-aperture":
        if base.scaling is not None:
            scaling = ScalingModel(base.scaling.A0, 1.0)
        else:
            raise DomainError("fixed-aperture sweep needs a scaling model for A0")
    elif mode == "exponent":
        if base.scaling is None:
            raise DomainError("exponent sweep needs a scaling model")
        scaling = base.scaling
    else:
        raise DomainError(f"unknown sweep mode {mode!r}; expected one of {SWEEP_MODES}")
    side = _square_side(n)
    d = scaling.spacing(n)
    geom = ArrayGeometry(side, side, d, d, irs.wavelength)
    params = dataclasses.replace(base.system, area_irs_element=scaling.element_area(n))
    return geom, params, scaling.q


def _square_side(n):
    side = math.isqrt(n) if n >= 0 else 0
    if n < 1 or side * side != n:
        raise DomainError(f"sweep needs perfect-square N, got {n}")
    return side


def sweep_N(base_config: CampaignConfig, N_values, mode: str = "fixed-spacing", run_mc: bool = True) -> list[SweepRecord]:
    """Run one campaign per IRS size on a square array.

    ``fixed-spacing`` keeps the base IRS spacing and element area;
    ``fixed-aperture`` shrinks elements as ``A0 / N``; ``exponent`` follows
    ``base_config.scaling``. With ``run_mc=False`` only the covariance and the
    analytic statistics are computed and ``empirical`` is ``None``.
    """
    # validate every point before spending time on any of them
    for n in N_values:
        _square_side(int(n))
    records = []
    for n in N_values:
        n = int(n)
        geom, params, q = _sweep_point(base_config, n, mode)
        setup = ChannelSetup.build(params, base_config.tx_geometry, geom)
        analytic = setup.analytic()
        emp = None
        if run_mc:
            cfg = dataclasses.replace(base_config, system=params, irs_geometry=geom)
            emp = run_campaign(cfg, setup)
        records.append(
            SweepRecord(n, geom.nx, geom.ny, geom.dx, geom.dy, q, setup.cov.lambda_max, analytic, emp)
        )
    return records
