"""Granular firm populations: sub-unit draws, concentration, growth, panels.

A firm is a vector of positive sub-unit sizes.  Two generative modes are
supported: a fixed sub-unit count per firm, and a Pareto-distributed count
(heavy-tailed in both the number and the size of sub-units).  Large-scale
Monte Carlo work uses :class:`FirmPopulation`, a flat ragged-array layout.

Randomness contract: panel simulation derives one counter-based substream per
firm from the master seed (stream id = firm index, Philox key
``(firm_id << 64) | seed``), so any scheduling of per-firm work produces
bit-identical results.  Batch experiment samplers instead consume a single
generator with a documented draw order (counts first, then sizes, both in
firm order), which is deterministic for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

_SEED_MASK = (1 << 64) - 1
_MULTIPLIER_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedCount:
    """Every firm has exactly `count` sub-units."""

    count: int

    def __post_init__(self):
        if not (isinstance(self.count, (int, np.integer)) and self.count >= 1):
            raise ValueError(f"count must be a positive integer, got {self.count}")


@dataclass(frozen=True)
class ParetoCount:
    """Sub-unit count drawn as ceil of a continuous Pareto(1, alpha) variable."""


_SHOCK_LAWS = ("gaussian", "laplace", "student_t")


@dataclass(frozen=True)
class ModelParams:
    """Generative parameters shared by both granular models.

    mu is the sub-unit size tail index (1 < mu < 2), alpha the sub-unit count
    tail index (used only with ParetoCount, 1 < alpha < mu), s0 the minimal
    sub-unit size and sigma0 the common shock scale.  Shock laws are
    normalized to unit variance.
    """

    mu: float
    s0: float = 1.0
    sigma0: float = 0.1
    k_mode: Union[FixedCount, ParetoCount] = field(default_factory=lambda: FixedCount(1))
    alpha: float | None = None
    shock_law: str = "gaussian"
    student_dof: float = 5.0

    def __post_init__(self):
        if not 1.0 < self.mu < 2.0:
            raise ValueError(f"mu must lie in (1, 2), got {self.mu}")
        if not self.s0 > 0:
            raise ValueError(f"s0 must be positive, got {self.s0}")
        if not self.sigma0 >= 0:
            raise ValueError(f"sigma0 must be non-negative, got {self.sigma0}")
        if isinstance(self.k_mode, ParetoCount):
            if self.alpha is None or not 1.0 < self.alpha < self.mu:
                raise ValueError(
                    f"ParetoCount requires 1 < alpha < mu, got alpha={self.alpha}, mu={self.mu}"
                )
        elif not isinstance(self.k_mode, FixedCount):
            raise ValueError(f"unknown k_mode {self.k_mode!r}")
        if self.shock_law not in _SHOCK_LAWS:
            raise ValueError(f"shock_law must be one of {_SHOCK_LAWS}, got {self.shock_law!r}")
        if self.shock_law == "student_t" and not self.student_dof > 2:
            raise ValueError("student_t shocks need dof > 2 for unit variance")

    def to_dict(self):
        if isinstance(self.k_mode, FixedCount):
            k_mode = {"mode": "fixed", "count": int(self.k_mode.count)}
        else:
            k_mode = {"mode": "pareto"}
        return {
            "mu": self.mu,
            "alpha": self.alpha,
            "s0": self.s0,
            "sigma0": self.sigma0,
            "k_mode": k_mode,
            "shock_law": self.shock_law,
            "student_dof": self.student_dof if self.shock_law == "student_t" else None,
        }


def shocks_from_uniforms(u, law="gaussian", student_dof=5.0):
    """Unit-variance shock(s) from uniform(s) by inverse CDF."""
    u = np.asarray(u, dtype=float)
    if law == "gaussian":
        return special.ndtri(u)
    if law == "laplace":
        b = 1.0 / np.sqrt(2.0)
        return np.where(
            u < 0.5,
            b * np.log(np.maximum(2.0 * u, 1e-300)),
            -b * np.log(np.maximum(2.0 * (1.0 - u), 1e-300)),
        )
    if law == "student_t":
        return special.stdtrit(student_dof, u) * np.sqrt((student_dof - 2.0) / student_dof)
    raise ValueError(f"unknown shock law {law!r}")


# ---------------------------------------------------------------------------
# RNG substreams
# ---------------------------------------------------------------------------

def firm_stream(seed, firm_id):
    """Independent counter-based substream for one firm.

    Philox keyed by ``(firm_id << 64) | (seed mod 2**64)``; the counter starts
    at zero.  This is the documented seed -> firm split used by
    :func:`simulate_panel`.
    """
    return np.random.Generator(np.random.Philox(key=((int(firm_id) << 64) | (int(seed) & _SEED_MASK))))


class _StreamPool:
    """Reusable Philox generator cycled through per-firm keys.

    Produces streams bit-identical to `firm_stream(seed, i)` while avoiding
    the construction cost of a fresh bit generator per firm.
    """

    def __init__(self, seed):
        self._seed = int(seed) & _SEED_MASK
        self._bg = np.random.Philox(key=0)
        self._gen = np.random.Generator(self._bg)
        self._state = self._bg.state

    def stream(self, firm_id):
        st = self._state
        st["state"]["key"][0] = self._seed
        st["state"]["key"][1] = int(firm_id)
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        st["uinteger"] = 0
        st["has_uint32"] = 0
        self._bg.state = st
        return self._gen


# ---------------------------------------------------------------------------
# Firms and populations
# ---------------------------------------------------------------------------

@dataclass
class Firm:
    """A single firm: its vector of sub-unit sizes."""

    sub_unit_sizes: np.ndarray

    def __post_init__(self):
        self.sub_unit_sizes = np.asarray(self.sub_unit_sizes, dtype=float)
        if self.sub_unit_sizes.size == 0:
            raise ValueError("a firm needs at least one sub-unit")
        if np.any(self.sub_unit_sizes <= 0):
            raise ValueError("sub-unit sizes must be positive")

    @property
    def size(self):
        return float(self.sub_unit_sizes.sum())

    @property
    def n_sub_units(self):
        return int(self.sub_unit_sizes.size)


class FirmPopulation:
    """Ragged collection of firms stored as a flat sub-unit array."""

    def __init__(self, sub_unit_sizes, counts):
        self.sub_unit_sizes = np.asarray(sub_unit_sizes, dtype=float)
        self.counts = np.asarray(counts, dtype=np.int64)
        if np.any(self.counts < 1):
            raise ValueError("every firm needs at least one sub-unit")
        if self.counts.sum() != self.sub_unit_sizes.size:
            raise ValueError("counts do not match the flat sub-unit array")
        self.offsets = np.concatenate(([0], np.cumsum(self.counts)))

    @property
    def n_firms(self):
        return self.counts.size

    def firm(self, i):
        return Firm(self.sub_unit_sizes[self.offsets[i] : self.offsets[i + 1]])

    def sizes(self):
        return np.add.reduceat(self.sub_unit_sizes, self.offsets[:-1])

    def hhi(self):
        s2 = np.add.reduceat(self.sub_unit_sizes**2, self.offsets[:-1])
        return s2 / self.sizes() ** 2

    def theoretical_volatilities(self, sigma0):
        return sigma0 * np.sqrt(self.hhi())

    def growth_rates(self, shocks, sigma0):
        """One-period growth rates given one unit-variance shock per sub-unit."""
        shocks = np.asarray(shocks, dtype=float)
        if shocks.size != self.sub_unit_sizes.size:
            raise ValueError("need exactly one shock per sub-unit")
        num = np.add.reduceat(self.sub_unit_sizes * shocks, self.offsets[:-1])
        return sigma0 * num / self.sizes()


# ---------------------------------------------------------------------------
# Drawing firms
# ---------------------------------------------------------------------------

def _draw_counts(params: ModelParams, n, rng):
    if isinstance(params.k_mode, FixedCount):
        return np.full(n, params.k_mode.count, dtype=np.int64)
    # continuous Pareto(1, alpha) rounded up to an integer count;
    # 1 - U keeps the uniform in (0, 1] so the draw is always finite
    return np.ceil((1.0 - rng.random(n)) ** (-1.0 / params.alpha)).astype(np.int64)


def draw_firm(params: ModelParams, rng) -> Firm:
    """Draw one firm: its sub-unit count (if random), then its sizes."""
    k = int(_draw_counts(params, 1, rng)[0])
    sizes = params.s0 * (1.0 - rng.random(k)) ** (-1.0 / params.mu)
    return Firm(sizes)


def draw_population(params: ModelParams, n_firms, rng) -> FirmPopulation:
    """Draw a population in one vectorized pass.

    Draw order is fixed: all counts in firm order, then all sub-unit sizes in
    firm order, so a given generator state determines the population exactly.
    """
    if n_firms < 1:
        raise ValueError("n_firms must be >= 1")
    counts = _draw_counts(params, n_firms, rng)
    total = int(counts.sum())
    flat = np.empty(total)
    # draw in blocks to keep peak memory bounded on very large populations
    block = 1 << 24
    for i in range(0, total, block):
        m = min(block, total - i)
        flat[i : i + m] = rng.random(m)
    np.subtract(1.0, flat, out=flat)  # uniforms in (0, 1], finite draws
    np.power(flat, -1.0 / params.mu, out=flat)
    flat *= params.s0
    return FirmPopulation(flat, counts)


# ---------------------------------------------------------------------------
# Concentration and growth
# ---------------------------------------------------------------------------

def _sizes_of(firm):
    return firm.sub_unit_sizes if isinstance(firm, Firm) else np.asarray(firm, dtype=float)


def hhi(firm):
    """Herfindahl-Hirschman index of the firm's sub-unit sizes, in [1/K, 1]."""
    s = _sizes_of(firm)
    return float((s**2).sum() / s.sum() ** 2)


def growth_rate(firm, shocks, sigma0):
    """One-period growth rate: sigma0 times the size-weighted mean shock."""
    s = _sizes_of(firm)
    shocks = np.asarray(shocks, dtype=float)
    if shocks.shape != s.shape:
        raise ValueError(f"shock vector shape {shocks.shape} does not match {s.shape}")
    return float(sigma0 * (s * shocks).sum() / s.sum())


def theoretical_volatility(firm, sigma0):
    """Exact one-period growth-rate standard deviation, sigma0 * sqrt(HHI)."""
    return float(sigma0 * np.sqrt(hhi(firm)))


# ---------------------------------------------------------------------------
# Panels
# ---------------------------------------------------------------------------

@dataclass
class Panel:
    """Firm-by-period size observations (long format, sorted by firm then period)."""

    firm_id: np.ndarray
    period: np.ndarray
    size: np.ndarray

    def __post_init__(self):
        self.firm_id = np.asarray(self.firm_id, dtype=np.int64)
        self.period = np.asarray(self.period, dtype=np.int64)
        self.size = np.asarray(self.size, dtype=float)
        if not (self.firm_id.size == self.period.size == self.size.size):
            raise ValueError("panel columns must have equal length")

    @property
    def n_records(self):
        return self.firm_id.size

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("firm_id,period,size\n")
            for i, t, s in zip(self.firm_id, self.period, self.size):
                fh.write(f"{i},{t},{float(s)!r}\n")

    @classmethod
    def read_csv(cls, path):
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
        data = np.atleast_1d(data)
        return cls(data["firm_id"], data["period"], data["size"])


@dataclass
class PanelRunInfo:
    """Metadata recorded next to a simulated panel."""

    params: ModelParams
    seed: int
    n_firms: int
    n_periods: int
    clamp_count: int

    def write_json(self, path):
        payload = {
            "params": self.params.to_dict(),
            "seed": int(self.seed),
            "n_firms": int(self.n_firms),
            "n_periods": int(self.n_periods),
            "clamp_count": int(self.clamp_count),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _simulate_firm_block(params, seed, lo, hi, n_periods, sizes):
    pool = _StreamPool(seed)
    clamp_count = 0
    for i in range(lo, hi):
        gen = pool.stream(i)
        if isinstance(params.k_mode, FixedCount):
            k = params.k_mode.count
        else:
            k = int(np.ceil((1.0 - gen.random()) ** (-1.0 / params.alpha)))
        s = params.s0 * (1.0 - gen.random(k)) ** (-1.0 / params.mu)
        out = sizes[i * n_periods : (i + 1) * n_periods]
        out[0] = s.sum()
        eta = shocks_from_uniforms(
            gen.random((n_periods - 1, k)), params.shock_law, params.student_dof
        )
        mult = 1.0 + params.sigma0 * eta
        clamp_count += int((mult < _MULTIPLIER_FLOOR).sum())
        np.maximum(mult, _MULTIPLIER_FLOOR, out=mult)
        np.cumprod(mult, axis=0, out=mult)
        out[1:] = mult @ s
    return clamp_count


def simulate_panel(params: ModelParams, n_firms, n_periods, seed, threads=1):
    """Simulate a panel of firm sizes under multiplicative sub-unit shocks.

    Each firm evolves on its own substream (see :func:`firm_stream`): first
    the count draw (ParetoCount only), then the initial sizes, then one block
    of shock uniforms per period in period-major order.  Per-period size
    multipliers 1 + sigma0 * shock are floored at 1e-6 to preserve positivity;
    the number of floored multipliers is reported in the run info.

    Because every firm owns its substream, the panel is bit-identical for any
    thread count or scheduling of the per-firm work.

    Returns (Panel, PanelRunInfo).
    """
    if n_firms < 1:
        raise ValueError("n_firms must be >= 1")
    if n_periods < 2:
        raise ValueError("n_periods must be >= 2")

    sizes = np.empty(n_firms * n_periods)
    threads = max(1, int(threads))
    if threads == 1 or n_firms < 2048:
        clamp_count = _simulate_firm_block(params, seed, 0, n_firms, n_periods, sizes)
    else:
        from concurrent.futures import ThreadPoolExecutor

        block = 4096
        ranges = [(lo, min(lo + block, n_firms)) for lo in range(0, n_firms, block)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_simulate_firm_block, params, seed, lo, hi, n_periods, sizes)
                for lo, hi in ranges
            ]
            clamp_count = sum(f.result() for f in futures)

    firm_id = np.repeat(np.arange(n_firms, dtype=np.int64), n_periods)
    period = np.tile(np.arange(n_periods, dtype=np.int64), n_firms)
    panel = Panel(firm_id, period, sizes)
    info = PanelRunInfo(params, int(seed), int(n_firms), int(n_periods), clamp_count)
    return panel, info


# ---------------------------------------------------------------------------
# Population-level diagnostics
# ---------------------------------------------------------------------------

def fraction_few_subunits(population: FirmPopulation, size_bin_edges, k_threshold):
    """Per size bin, the fraction of firms with at most k_threshold sub-units.

    Returns (mean_size, fraction, n_firms) arrays, one entry per bin between
    consecutive edges.  Empty bins are reported as NaN, never as zero.
    """
    edges = np.asarray(size_bin_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("size_bin_edges must be increasing with at least two entries")
    sizes = population.sizes()
    few = population.counts <= int(k_threshold)
    idx = np.digitize(sizes, edges) - 1
    n_bins = edges.size - 1
    mean_size = np.full(n_bins, np.nan)
    fraction = np.full(n_bins, np.nan)
    n_firms = np.zeros(n_bins, dtype=np.int64)
    for b in range(n_bins):
        m = idx == b
        n = int(m.sum())
        n_firms[b] = n
        if n:
            mean_size[b] = sizes[m].mean()
            fraction[b] = few[m].mean()
    return mean_size, fraction, n_firms


def few_subunit_tail_slope(
    population: FirmPopulation,
    k_threshold,
    size_floor=40.0,
    n_bins=10,
    trim_decades=0.2,
    min_count=150,
):
    """Log-log slope of the few-sub-unit fraction over the upper size range.

    Log-spaced bins run from size_floor up to the largest size trimmed by
    trim_decades (the extreme order statistics alone are too noisy to bin).
    Bins need min_count firms and a nonzero fraction; the fit weights each
    bin by n * f / (1 - f), the inverse variance of log of a binomial rate.
    Per the tail structure of the size distribution the slope estimates
    alpha - mu.  Returns (slope, n_bins_used).
    """
    from firmgrowth.analysis import weighted_loglog_slope

    sizes = population.sizes()
    hi = np.log10(sizes.max()) - trim_decades
    if 10.0**hi <= size_floor:
        raise ValueError("size range above the floor is empty")
    edges = np.logspace(np.log10(size_floor), hi, n_bins + 1)
    mean_size, fraction, counts = fraction_few_subunits(population, edges, k_threshold)
    keep = (counts >= min_count) & (fraction > 0) & np.isfinite(fraction)
    if keep.sum() < 3:
        raise ValueError("fewer than 3 usable bins for the tail-fraction fit")
    weights = counts[keep] * fraction[keep] / (1.0 - np.minimum(fraction[keep], 1 - 1e-9))
    slope = weighted_loglog_slope(mean_size[keep], fraction[keep], weights)
    return slope, int(keep.sum())


def aggregate_firms(population: FirmPopulation, group_size, rng) -> FirmPopulation:
    """Merge firms into supra-firms of `group_size` by random partition.

    Sub-unit vectors are concatenated, so the total economy size is conserved
    exactly.  When the population size is not a multiple of group_size the
    remainder firms form one final smaller group.
    """
    g = int(group_size)
    n = population.n_firms
    if g < 1:
        raise ValueError("group_size must be >= 1")
    if g > n:
        raise ValueError(f"group_size {g} exceeds population size {n}")
    perm = rng.permutation(n)
    take = _gather_indices(population, perm)
    flat = population.sub_unit_sizes[take]
    counts = population.counts[perm]
    merged_counts = np.add.reduceat(counts, np.arange(0, n, g))
    return FirmPopulation(flat, merged_counts)


def _gather_indices(population, perm):
    # vectorized ragged gather for large populations
    counts = population.counts[perm]
    starts = population.offsets[perm]
    out_off = np.concatenate(([0], np.cumsum(counts)))
    total = int(out_off[-1])
    idx = np.repeat(starts - out_off[:-1], counts) + np.arange(total)
    return idx


def sample_firm_stats(params: ModelParams, k, n_samples, rng):
    """(size, HHI) draws for firms of exactly k sub-units (bounded blocks)."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    sizes = np.empty(n_samples)
    hhi_out = np.empty(n_samples)
    block = max(1, int(8e6) // k)
    done = 0
    while done < n_samples:
        c = min(block, n_samples - done)
        s = params.s0 * (1.0 - rng.random((c, k))) ** (-1.0 / params.mu)
        tot = s.sum(axis=1)
        sizes[done : done + c] = tot
        hhi_out[done : done + c] = (s * s).sum(axis=1) / tot**2
        done += c
    return sizes, hhi_out


def sample_hhi(params: ModelParams, k, n_samples, rng):
    """HHI draws for firms of exactly k sub-units."""
    return sample_firm_stats(params, k, n_samples, rng)[1]


def conditional_hhi_moment_mc(params: ModelParams, k, q, n_samples, rng):
    """Monte Carlo estimate of E[HHI^q | K = k] with its standard error."""
    if not q > 0:
        raise ValueError("q must be positive")
    if int(k) == 1:
        return 1.0, 0.0
    hq = sample_hhi(params, k, n_samples, rng) ** q
    return float(hq.mean()), float(hq.std(ddof=1) / np.sqrt(n_samples))
