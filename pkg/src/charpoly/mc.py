"""Monte Carlo estimation of F_m and of the normalized ratio in log domain.

Samples are split into fixed-size chunks. Chunk ``c`` draws its matrices
from the generator seeded by ``SeedSequence(seed, spawn_key=(c,))``, so a
result depends only on the configuration and never on how many workers
evaluated the chunks. Standard errors come from a delete-one-chunk
jackknife of the final (log-domain, hence nonlinear) statistic.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import GAUSSIAN, EntryDistributionSpec
from .logvalue import LogValue
from .matrix import batched_log_abs_det_sq, sample_matrices
from .points import PointConfig

log = logging.getLogger(__name__)

THREADS_ENV = "CHARPOLY_THREADS"
# one sub-batch holds at most this many complex entries (~32 MB)
_BATCH_ENTRIES = 1 << 21
# a single sample carrying more than this share of the mean makes the estimate unreliable
HEAVY_TAIL_SHARE = 0.2


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MCConfig:
    points: PointConfig
    spec: EntryDistributionSpec = GAUSSIAN
    samples: int = 100_000
    chunk_size: int = 1000
    seed: int = 0
    requested_samples: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        chunks = -(-self.samples // self.chunk_size)
        if not self.requested_samples:
            object.__setattr__(self, "requested_samples", self.samples)
        object.__setattr__(self, "samples", chunks * self.chunk_size)

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def chunks(self) -> int:
        return self.samples // self.chunk_size


@dataclass
class MCEstimate:
    log_mean: LogValue
    jackknife_stderr_log: float
    samples: int
    seed: int
    flags: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def log_value(self) -> float:
        return self.log_mean.log_abs

    @property
    def value(self) -> float:
        return self.log_mean.value

    def z_score(self, target_log: float) -> float:
        if self.jackknife_stderr_log == 0.0:
            return 0.0 if target_log == self.log_value else math.inf
        return (self.log_value - target_log) / self.jackknife_stderr_log


def log_mean_exp(x) -> float:
    """log(mean(exp(x))) without overflow; -inf entries count as zeros."""
    x = np.asarray(x, dtype=float)
    mx = np.max(x)
    if mx == -np.inf:
        return -math.inf
    return float(mx + np.log(np.mean(np.exp(x - mx))))


def _jackknife(leave_one_out) -> float:
    t = np.asarray(leave_one_out, dtype=float)
    k = len(t)
    return float(math.sqrt((k - 1) / k * np.sum((t - t.mean()) ** 2)))


def jackknife_error(chunk_log_means) -> float:
    """Delete-one-chunk jackknife error of log(mean over chunks of exp(chunk_log_means)).

    Chunks are assumed to be of equal size.
    """
    a = np.asarray(chunk_log_means, dtype=float)
    if len(a) < 2:
        raise ValueError("jackknife needs at least two chunks")
    if np.all(a == a[0]):
        return 0.0
    return _jackknife([log_mean_exp(np.delete(a, c)) for c in range(len(a))])


def tail_diagnostics(x) -> dict:
    """Share of the mean of exp(x) carried by the largest sample and by the top 1%."""
    x = np.asarray(x, dtype=float)
    finite = x[np.isfinite(x)]
    if finite.size == 0:
        return {"max_sample_share": math.nan, "top1pct_share": math.nan}
    w = np.exp(finite - finite.max())
    w_sorted = np.sort(w)[::-1]
    total = w_sorted.sum()
    top = max(1, int(math.ceil(0.01 * len(w_sorted))))
    return {"max_sample_share": float(w_sorted[0] / total), "top1pct_share": float(w_sorted[:top].sum() / total)}


def _chunk_log_dets(config: MCConfig, chunk: int) -> np.ndarray:
    """log |det(M - z_j)|^2 for every sample of one chunk, shape (chunk_size, m)."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(chunk,)))
    n, zs = config.n, config.points.zs
    per_batch = max(1, _BATCH_ENTRIES // (n * n))
    out = np.empty((config.chunk_size, len(zs)))
    for start in range(0, config.chunk_size, per_batch):
        stop = min(config.chunk_size, start + per_batch)
        Ms = sample_matrices(stop - start, n, config.spec, rng)
        for j, z in enumerate(zs):
            out[start:stop, j] = batched_log_abs_det_sq(Ms, z)
    return out


def sample_log_dets(config: MCConfig, workers: int | None = None) -> np.ndarray:
    """All per-sample log-determinants in chunk order, shape (samples, m)."""
    workers = workers or default_workers()
    chunks = range(config.chunks)
    if workers == 1 or config.chunks == 1:
        parts = [_chunk_log_dets(config, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_log_dets(config, c), chunks))
    return np.concatenate(parts)


def log_products(L: np.ndarray) -> np.ndarray:
    """Row sums of per-shift log-determinants, independent of column order."""
    return np.sort(L, axis=1).sum(axis=1)


def _chunk_means(x: np.ndarray, chunk_size: int) -> np.ndarray:
    return np.array([log_mean_exp(c) for c in x.reshape(-1, chunk_size)])


def _heavy_tail_flags(diag: dict, label: str) -> list:
    if diag["max_sample_share"] > HEAVY_TAIL_SHARE:
        return [f"variance-unreliable: one sample carries {diag['max_sample_share']:.0%} of {label}"]
    return []


def estimate_Fm(config: MCConfig, workers: int | None = None, log_dets: np.ndarray | None = None) -> MCEstimate:
    """Monte Carlo estimate of E prod_j |det(M_n - z_j)|^2 in log domain."""
    if config.requested_samples < 100:
        raise ValueError("estimate_Fm needs at least 100 samples")
    L = sample_log_dets(config, workers) if log_dets is None else log_dets
    x = log_products(L)
    if np.all(x == -np.inf):
        return MCEstimate(LogValue.zero(), math.inf, config.samples, config.seed, ["degenerate: every sample singular"])
    a = _chunk_means(x, config.chunk_size)
    stderr = jackknife_error(a) if len(a) > 1 else math.inf
    diag = tail_diagnostics(x)
    flags = _heavy_tail_flags(diag, "F_m")
    if len(a) < 2:
        flags.append("single chunk: no jackknife error available")
    return MCEstimate(LogValue(log_mean_exp(a)), stderr, config.samples, config.seed, flags, diag)


def _check_distinct(zetas):
    for j in range(len(zetas)):
        for k in range(j):
            if zetas[j] == zetas[k]:
                raise ValueError(
                    f"zetas[{k}] == zetas[{j}]: confluent configuration, the target's Vandermonde factor vanishes"
                )


def estimate_theorem_ratio(config: MCConfig, workers: int | None = None,
                           log_dets: np.ndarray | None = None) -> MCEstimate:
    """n^{-(m^2-m)/2} F_m(Z) / (F_1(z_1) ... F_1(z_m)) with common random numbers.

    Numerator and every denominator factor are averaged over the same
    matrices, which keeps the strongly correlated fluctuations of nearby
    log-determinants from inflating the ratio's variance.
    """
    m, n = config.points.m, config.n
    if m < 2:
        raise ValueError("the ratio needs m >= 2")
    if config.requested_samples < 100:
        raise ValueError("estimate_theorem_ratio needs at least 100 samples")
    _check_distinct(config.points.zetas)
    L = sample_log_dets(config, workers) if log_dets is None else log_dets
    num = _chunk_means(log_products(L), config.chunk_size)
    dens = [_chunk_means(L[:, j], config.chunk_size) for j in range(m)]
    if np.all(num == -np.inf):
        return MCEstimate(LogValue.zero(), math.inf, config.samples, config.seed, ["degenerate: every sample singular"])
    offset = 0.5 * (m * m - m) * math.log(n)

    def stat(keep):
        return log_mean_exp(num[keep]) - math.fsum(log_mean_exp(d[keep]) for d in dens) - offset

    C = len(num)
    all_chunks = np.ones(C, dtype=bool)
    value = stat(all_chunks)
    if C > 1:
        loo = []
        for c in range(C):
            all_chunks[c] = False
            loo.append(stat(all_chunks))
            all_chunks[c] = True
        stderr = _jackknife(loo)
    else:
        stderr = math.inf
    diag = {"numerator": tail_diagnostics(log_products(L))}
    flags = _heavy_tail_flags(diag["numerator"], "the numerator")
    for j in range(m):
        diag[f"denominator_{j}"] = tail_diagnostics(L[:, j])
        flags += _heavy_tail_flags(diag[f"denominator_{j}"], f"denominator {j}")
    return MCEstimate(LogValue(value), stderr, config.samples, config.seed, flags, diag)
