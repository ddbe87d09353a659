"""Samplers for the generalized Gaussian, the cone measure on the l_p
sphere, the uniform measure on B_p^n, and importance-weighted projections.

Reproducibility model: every random draw comes from a Philox generator
keyed by ``(master_seed, stream_index, chunk_index)``.  Monte Carlo
drivers cut the sample range into fixed chunks of ``CHUNK_SIZE`` rows,
evaluate chunks independently (optionally on a thread pool) and add the
per-chunk partial sums in chunk order, so results do not depend on the
number of workers.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, UnstableEstimateError, ValidationError

__all__ = [
    "BatchSums",
    "CHUNK_SIZE",
    "DEFAULT_BATCHES",
    "GBatch",
    "McEstimate",
    "SeededStream",
    "accumulate",
    "draw_abs_pow",
    "draw_g",
    "psi_theta0",
    "resolve_threads",
    "sample_ball_uniform",
    "sample_cone",
    "sample_g",
    "sign_power",
    "sign_power_sum",
    "weighted_projection_expectation",
]

CHUNK_SIZE = 2**16
DEFAULT_BATCHES = 32
THREADS_ENV = "SNC_THREADS"


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise DomainError(f"p must be a finite real >= 1, got {p}")
    return p


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument, else $SNC_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_index: int = 0

    def generator(self, chunk: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index, chunk)
        )
        return np.random.Generator(np.random.Philox(seq))

    def substream(self, index: int) -> "SeededStream":
        """A stream disjoint from this one for any distinct ``index``."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        key = int(seq.generate_state(1, np.uint32)[0])
        return SeededStream(self.master_seed, (key << 20) + 1 + int(index))


# ---------------------------------------------------------------- draws


def draw_abs_pow(p: float, rng: np.random.Generator, size) -> np.ndarray:
    """W = |g|^p, which is Gamma(1/p, 1) distributed.

    Shape < 1 uses the boost W = V * U^(1/shape) with V ~ Gamma(shape + 1).
    """
    shape = 1.0 / p
    if shape >= 1.0:
        return rng.standard_gamma(shape, size)
    v = rng.standard_gamma(shape + 1.0, size)
    u = rng.random(size)
    return v * u**p


def _signs(rng: np.random.Generator, size) -> np.ndarray:
    return rng.integers(0, 2, size, dtype=np.int8) * 2.0 - 1.0


def draw_g(p: float, rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. draws with density exp(-|t|^p) / (2 Gamma(1 + 1/p))."""
    w = draw_abs_pow(p, rng, size)
    mag = w if p == 1 else w ** (1.0 / p)
    return _signs(rng, size) * mag


def sign_power(g: np.ndarray, p: float) -> np.ndarray:
    """sign(g) |g|^(p-1)."""
    if p == 1:
        return np.sign(g)
    if p == 2:
        return g
    return np.sign(g) * np.abs(g) ** (p - 1)


def sign_power_sum(p: float, terms: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws of sum_{i<=terms} sign(g_i)|g_i|^(p-1) for fresh i.i.d. g_i.

    p = 1 (a +-1 walk, i.e. 2 Bin(terms, 1/2) - terms) and p = 2 (a
    Gaussian with variance terms/2) are sampled exactly from their laws;
    other p sum explicit draws.
    """
    if terms <= 0:
        return np.zeros(size)
    if p == 1:
        return 2.0 * rng.binomial(terms, 0.5, size) - terms
    if p == 2:
        return rng.normal(0.0, math.sqrt(terms / 2.0), size)
    out = np.zeros(size)
    block = max(1, 2**21 // terms)
    for start in range(0, size, block):
        stop = min(size, start + block)
        w = draw_abs_pow(p, rng, (stop - start, terms))
        mag = w ** ((p - 1.0) / p)
        out[start:stop] = np.einsum("ij,ij->i", _signs(rng, mag.shape), mag)
    return out


def _lp_norm(rows: np.ndarray, p: float) -> np.ndarray:
    return np.sum(np.abs(rows) ** p, axis=-1) ** (1.0 / p)


def _draw_rows(p: float, m: int, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    g = draw_g(p, rng, (count, m))
    s = _lp_norm(g, p)
    bad = s == 0
    while bad.any():
        g[bad] = draw_g(p, rng, (int(bad.sum()), m))
        s[bad] = _lp_norm(g[bad], p)
        bad = s == 0
    return g, s


def _chunk_bounds(total: int):
    for c, start in enumerate(range(0, total, CHUNK_SIZE)):
        yield c, start, min(total, start + CHUNK_SIZE)


def sample_g(p: float, stream: SeededStream, count: int) -> np.ndarray:
    p = _check_p(p)
    if count < 1:
        raise DomainError("count must be >= 1")
    parts = [draw_g(p, stream.generator(c), b - a) for c, a, b in _chunk_bounds(count)]
    return np.concatenate(parts)


def psi_theta0(g, p: float) -> np.ndarray | float:
    """(1/sqrt(m)) |sum_i sign(g_i)|g_i|^(p-1)| for a row or each row of a matrix."""
    p = _check_p(p)
    arr = np.asarray(g, dtype=float)
    m = arr.shape[-1]
    out = np.abs(np.sum(sign_power(arr, p), axis=-1)) / math.sqrt(m)
    return float(out) if out.ndim == 0 else out


@dataclass
class GBatch:
    """Raw draws ``g`` (batch x m) with their l_p norms and psi weights."""

    draws: np.ndarray
    p: float
    s_values: np.ndarray
    psi_values: np.ndarray | None = None

    @property
    def directions(self) -> np.ndarray:
        """G/S, distributed by the cone measure on the l_p sphere."""
        return self.draws / self.s_values[:, None]

    def to_csv(self, path) -> None:
        """One row per sample: g_1..g_m, then S and psi (empty if absent)."""
        m = self.draws.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"g{i + 1}" for i in range(m)] + ["S", "psi"])
            psi = self.psi_values
            for k, row in enumerate(self.draws):
                tail = ["" if psi is None else repr(float(psi[k]))]
                w.writerow([repr(float(x)) for x in row] + [repr(float(self.s_values[k]))] + tail)


def sample_cone(p: float, m: int, stream: SeededStream, batch: int, with_psi: bool = True) -> GBatch:
    """Batch of m-dimensional generalized-Gaussian rows; rows/S lie on the
    l_p sphere with the cone measure, independently of S."""
    p = _check_p(p)
    if m < 2:
        raise DomainError("cone sampling needs m >= 2")
    gs, ss = [], []
    for c, a, b in _chunk_bounds(batch):
        g, s = _draw_rows(p, m, stream.generator(c), b - a)
        gs.append(g)
        ss.append(s)
    g = np.concatenate(gs)
    return GBatch(g, p, np.concatenate(ss), psi_theta0(g, p) if with_psi else None)


def _uniform_ball_rows(p: float, n: int, rng: np.random.Generator, count: int) -> np.ndarray:
    g, s = _draw_rows(p, n, rng, count)
    r = rng.random(count) ** (1.0 / n)
    return g * (r / s)[:, None]


def sample_ball_uniform(p: float, n: int, stream: SeededStream, batch: int) -> np.ndarray:
    """Uniform points of B_p^n: cone-measure point scaled by U^(1/n)."""
    p = _check_p(p)
    if n < 1:
        raise DomainError("n must be >= 1")
    return np.concatenate([
        _uniform_ball_rows(p, n, stream.generator(c), b - a)
        for c, a, b in _chunk_bounds(batch)
    ])


# ---------------------------------------------------------------- driver


@dataclass
class BatchSums:
    """Per-batch column sums of a per-sample statistic matrix."""

    sums: np.ndarray  # (batches, q)
    counts: np.ndarray  # (batches,)

    @property
    def samples(self) -> int:
        return int(self.counts.sum())

    @property
    def means(self) -> np.ndarray:
        return self.sums.sum(axis=0) / self.samples

    @property
    def batch_means(self) -> np.ndarray:
        return self.sums / self.counts[:, None]

    def estimate(self, stat: Callable[[np.ndarray], np.ndarray]):
        """Plug-in value of ``stat(means)`` and its batch-means standard error.

        ``stat`` maps an array of shape (..., q) to (...) or (..., k).
        """
        value = np.asarray(stat(self.means), dtype=float)
        per_batch = np.asarray(stat(self.batch_means), dtype=float)
        nb = per_batch.shape[0]
        se = per_batch.std(axis=0, ddof=1) / math.sqrt(nb)
        return value, se


def accumulate(
    kernel: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    stream: SeededStream,
    batches: int = DEFAULT_BATCHES,
    threads: int | None = None,
) -> BatchSums:
    """Run ``kernel(rng, count) -> (count, q)`` over ``samples`` rows.

    Row r belongs to batch floor(r * batches / samples); chunk partial sums
    are reduced in chunk order.
    """
    if samples < batches:
        raise DomainError(f"need at least {batches} samples, got {samples}")
    bounds = list(_chunk_bounds(samples))

    def run(bound):
        c, start, stop = bound
        vals = np.asarray(kernel(stream.generator(c), stop - start), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        ids = (np.arange(start, stop, dtype=np.int64) * batches) // samples
        lo, width = int(ids[0]), int(ids[-1] - ids[0] + 1)
        part = np.zeros((width, vals.shape[1]))
        for j in range(vals.shape[1]):
            part[:, j] = np.bincount(ids - lo, weights=vals[:, j], minlength=width)
        return lo, part

    workers = min(resolve_threads(threads), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]

    q = parts[0][1].shape[1]
    sums = np.zeros((batches, q))
    for lo, part in parts:
        sums[lo:lo + part.shape[0]] += part
    edges = (np.arange(batches + 1, dtype=np.int64) * samples + batches - 1) // batches
    counts = np.diff(edges).astype(float)
    return BatchSums(sums, counts)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    method: str
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValidationError("std_error must be >= 0")
        if self.samples < 2:
            raise ValidationError("samples must be >= 2")

    def z(self) -> float:
        return self.mean / self.std_error if self.std_error > 0 else math.copysign(math.inf, self.mean)


def weighted_projection_expectation(
    p: float,
    n: int,
    theta,
    f: Callable[[np.ndarray], np.ndarray],
    samples: int,
    stream: SeededStream,
    threads: int | None = None,
) -> McEstimate:
    """E f(X) for X uniform on the projection of B_p^n onto theta-perp.

    Points P(G/S) are weighted by |sum_i |y_i|^(p-1) sign(y_i) theta_i| with
    y = G/S; the ratio of weighted to plain weight sums is reported with a
    delta-method standard error.  ``f`` maps an (count, n) array of
    projected points to (count,) values.
    """
    p = _check_p(p)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (n,) or abs(np.linalg.norm(theta) - 1) > 1e-10:
        raise DomainError("theta must be a unit vector of length n")

    def kernel(rng, count):
        g, s = _draw_rows(p, n, rng, count)
        y = g / s[:, None]
        w = np.abs(np.einsum("ij,j->i", sign_power(y, p), theta))
        x = y - np.einsum("ij,j->i", y, theta)[:, None] * theta
        fw = np.asarray(f(x), dtype=float) * w
        return np.column_stack([fw, w, fw * fw, w * w, fw * w])

    bs = accumulate(kernel, samples, stream, threads=threads)
    m = bs.means
    N = bs.samples
    var_w = max(m[3] - m[1] ** 2, 0.0)
    se_w = math.sqrt(var_w / N)
    if m[1] <= 3 * se_w:
        raise UnstableEstimateError(f"weight mean {m[1]!r} within 3 SE ({se_w!r}) of zero")
    ratio = m[0] / m[1]
    var = (m[2] - m[0] ** 2) - 2 * ratio * (m[4] - m[0] * m[1]) + ratio**2 * var_w
    se = math.sqrt(max(var, 0.0) / N) / m[1]
    return McEstimate(float(ratio), se, N, stream.master_seed, "mc-weighted")
