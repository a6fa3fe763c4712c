"""Independent verification engines: convex clipping areas and seeded Monte Carlo.

Monte Carlo draws are organised in fixed-size blocks.  Block ``j`` always
takes its generator state from ``(seed, j)``, so the pooled sample is the
same whatever number of streams the blocks are spread over.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ModelParams

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class McConfig:
    n: int = 1_000_000
    seed: int = 42
    streams: int = 1

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n > 0):
            raise ValueError(f"sample count must be a positive integer, got {self.n!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not self.streams >= 1:
            raise ValueError(f"streams must be >= 1, got {self.streams!r}")

    def reseeded(self, offset: int = 1) -> "McConfig":
        return McConfig(self.n, (int(self.seed) + offset) % 2**64, self.streams)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n: int

    def within(self, target: float, n_sigma: float = 4.0, atol: float = 0.0) -> bool:
        return abs(self.value - target) <= n_sigma * self.stderr + atol


class QuantileGuardError(ValueError):
    """Too few samples in the tail to estimate a quantile."""


@dataclass(frozen=True)
class HalfPlane:
    """The set {(x, y): a x + b y <= k}."""

    a: float
    b: float
    k: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("half-plane needs a nonzero normal")

    def value(self, x, y):
        return self.a * x + self.b * y - self.k


# --- geometry ---------------------------------------------------------------

def clip_polygon(poly: list, hp: HalfPlane) -> list:
    """Sutherland-Hodgman step: keep the part of ``poly`` inside ``hp``."""
    out = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        fc, fn = hp.value(*cur), hp.value(*nxt)
        if fc <= 0:
            out.append(cur)
        if (fc < 0 < fn) or (fn < 0 < fc):
            t = fc / (fc - fn)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def polygon_area(poly: list) -> float:
    if len(poly) < 3:
        return 0.0
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        acc += x0 * y1 - x1 * y0
    return abs(acc) / 2.0


def clipped_area(s: float, constraints=()) -> float:
    """Area of [0, s]^2 intersected with every half-plane in ``constraints``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    poly = [(0.0, 0.0), (s, 0.0), (s, s), (0.0, s)]
    for hp in constraints:
        poly = clip_polygon(poly, hp)
        if len(poly) < 3:
            return 0.0
    return min(max(polygon_area(poly), 0.0), s * s)


def default_halfplanes(r1: float, r2: float, d: float) -> tuple[HalfPlane, HalfPlane]:
    """Default regions of bank 1 and bank 2 as half-planes."""
    return HalfPlane(1.0 - r1, r1, d), HalfPlane(r2, 1.0 - r2, d)


# --- Monte Carlo ------------------------------------------------------------

def _block_uniforms(seed: int, block: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=(block,))
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.random((2, size))


def _block_ranges(n: int, streams: int):
    nblocks = -(-n // BLOCK_SIZE)
    per = -(-nblocks // streams)
    return [range(i, min(i + per, nblocks)) for i in range(0, nblocks, per)]


@lru_cache(maxsize=4)
def _unit_samples(n: int, seed: int, streams: int) -> np.ndarray:
    out = np.empty((2, n))

    def fill(blocks):
        for j in blocks:
            lo = j * BLOCK_SIZE
            hi = min(lo + BLOCK_SIZE, n)
            out[:, lo:hi] = _block_uniforms(seed, j, hi - lo)

    ranges = _block_ranges(n, streams)
    if streams == 1:
        fill(ranges[0])
    else:
        with ThreadPoolExecutor(max_workers=streams) as pool:
            list(pool.map(fill, ranges))
    out.flags.writeable = False
    return out


def draw_assets(s: float, cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """(X, Y) samples, i.i.d. U[0, s]; a pure function of ``cfg``."""
    u = _unit_samples(int(cfg.n), int(cfg.seed), int(cfg.streams))
    return s * u[0], s * u[1]


def mc_probability(params: ModelParams, event, cfg: McConfig) -> McEstimate:
    """Frequency of ``event(x, y)`` (vectorised predicate) over the draws."""
    x, y = draw_assets(params.s, cfg)
    hits = np.broadcast_to(np.asarray(event(x, y), dtype=bool), x.shape)
    p = int(np.count_nonzero(hits)) / cfg.n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / cfg.n), cfg.n)


def mc_samples(params: ModelParams, weights, shift: float, cfg: McConfig) -> np.ndarray:
    x, y = draw_assets(params.s, cfg)
    c_x, c_y = weights
    return c_x * x + c_y * y - shift


def _check_guard(n: int, p: float):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if n * min(p, 1.0 - p) < 100:
        raise QuantileGuardError(
            f"n * p = {n * min(p, 1 - p):g} < 100: too few tail samples for p={p}"
        )


def mc_quantile(params: ModelParams, weights, shift: float, p: float, cfg: McConfig) -> McEstimate:
    """Empirical p-quantile of c_x X + c_y Y - shift.

    The standard error is half the width of the order-statistic interval
    covering one binomial standard deviation of the rank.
    """
    _check_guard(cfg.n, p)
    z = np.sort(mc_samples(params, weights, shift, cfg))
    n = cfg.n
    j = min(max(math.ceil(n * p) - 1, 0), n - 1)
    half = math.sqrt(n * p * (1.0 - p))
    lo = min(max(int(math.floor(n * p - half)) - 1, 0), n - 1)
    hi = min(max(int(math.ceil(n * p + half)) - 1, 0), n - 1)
    return McEstimate(float(z[j]), float(z[hi] - z[lo]) / 2.0, n)


def empirical_es(z: np.ndarray, p: float) -> tuple[float, float]:
    """Minus the mean of the lowest ceil(n p) values, with its standard error."""
    k = max(math.ceil(len(z) * p), 1)
    tail = np.partition(z, k - 1)[:k]
    se = float(tail.std(ddof=1)) / math.sqrt(k) if k > 1 else 0.0
    return -float(tail.mean()), se


def mc_expected_shortfall(params: ModelParams, weights, shift: float, p: float,
                          cfg: McConfig) -> McEstimate:
    """Monte Carlo ES: average loss over the worst ``p`` fraction of draws."""
    _check_guard(cfg.n, p)
    es, se = empirical_es(mc_samples(params, weights, shift, cfg), p)
    return McEstimate(es, se, cfg.n)
