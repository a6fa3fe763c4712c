"""Exact law of c_x * X + c_y * Y for independent X, Y ~ U[0, s].

The density is a trapezoid: rising on [0, a], flat on [a, b], falling on
[b, a + b], with a = min(c_x, c_y) * s and b = max(c_x, c_y) * s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

RISING, FLAT, FALLING = "rising", "flat", "falling"


@dataclass(frozen=True)
class TrapezoidDist:
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a <= self.b and self.b > 0):
            raise ValueError(f"need 0 <= a <= b, b > 0; got a={self.a}, b={self.b}")

    @property
    def upper(self) -> float:
        return self.a + self.b

    @property
    def mean(self) -> float:
        return self.upper / 2.0

    @property
    def is_uniform(self) -> bool:
        return self.a == 0.0

    def cdf(self, k: float) -> float:
        return cdf(self, k)

    def quantile(self, p: float) -> float:
        return quantile(self, p)

    def tail_mean_below(self, k: float) -> float:
        return tail_mean_below(self, k)


def make_dist(weights, s: float) -> TrapezoidDist:
    c_x, c_y = (float(w) for w in weights)
    if c_x < 0 or c_y < 0:
        raise ValueError(f"weights must be nonnegative, got {weights}")
    if c_x == 0 and c_y == 0:
        raise ValueError("at least one weight must be positive")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return TrapezoidDist(min(c_x, c_y) * s, max(c_x, c_y) * s)


def piece_of(dist: TrapezoidDist, k: float) -> str:
    """Density piece containing k; boundary values go to the lower piece."""
    if dist.is_uniform:
        return FLAT
    if k <= dist.a:
        return RISING
    if k <= dist.b:
        return FLAT
    return FALLING


def cdf(dist: TrapezoidDist, k: float) -> float:
    a, b = dist.a, dist.b
    if k <= 0.0:
        return 0.0
    if k >= a + b:
        return 1.0
    if a == 0.0:
        return k / b
    if k <= a:
        return k * k / (2 * a * b)
    if k <= b:
        return (2 * k - a) / (2 * b)
    u = a + b - k
    return 1.0 - u * u / (2 * a * b)


def quantile_piece(dist: TrapezoidDist, p: float) -> str:
    """Density piece containing the p-quantile."""
    if dist.is_uniform:
        return FLAT
    knee = dist.a / (2 * dist.b)
    if p <= knee:
        return RISING
    if p <= 1.0 - knee:
        return FLAT
    return FALLING


def quantile(dist: TrapezoidDist, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    a, b = dist.a, dist.b
    piece = quantile_piece(dist, p)
    if a == 0.0:
        return b * p
    if piece == RISING:
        return math.sqrt(2 * a * b * p)
    if piece == FLAT:
        return a / 2 + b * p
    return a + b - math.sqrt(2 * a * b * (1.0 - p))


def _partial_moment(dist: TrapezoidDist, k: float) -> float:
    # integral of z f(z) over [0, k]
    a, b = dist.a, dist.b
    k = min(max(k, 0.0), a + b)
    if a == 0.0:
        return k * k / (2 * b)
    if k <= a:
        return k**3 / (3 * a * b)
    if k <= b:
        return a * a / (3 * b) + (k * k - a * a) / (2 * b)
    # falling piece: subtract the upper tail, integrated in u = a + b - z
    u = a + b - k
    return dist.mean - ((a + b) * u * u / 2 - u**3 / 3) / (a * b)


def tail_mean_below(dist: TrapezoidDist, k: float) -> float:
    """E[Z | Z <= k]."""
    mass = cdf(dist, k)
    if mass <= 0.0:
        raise ValueError(f"conditioning event Z <= {k} has probability zero")
    return _partial_moment(dist, k) / mass
