"""Closed-form default probabilities and the covariance surface.

Every probability here is the area of a region of [0, s]^2 cut out by
the banks' default lines, divided by s^2.  The formulas are written out
explicitly rather than routed through :mod:`divrisk.distributions` so the
two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Diversification, ModelParams, ValidationError

BELOW_THRESHOLD = "interval_below_threshold"
ABOVE_THRESHOLD = "interval_rm_rM"
EMPTY = "empty"


@dataclass(frozen=True)
class BenefitRegion:
    case_tag: str
    lower: float = math.nan
    upper: float = math.nan

    @property
    def empty(self) -> bool:
        return self.case_tag == EMPTY

    def __contains__(self, r) -> bool:
        return not self.empty and self.lower <= r <= self.upper


@dataclass(frozen=True)
class CovarianceMatrix:
    var1: float
    var2: float
    cov: float
    w: float

    @property
    def var_sum(self) -> float:
        """Var(v1 + v2) = var1 + var2 + 2 cov."""
        return self.var1 + self.var2 + 2.0 * self.cov

    def as_array(self):
        import numpy as np

        return np.array([[self.var1, self.cov], [self.cov, self.var2]])


def _clamp(p: float) -> float:
    if -1e-15 < p < 0.0:
        return 0.0
    return p


def _check_weight(r):
    if not 0.0 <= r <= 1.0:
        raise ValidationError(f"weight must lie in [0, 1], got {r!r}")


def individual_default_prob(params: ModelParams, r: float) -> float:
    """P((1 - r) X + r Y <= d).

    Three regimes, keyed by the smaller weight m = min(r, 1 - r):

    * d <= m s: both axis intercepts inside the square, a single triangle
      of area d^2 / (2 r (1 - r));
    * m s < d <= (1 - m) s: one intercept leaves the square, giving
      (2d - m s) / (2 s (1 - m));
    * d > (1 - m) s: only possible when s < 2d; the complement is a
      corner triangle.
    """
    _check_weight(r)
    s, d = params.s, params.d
    m = min(r, 1.0 - r)
    if m == 0.0:
        return d / s
    if d <= m * s:
        p = 0.5 * (d / s) ** 2 / (r * (1.0 - r))
    elif d <= (1.0 - m) * s:
        p = (2 * d - m * s) / (2 * s * (1.0 - m))
    else:
        p = 1.0 - 0.5 * ((s - d) / s) ** 2 / (r * (1.0 - r))
    return _clamp(p)


def benefit_region(params: ModelParams, regime: str = ABOVE_THRESHOLD) -> BenefitRegion:
    """Weights for which diversifying does not raise a bank's default probability.

    ``regime`` selects between the low-weight interval (0, d/s) and the
    interval (r_m, r_M) around 1/2 solving r (1 - r) >= d / (2s).  Note
    r_m <= d/s whenever s >= 2d, so the two intervals overlap.
    """
    s, d = params.s, params.d
    if s < 2 * d:
        return BenefitRegion(EMPTY)
    if regime == BELOW_THRESHOLD:
        return BenefitRegion(BELOW_THRESHOLD, 0.0, d / s)
    if regime == ABOVE_THRESHOLD:
        root = math.sqrt(max(1.0 - 2.0 * d / s, 0.0))
        return BenefitRegion(ABOVE_THRESHOLD, 0.5 * (1.0 - root), 0.5 * (1.0 + root))
    raise ValueError(f"unknown regime {regime!r}")


def _wedge_area(a: float, b: float, s: float, d: float) -> float:
    # area of {0 <= y <= x <= s, a x + b y <= d} with a + b = 1, d < s;
    # the line passes through (d, d)
    if a * s > d:
        return 0.5 * d * d / a
    # x-intercept d/a lies beyond the square: cut at x = s
    return 0.5 * d * d + (d * (s - d) - 0.5 * a * (s * s - d * d)) / b


def joint_default_prob(params: ModelParams, div: Diversification) -> float:
    """P(v1 <= d, v2 <= d).

    Both default lines pass through (d, d).  On each side of the diagonal
    exactly one of them binds, so the region splits into two wedges.
    While each wedge is a triangle inside the square this gives
    (d/s)^2 / 2 * [1/(1-r1) + 1/(1-r2)] for r1 + r2 < 1 and
    (d/s)^2 / 2 * [1/r1 + 1/r2] otherwise; a wedge whose intercept leaves
    the square is truncated at the edge.  Requires s >= 2d.
    """
    params.require_deep_support("joint default probability")
    s, d = params.s, params.d
    r1, r2 = div.r1, div.r2
    if r1 + r2 < 1.0:
        # below the diagonal bank 1 binds, above it bank 2 (mirrored)
        area = _wedge_area(1.0 - r1, r1, s, d) + _wedge_area(1.0 - r2, r2, s, d)
    else:
        area = _wedge_area(r2, 1.0 - r2, s, d) + _wedge_area(r1, 1.0 - r1, s, d)
    return _clamp(area / (s * s))


def joint_default_prob_printed(params: ModelParams, div: Diversification) -> float:
    """The untruncated two-branch formula, valid while both wedges fit the square."""
    q = 0.5 * (params.d / params.s) ** 2
    r1, r2 = div.r1, div.r2
    if r1 + r2 < 1.0:
        return q * (1.0 / (1.0 - r1) + 1.0 / (1.0 - r2))
    return q * (1.0 / r1 + 1.0 / r2)


def covariance_weight(r1: float, r2: float) -> float:
    """w(r1, r2) = r1 + r2 - 2 r1 r2 = r1 (1 - r2) + r2 (1 - r1) >= 0."""
    return r1 + r2 - 2.0 * r1 * r2


def covariance_matrix(params: ModelParams, div: Diversification) -> CovarianceMatrix:
    sigma2 = params.variance
    r1, r2 = div.r1, div.r2
    w = covariance_weight(r1, r2)
    return CovarianceMatrix(
        var1=((1.0 - r1) ** 2 + r1**2) * sigma2,
        var2=((1.0 - r2) ** 2 + r2**2) * sigma2,
        cov=w * sigma2,
        w=w,
    )


def aggregate_default_prob(params: ModelParams, div: Diversification) -> float:
    """P(R(r1) + R(r2) <= 0) = P(c_x X + c_y Y <= 2d).

    c_x = 1 - r1 + r2 and c_y = 1 + r1 - r2.  When both intercepts 2d/c
    stay inside the square this is 2 d^2 / (s^2 c_x c_y); otherwise the
    triangle is truncated (and with a zero weight the sum is a scaled
    single asset).  Requires s >= 2d.
    """
    params.require_deep_support("aggregate default probability")
    s, d = params.s, params.d
    c_x = 1.0 - div.r1 + div.r2
    c_y = 1.0 + div.r1 - div.r2
    lo, hi = min(c_x, c_y), max(c_x, c_y)
    k = 2.0 * d
    if lo == 0.0:
        return min(k / (hi * s), 1.0)
    if k <= lo * s:
        p = 2.0 * d * d / (s * s * c_x * c_y)
    elif k <= hi * s:
        # strip under the truncated triangle: width s, heights k/hi .. (k - lo s)/hi
        p = (2.0 * k - lo * s) / (2.0 * hi * s)
    else:
        p = 1.0 - 0.5 * (2.0 * s - k) ** 2 / (s * s * c_x * c_y)
    return _clamp(p)
