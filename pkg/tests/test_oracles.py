import itertools
import math
import random

import numpy as np
import pytest

from divrisk.model import ModelParams
from divrisk.oracles import (
    HalfPlane,
    McConfig,
    QuantileGuardError,
    clipped_area,
    draw_assets,
    mc_expected_shortfall,
    mc_probability,
    mc_quantile,
)


# --- clipping ------------------------------------------------------------------

def test_clipped_area_examples():
    assert clipped_area(1.0) == 1.0
    assert clipped_area(2.0) == 4.0
    assert clipped_area(1.0, [HalfPlane(1, 1, 0.5)]) == pytest.approx(0.125, abs=1e-15)
    pair = [HalfPlane(0.9, 0.1, 0.25), HalfPlane(0.4, 0.6, 0.25)]
    # joint default at r1 = 0.1, r2 = 0.4: (d^2/2)(1/0.9 + 1/0.6)
    assert clipped_area(1.0, pair) == pytest.approx(0.03125 * (1 / 0.9 + 1 / 0.6), abs=1e-12)


def test_clipped_area_empty_and_full():
    assert clipped_area(1.0, [HalfPlane(1, 1, -0.1)]) == 0.0
    assert clipped_area(1.0, [HalfPlane(1, 1, 5.0)]) == 1.0
    assert clipped_area(1.0, [HalfPlane(1, 0, 0.3), HalfPlane(-1, 0, -0.5)]) == 0.0


def test_halfplane_needs_normal():
    with pytest.raises(ValueError):
        HalfPlane(0, 0, 1)


def _single_halfplane_area(a, b, k, s):
    """Closed form for [0,s]^2 ∩ {a x + b y <= k}, a, b > 0, via inclusion-exclusion
    of the triangle {a x + b y <= k, x, y >= 0} and the parts past x = s, y = s."""
    def tri(t):
        return t * t / (2 * a * b) if t > 0 else 0.0
    return tri(k) - tri(k - a * s) - tri(k - b * s) + tri(k - a * s - b * s)


def test_clipping_vs_analytic_random_halfplanes():
    rng = random.Random(1234)
    for _ in range(1000):
        a, b = rng.uniform(0.01, 3), rng.uniform(0.01, 3)
        s = rng.uniform(0.1, 5)
        k = rng.uniform(-0.2, 1.2) * (a + b) * s
        expected = _single_halfplane_area(a, b, k, s)
        assert clipped_area(s, [HalfPlane(a, b, k)]) == pytest.approx(expected, abs=1e-12 * max(1, s * s))


def test_clipping_order_invariant():
    rng = random.Random(99)
    for _ in range(200):
        planes = [HalfPlane(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 1.0)) for _ in range(4)]
        areas = [clipped_area(1.0, list(p)) for p in itertools.permutations(planes)]
        assert max(areas) - min(areas) < 1e-12


# --- Monte Carlo ---------------------------------------------------------------

def test_mc_probability_examples(base):
    cfg = McConfig(1_000_000, 42)
    est = mc_probability(base, lambda x, y: (x <= 0.25) & (y <= 0.25), cfg)
    assert est.within(0.0625)
    assert est.stderr == pytest.approx(math.sqrt(est.value * (1 - est.value) / cfg.n))
    sure = mc_probability(base, lambda x, y: True, cfg)
    assert (sure.value, sure.stderr) == (1.0, 0.0)
    tri = mc_probability(base, lambda x, y: 0.5 * x + 0.5 * y <= 0.25, cfg)
    assert tri.within(clipped_area(1.0, [HalfPlane(0.5, 0.5, 0.25)]))


def test_mc_config_rejects_zero():
    with pytest.raises(ValueError):
        McConfig(0, 1)


def test_mc_deterministic_across_streams():
    params = ModelParams(1.0, 0.25)
    ref = draw_assets(1.0, McConfig(300_001, 7, 1))
    for streams in (2, 3, 8):
        x, y = draw_assets(1.0, McConfig(300_001, 7, streams))
        assert np.array_equal(x, ref[0]) and np.array_equal(y, ref[1])
    a = mc_probability(params, lambda x, y: x + y < 0.4, McConfig(200_000, 5, 1))
    b = mc_probability(params, lambda x, y: x + y < 0.4, McConfig(200_000, 5, 4))
    assert a == b
    c = mc_probability(params, lambda x, y: x + y < 0.4, McConfig(200_000, 6, 1))
    assert c != a


def test_mc_sample_prefix_stable():
    # the first n draws do not depend on the total sample size
    x_small, _ = draw_assets(1.0, McConfig(70_000, 3))
    x_big, _ = draw_assets(1.0, McConfig(200_000, 3))
    assert np.array_equal(x_small, x_big[:70_000])


def test_mc_draws_are_uniform():
    x, y = draw_assets(2.0, McConfig(1_000_000, 8))
    assert 0 <= x.min() and x.max() <= 2.0
    assert x.mean() == pytest.approx(1.0, abs=4 * (2 / math.sqrt(12)) / 1000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 4e-3


@pytest.mark.parametrize("weights, shift, expected", [
    ((1.0, 0.0), 0.0, 0.05),
    ((0.5, 0.5), 0.0, 0.15811388300841897),
    ((1.0, 1.0), 0.5, math.sqrt(0.1) - 0.5),
])
def test_mc_quantile_examples(base, weights, shift, expected):
    est = mc_quantile(base, weights, shift, 0.05, McConfig(1_000_000, 42))
    assert est.within(expected)
    assert est.stderr > 0


def test_mc_quantile_guard(base):
    with pytest.raises(QuantileGuardError):
        mc_quantile(base, (1, 0), 0.0, 0.05, McConfig(1000, 1))
    with pytest.raises(ValueError):
        mc_quantile(base, (1, 0), 0.0, 1.0, McConfig(10_000, 1))


def test_mc_expected_shortfall(base):
    # ES of X - d at alpha = 0.95: d - 0.025
    est = mc_expected_shortfall(base, (1.0, 0.0), 0.25, 0.05, McConfig(1_000_000, 42))
    assert est.within(0.225)
