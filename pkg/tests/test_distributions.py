import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divrisk.distributions import FALLING, FLAT, RISING, make_dist, piece_of, quantile_piece
from reference import bisect_quantile, conv_cdf, conv_quantile, conv_tail_mean

weights = st.tuples(st.floats(0, 3), st.floats(0, 3)).filter(lambda w: max(w) > 1e-3)
scales = st.floats(0.05, 20)


def test_make_dist_examples():
    tri = make_dist((0.5, 0.5), 1.0)
    assert (tri.a, tri.b, tri.upper) == (0.5, 0.5, 1.0)
    uni = make_dist((1, 0), 1.0)
    assert (uni.a, uni.b) == (0.0, 1.0) and uni.is_uniform
    d = make_dist((0.3, 0.7), 1.0)
    assert (d.a, d.b) == (0.3, 0.7)
    assert make_dist((0.7, 0.3), 2.0) == make_dist((0.3, 0.7), 2.0)


def test_make_dist_rejects_zero_weights():
    with pytest.raises(ValueError):
        make_dist((0, 0), 1.0)
    with pytest.raises(ValueError):
        make_dist((1, -0.1), 1.0)


def test_cdf_examples():
    assert make_dist((0.5, 0.5), 1).cdf(0.5) == 0.5
    # frozen from quadrature oracle: 0.09 / 0.42
    assert make_dist((0.3, 0.7), 1).cdf(0.3) == pytest.approx(0.21428571428571427, abs=1e-15)
    assert make_dist((0.5, 1.5), 1).cdf(0.5) == pytest.approx(1 / 6, abs=1e-15)


@pytest.mark.parametrize("w, k", [((0.3, 0.7), 0.3), ((0.5, 1.5), 0.5), ((0.2, 0.9), 1.0), ((1.0, 0.0), 0.4)])
def test_cdf_matches_quadrature(w, k):
    assert make_dist(w, 1.0).cdf(k) == pytest.approx(conv_cdf(*w, 1.0, k), abs=1e-12)


def test_quantile_examples():
    assert make_dist((1, 0), 1).quantile(0.05) == pytest.approx(0.05, abs=1e-15)
    tri = make_dist((0.5, 0.5), 1)
    assert tri.quantile(0.05) == pytest.approx(0.15811388300841897, abs=1e-15)
    assert tri.quantile(0.05) == pytest.approx(bisect_quantile(tri.cdf, 0.05, 0, 1), abs=1e-12)
    assert make_dist((0.3, 0.7), 1).quantile(0.5) == pytest.approx(0.5, abs=1e-15)
    assert conv_quantile(0.3, 0.7, 1.0, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_quantile_rejects_bad_p():
    with pytest.raises(ValueError):
        make_dist((1, 1), 1).quantile(1.5)


def test_tail_mean_examples():
    assert make_dist((1, 0), 1).tail_mean_below(0.05) == pytest.approx(0.025, abs=1e-15)
    tri = make_dist((0.5, 0.5), 1)
    k = tri.quantile(0.05)
    # rising piece: 2k/3; quadrature oracle gives 0.10540925533894807
    assert tri.tail_mean_below(k) == pytest.approx(0.10540925533894807, abs=1e-12)
    assert tri.tail_mean_below(k) == pytest.approx(2 * k / 3, abs=1e-15)
    assert tri.tail_mean_below(1.0) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("w, k", [((0.3, 0.7), 0.2), ((0.3, 0.7), 0.5), ((0.3, 0.7), 0.9), ((0.5, 1.5), 1.7)])
def test_tail_mean_matches_quadrature(w, k):
    assert make_dist(w, 1.0).tail_mean_below(k) == pytest.approx(conv_tail_mean(*w, 1.0, k), abs=1e-11)


def test_tail_mean_empty_event():
    with pytest.raises(ValueError):
        make_dist((1, 1), 1).tail_mean_below(0.0)


def test_pieces_and_ties():
    d = make_dist((0.3, 0.7), 1)
    assert piece_of(d, 0.3) == RISING  # ties go to the lower piece
    assert piece_of(d, 0.7) == FLAT
    assert piece_of(d, 0.8) == FALLING
    assert quantile_piece(d, d.cdf(0.3)) == RISING
    # boundary values agree from both sides
    eps = 1e-12
    for k in (0.3, 0.7):
        assert abs(d.cdf(k - eps) - d.cdf(k + eps)) < 1e-11


@settings(max_examples=300, deadline=None)
@given(weights, scales, st.floats(0, 1))
def test_cdf_monotone_bounded(w, s, frac):
    law = make_dist(w, s)
    ks = np.linspace(-0.1, 1.1, 200) * law.upper
    vals = [law.cdf(k) for k in ks]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert law.cdf(0.0) == 0.0 and law.cdf(law.upper) == 1.0


@settings(max_examples=300, deadline=None)
@given(weights, scales, st.floats(1e-9, 1 - 1e-9))
def test_cdf_of_quantile(w, s, p):
    law = make_dist(w, s)
    assert law.cdf(law.quantile(p)) == pytest.approx(p, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(weights, scales, st.floats(0.001, 0.999))
def test_quantile_of_cdf(w, s, frac):
    law = make_dist(w, s)
    k = frac * law.upper
    assert law.quantile(law.cdf(k)) == pytest.approx(k, abs=1e-10 * max(1, law.upper))


@settings(max_examples=200, deadline=None)
@given(weights, scales)
def test_tail_mean_at_upper_is_mean(w, s):
    law = make_dist(w, s)
    assert law.tail_mean_below(law.upper) == pytest.approx(sum(w) * s / 2, abs=1e-12 * max(1, law.upper))


@settings(max_examples=200, deadline=None)
@given(weights, scales, st.floats(0.01, 1))
def test_tail_mean_bounds(w, s, frac):
    law = make_dist(w, s)
    k = frac * law.upper
    m = law.tail_mean_below(k)
    assert 0.0 <= m <= k * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(weights, scales, st.floats(0, 1))
def test_symmetric_in_weights(w, s, frac):
    a, b = make_dist(w, s), make_dist(w[::-1], s)
    assert a == b
    k = frac * a.upper
    assert a.cdf(k) == b.cdf(k)


def test_uniform_short_circuit():
    law = make_dist((0.0, 2.0), 1.0)
    assert law.cdf(0.5) == 0.25
    assert law.quantile(0.25) == 0.5
    assert law.tail_mean_below(0.5) == pytest.approx(0.25)
    assert math.isfinite(law.tail_mean_below(1e-9))
