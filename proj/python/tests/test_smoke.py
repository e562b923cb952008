import math

import pytest

import tcone


def test_half_line_potential_at_minus_one():
    # integral of dx / (1 + x^2) over x >= 0
    value, err = tcone.potential(tcone.Metric.potential_st(0.0, math.inf), (-1.0, 0.0, 0.0))
    assert value == pytest.approx(math.pi / 2, abs=1e-9)
    assert err < 1e-9


def test_alpha_below_one_is_rejected():
    with pytest.raises(ArithmeticError):
        tcone.Metric.potential_st(0.0, math.inf, 1.0, 0.5)


def test_parse_round_trip():
    m = tcone.Metric.parse("st:1:2:1:2")
    assert tcone.Metric.parse(m.fingerprint).fingerprint == m.fingerprint
    with pytest.raises(ValueError):
        tcone.Metric.parse("cone:1")


def test_euclidean_distance():
    r = tcone.distance(tcone.Metric.euclidean(), (0, 0, 0), (3, 4, 0))
    assert r["value"] == pytest.approx(5.0, abs=1e-9)
    assert r["lower"] <= r["value"] <= r["upper"]


def test_conv1_passes():
    assert tcone.check_conv1()["passed"]


def test_limit_and_table():
    family, label = tcone.classify_limit(2.0, "supergeometric,1,2", "pin_lower", 1.0)
    assert family == "d_S^inf" and label == "d_1^inf"
    assert len(tcone.table1(2.0)) == 7


def test_axis_length_grows():
    lengths = [l for _, l in tcone.axis_segment_length(2.0, 0.4, 0.6, [1e-1, 1e-2, 1e-3])]
    assert lengths == sorted(lengths) and lengths[0] < lengths[-1]
