import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from paraplan.features import FeatureVector, ScalingProfile
from paraplan.policy import (
    THETA_SIZE, PolicyController, PolicyFile, decode, encode, forward, jacobian, to_search_params,
)

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def test_theta_size():
    assert THETA_SIZE == 7 * 7 + 7 + 6 * 7 + 6 == 104


def test_zero_theta():
    net = decode(np.zeros(THETA_SIZE))
    assert np.all(net.hidden(np.ones(7)) == 0.5)
    assert np.all(forward(net, np.arange(7.0)) == 0)


def test_bias_only_output():
    theta = np.random.default_rng(0).normal(size=THETA_SIZE)
    v = np.array([1.5, -2.0, 0.25, 3.0, 0.0, -0.5])
    theta[7 * 7 + 7 : 7 * 7 + 7 + 42] = 0
    theta[-6:] = v
    assert np.array_equal(forward(decode(theta), np.random.default_rng(1).normal(size=7)), v)


@settings(max_examples=50)
@given(arrays(np.float64, THETA_SIZE, elements=finite))
def test_roundtrip_bit_exact(theta):
    assert np.array_equal(encode(decode(theta)), theta)


def test_layout():
    theta = np.zeros(THETA_SIZE)
    theta[0] = 1.0
    net = decode(theta)
    assert net.w1[0, 0] == 1.0 and net.w1.sum() == 1.0
    assert net.b1.sum() == net.w2.sum() == net.b2.sum() == 0
    theta = np.zeros(THETA_SIZE)
    theta[1] = 2.0  # row-major: second entry is W1[0][1]
    theta[56] = 3.0  # first of W2
    net = decode(theta)
    assert net.w1[0, 1] == 2.0 and net.w2[0, 0] == 3.0


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        decode(np.zeros(103))


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        forward(decode(np.zeros(THETA_SIZE)), [0, 0, 0, np.nan, 0, 0, 0])


def test_transform_examples():
    p = to_search_params(np.zeros(6))
    assert (p.epsilon, p.local_frac) == (0.5, 0.5)
    assert (p.stall, p.walks, p.walk_length, p.cycle) == (0, 0, 0, 0)
    assert to_search_params([0, 0, 0, 0, 1.0, 0]).cycle == 100
    assert to_search_params([0, 0, -3.2, 0, 0, 0]).walks == 0
    # scale before flooring keeps resolution
    assert to_search_params([0, 0, 0, 0.07, 0, 0]).walk_length == 0
    assert to_search_params([0, 0, 0, 0.7, 0, 0]).walk_length == 7
    p = to_search_params([0, 1.29, 2.5, 0.99, 0.5, 0])
    assert (p.stall, p.walks, p.walk_length, p.cycle) == (12, 12, 9, 50)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=6, max_size=6))
def test_transform_invariants(raw):
    p = to_search_params(raw)
    assert 0 < p.epsilon < 1 and 0 < p.local_frac < 1
    assert min(p.stall, p.walks, p.walk_length, p.cycle) >= 0


def test_jacobian_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(20):
        net = decode(rng.normal(size=THETA_SIZE))
        x = rng.uniform(-1, 2, size=7)
        jac = jacobian(net, x)
        step = 1e-6
        for i in range(7):
            e = np.zeros(7)
            e[i] = step
            fd = (forward(net, x + e) - forward(net, x - e)) / (2 * step)
            np.testing.assert_allclose(fd, jac[:, i], rtol=1e-5, atol=1e-9)


def test_no_overflow_on_bounded_inputs():
    rng = np.random.default_rng(1)
    for _ in range(200):
        net = decode(rng.uniform(-100, 100, size=THETA_SIZE))
        out = forward(net, rng.uniform(-100, 100, size=7))
        assert np.all(np.isfinite(out)) and np.all(np.abs(out) <= 100 * 7 + 100)


def test_controller_scales_features():
    theta = np.zeros(THETA_SIZE)
    theta[-2] = 1.0  # raw C bias
    profile = ScalingProfile((2.0,) * 7)
    ctl = PolicyController(decode(theta), profile)
    p = ctl(FeatureVector(4, 2, 0.1, 3, 10, 8, 5))
    assert p.cycle == 100 and ctl.calls == 1


def test_policy_file_roundtrip(tmp_path):
    profile = ScalingProfile((1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0), {"domain": "gripper"})
    profile.save(tmp_path / "profile.json")
    theta = np.random.default_rng(3).normal(size=THETA_SIZE)
    pf = PolicyFile(theta, "profile.json", profile.checksum())
    pf.save(tmp_path / "policy.json")
    again = PolicyFile.load(tmp_path / "policy.json")
    assert np.array_equal(again.theta, theta)
    assert again.resolve_profile(tmp_path / "policy.json") == profile
    body = json.loads((tmp_path / "policy.json").read_text())
    assert body["outputs"] == ["eps", "S", "R", "L", "C", "c"]
    assert body["output_scales"] == {"S": 10, "R": 5, "L": 10, "C": 100}


def test_policy_file_errors(tmp_path):
    with pytest.raises(ValueError):
        PolicyFile.from_json("{not json")
    with pytest.raises(ValueError):
        PolicyFile.from_json(json.dumps({"format": "other"}))
    pf = PolicyFile(np.zeros(THETA_SIZE), "missing.json")
    with pytest.raises(FileNotFoundError):
        pf.resolve_profile(tmp_path / "policy.json")
    ScalingProfile((1.0,) * 7).save(tmp_path / "p.json")
    bad = PolicyFile(np.zeros(THETA_SIZE), "p.json", "0" * 16)
    with pytest.raises(ValueError, match="checksum"):
        bad.resolve_profile(tmp_path / "policy.json")
