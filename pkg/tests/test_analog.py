import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtn_trng.analog_frontend import AnalogFrontend, AnalogParams, digitize, gaussian, synthesize, vref_lowpass
from rtn_trng.backends import SeededBackend
from rtn_trng.rtn_markov import DigitalTrace, RtnParams, simulate


def schmitt_oracle(samples, vref, h):
    out = [1 if samples[0] >= vref[0] else 0]
    for s, v in zip(samples[1:], vref[1:]):
        prev = out[-1]
        out.append(1 if s > v + h else 0 if s < v - h else prev)
    return out


def moving_average_oracle(samples, w):
    return [np.mean(samples[max(0, i - w + 1) : i + 1]) for i in range(len(samples))]


def test_params_validation():
    for kwargs in (dict(v_high=0, v_low=0), dict(noise_sigma=-1), dict(lp_window=0), dict(hysteresis=0.5)):
        with pytest.raises(ValueError):
            AnalogParams(**kwargs)


def test_synthesize_noiseless():
    p = AnalogParams(v_high=1.5, v_low=0.25)
    assert synthesize(np.array([1, 0, 1]), p).tolist() == [1.5, 0.25, 1.5]
    with pytest.raises(ValueError):
        synthesize(np.array([], dtype=np.uint8), p)


def test_synthesize_noise_statistics():
    p = AnalogParams(v_high=1.0, v_low=0.0, noise_sigma=0.01)
    trace = simulate(RtnParams(50, 50, 1), SeededBackend(1), tick_limit=100_000)[0]
    samples = synthesize(trace, p, SeededBackend(2))
    high = samples[trace.states == 1]
    assert abs(high.mean() - 1.0) < 3 * 0.01 / np.sqrt(len(high))
    assert np.std(high) == pytest.approx(0.01, rel=0.02)


def test_gaussian_moments():
    g = gaussian(SeededBackend(4), 200_001)
    assert len(g) == 200_001
    assert abs(g.mean()) < 3 / np.sqrt(len(g))
    assert g.var() == pytest.approx(1.0, abs=0.01)


def test_vref_examples():
    assert np.allclose(vref_lowpass(np.full(50, 0.7), 10), 0.7)
    x = np.random.default_rng(0).normal(size=40)
    assert np.array_equal(vref_lowpass(x, 1), x)
    square = np.tile([1.0] * 50 + [0.0] * 50, 100)
    assert vref_lowpass(square, 5000)[-1] == pytest.approx(0.5, abs=1 / 5000)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 200), w=st.integers(1, 60), split=st.integers(0, 200))
def test_vref_matches_oracle_and_chunks(n, w, split):
    x = np.random.default_rng(n).normal(size=n)
    whole = vref_lowpass(x, w)
    assert np.allclose(whole, moving_average_oracle(x, w))
    k = min(split, n)
    parts = np.concatenate([vref_lowpass(x[:k], w), vref_lowpass(x[k:], w, history=x[:k])])
    assert np.allclose(parts, whole)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 300), h=st.sampled_from([0.0, 0.1, 0.3]), seed=st.integers(0, 1000))
def test_digitize_matches_scalar_rule(n, h, seed):
    rng = np.random.default_rng(seed)
    samples = rng.normal(size=n)
    vref = rng.normal(scale=0.2, size=n)
    assert digitize(samples, vref, h).states.tolist() == schmitt_oracle(samples, vref, h)


def test_digitize_errors_and_hold():
    with pytest.raises(ValueError):
        digitize(np.zeros(3), np.zeros(4))
    inside = np.array([0.55, 0.45, 0.52, 0.41])
    assert digitize(inside, np.full(4, 0.5), 0.2).states.tolist() == [1, 1, 1, 1]


def test_noiseless_round_trip():
    p = AnalogParams(lp_window=500)
    trace = simulate(RtnParams(60, 60, 1), SeededBackend(8), tick_limit=20_000)[0]
    samples = synthesize(trace, p)
    out = digitize(samples, vref_lowpass(samples, p.lp_window))
    assert np.array_equal(out.states[p.lp_window :], trace.states[p.lp_window :])


def spurious_edges(h):
    p = AnalogParams(noise_sigma=0.3, lp_window=2000, hysteresis=h)
    trace = simulate(RtnParams(500, 500, 1), SeededBackend(10), tick_limit=100_000)[0]
    samples = synthesize(trace, p, SeededBackend(11))
    out = digitize(samples, vref_lowpass(samples, p.lp_window), h)
    return int(np.count_nonzero(np.diff(out.states)))


def test_hysteresis_reduces_chatter():
    assert spurious_edges(0.25) < spurious_edges(0.0)


def test_frontend_chunking_equals_single_pass():
    p = AnalogParams(noise_sigma=0.1, lp_window=300, hysteresis=0.1)
    trace = simulate(RtnParams(80, 80, 1), SeededBackend(3), tick_limit=5000)[0]
    whole = AnalogFrontend(p, SeededBackend(5)).process(trace).states
    fe = AnalogFrontend(p, SeededBackend(5))
    parts = [fe.process(DigitalTrace(trace.states[a:b])).states for a, b in ((0, 1000), (1000, 1001), (1001, 5000))]
    assert np.array_equal(np.concatenate(parts), whole)
