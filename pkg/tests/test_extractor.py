import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtn_trng.extractor import (
    BitStream,
    EdgePolicy,
    ExtractorConfig,
    SupplyExhausted,
    counter_read,
    extract_words,
    intervals,
    one_probability,
    pack,
    predict_bit_bias,
    predicted_monobit_z,
    truncate,
    unpack,
)
from rtn_trng.rtn_markov import FALLING, RISING, TransitionEvent as Ev


def alternating(ticks):
    return [Ev(t, RISING if i % 2 == 0 else FALLING) for i, t in enumerate(ticks)]


def counter_oracle(events, cfg, total_ticks):
    """Simulate the clock, counter and edge detector one tick at a time."""
    selected = {e.tick_index for e in events if cfg.edge_policy is EdgePolicy.BOTH
                or (e.direction == RISING) == (cfg.edge_policy is EdgePolicy.RISING)}
    counter, phase, started, out = 0, 0, False, []
    for tick in range(total_ticks):
        if tick in selected:
            if started:
                out.append(counter % (1 << cfg.kept_bits))  # drop the MSBs
            started = True
            counter, phase = 0, 0
        phase += 1
        if phase == cfg.clock_div:
            phase = 0
            counter = (counter + 1) % (1 << cfg.counter_width)
    return out


def test_intervals_examples():
    assert intervals(alternating([3, 5, 11])).tolist() == [2, 6]
    evs = [Ev(3, RISING), Ev(5, FALLING), Ev(11, RISING), Ev(20, FALLING)]
    assert intervals(evs, "rising").tolist() == [8]
    assert intervals(evs, "falling").tolist() == [15]
    assert intervals([Ev(4, RISING)]).tolist() == []
    assert intervals([]).tolist() == []


def test_intervals_reject_unordered():
    with pytest.raises(ValueError):
        intervals(alternating([5, 3]))


def test_counter_read_examples():
    assert counter_read(2500, ExtractorConfig(12, 0)) == 2500
    assert counter_read(300, ExtractorConfig(8, 2)) == 44
    assert counter_read(7, ExtractorConfig(8, 2, clock_div=2)) == 3


def test_truncate_examples():
    assert truncate(2500, ExtractorConfig(12, 2)) == 452
    assert truncate(5, ExtractorConfig(12, 2)) == 5
    assert truncate(2500, ExtractorConfig(12, 0)) == 2500


@pytest.mark.parametrize("kwargs", [dict(counter_width=0), dict(counter_width=33), dict(discard_msb=8),
                                    dict(discard_msb=-1), dict(clock_div=0), dict(edge_policy="sideways")])
def test_bad_config(kwargs):
    with pytest.raises(ValueError):
        ExtractorConfig(**kwargs)


def test_pack_examples():
    s = pack([44, 5], 12, 6)
    assert s.bit_count == 12 and s.payload == bytes([0xB0, 0x50])
    s = pack([0], 6, 6)
    assert s.bit_count == 6 and s.payload == b"\x00"


def test_pack_pulls_only_needed_words():
    def supplier():
        for i in range(10**9):
            yield i % 64

    gen = supplier()
    s = pack(gen, 111072, 6)
    assert s.bit_count == 111072
    assert next(gen) == 18512 % 64  # exactly 18512 words were taken


def test_pack_supply_exhausted():
    with pytest.raises(SupplyExhausted):
        pack(iter([1, 2]), 13, 6)
    with pytest.raises(ValueError):
        pack([64], 6, 6)


def test_bitstream_invariants():
    with pytest.raises(ValueError):
        BitStream(9, b"\x00")
    with pytest.raises(ValueError):
        BitStream(4, b"\x01")  # nonzero pad bit
    with pytest.raises(ValueError):
        BitStream.from_bits([0, 2])


@settings(max_examples=200, deadline=None)
@given(bits=st.lists(st.integers(0, 1), max_size=300))
def test_pack_unpack_round_trip(bits):
    s = BitStream.from_bits(bits)
    assert unpack(s).tolist() == bits
    assert len(s.payload) == math.ceil(len(bits) / 8)


@settings(max_examples=200, deadline=None)
@given(words=st.lists(st.integers(0, 63), min_size=1, max_size=50), cut=st.integers(0, 5))
def test_pack_bit_order(words, cut):
    target = 6 * len(words) - cut
    s = pack(np.array(words), target, 6)
    expected = "".join(format(w, "06b") for w in words)[:target]
    assert "".join(map(str, s.bits())) == expected


@settings(max_examples=150, deadline=None)
@given(
    gaps=st.lists(st.integers(1, 400), min_size=0, max_size=40),
    width=st.integers(1, 10),
    data=st.data(),
)
def test_extraction_matches_tick_oracle(gaps, width, data):
    discard = data.draw(st.integers(0, width - 1))
    clock_div = data.draw(st.integers(1, 5))
    policy = data.draw(st.sampled_from(list(EdgePolicy)))
    ticks = np.cumsum([data.draw(st.integers(0, 50))] + gaps).tolist()
    events = alternating(ticks)
    cfg = ExtractorConfig(width, discard, policy, clock_div)
    assert extract_words(events, cfg).tolist() == counter_oracle(events, cfg, ticks[-1] + 1)


def exact_one_probability(tau, j, terms=200_000):
    """P(bit j of a geometric interval is 1), summed directly."""
    p = 1.0 / tau
    n = np.arange(1, terms + 1, dtype=np.float64)
    pmf = p * (1 - p) ** (n - 1)
    return pmf[(n.astype(np.int64) >> j) & 1 == 1].sum()


def test_bias_example_bit9():
    bias = predict_bit_bias(2500, 10)
    assert bias[9] == pytest.approx(0.5 - 1 / (math.exp(0.2048) + 1), abs=1e-15)
    assert bias[9] == pytest.approx(0.0512, abs=5e-4)
    assert abs(0.5 - exact_one_probability(2500, 9)) == pytest.approx(bias[9], abs=5e-4)


def test_bias_model_against_exact_distribution():
    for j in range(10):
        exact = abs(0.5 - exact_one_probability(2500, j))
        assert exact == pytest.approx(predict_bit_bias(2500, 10)[j], abs=5e-4)


def test_bias_small_bit_limit_and_monotonicity():
    b = predict_bit_bias(2500, 10)
    assert np.all(np.diff(b) >= 0)
    assert b[0] == pytest.approx(2 / (8 * 2500), rel=1e-3)
    assert np.all(predict_bit_bias(25000, 10) < b)
    assert predict_bit_bias(1e12, 10).max() < 1e-8
    assert one_probability(2500, 0) < 0.5


def test_predicted_monobit_z():
    assert predicted_monobit_z(111072, [2500, 2500], 12) == pytest.approx(22.1, abs=0.05)
    assert predicted_monobit_z(111072, [2500], 6) < 1.0
    with pytest.raises(ValueError):
        predict_bit_bias(0, 6)
