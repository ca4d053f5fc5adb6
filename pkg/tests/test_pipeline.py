import numpy as np
import pytest

from pdenhance import Enhancer, RunConfig, enhance, track_pitch
from pdenhance.evalkit import PitchTrack, align, overall_snr, synth_vowel
from pdenhance.gain import G_MIN


@pytest.fixture(scope="module")
def vowel():
    return 0.5 * synth_vowel(np.full(80, 200.0), "a", seed=1)


def test_output_length_is_input_plus_delay(rng):
    for n in (1, 127, 128, 1000, 2049):
        assert enhance(rng.standard_normal(n)).size == n + 128


def test_digital_silence_stays_silent():
    assert not np.any(enhance(np.zeros(4000)))


def test_noise_only_input_is_held_near_floor(rng):
    x = 0.1 * rng.standard_normal(24000)
    y = align(enhance(x), 128, x.size)
    assert np.sqrt(np.mean(y**2)) <= G_MIN * np.sqrt(np.mean(x**2)) + 1e-9


def test_clean_vowel_distortion_is_limited(vowel):
    y = align(enhance(vowel), 128, vowel.size)
    assert overall_snr(clean=vowel, processed=y) >= 10.0


def test_200hz_vowel_pitch(vowel):
    f0 = PitchTrack.from_decisions(track_pitch(vowel)).f0
    assert np.mean(np.abs(f0 - 200.0) <= 10.0) >= 0.95


@pytest.mark.parametrize("chunk", [7, 37, 128, 1000])
def test_chunking_does_not_change_output(vowel, chunk):
    x = vowel[:3000]
    ref_dec, got_dec = [], []
    ref = enhance(x, on_frame=lambda r: ref_dec.append((r.decision.periodic, r.decision.p0_hat)))
    got = enhance(x, chunk=chunk,
                  on_frame=lambda r: got_dec.append((r.decision.periodic, r.decision.p0_hat)))
    # recursive filter state split across chunks only perturbs the last bit
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)
    assert got_dec == ref_dec


def test_latency_bound(rng):
    enh = Enhancer()
    n_in = n_out = 0
    for size in rng.integers(1, 700, 40):
        n_out += enh.process(rng.standard_normal(size)).size
        n_in += size
        assert n_out >= n_in - 256
    # the flushed stream is longer than the input by exactly the filterbank delay
    assert n_out + enh.flush().size == n_in + 128


def test_comb_does_not_change_length(vowel):
    on = enhance(vowel[:2000], RunConfig(comb_enabled=True))
    off = enhance(vowel[:2000], RunConfig(comb_enabled=False))
    assert on.size == off.size


def test_frame_callback_and_counters(vowel):
    results = []
    enh = Enhancer(on_frame=results.append)
    enh.process(vowel)
    enh.flush()
    assert enh.frames == len(results) > 0
    assert enh.periodic_frames == sum(r.decision.periodic for r in results)
    for r in results:
        assert np.all(r.gain >= G_MIN) and np.all(r.gain <= 1.0)
        assert np.all(r.snr_hat >= 0) and np.all(np.isfinite(r.snr_hat))
    assert [r.frame.index for r in results] == list(range(len(results)))


def test_stream_contract():
    enh = Enhancer()
    with pytest.raises(ValueError):
        enh.process(np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        enh.process(np.zeros((2, 2)))
    enh.process(np.zeros(10))
    enh.flush()
    assert enh.flush().size == 0
    with pytest.raises(RuntimeError):
        enh.process(np.zeros(10))


def test_decisions_are_causal(vowel, rng):
    a = np.concatenate([vowel[:4000], rng.standard_normal(3000)])
    b = np.concatenate([vowel[:4000], 0.3 * vowel[4000:7000]])
    da, db = track_pitch(a), track_pitch(b)
    # frames wholly before the divergence point (plus filterbank delay) agree
    settled = (4000 - 256) // 128
    for x, y in zip(da[:settled], db[:settled]):
        assert (x.periodic, x.p0_hat) == (y.periodic, y.p0_hat)
        np.testing.assert_array_equal(x.efpd, y.efpd)


def test_decisions_are_scale_invariant(vowel, rng):
    x = vowel + 0.1 * rng.standard_normal(vowel.size)
    base = [(d.periodic, d.p0_hat) for d in track_pitch(x)]
    for scale in (1e-3, 7.0):
        assert [(d.periodic, d.p0_hat) for d in track_pitch(scale * x)] == base
