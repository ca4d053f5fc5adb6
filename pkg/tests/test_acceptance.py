"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict (printed in the terminal
summary by conftest) and then asserts, so a failing criterion stays red.
"""

import time
import tracemalloc

import numpy as np
import pytest

from pdenhance import Enhancer, RunConfig, enhance, track_pitch
from pdenhance import evalkit as ek
from pdenhance.filterbank import FilterbankSpec, SubbandStream, design_filterbank
from pdenhance.noise import NoiseTracker
from pdenhance.periodicity import PeriodGrid, pd_of_snr, periodicity_of_units
from pdenhance.pitch import compute_thresholds
from pdenhance.snr import snr_of_pd

VERDICTS: dict[int, str] = {}


def verdict(n: int, name: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
    VERDICTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def default_coeffs():
    return design_filterbank(FilterbankSpec(fc1=80.0, erb_step=0.5, num_filters=47,
                                             group_delay_samples=128))


def test_criterion_1_filterbank_fidelity(default_coeffs):
    x = np.zeros(8192)
    x[0] = 1.0
    h = SubbandStream(default_coeffs).analyze(x).real.sum(axis=0)
    peak = int(np.argmax(h))
    spec = 20 * np.log10(np.abs(np.fft.rfft(h)))
    f = np.fft.rfftfreq(h.size, 1 / 8000)
    band = (f >= 100) & (f <= 3200)
    ripple = spec[band].max() - spec[band].min()
    ok = abs(peak - 128) <= 1 and ripple < 1.0
    verdict(1, "filterbank fidelity", ok,
            f"peak at sample {peak}, ripple over 100-3200 Hz {ripple:.3f} dB, need < 1 dB")


def test_criterion_2_golden_coefficients(default_coeffs):
    t = np.arange(4000) / 8000
    worst = 0
    for c in default_coeffs:
        env = t**3 * np.exp(-2 * np.pi * 1.019 * c.erb * t)
        worst = max(worst, abs(int(np.argmax(env)) - c.n_pe))
    ok = len(default_coeffs) == 47 and worst <= 1
    verdict(2, "golden coefficients", ok, f"47 subbands, worst N_PE offset {worst} samples")


def test_criterion_3_pd_snr_round_trip():
    s = np.logspace(-2, 4, 2001)
    back = snr_of_pd(pd_of_snr(s))
    err = float(np.max(np.abs(back - s) / s))
    verdict(3, "PD/SNR round trip", err <= 1e-9, f"max relative error {err:.2e}")


def test_criterion_4_threshold_endpoints():
    lo = compute_thresholds(np.zeros(47))
    hi = compute_thresholds(np.full(47, 10.0 ** 3.5))
    want_lo, want_hi = (0.37, 0.11), (1.3, 0.23)
    errs = [abs(a - b) for a, b in zip(lo + hi, want_lo + want_hi)]
    ok = max(errs) <= 0.01
    verdict(4, "threshold endpoints", ok,
            f"0 dB ({lo[0]:.4f}, {lo[1]:.4f}), >=30 dB ({hi[0]:.4f}, {hi[1]:.4f}), "
            f"max deviation {max(errs):.4f}")


def test_criterion_5_feature_statistics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    grid = PeriodGrid()
    trials, n, p = 1000, np.arange(256), 40
    j = int(np.flatnonzero(grid.lags == p)[0])
    noise = periodicity_of_units(rng.standard_normal((trials, 256)), grid)
    phase = rng.uniform(0, 2 * np.pi, (trials, 1))
    tone = np.sqrt(2) * np.sin(2 * np.pi * n / p + phase)
    mixed = periodicity_of_units(tone + rng.standard_normal((trials, 256)), grid)
    cfr_noise = float(np.median(noise.cfr[:, j]))
    cfr_mix = float(np.median(mixed.cfr[:, j]))
    nac_mix = float(np.median(mixed.nac[:, j]))
    elapsed = time.perf_counter() - t0
    ok = (0.8 <= cfr_noise <= 1.25 and abs(cfr_mix - 3) <= 0.6
          and abs(nac_mix - 0.5) <= 0.1 and elapsed < 30)
    verdict(5, "feature statistics", ok,
            f"{trials} frames: noise CFR {cfr_noise:.3f}, 0 dB CFR {cfr_mix:.3f}, "
            f"0 dB NAC {nac_mix:.3f}, {elapsed:.1f} s")


PITCH_FRAMES, PITCH_LEAD = 94, 10
PITCH_TRACKS = {
    "100 Hz": np.full(PITCH_FRAMES, 100.0),
    "200 Hz": np.full(PITCH_FRAMES, 200.0),
    "300 Hz": np.full(PITCH_FRAMES, 300.0),
    "glide up": np.geomspace(100, 200, PITCH_FRAMES),
    "glide down": np.geomspace(300, 150, PITCH_FRAMES),
}


def pooled_pitch_error(snr_db: float, seeds=range(4)) -> float:
    errors = total = 0
    for track in PITCH_TRACKS.values():
        track = np.r_[np.zeros(PITCH_LEAD), track]
        f0_samples = ek.instantaneous_f0(track)
        for seed in seeds:
            s = ek.synth_harmonic(track, seed=seed + 10)
            x = ek.mix_at_snr(s, np.random.default_rng(seed).standard_normal(s.size), snr_db)
            dec = track_pitch(x)
            rep = ek.p0_error_rate(detected=ek.PitchTrack.from_decisions(dec),
                                   reference=ek.frame_reference(f0_samples, len(dec)))
            errors += rep.errors
            total += rep.total_frames
    return 100.0 * errors / total


def test_criterion_6_synthetic_pitch_accuracy():
    t0 = time.perf_counter()
    e10, e0 = pooled_pitch_error(10.0), pooled_pitch_error(0.0)
    elapsed = time.perf_counter() - t0
    ok = e10 < 10.0 and e0 < 25.0 and elapsed < 60
    verdict(6, "synthetic pitch accuracy", ok,
            f"10 dB {e10:.1f}% (need < 10), 0 dB {e0:.1f}% (need < 25), {elapsed:.1f} s")


def test_criterion_7_noise_step_tracking():
    tr = NoiseTracker(beta1=0.9)
    level = np.ones(47)
    for _ in range(6):
        tr.step(level)
        tr.commit(np.full(47, 0.5))
    frames = None
    for n in range(1, 16):
        tr.step(4.0 * level)
        tr.commit(np.full(47, 0.5))
        if np.all(10 * np.log10(4.0 / tr.state.e_d) <= 3.0):
            frames = n
            break
    # closed form: e_d(n) = 4 - 3 * 0.9**n reaches 2 (3 dB below 4) at n = 4
    closed = int(np.ceil(np.log(2 / 3) / np.log(0.9)))
    ok = frames is not None and frames <= 15 and frames == closed
    verdict(7, "noise tracking", ok, f"within 3 dB after {frames} frames, closed form {closed}")


VOWEL_SEGMENTS = [
    ("a", [120.0] * 25),
    ("i", np.geomspace(220, 160, 25)),
    ("o", [180.0] * 25),
    ("e", np.geomspace(150, 250, 25)),
    ("u", [260.0] * 25),
]


def test_criterion_8_end_to_end_enhancement():
    t0 = time.perf_counter()
    gains = {True: [], False: []}
    for seed in range(4):
        s, _ = ek.vowel_sequence(VOWEL_SEGMENTS, seed=seed)
        x = ek.mix_at_snr(s, np.random.default_rng(seed + 7).standard_normal(s.size), 0.0)
        snr_in = ek.overall_snr(clean=s, processed=x)
        for comb in (True, False):
            y = ek.align(enhance(x, RunConfig(comb_enabled=comb)), 128, s.size)
            gains[comb].append(ek.overall_snr(clean=s, processed=y) - snr_in)
    on, off = float(np.mean(gains[True])), float(np.mean(gains[False]))
    elapsed = time.perf_counter() - t0
    ok = on >= 3.0 and on - off >= 0.0 and elapsed < 60
    verdict(8, "end-to-end enhancement", ok,
            f"improvement with comb {on:.2f} dB (need >= 3), without {off:.2f} dB, "
            f"comb adds {on - off:+.2f} dB (need >= 0)")


def _streamed_peak(n_samples: int, chunk: int = 4096) -> int:
    rng = np.random.default_rng(0)
    enh = Enhancer()
    tracemalloc.start()
    for start in range(0, n_samples, chunk):
        enh.process(0.1 * rng.standard_normal(min(chunk, n_samples - start)))
    enh.flush()
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    return peak


def test_criterion_9_online_invariants():
    rng = np.random.default_rng(9)
    s, _ = ek.vowel_sequence(VOWEL_SEGMENTS[:2], seed=1)
    x = ek.mix_at_snr(s, rng.standard_normal(s.size), 5.0)

    # prefix causality: a different future leaves earlier decisions untouched
    cut = x.size // 2
    alt = np.r_[x[:cut], rng.standard_normal(x.size - cut)]
    a, b = track_pitch(x), track_pitch(alt)
    settled = (cut - 256) // 128
    causal = all((p.periodic, p.p0_hat) == (q.periodic, q.p0_hat)
                 and np.array_equal(p.efpd, q.efpd) for p, q in zip(a[:settled], b[:settled]))

    base = [(d.periodic, d.p0_hat) for d in a]
    scaled = all([(d.periodic, d.p0_hat) for d in track_pitch(k * x)] == base for k in (1e-3, 50.0))

    deterministic = np.array_equal(enhance(x), enhance(x))

    short, long_ = _streamed_peak(8000 * 2), _streamed_peak(8000 * 16)
    constant_memory = long_ <= 1.25 * short

    ok = causal and scaled and deterministic and constant_memory
    verdict(9, "online invariants", ok,
            f"causal {causal}, scale invariant {scaled}, deterministic {deterministic}, "
            f"peak memory 2 s {short / 1e6:.2f} MB vs 16 s {long_ / 1e6:.2f} MB")
