"""Metrics and synthetic ground truth.

- P0 error rate: misses + false alarms + gross (>20%) deviations over all frames.
- Overall SNR between a clean reference and a processed signal.
- Harmonic-complex and noise-mixing generators whose parameters are the truth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SNR_CAP_DB = 120.0
F0_RANGE = (70.0, 420.0)


@dataclass
class PitchTrack:
    f0: np.ndarray  # Hz per frame, 0 = aperiodic
    hop_s: float = 0.016

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=float)

    def __len__(self) -> int:
        return self.f0.size

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    @classmethod
    def from_decisions(cls, decisions, fs: float = 8000.0, hop: int = 128) -> "PitchTrack":
        f0 = [fs / d.p0_hat if d.periodic else 0.0 for d in decisions]
        return cls(np.array(f0), hop / fs)


@dataclass
class ErrorRateReport:
    misses: int
    false_alarms: int
    deviations: int
    total_frames: int

    @property
    def errors(self) -> int:
        return self.misses + self.false_alarms + self.deviations

    @property
    def rate(self) -> float:
        return 100.0 * self.errors / self.total_frames

    @property
    def correct(self) -> int:
        return self.total_frames - self.errors


def p0_error_rate(*, detected: PitchTrack, reference: PitchTrack,
                  tolerance: float = 0.2) -> ErrorRateReport:
    n = min(len(detected), len(reference))
    if n == 0:
        raise ValueError("empty pitch track")
    if len(detected) != len(reference):
        warnings.warn(f"track lengths differ ({len(detected)} vs {len(reference)}); trimming to {n}")
    det = detected.f0[:n]
    ref = reference.f0[:n]
    dv, rv = det > 0, ref > 0
    misses = int(np.sum(rv & ~dv))
    false_alarms = int(np.sum(~rv & dv))
    both = rv & dv
    deviations = int(np.sum(np.abs(det[both] - ref[both]) > tolerance * ref[both]))
    return ErrorRateReport(misses, false_alarms, deviations, n)


def overall_snr(*, clean, processed) -> float:
    """10 lg(sum s^2 / sum (s - y)^2), capped at 120 dB for a perfect match."""
    s = np.asarray(clean, dtype=float)
    y = np.asarray(processed, dtype=float)
    if s.shape != y.shape:
        raise ValueError("clean and processed lengths differ")
    sig = float(np.dot(s, s))
    if sig == 0:
        raise ValueError("clean signal has zero energy")
    err = float(np.dot(s - y, s - y))
    if err == 0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, 10.0 * math.log10(sig / err))


def align(processed, delay: int, length: int) -> np.ndarray:
    """Advance ``processed`` by ``delay`` samples and check it covers ``length``."""
    y = np.asarray(processed, dtype=float)
    if y.size - delay != length:
        raise ValueError(
            f"processed length {y.size} minus delay {delay} does not match clean length {length}"
        )
    return y[delay:]


def synth_harmonic(f0_track, fs: float = 8000.0, hop: int = 128,
                   n_harmonics: int | None = None, seed: int | None = None) -> np.ndarray:
    """Equal-amplitude harmonic complex following a per-frame f0 track.

    The per-frame f0 is interpolated linearly to a per-sample instantaneous
    frequency and integrated, so the phase is continuous through glides.
    Zero entries give silence. The result is peak-normalised to 1.
    """
    f0_track = np.asarray(f0_track, dtype=float)
    voiced = f0_track > 0
    if np.any((f0_track[voiced] < F0_RANGE[0]) | (f0_track[voiced] > F0_RANGE[1])):
        raise ValueError("f0 outside [70, 420] Hz")
    f_inst = instantaneous_f0(f0_track, hop)
    n = f_inst.size
    phase = 2 * np.pi * np.cumsum(f_inst) / fs
    rng = np.random.default_rng(seed)
    max_h = int(fs / 2 // F0_RANGE[0]) if n_harmonics is None else n_harmonics
    x = np.zeros(n)
    offsets = rng.uniform(0, 2 * np.pi, max_h) if seed is not None else np.zeros(max_h)
    for h in range(1, max_h + 1):
        alive = (h * f_inst < fs / 2) & (f_inst > 0)
        x += np.where(alive, np.sin(h * phase + offsets[h - 1]), 0.0)
    peak = np.max(np.abs(x)) if n else 0.0
    return x / peak if peak > 0 else x


# (F1, F2, F3) in Hz, adult male averages
VOWEL_FORMANTS = {
    "a": (730.0, 1090.0, 2440.0),
    "e": (530.0, 1840.0, 2480.0),
    "i": (270.0, 2290.0, 3010.0),
    "o": (570.0, 840.0, 2410.0),
    "u": (300.0, 870.0, 2240.0),
}
FORMANT_BANDWIDTHS = (60.0, 90.0, 120.0)


def formant_envelope(freq, formants, bandwidths=FORMANT_BANDWIDTHS):
    """Magnitude of a cascade of two-pole resonators, unity at DC."""
    f = np.asarray(freq, dtype=float)
    mag = np.ones_like(f)
    for fc, bw in zip(formants, bandwidths):
        half = bw / 2.0
        mag *= (fc**2 + half**2) / (
            np.sqrt((f - fc) ** 2 + half**2) * np.sqrt((f + fc) ** 2 + half**2)
        )
    return mag


def synth_vowel(f0_track, vowel: str = "a", fs: float = 8000.0, hop: int = 128,
                seed: int | None = None) -> np.ndarray:
    """Formant-shaped harmonic complex: 1/h source slope times a resonator envelope.

    Same phase-continuous construction as :func:`synth_harmonic`; harmonic
    amplitudes follow the instantaneous harmonic frequency. Peak-normalised.
    """
    if vowel not in VOWEL_FORMANTS:
        raise ValueError(f"unknown vowel {vowel!r}; choose from {sorted(VOWEL_FORMANTS)}")
    f0_track = np.asarray(f0_track, dtype=float)
    voiced = f0_track > 0
    if np.any((f0_track[voiced] < F0_RANGE[0]) | (f0_track[voiced] > F0_RANGE[1])):
        raise ValueError("f0 outside [70, 420] Hz")
    f_inst = instantaneous_f0(f0_track, hop)
    phase = 2 * np.pi * np.cumsum(f_inst) / fs
    rng = np.random.default_rng(seed)
    max_h = int(fs / 2 // F0_RANGE[0])
    offsets = rng.uniform(0, 2 * np.pi, max_h) if seed is not None else np.zeros(max_h)
    formants = VOWEL_FORMANTS[vowel]
    x = np.zeros(f_inst.size)
    for h in range(1, max_h + 1):
        fh = h * f_inst
        alive = (fh < fs / 2) & (f_inst > 0)
        amp = formant_envelope(fh, formants) / h
        x += np.where(alive, amp * np.sin(h * phase + offsets[h - 1]), 0.0)
    peak = np.max(np.abs(x)) if x.size else 0.0
    return x / peak if peak > 0 else x


def vowel_sequence(segments, fs: float = 8000.0, hop: int = 128, gap_frames: int = 6,
                   lead_frames: int = 10, seed: int | None = None):
    """Concatenate ``(vowel, f0_track)`` segments with silent gaps.

    Returns ``(signal, per-sample f0)``; each segment is synthesised separately
    and starts after ``lead_frames`` (first) or ``gap_frames`` of silence.
    """
    rng = np.random.default_rng(seed)
    sig, f0 = [np.zeros(lead_frames * hop)], [np.zeros(lead_frames * hop)]
    for vowel, track in segments:
        track = np.asarray(track, dtype=float)
        sub_seed = int(rng.integers(2**31)) if seed is not None else None
        s = synth_vowel(track, vowel, fs, hop, sub_seed)
        sig += [s, np.zeros(gap_frames * hop)]
        f0 += [instantaneous_f0(track, hop), np.zeros(gap_frames * hop)]
    return np.concatenate(sig), np.concatenate(f0)


def instantaneous_f0(f0_track, hop: int = 128) -> np.ndarray:
    """Per-sample f0 from a per-frame track.

    Linear between two voiced frames, held at the edge of a voiced run,
    zero when the nearest frame is unvoiced.
    """
    f0 = np.asarray(f0_track, dtype=float)
    if f0.size == 0:
        return np.zeros(0)
    t = np.arange(f0.size * hop) / hop
    last = f0.size - 1
    lo = np.minimum(np.floor(t).astype(int), last)
    hi = np.minimum(lo + 1, last)
    near = np.minimum(np.rint(t).astype(int), last)
    voiced = f0 > 0
    ramp = np.interp(t, np.arange(f0.size), f0)
    held = np.where(voiced[near], f0[near], 0.0)
    return np.where(voiced[lo] & voiced[hi], ramp, held)


def frame_reference(f0_samples, n_frames: int, hop: int = 128, delay: int = 128,
                    fs: float = 8000.0) -> PitchTrack:
    """Reference track sampled at each analysis frame's centre.

    Frame ``j`` of the enhancer is centred on input sample ``j * hop - delay``.
    """
    f0_samples = np.asarray(f0_samples, dtype=float)
    centers = np.arange(n_frames) * hop - delay
    ok = (centers >= 0) & (centers < f0_samples.size)
    f0 = np.zeros(n_frames)
    f0[ok] = f0_samples[centers[ok]]
    return PitchTrack(f0, hop / fs)


def mix_at_snr(clean, noise, snr_db: float) -> np.ndarray:
    """Scale ``noise`` (looped or trimmed to length) so the mix has ``snr_db`` overall SNR."""
    s = np.asarray(clean, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return s.copy()
    d = np.resize(np.asarray(noise, dtype=float), s.shape)
    es, ed = float(np.dot(s, s)), float(np.dot(d, d))
    if es == 0 or ed == 0:
        raise ValueError("clean and noise must have nonzero energy")
    d = d * math.sqrt(es / (ed * 10 ** (snr_db / 10)))
    return s + d


def write_pitch_tsv(path, track: PitchTrack, fs: float = 8000.0, hop: int = 128) -> None:
    with open(path, "w") as fh:
        for j, f in enumerate(track.f0):
            fh.write(f"{j}\t{j * hop / fs:.6f}\t{f:.4f}\n")


def read_pitch_tsv(path) -> PitchTrack:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        idx, t, f0 = line.split("\t")
        rows.append((int(idx), float(t), float(f0)))
    if not rows:
        return PitchTrack(np.zeros(0))
    hop_s = rows[1][1] - rows[0][1] if len(rows) > 1 else 0.016
    return PitchTrack(np.array([r[2] for r in rows]), hop_s)
