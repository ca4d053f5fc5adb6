"""Online periodic-frame detection and fundamental-period tracking.

Per frame:

1. a slow onset-gated recursion tracks the stationary noise energy per subband;
2. the resulting ML SNR gives an initial Wiener weight per subband, and the
   weighted subband mean of PD is the frame's periodicity curve (EFPD);
3. two adaptive PD thresholds come from the frame-mean initial SNR;
4. EFPD peaks above the lower threshold make a *potential* periodic frame;
   a median of recent confident peak periods (memory-P0) and continuity with
   the previous potential frame decide the final period.

Only current and past frames are ever used.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .periodicity import PeriodicityMap, pd_of_snr

ENERGY_FLOOR = 1e-12


def update_stationary_noise(e0d_prev, e_x, alpha: float = 0.96, delta: float = 1.4) -> np.ndarray:
    """One step of the onset-gated stationary-noise recursion.

    ``e0d_prev=None`` marks the first frame, which initialises to ``e_x``.
    Units whose energy jumps by more than ``delta`` hold their estimate.
    """
    e_x = np.asarray(e_x, dtype=float)
    if e0d_prev is None:
        return np.maximum(e_x, ENERGY_FLOOR)
    e0d_prev = np.asarray(e0d_prev, dtype=float)
    onset = e_x / e0d_prev > delta
    smoothed = alpha * e0d_prev + (1 - alpha) * e_x
    return np.maximum(np.where(onset, e0d_prev, smoothed), ENERGY_FLOOR)


def initial_snr_and_gain(e_x, e0d):
    snr0 = np.maximum(0.0, np.asarray(e_x, dtype=float) / np.asarray(e0d, dtype=float) - 1.0)
    return snr0, snr0 / (snr0 + 1.0)


def compute_efpd(pd, g0) -> np.ndarray:
    pd = np.asarray(pd, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    if pd.ndim != 2 or g0.shape != (pd.shape[0],):
        raise ValueError("pd must be (K, P) and g0 (K,)")
    return g0 @ pd / pd.shape[0]


@dataclass(frozen=True)
class ThresholdRule:
    """``clamp(base + slope * (x_db - 10), lo, hi)`` with x_db clamped to [0, 30]."""

    base: float
    slope: float
    lo: float
    hi: float

    def __call__(self, x_db: float) -> float:
        return float(np.clip(self.base + self.slope * (x_db - 10.0), self.lo, self.hi))


UPPER_RULE = ThresholdRule(0.6, 0.03, 0.3, 0.9)
LOWER_RULE = ThresholdRule(0.2, 0.01, 0.1, 0.2)


def frame_snr_db(snr0) -> float:
    fsnr0 = float(np.mean(snr0))
    if fsnr0 <= 0:
        return 0.0
    return float(np.clip(10.0 * np.log10(fsnr0), 0.0, 30.0))


def compute_thresholds(snr0, upper: ThresholdRule = UPPER_RULE,
                       lower: ThresholdRule = LOWER_RULE) -> tuple[float, float]:
    """PD thresholds (upper, lower) mapped from the adaptive SNR thresholds."""
    x = frame_snr_db(snr0)
    return pd_of_snr(upper(x)), pd_of_snr(lower(x))


def detect_peaks(efpd, pdthd2: float, lags=None) -> list[tuple[int, float]]:
    """Interior strict local maxima of ``efpd`` that exceed ``pdthd2``."""
    e = np.asarray(efpd, dtype=float)
    if lags is None:
        lags = np.arange(e.size)
    if e.size < 3:
        return []
    mid = e[1:-1]
    hit = (mid > e[:-2]) & (mid > e[2:]) & (mid > pdthd2)
    idx = np.flatnonzero(hit) + 1
    return [(int(lags[i]), float(e[i])) for i in idx]


def max_peak(peaks) -> tuple[int, float]:
    # peaks are in ascending lag order, so max() keeps the smaller period on ties
    return max(peaks, key=lambda pv: pv[1])


@dataclass
class TrackerState:
    mem_depth: int = 50
    e0d: np.ndarray | None = None
    mem_buf: deque = field(default_factory=deque)
    mem_p0: int | None = None
    prev_frame_periodic: bool = False
    prev_p0: int | None = None
    gap: int = 0

    def __post_init__(self):
        self.mem_buf = deque(self.mem_buf, maxlen=self.mem_depth)


@dataclass
class FrameDecision:
    index: int
    periodic: bool
    p0_hat: int | None
    efpd: np.ndarray
    pdthd1: float
    pdthd2: float
    snr0: np.ndarray
    peaks: list = field(default_factory=list)
    mem_p0: int | None = None


def update_memory_p0(state: TrackerState, peaks, pdthd1: float, deviation: float = 0.4):
    """Push a confident maximum-peak period and return this frame's memory-P0.

    The buffer median is robust to occasional octave errors; the
    closeness override is local to the current frame.
    """
    if not peaks:
        return None
    p_max, v_max = max_peak(peaks)
    if v_max > pdthd1:
        state.mem_buf.append(p_max)
    if not state.mem_buf:
        state.mem_p0 = None
        return None
    mem = statistics.median_low(state.mem_buf)
    state.mem_p0 = mem
    if abs(p_max - mem) < deviation * mem:
        return p_max
    return mem


def decide_frame(state: TrackerState, peaks, pdthd1: float, mem_p0, *,
                 continuity_gap: int = 3) -> tuple[bool, int | None]:
    """Final periodic/aperiodic call; updates the continuity fields of ``state``."""
    if not peaks:
        state.gap += 1
        if state.gap >= continuity_gap:
            state.prev_frame_periodic = False
        return False, None
    state.gap = 0
    p_max, v_max = max_peak(peaks)
    if state.prev_frame_periodic:
        if mem_p0 is None:
            p0 = p_max
        else:
            p0 = min(peaks, key=lambda pv: (abs(pv[0] - mem_p0), pv[0]))[0]
        periodic = True
    else:
        periodic = v_max > pdthd1
        p0 = p_max if periodic else None
    state.prev_frame_periodic = periodic
    state.prev_p0 = p0
    return periodic, p0


class PitchTracker:
    def __init__(self, *, alpha: float = 0.96, delta: float = 1.4,
                 upper: ThresholdRule = UPPER_RULE, lower: ThresholdRule = LOWER_RULE,
                 mem_depth: int = 50, mem_dev: float = 0.4, continuity_gap: int = 3):
        self.alpha = alpha
        self.delta = delta
        self.upper = upper
        self.lower = lower
        self.mem_dev = mem_dev
        self.continuity_gap = continuity_gap
        self.state = TrackerState(mem_depth=mem_depth)

    @classmethod
    def from_config(cls, cfg) -> "PitchTracker":
        return cls(
            alpha=cfg.alpha_stat,
            delta=cfg.delta_onset,
            upper=ThresholdRule(cfg.snrthd1_base, cfg.snrthd1_slope, cfg.snrthd1_lo, cfg.snrthd1_hi),
            lower=ThresholdRule(cfg.snrthd2_base, cfg.snrthd2_slope, cfg.snrthd2_lo, cfg.snrthd2_hi),
            mem_depth=cfg.mem_depth,
            mem_dev=cfg.mem_dev,
            continuity_gap=cfg.continuity_gap,
        )

    def step(self, index: int, unit_energy, pmap: PeriodicityMap,
             initial: bool = False) -> FrameDecision:
        """Process one frame; ``initial`` re-seeds the noise estimate from this frame."""
        st = self.state
        if initial:
            st.e0d = None
        st.e0d = update_stationary_noise(st.e0d, unit_energy, self.alpha, self.delta)
        snr0, g0 = initial_snr_and_gain(unit_energy, st.e0d)
        efpd = compute_efpd(pmap.pd, g0)
        pdthd1, pdthd2 = compute_thresholds(snr0, self.upper, self.lower)
        peaks = detect_peaks(efpd, pdthd2, pmap.lags)
        mem = update_memory_p0(st, peaks, pdthd1, self.mem_dev) if peaks else None
        periodic, p0 = decide_frame(st, peaks, pdthd1, mem, continuity_gap=self.continuity_gap)
        return FrameDecision(index, periodic, p0, efpd, pdthd1, pdthd2, snr0, peaks, mem)
