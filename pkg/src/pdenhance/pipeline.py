"""Streaming enhancer: filterbank -> PD -> P0 -> SNR -> noise/a-priori -> gain -> comb -> OLA."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import RunConfig
from .filterbank import FilterbankSpec, SubbandStream, design_filterbank
from .framing import (
    AnalysisFrame,
    FrameGeometry,
    Framer,
    OverlapAdder,
    synthesis_window,
)
from .gain import apply_comb, apply_gains, compute_gain, smooth_gain
from .noise import NoiseTracker
from .periodicity import BandSplit, PeriodGrid, PeriodicityMap, compute_periodicity
from .pitch import FrameDecision, PitchTracker
from .snr import estimate_voiced_snr


@dataclass
class FrameResult:
    frame: AnalysisFrame
    pmap: PeriodicityMap
    decision: FrameDecision
    snr_hat: np.ndarray
    gain: np.ndarray
    noise_energy: np.ndarray


class Enhancer:
    """Frame-synchronous online enhancer.

    Feed audio with :meth:`process` in chunks of any size and finish with
    :meth:`flush`. The output is delayed by ``cfg.n_gd`` samples and is
    ``cfg.n_gd`` samples longer than the input. Nothing grows with stream
    length; per-frame results go to ``on_frame`` if given.
    """

    def __init__(self, cfg: RunConfig | None = None,
                 on_frame: Callable[[FrameResult], None] | None = None):
        self.cfg = cfg = cfg or RunConfig()
        self.spec = FilterbankSpec(cfg.fc1, cfg.erb_step, cfg.num_filters, cfg.n_gd, cfg.fs)
        self.coeffs = design_filterbank(self.spec)
        self.geometry = FrameGeometry(cfg.frame_len, cfg.hop, cfg.fs)
        self.grid = PeriodGrid.from_rates(cfg.fs, cfg.f0_min, cfg.f0_max, cfg.frame_len)
        self.split = BandSplit.from_cfs([c.cf for c in self.coeffs], cfg.split_hz)
        self.stream = SubbandStream(self.coeffs)
        self.framer = Framer(len(self.coeffs), self.geometry)
        self.tracker = PitchTracker.from_config(cfg)
        self.noise = NoiseTracker.from_config(cfg)
        self.window = synthesis_window(cfg.frame_len)
        self.ola = OverlapAdder(self.geometry)
        self.on_frame = on_frame
        self.samples_in = 0
        self.samples_out = 0
        self.frames = 0
        self.periodic_frames = 0
        self._flushed = False
        # frames up to this index still overlap the zero history or the filterbank delay
        n, hop = cfg.frame_len, cfg.hop
        self.first_full_frame = -(-(n - hop + cfg.n_gd) // hop)

    def process(self, samples) -> np.ndarray:
        if self._flushed:
            raise RuntimeError("enhancer already flushed")
        x = np.asarray(samples, dtype=float)
        if x.ndim != 1:
            raise ValueError("expected mono samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input samples")
        self.samples_in += x.size
        return self._run(self.framer.push(self.stream.analyze(x)))

    def flush(self) -> np.ndarray:
        """Drain the filterbank delay and the last partial frames."""
        if self._flushed:
            return np.zeros(0)
        tail = self.framer.push(self.stream.analyze(np.zeros(self.cfg.n_gd)))
        tail += self.framer.flush()
        out = self._run(tail)
        self._flushed = True
        total = self.samples_in + self.cfg.n_gd
        keep = max(0, total - (self.samples_out - out.size))
        out = out[:keep]
        self.samples_out = total
        return out

    def _run(self, frames) -> np.ndarray:
        pieces = [self._frame(f) for f in frames]
        out = np.concatenate(pieces) if pieces else np.zeros(0)
        self.samples_out += out.size
        return out

    def _frame(self, frame: AnalysisFrame) -> np.ndarray:
        cfg = self.cfg
        pmap = compute_periodicity(frame, self.grid, self.split, cfg.cfr_max)
        initial = frame.index <= self.first_full_frame
        dec = self.tracker.step(frame.index, frame.unit_energy, pmap, initial)
        snr_v = estimate_voiced_snr(pmap, dec.p0_hat) if dec.periodic else None
        snr_hat = self.noise.step(frame.unit_energy, snr_v, initial)
        g = compute_gain(snr_hat, cfg.g_min)
        g = smooth_gain(g, self.noise.state.g_prev, dec.periodic, cfg.g_min,
                        prev_thd=cfg.smooth_prev, neighbor_thd=cfg.smooth_neighbor,
                        self_thd=cfg.smooth_self)
        self.noise.commit(g)
        units = apply_gains(frame.real_units, g)
        if cfg.comb_enabled and dec.periodic:
            units = apply_comb(units, dec.p0_hat)
        units = units * self.window
        self.frames += 1
        self.periodic_frames += bool(dec.periodic)
        if self.on_frame is not None:
            self.on_frame(FrameResult(frame, pmap, dec, snr_hat, g, self.noise.state.e_d.copy()))
        return self.ola.push(units.sum(axis=0))


def enhance(signal, cfg: RunConfig | None = None, chunk: int | None = None,
            on_frame: Callable[[FrameResult], None] | None = None) -> np.ndarray:
    """Run the enhancer over a whole signal; output is delayed by ``n_gd``."""
    enh = Enhancer(cfg, on_frame)
    x = np.asarray(signal, dtype=float)
    step = chunk or max(x.size, 1)
    parts = [enh.process(x[i : i + step]) for i in range(0, x.size, step)]
    parts.append(enh.flush())
    return np.concatenate(parts)


def track_pitch(signal, cfg: RunConfig | None = None) -> list[FrameDecision]:
    decisions: list[FrameDecision] = []
    enhance(signal, cfg, on_frame=lambda r: decisions.append(r.decision))
    return decisions
