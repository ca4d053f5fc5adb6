"""Per-unit periodicity features over integer period candidates.

For a unit ``x`` of length N and lag p (sums over n = 0 .. N-1-p):

    NAC = sum x(n) x(n+p) / sqrt(sum x(n)^2 * sum x(n+p)^2)
    CFR = sum (x(n) + x(n+p))^2 / sum (x(n) - x(n+p))^2
    PD  = max(0.01, NAC * CFR)

Low bands use the real subband signal, high bands the zero-mean Hilbert
envelope. All three sums are derived from one autocorrelation and two partial
energies, since (a +- b)^2 sums expand to Ea + Eb +- 2R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import AnalysisFrame

PD_FLOOR = 0.01
CFR_MAX = 1e4
CFR_EPS = 1e-12


@dataclass(frozen=True)
class PeriodGrid:
    p_min: int = 19
    p_max: int = 114

    def __post_init__(self):
        if not 1 <= self.p_min <= self.p_max:
            raise ValueError("need 1 <= p_min <= p_max")

    @classmethod
    def from_rates(cls, fs: float, f0_min: float = 70.0, f0_max: float = 420.0,
                   frame_len: int = 256) -> "PeriodGrid":
        p_min = int(round(fs / f0_max))
        p_max = min(int(round(fs / f0_min)), frame_len // 2 - 1)
        return cls(p_min, p_max)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.p_min, self.p_max + 1)

    def __len__(self) -> int:
        return self.p_max - self.p_min + 1

    def __contains__(self, p) -> bool:
        return self.p_min <= p <= self.p_max


@dataclass(frozen=True)
class BandSplit:
    low: np.ndarray  # boolean mask, True where CF <= split
    split_hz: float = 1500.0

    @classmethod
    def from_cfs(cls, cfs, split_hz: float = 1500.0) -> "BandSplit":
        return cls(np.asarray(cfs) <= split_hz, split_hz)

    @property
    def k_low(self) -> np.ndarray:
        return np.flatnonzero(self.low)

    @property
    def k_high(self) -> np.ndarray:
        return np.flatnonzero(~self.low)


@dataclass
class PeriodicityMap:
    lags: np.ndarray
    nac: np.ndarray  # (K, P)
    cfr: np.ndarray
    pd: np.ndarray

    def at(self, p: int) -> np.ndarray:
        """PD column of every subband at lag ``p``."""
        return self.pd[:, int(p) - int(self.lags[0])]


def band_signals(frame: AnalysisFrame, split: BandSplit) -> np.ndarray:
    return np.where(split.low[:, None], frame.real_units, frame.env_units)


def lag_sums(x: np.ndarray, lags: np.ndarray):
    """Return (R, Ea, Eb), each shaped ``(K, len(lags))``.

    R = sum x(n) x(n+p), Ea = sum x(n)^2, Eb = sum x(n+p)^2, n in [0, N-1-p].
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    if np.any(lags >= n):
        raise ValueError("lag exceeds unit length")
    spec = np.fft.rfft(x, 2 * n, axis=1)
    r = np.fft.irfft(spec * spec.conj(), 2 * n, axis=1)[:, lags]
    c = np.cumsum(x * x, axis=1)
    total = c[:, -1:]
    ea = c[:, n - 1 - lags]
    eb = total - np.where(lags > 0, c[:, np.maximum(lags - 1, 0)], 0.0)
    return r, ea, eb


def nac_from_sums(r, ea, eb) -> np.ndarray:
    prod = ea * eb
    ok = prod > 0
    nac = np.zeros_like(r)
    nac[ok] = r[ok] / np.sqrt(prod[ok])
    return np.clip(nac, -1.0, 1.0)


def cfr_from_sums(r, ea, eb, cfr_max: float = CFR_MAX) -> np.ndarray:
    num = np.maximum(ea + eb + 2 * r, 0.0)
    den = np.maximum(ea + eb - 2 * r, 0.0)
    clamp = den <= CFR_EPS * (num + 1e-20)
    cfr = np.full_like(r, cfr_max)
    cfr[~clamp] = np.minimum(num[~clamp] / den[~clamp], cfr_max)
    return cfr


def compute_pd(nac, cfr) -> np.ndarray:
    nac = np.asarray(nac, dtype=float)
    cfr = np.asarray(cfr, dtype=float)
    if nac.shape != cfr.shape:
        raise ValueError("nac and cfr shapes differ")
    return np.maximum(PD_FLOOR, nac * cfr)


def compute_nac(frame: AnalysisFrame, grid: PeriodGrid, split: BandSplit) -> np.ndarray:
    return nac_from_sums(*lag_sums(band_signals(frame, split), grid.lags))


def compute_cfr(frame: AnalysisFrame, grid: PeriodGrid, split: BandSplit,
                cfr_max: float = CFR_MAX) -> np.ndarray:
    return cfr_from_sums(*lag_sums(band_signals(frame, split), grid.lags), cfr_max=cfr_max)


def periodicity_of_units(x: np.ndarray, grid: PeriodGrid, cfr_max: float = CFR_MAX) -> PeriodicityMap:
    lags = grid.lags
    r, ea, eb = lag_sums(x, lags)
    nac = nac_from_sums(r, ea, eb)
    cfr = cfr_from_sums(r, ea, eb, cfr_max)
    return PeriodicityMap(lags, nac, cfr, compute_pd(nac, cfr))


def compute_periodicity(frame: AnalysisFrame, grid: PeriodGrid, split: BandSplit,
                        cfr_max: float = CFR_MAX) -> PeriodicityMap:
    """Dense NAC/CFR/PD map for every subband and lag of one frame."""
    return periodicity_of_units(band_signals(frame, split), grid, cfr_max)


def pd_of_snr(snr):
    """Periodicity degree expected at the true period for a unit SNR."""
    s = np.asarray(snr, dtype=float)
    out = s / (s + 1.0) * (2.0 * s + 1.0)
    return out if out.ndim else float(out)
