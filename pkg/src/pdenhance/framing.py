"""Frame assembly (rectangular analysis, 50% overlap) and windowed overlap-add."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filterbank import resynthesize


@dataclass(frozen=True)
class FrameGeometry:
    frame_len: int = 256
    hop: int = 128
    fs: float = 8000.0

    def __post_init__(self):
        if self.frame_len % 2 or self.hop * 2 != self.frame_len:
            raise ValueError("frame_len must be even and hop exactly frame_len / 2")

    @property
    def frame_ms(self) -> float:
        return 1000.0 * self.frame_len / self.fs

    @property
    def hop_ms(self) -> float:
        return 1000.0 * self.hop / self.fs

    def frame_time(self, j: int) -> float:
        return j * self.hop / self.fs


@dataclass
class AnalysisFrame:
    index: int
    complex_units: np.ndarray  # (K, N)
    real_units: np.ndarray
    env_units: np.ndarray  # magnitude with per-unit mean removed
    unit_energy: np.ndarray  # (K,)
    partial: bool = False

    @classmethod
    def from_complex(cls, index: int, z: np.ndarray, partial: bool = False) -> "AnalysisFrame":
        real = z.real.copy()
        env = np.abs(z)
        env -= env.mean(axis=1, keepdims=True)
        return cls(
            index=index,
            complex_units=z,
            real_units=real,
            env_units=env,
            unit_energy=np.einsum("kn,kn->k", real, real),
            partial=partial,
        )


def synthesis_window(n: int) -> np.ndarray:
    """Periodic Hamming window scaled so that w[i] + w[i + n/2] == 1."""
    half = n // 2
    i = np.arange(half)
    first = (0.54 - 0.46 * np.cos(2 * np.pi * i / n)) / 1.08
    return np.concatenate([first, 1.0 - first])


class Framer:
    """Groups streaming subband samples into overlapping analysis frames.

    The stream starts with ``frame_len - hop`` samples of zero history, so
    frame ``j`` holds subband samples ``[(j - 1) * hop, (j + 1) * hop)``.
    """

    def __init__(self, num_subbands: int, geometry: FrameGeometry):
        self.geometry = geometry
        self.num_subbands = num_subbands
        n, hop = geometry.frame_len, geometry.hop
        self._buf = np.zeros((num_subbands, n - hop), dtype=complex)
        self._next_index = 0

    def push(self, block: np.ndarray) -> list[AnalysisFrame]:
        block = np.asarray(block)
        if block.ndim != 2 or block.shape[0] != self.num_subbands:
            raise ValueError("block must have shape (num_subbands, n)")
        self._buf = np.concatenate([self._buf, block], axis=1)
        n, hop = self.geometry.frame_len, self.geometry.hop
        frames = []
        while self._buf.shape[1] >= n:
            frames.append(self._emit(self._buf[:, :n].copy(), partial=False))
            self._buf = self._buf[:, hop:]
        return frames

    def flush(self) -> list[AnalysisFrame]:
        """Zero-pad and emit what is left so every sample sees both window halves."""
        n, hop = self.geometry.frame_len, self.geometry.hop
        frames = []
        while self._buf.shape[1] > 0:
            z = np.zeros((self.num_subbands, n), dtype=complex)
            z[:, : self._buf.shape[1]] = self._buf
            frames.append(self._emit(z, partial=True))
            self._buf = self._buf[:, hop:]
        return frames

    def _emit(self, z: np.ndarray, partial: bool) -> AnalysisFrame:
        frame = AnalysisFrame.from_complex(self._next_index, z, partial)
        self._next_index += 1
        return frame


def check_gains(gains) -> np.ndarray:
    g = np.asarray(gains, dtype=float)
    if np.any(g < 0) or np.any(g > 1) or not np.all(np.isfinite(g)):
        raise ValueError("gains must lie in [0, 1]")
    return g


def overlap_add(units, gains, geometry: FrameGeometry | None = None) -> np.ndarray:
    """Weight ``(J, K, N)`` units by gains ``(J, K)`` and the synthesis window, then OLA.

    The result starts at the first sample of frame 0.
    """
    u = np.asarray(units, dtype=float)
    g = check_gains(gains)
    if u.ndim != 3 or g.shape != u.shape[:2]:
        raise ValueError("units (J, K, N) and gains (J, K) disagree in shape")
    n = u.shape[2]
    if geometry is not None and geometry.frame_len != n:
        raise ValueError("units do not match the frame geometry")
    w = synthesis_window(n)
    return resynthesize(u * g[:, :, None] * w, n // 2)


class OverlapAdder:
    """Streaming counterpart of :func:`overlap_add` for already-weighted frames.

    Each pushed frame (summed over subbands) releases ``hop`` finished samples.
    Output is aligned to subband sample 0, i.e. the zero history is dropped.
    """

    def __init__(self, geometry: FrameGeometry):
        self.geometry = geometry
        self._acc = np.zeros(geometry.frame_len)
        self._skip = geometry.frame_len - geometry.hop

    def push(self, frame_signal: np.ndarray) -> np.ndarray:
        hop = self.geometry.hop
        self._acc += frame_signal
        done = self._acc[:hop].copy()
        self._acc = np.concatenate([self._acc[hop:], np.zeros(hop)])
        if self._skip:
            drop = min(self._skip, hop)
            self._skip -= drop
            done = done[drop:]
        return done
