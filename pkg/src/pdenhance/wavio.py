"""Mono WAV input/output at the enhancer's 8 kHz rate.

Reading memory-maps the file and hands out float chunks, so an 8 kHz file
streams through the enhancer without being loaded. Other rates are
converted once with a polyphase Kaiser-windowed-sinc resampler. Writing spools
float samples to a temporary file and converts to PCM16 in a second pass,
peak-normalising only if the signal would clip.
"""

from __future__ import annotations

import math
import tempfile
import warnings
import wave
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy.io import wavfile
from scipy.signal import firwin, kaiserord, resample_poly

TARGET_FS = 8000
PCM16_SCALE = 32768.0


class WavError(IOError):
    """Unreadable, unsupported, or empty audio."""


def _antialias_filter(up: int, fs_in: int, fs_out: int,
                      passband: float = 0.85, atten_db: float = 80.0) -> np.ndarray:
    """Kaiser-windowed sinc at the intermediate rate ``up * fs_in``.

    Flat to ``passband`` times the lower Nyquist rate, ``atten_db`` down at
    that Nyquist rate.
    """
    rate = float(fs_in * up)
    nyq = min(fs_in, fs_out) / 2.0
    f_pass = passband * nyq
    numtaps, beta = kaiserord(atten_db, (nyq - f_pass) / (rate / 2.0))
    numtaps |= 1
    return firwin(numtaps, 0.5 * (f_pass + nyq), window=("kaiser", beta), fs=rate)


def resample(x, fs_in: int, fs_out: int = TARGET_FS) -> np.ndarray:
    """Rational-ratio polyphase resampling; passband ripple well under 0.1 dB to 3.4 kHz."""
    x = np.asarray(x, dtype=float)
    if fs_in == fs_out:
        return x.copy()
    g = math.gcd(int(fs_in), int(fs_out))
    up, down = fs_out // g, fs_in // g
    return resample_poly(x, up, down, window=_antialias_filter(up, fs_in, fs_out))


def _to_float(block: np.ndarray) -> np.ndarray:
    if block.dtype == np.int16:
        return block.astype(float) / PCM16_SCALE
    return block.astype(float)


class WavReader:
    """Mono PCM16 / float WAV source yielding float chunks at ``target_fs``."""

    def __init__(self, path, target_fs: int = TARGET_FS):
        self.path = Path(path)
        try:
            fs, data = wavfile.read(self.path, mmap=True)
        except (OSError, ValueError) as exc:
            raise WavError(f"cannot read {self.path}: {exc}") from exc
        if data.ndim != 1:
            raise WavError(f"{self.path}: expected mono audio, got {data.shape[1]} channels")
        if data.dtype not in (np.int16, np.float32, np.float64):
            raise WavError(f"{self.path}: unsupported sample type {data.dtype} (PCM16 or float32)")
        if data.size == 0:
            raise WavError(f"{self.path}: no samples")
        self.source_fs = int(fs)
        self.fs = int(target_fs)
        self._data = data
        self._resampled = None
        if self.source_fs != self.fs:
            self._resampled = resample(_to_float(data), self.source_fs, self.fs)

    @property
    def num_samples(self) -> int:
        return self._data.size if self._resampled is None else self._resampled.size

    @property
    def duration(self) -> float:
        return self.num_samples / self.fs

    def chunks(self, size: int = 4096) -> Iterator[np.ndarray]:
        src = self._data if self._resampled is None else self._resampled
        for start in range(0, src.shape[0], size):
            yield _to_float(np.asarray(src[start : start + size]))

    def read(self) -> np.ndarray:
        if self._resampled is not None:
            return self._resampled.copy()
        return _to_float(np.asarray(self._data))


def read_wav(path, target_fs: int = TARGET_FS) -> np.ndarray:
    return WavReader(path, target_fs).read()


class WavWriter:
    """Streaming PCM16 writer with clip-safe peak normalisation on close."""

    def __init__(self, path, fs: int = TARGET_FS, spool_dir=None):
        self.path = Path(path)
        self.fs = int(fs)
        self._spool = tempfile.TemporaryFile(dir=spool_dir)
        self.num_samples = 0
        self.peak = 0.0
        self.normalised = False
        self._closed = False

    def write(self, samples) -> None:
        x = np.asarray(samples, dtype=np.float32)
        if x.size == 0:
            return
        self.peak = max(self.peak, float(np.max(np.abs(x))))
        self._spool.write(x.tobytes())
        self.num_samples += x.size

    def close(self, chunk: int = 65536) -> None:
        if self._closed:
            return
        self._closed = True
        limit = (PCM16_SCALE - 1) / PCM16_SCALE
        scale = 1.0
        if self.peak > limit:
            scale = limit / self.peak
            self.normalised = True
            warnings.warn(
                f"output would clip (peak {self.peak:.3f}); peak-normalised by {scale:.4f}",
                stacklevel=2,
            )
        self._spool.seek(0)
        try:
            with wave.open(str(self.path), "wb") as out:
                out.setnchannels(1)
                out.setsampwidth(2)
                out.setframerate(self.fs)
                while True:
                    raw = self._spool.read(chunk * 4)
                    if not raw:
                        break
                    x = np.frombuffer(raw, dtype=np.float32).astype(float) * scale
                    out.writeframes(np.round(x * PCM16_SCALE).astype("<i2").tobytes())
        except OSError as exc:
            raise WavError(f"cannot write {self.path}: {exc}") from exc
        finally:
            self._spool.close()

    def discard(self) -> None:
        """Drop spooled samples without writing the output file."""
        self._closed = True
        self._spool.close()

    def __enter__(self) -> "WavWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()
        else:
            self.discard()


def write_wav(path, samples, fs: int = TARGET_FS) -> WavWriter:
    with WavWriter(path, fs) as w:
        w.write(samples)
    return w


def write_float_wav(path, samples, fs: int = TARGET_FS) -> None:
    """Plain float32 WAV, for test fixtures and lossless intermediates."""
    wavfile.write(Path(path), int(fs), np.asarray(samples, dtype=np.float32))
