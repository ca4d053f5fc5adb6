"""Phase-corrected complex 4th-order gammatone filterbank.

Each subband is a complex recursion

    H_k(z) = B * (A z^-1 + 4 A^2 z^-2 + A^3 z^-3) / (1 - A z^-1)^4 * C * z^-D

whose impulse response is ``B C m^3 A^m`` with ``m = n - D``. ``C`` rotates the
fine structure so its phase is zero at the envelope peak, and ``D`` shifts
every envelope peak to the common group delay ``n_gd``. Summing the real parts
of all subbands therefore gives a delayed, nearly flat reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

BANDWIDTH_FACTOR = 1.019


def erb_hz(fc):
    """Equivalent rectangular bandwidth in Hz at centre frequency ``fc``."""
    return 0.108 * np.asarray(fc, dtype=float) + 24.7


def erb_rate(f):
    """ERB-rate (number of ERBs below ``f``), Glasberg & Moore form."""
    return 21.4 * np.log10(0.00437 * np.asarray(f, dtype=float) + 1.0)


def erb_rate_inverse(e):
    return (10.0 ** (np.asarray(e, dtype=float) / 21.4) - 1.0) / 0.00437


def cf_ladder(fc1: float, erb_step: float, num_filters: int) -> np.ndarray:
    """Centre frequencies spaced ``erb_step`` ERBs apart, starting at ``fc1``.

    The spacing is uniform on the ERB-rate scale, i.e. the continuous form of
    ``fc(k+1) - fc(k) = erb_step * ERB(fc(k))``.
    """
    e = erb_rate(fc1) + erb_step * np.arange(num_filters)
    fc = erb_rate_inverse(e)
    fc[0] = fc1
    return fc


def peak_envelope_samples(erb, fs: float):
    """Sample index of the envelope peak of ``t^3 exp(-2 pi 1.019 ERB t)``."""
    return np.rint(3.0 * fs / (2.0 * np.pi * BANDWIDTH_FACTOR * np.asarray(erb))).astype(int)


@dataclass(frozen=True)
class FilterbankSpec:
    fc1: float = 80.0
    erb_step: float = 0.5
    num_filters: int = 47
    group_delay_samples: int = 128
    sample_rate: float = 8000.0

    def __post_init__(self):
        if self.fc1 <= 0:
            raise ValueError("fc1 must be positive")
        if not 0 < self.erb_step <= 1:
            raise ValueError("erb_step must lie in (0, 1]")
        if self.num_filters < 1:
            raise ValueError("num_filters must be >= 1")
        if self.group_delay_samples < 0:
            raise ValueError("group_delay_samples must be >= 0")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


@dataclass(frozen=True)
class FilterCoeffs:
    a: complex
    b: float
    c: complex
    d: int
    cf: float
    erb: float
    n_pe: int


def design_filterbank(spec: FilterbankSpec) -> list[FilterCoeffs]:
    fs = spec.sample_rate
    fc = cf_ladder(spec.fc1, spec.erb_step, spec.num_filters)
    if fc[-1] >= fs / 2:
        raise ValueError(
            f"highest centre frequency {fc[-1]:.1f} Hz is not below fs/2 = {fs / 2:g} Hz"
        )
    erb = erb_hz(fc)
    radius = np.exp(-2 * np.pi * BANDWIDTH_FACTOR * erb / fs)
    if np.any(radius >= 1):
        raise ValueError("unstable subband pole")
    a = radius * np.exp(2j * np.pi * fc / fs)
    # Normalise on |A|: the gain at the centre frequency is then exactly sqrt(2)*erb_step.
    b = np.sqrt(2) * spec.erb_step * (1 - radius) ** 4 / (radius + 4 * radius**2 + radius**3)
    n_pe = peak_envelope_samples(erb, fs)
    ngd = spec.group_delay_samples
    c = np.exp(-1j * 2 * np.pi * fc / fs * np.minimum(ngd, n_pe))
    d = np.maximum(0, ngd - n_pe)
    return [
        FilterCoeffs(
            a=complex(a[k]),
            b=float(b[k]),
            c=complex(c[k]),
            d=int(d[k]),
            cf=float(fc[k]),
            erb=float(erb[k]),
            n_pe=int(n_pe[k]),
        )
        for k in range(spec.num_filters)
    ]


class SubbandStream:
    """Stateful, causal analysis filterbank.

    ``analyze`` may be called with any chunking; the concatenated output is
    identical to one call over the whole signal.
    """

    def __init__(self, coeffs: list[FilterCoeffs]):
        self.coeffs = list(coeffs)
        k = len(self.coeffs)
        self._pole_state = np.zeros((k, 4, 1), dtype=complex)
        self._fir_state = np.zeros((k, 3), dtype=complex)
        self._delay = [np.zeros(c.d, dtype=complex) for c in self.coeffs]
        self._num = [
            np.array([0.0, c.a, 4 * c.a**2, c.a**3], dtype=complex) for c in self.coeffs
        ]
        self._gain = np.array([c.b * c.c for c in self.coeffs])

    @classmethod
    def from_spec(cls, spec: FilterbankSpec) -> "SubbandStream":
        return cls(design_filterbank(spec))

    @property
    def num_subbands(self) -> int:
        return len(self.coeffs)

    def reset(self) -> None:
        self._pole_state[:] = 0
        self._fir_state[:] = 0
        for buf in self._delay:
            buf[:] = 0

    def analyze(self, samples) -> np.ndarray:
        """Filter ``samples``; returns a ``(K, len(samples))`` complex array."""
        x = np.asarray(samples, dtype=float)
        if x.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        out = np.empty((self.num_subbands, x.size), dtype=complex)
        if x.size == 0:
            return out
        for k, coef in enumerate(self.coeffs):
            y = x.astype(complex)
            den = np.array([1.0, -coef.a])
            for s in range(4):
                y, self._pole_state[k, s] = lfilter([1.0], den, y, zi=self._pole_state[k, s])
            y, self._fir_state[k] = lfilter(self._num[k], [1.0], y, zi=self._fir_state[k])
            y *= self._gain[k]
            if coef.d:
                joined = np.concatenate([self._delay[k], y])
                out[k] = joined[: x.size]
                self._delay[k] = joined[x.size :]
            else:
                out[k] = y
        return out


def resynthesize(units, hop: int, num_subbands: int | None = None) -> np.ndarray:
    """Sum weighted real units over subbands and overlap-add over frames.

    ``units`` has shape ``(frames, K, N)`` with ``N == 2 * hop``; weighting by
    gain and synthesis window is the caller's job.
    """
    u = np.asarray(units, dtype=float)
    if u.ndim != 3:
        raise ValueError("units must have shape (frames, subbands, frame_len)")
    n_frames, k, n = u.shape
    if n != 2 * hop:
        raise ValueError(f"frame length {n} does not match hop {hop} at 50% overlap")
    if num_subbands is not None and k != num_subbands:
        raise ValueError(f"expected {num_subbands} subbands, got {k}")
    frames = u.sum(axis=1)
    out = np.zeros(max(0, (n_frames - 1) * hop + n) if n_frames else 0)
    for j in range(n_frames):
        out[j * hop : j * hop + n] += frames[j]
    return out


def format_coeff_table(coeffs: list[FilterCoeffs]) -> str:
    lines = ["# k cf_hz erb_hz re_a im_a b re_c im_c d n_pe"]
    for k, c in enumerate(coeffs, 1):
        lines.append(
            f"{k} {c.cf:.6f} {c.erb:.6f} {c.a.real:.12e} {c.a.imag:.12e} "
            f"{c.b:.12e} {c.c.real:.12e} {c.c.imag:.12e} {c.d} {c.n_pe}"
        )
    return "\n".join(lines) + "\n"


def parse_coeff_table(text: str) -> list[FilterCoeffs]:
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        f = line.split()
        rows.append(
            FilterCoeffs(
                a=complex(float(f[3]), float(f[4])),
                b=float(f[5]),
                c=complex(float(f[6]), float(f[7])),
                d=int(f[8]),
                cf=float(f[1]),
                erb=float(f[2]),
                n_pe=int(f[9]),
            )
        )
    return rows
