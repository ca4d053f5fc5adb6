"""Per-unit noise energy tracking and decision-directed a-priori SNR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENERGY_FLOOR = 1e-12


def update_noise_aperiodic(e_d_prev, e_x, beta1: float = 0.9):
    e_x = np.asarray(e_x, dtype=float)
    return np.minimum(e_x, beta1 * np.asarray(e_d_prev, dtype=float) + (1 - beta1) * e_x)


def update_noise_periodic(e_d_prev, e_x, snr_v, beta3: float = 0.9, beta1: float = 0.9,
                          beta1_fast: float = 0.8):
    """Noise update for a periodic frame.

    Units with ``snr_v >= 1`` attribute ``E_x / (snr_v + 1)`` to noise. Weaker
    units take the aperiodic recursion, switching to the fast ``beta1_fast``
    when the noisy energy is at least twice that first estimate.
    Returns ``(e_d, low)`` where ``low`` marks the ``snr_v < 1`` units.
    """
    e_d_prev = np.asarray(e_d_prev, dtype=float)
    e_x = np.asarray(e_x, dtype=float)
    snr_v = np.asarray(snr_v, dtype=float)
    voiced = np.minimum(e_x, beta3 * e_d_prev + (1 - beta3) * e_x / (snr_v + 1.0))
    e_init = update_noise_aperiodic(e_d_prev, e_x, beta1)
    fast = update_noise_aperiodic(e_d_prev, e_x, beta1_fast)
    weak = np.where(e_x < 2.0 * e_init, e_init, fast)
    low = snr_v < 1.0
    return np.where(low, weak, voiced), low


def update_speech(e_x, e_d, g_prev, e_x_prev, beta2=0.96):
    """Decision-directed speech energy; ``beta2`` may be per-unit."""
    e_x = np.asarray(e_x, dtype=float)
    dd = np.asarray(g_prev) * np.asarray(e_x_prev)
    ml = np.maximum(e_x - np.asarray(e_d), 0.0)
    return np.minimum(e_x, beta2 * dd + (1 - np.asarray(beta2)) * ml)


def apriori_snr(e_s, e_d):
    return np.asarray(e_s, dtype=float) / np.maximum(np.asarray(e_d, dtype=float), ENERGY_FLOOR)


@dataclass
class EnhancerState:
    e_d: np.ndarray | None = None
    e_s: np.ndarray | None = None
    g_prev: np.ndarray | None = None
    e_x_prev: np.ndarray | None = None

    @property
    def started(self) -> bool:
        return self.e_d is not None


class NoiseTracker:
    """Runs the noise / speech recursions frame by frame."""

    def __init__(self, *, beta1=0.9, beta1_fast=0.8, beta2=0.96, beta2_fast=0.8,
                 beta3=0.9, g_min=0.178):
        self.beta1 = beta1
        self.beta1_fast = beta1_fast
        self.beta2 = beta2
        self.beta2_fast = beta2_fast
        self.beta3 = beta3
        self.g_min = g_min
        self.state = EnhancerState()

    @classmethod
    def from_config(cls, cfg) -> "NoiseTracker":
        return cls(beta1=cfg.beta1, beta1_fast=cfg.beta1_fast, beta2=cfg.beta2,
                   beta2_fast=cfg.beta2_fast, beta3=cfg.beta3, g_min=cfg.g_min)

    def step(self, e_x, snr_v=None, initial: bool = False) -> np.ndarray:
        """Advance one frame and return the a-priori SNR.

        ``snr_v`` is the voiced SNR map for periodic frames, ``None`` otherwise.
        The caller must report the final gain through :meth:`commit`.
        ``initial`` (or the very first call) seeds the recursions from ``e_x``.
        """
        st = self.state
        e_x = np.asarray(e_x, dtype=float)
        if initial or not st.started:
            st.e_d = e_x.copy()
            st.e_s = np.zeros_like(e_x)
            st.g_prev = np.full_like(e_x, self.g_min)
            st.e_x_prev = e_x.copy()
            return apriori_snr(st.e_s, st.e_d)
        if snr_v is None:
            e_d = update_noise_aperiodic(st.e_d, e_x, self.beta1)
            beta2 = self.beta2
        else:
            e_d, low = update_noise_periodic(st.e_d, e_x, snr_v, self.beta3, self.beta1,
                                             self.beta1_fast)
            beta2 = np.where(low, self.beta2_fast, self.beta2)
        st.e_s = update_speech(e_x, e_d, st.g_prev, st.e_x_prev, beta2)
        st.e_d = e_d
        st.e_x_prev = e_x.copy()
        return apriori_snr(st.e_s, st.e_d)

    def commit(self, gain) -> None:
        self.state.g_prev = np.asarray(gain, dtype=float).copy()
