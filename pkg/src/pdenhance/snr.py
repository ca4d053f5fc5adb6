"""Unit SNR from the periodicity degree at the estimated fundamental period."""

from __future__ import annotations

import numpy as np

from .periodicity import PD_FLOOR, PeriodicityMap


def snr_of_pd(pd):
    """Positive root of 2 s^2 + (1 - pd) s - pd = 0, the inverse of ``pd_of_snr``."""
    pd = np.asarray(pd, dtype=float)
    if np.any(pd < PD_FLOOR * (1 - 1e-12)):
        raise ValueError("pd below the 0.01 floor")
    root = np.sqrt(pd * pd + 6.0 * pd + 1.0)
    # below pd = 1 the textbook form cancels; use the conjugate form there
    with np.errstate(divide="ignore", invalid="ignore"):
        small = 2.0 * pd / ((1.0 - pd) + root)
    out = np.where(pd < 1.0, small, (pd - 1.0 + root) / 4.0)
    return out if out.ndim else float(out)


def estimate_voiced_snr(pmap: PeriodicityMap, p0_hat: int) -> np.ndarray:
    """Per-subband SNR of a periodic frame, read off PD at ``p0_hat``."""
    if not pmap.lags[0] <= p0_hat <= pmap.lags[-1]:
        raise ValueError(f"p0_hat={p0_hat} is outside the period grid")
    return snr_of_pd(pmap.at(p0_hat))
