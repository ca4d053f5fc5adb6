"""P0 error rate on synthetic harmonic complexes in white noise.

With --gap, each complex is preceded by a run of noise-only frames, which
exercises false alarms as well as misses and deviations.
"""

import argparse

import numpy as np

from pdenhance import evalkit as ek
from pdenhance import track_pitch

FRAMES = 94
TRACKS = {
    "100 Hz": np.full(FRAMES, 100.0),
    "200 Hz": np.full(FRAMES, 200.0),
    "300 Hz": np.full(FRAMES, 300.0),
    "glide up": np.geomspace(100, 200, FRAMES),
    "glide down": np.geomspace(300, 150, FRAMES),
}


def run(snr_db: float, seeds: int, lead: int) -> None:
    pooled = np.zeros(4, dtype=int)
    for name, track in TRACKS.items():
        track = np.r_[np.zeros(lead), track]
        f0_samples = ek.instantaneous_f0(track)
        counts = np.zeros(4, dtype=int)
        for seed in range(seeds):
            s = ek.synth_harmonic(track, seed=seed + 10)
            x = ek.mix_at_snr(s, np.random.default_rng(seed).standard_normal(s.size), snr_db)
            dec = track_pitch(x)
            rep = ek.p0_error_rate(detected=ek.PitchTrack.from_decisions(dec),
                                   reference=ek.frame_reference(f0_samples, len(dec)))
            counts += (rep.misses, rep.false_alarms, rep.deviations, rep.total_frames)
        pooled += counts
        rate = 100.0 * counts[:3].sum() / counts[3]
        print(f"{snr_db:5.1f} dB  {name:<10}  {rate:5.1f}%  miss/fa/dev {counts[:3].tolist()}")
    rate = 100.0 * pooled[:3].sum() / pooled[3]
    print(f"{snr_db:5.1f} dB  {'pooled':<10}  {rate:5.1f}%  miss/fa/dev {pooled[:3].tolist()}\n")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snr", type=float, nargs="+", default=[10.0, 5.0, 0.0])
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--gap", type=int, default=0, help="extra noise-only frames before each complex")
    args = ap.parse_args()
    for snr in args.snr:
        run(snr, args.seeds, 10 + args.gap)


if __name__ == "__main__":
    main()
