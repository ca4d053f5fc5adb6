"""Print the analysis-resynthesis response of the default filterbank."""

import argparse

import numpy as np

from pdenhance.filterbank import FilterbankSpec, SubbandStream, design_filterbank


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--num-filters", type=int, default=47)
    ap.add_argument("--fc1", type=float, default=80.0)
    ap.add_argument("--lo", type=float, default=100.0, help="ripple band lower edge, Hz")
    ap.add_argument("--hi", type=float, default=3200.0, help="ripple band upper edge, Hz")
    args = ap.parse_args()

    coeffs = design_filterbank(FilterbankSpec(fc1=args.fc1, num_filters=args.num_filters))
    x = np.zeros(8192)
    x[0] = 1.0
    h = SubbandStream(coeffs).analyze(x).real.sum(axis=0)
    db = 20 * np.log10(np.abs(np.fft.rfft(h)))
    f = np.fft.rfftfreq(h.size, 1 / 8000)

    print(f"subbands: {len(coeffs)}  cf range: {coeffs[0].cf:.1f} - {coeffs[-1].cf:.1f} Hz")
    print(f"impulse response peak: sample {int(np.argmax(h))}")
    for lo, hi in ((args.lo, args.hi), (coeffs[2].cf, coeffs[-3].cf)):
        band = (f >= lo) & (f <= hi)
        print(f"ripple {lo:7.1f} - {hi:7.1f} Hz: {db[band].max() - db[band].min():.3f} dB")
    print("\n freq_hz  level_db")
    for fq in (50, 100, 200, 500, 1000, 2000, 3000, 3200, 3500, 3900):
        print(f"{fq:8d}  {db[np.argmin(np.abs(f - fq))]:8.3f}")


if __name__ == "__main__":
    main()
