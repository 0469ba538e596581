# Recoil sidebands
#
# With recoil the incident photon can leave n phonons behind.  Reflection then
# shows a comb of peaks near omega_k = Omega + n omega, and the main peak is
# lowered as the Lamb-Dicke parameter grows.  Each sweep takes ~10 s.

import numpy as np

from recoilscatter import ModelParams, SweepRequest, find_peaks, sweep

for eps in (0.2, 0.4, 0.8, 1.6):
    pts = sweep(SweepRequest(ModelParams(eps, 0.2, 0.05), 0.7, 2.2, 151))
    peaks = find_peaks(pts, min_prominence=0.02, omega_ratio=0.2)
    worst = max(p.unitarity_defect for p in pts)
    print(f"eps = {eps}:  max |R+T-1| = {worst:.1e}")
    for pk in peaks:
        print(f"    peak at {pk.location:.3f} (n = {pk.nearest_resonance_index}, "
              f"shift {pk.shift:+.3f}), R = {pk.height:.3f}")
