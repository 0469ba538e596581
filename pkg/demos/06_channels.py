# Where the photon goes
#
# At a single energy the outgoing photon is a mixture over phonon channels.
# Channel n carries frequency omega_k - n omega and is open while that is
# positive; closed channels get exactly zero amplitude.

from recoilscatter import ModelParams, solve_point
from recoilscatter.channels import outgoing_frequency

params = ModelParams(0.8, 0.2, 0.05)
w = 1.3
pt = solve_point(w, params)
ch = pt.channels
print(f"R = {pt.R:.5f}, T = {pt.T:.5f}, |R+T-1| = {pt.unitarity_defect:.1e}, n_max = {pt.n_max_used}")
for n in range(ch.n_channels):
    if ch.open[n]:
        print(f"n={n}  omega_out={outgoing_frequency(n, w, params):.2f}  "
              f"|r|^2={abs(ch.r[n])**2:.4f}  |t|^2={abs(ch.t[n])**2:.4f}")
print("closed channels all zero:", not (ch.r[~ch.open].any() or ch.t[~ch.open].any()))

# The same through the command line:
#   recoilscatter point --epsilon-ld 0.8 --omega-ratio 0.2 --gamma-ratio 0.05 --omega-k 1.3
