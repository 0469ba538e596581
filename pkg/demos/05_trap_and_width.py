# Trap frequency and linewidth
#
# Sideband spacing follows the trap frequency.  Once the radiative width is
# comparable to the spacing, neighbouring peaks merge.

from recoilscatter import ModelParams, SweepRequest, find_peaks, sweep


def peaks_for(eps, omega, gamma, n=151):
    pts = sweep(SweepRequest(ModelParams(eps, omega, gamma), 0.7, 2.2, n))
    return find_peaks(pts, 0.02, omega_ratio=omega)


for omega in (0.1, 0.4):
    pk = peaks_for(0.8, omega, 0.05)
    print(f"omega = {omega}: peaks at", [round(p.location, 3) for p in pk])

for gamma in (0.05, 0.1, 0.2):
    pk = peaks_for(0.8, 0.2, gamma)
    print(f"Gamma = {gamma}: {len(pk)} peaks")
