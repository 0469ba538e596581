# Without recoil
#
# For a vanishing Lamb-Dicke parameter the scatterer is a fixed two-level
# system and the reflection is a Lorentzian of half-width Gamma.  The full
# solver at eps = 1e-3 reproduces it, apart from a real level shift that the
# momentum-cutoff-regulated kernel keeps (a few Gamma to the red here).

import numpy as np

from recoilscatter import ModelParams, SweepRequest, sweep
from recoilscatter.limits import LorentzianSpectrum

lor = LorentzianSpectrum(Omega=1.0, Gamma=0.05)
print("R at resonance:", lor.reflectance(1.0), " at +-Gamma:", lor.reflectance([0.95, 1.05]))

pts = sweep(SweepRequest(ModelParams(1e-3, 0.2, 0.05), 0.7, 1.3, 121))
w = np.array([p.omega_k_over_Omega for p in pts])
R = np.array([p.R for p in pts])
i = np.argmax(R)
print(f"full solver peak R = {R[i]:.4f} at omega_k = {w[i]:.3f}")

far = np.abs(w - 1) > 0.5
if far.any():
    print("max |R - Lorentzian| far from resonance:", np.abs(R[far] - lor.reflectance(w[far])).max())

for wi, Ri in zip(w[::10], R[::10]):
    print(f"{wi:6.3f}  {Ri:.4f}  {lor.reflectance(wi):.4f}  " + "#" * int(40 * Ri))
