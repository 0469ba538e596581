# The photon-mediated kernel
#
# Integrating out the waveguide photon leaves a coupling F(m, n) between the
# excited motional sublevels.  Its imaginary part is radiative decay into the
# open channels, its real part a level shift.

import numpy as np

from recoilscatter import ModelParams, natural_units
from recoilscatter.kernel import KernelEngine, open_channel_momentum
from recoilscatter.validation import eta_oracle_kernel

params = ModelParams(epsilon_ld=0.8, omega_ratio=0.2, gamma_ratio=0.05)
u = natural_units(params)
E = 1.0 + u.omega / 2  # photon at the bare transition, trap in its ground state

# Intermediate channels with a real pole momentum are open.

for mb in range(7):
    print(mb, open_channel_momentum(E, mb, u.omega))

K = KernelEngine(params, n_max=4).matrix(E)
np.set_printoptions(precision=5, suppress=True, linewidth=140)
print("F =\n", K.values)
print("intermediate levels summed:", K.m_bar_max, " momentum cutoff:", K.cutoff)

# Entries with odd m - n vanish by parity; the diagonal decays.

print("Im F(m,m):", np.diag(K.values).imag)

# Independent check: replace +i0 by +i eta, integrate over the whole line,
# and extrapolate eta -> 0.  Takes ~15 s.

ref, _ = eta_oracle_kernel(E, params, 4, K.m_bar_max, K.cutoff)
print("max |F - oracle| =", np.abs(ref - K.values).max())
