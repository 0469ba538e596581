# Recoil in Fock space
#
# A photon absorbed or emitted with wavenumber k kicks the trapped scatterer by
# exp(+-i eps k X), X = a^dag + a.  Here we look at its matrix elements between
# motional number states and check them against a brute-force matrix exponential.

import numpy as np

from recoilscatter.fock import displacement_matrix, displacement_row, laguerre_assoc
from recoilscatter.validation import expm_displacement

# Elements are built from associated Laguerre polynomials.

print("L_5^3(2.7) =", laguerre_assoc(5, 3, 2.7))

# A 6x6 corner of the operator at beta = 0.8.  The phases alternate as i**|m-n|.

np.set_printoptions(precision=4, suppress=True, linewidth=120)
D = displacement_matrix(5, 5, 0.8)
print(D)

# Compare with expm of the truncated position operator (120 levels, so the
# low corner is exact to round-off).

ref = expm_displacement(0.8, +1, 120)[:6, :6]
print("max deviation from expm:", np.abs(D - ref).max())

# Each column is a normalized state once enough levels are kept.  The needed
# height grows with beta and with sqrt(n).

for n in (0, 10, 20):
    for extra in (10, 20, 30):
        row = displacement_row(n + extra, n, 0.8)
        print(f"n={n:2d} levels kept={n + extra:3d}  1 - norm = {1 - np.sum(np.abs(row)**2):.2e}")
