"""Reference spectrum for the 3-particle scattering configuration.

Hand-built Lax matrix at q = (1, 0, -1), p = (1, -1, 1), g = 1; the
eigenvalues are the asymptotic momenta the scattering tests compare
against.
"""

import mpmath as mp

mp.mp.dps = 40

L = mp.matrix(3, 3)
q = [1, 0, -1]
p = [1, -1, 1]
for j in range(3):
    L[j, j] = p[j]
    for k in range(3):
        if j != k:
            L[j, k] = mp.mpc(0, 1) / (q[j] - q[k])

E = mp.eighe(L, eigvals_only=True)
print("spectrum:", [mp.nstr(e, 20) for e in E])
