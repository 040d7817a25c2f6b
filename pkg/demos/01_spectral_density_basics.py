"""Spectral densities: coefficients, norms, membership, approximation.

A density a(w) = sum_k a_k exp(ikw) on [-pi, pi] is stored by its Fourier
coefficients with a_{-k} = conj(a_k), so it is real by construction.  This
script walks through evaluation, Sobolev norms, parameter-space membership
and the two approximation operators (cell averages and Fourier truncation).
"""

import numpy as np

from qsts import (
    SpectralDensity,
    eval_density,
    fourier_truncate,
    local_averages,
    membership,
    sobolev_norm,
    theta1_space,
    theta2_space,
)

# the two canonical test densities: a constant and 2 + 0.5 cos(w)
const = SpectralDensity.constant(3.0)
cos = SpectralDensity.cosine(2.0, 0.5)

print("values of 2 + 0.5 cos at 0, pi/2, pi:",
      [round(float(eval_density(cos, w)), 6) for w in (0.0, np.pi / 2, np.pi)])

semi, norm = sobolev_norm(cos, alpha=1.0)
print(f"Sobolev smoothness-1 norms: seminorm^2 = {semi:.4f}, norm^2 = {norm:.4f}")

# membership asks two things: the norm constraint and min a >= 1 + 1/M
for space in (theta1_space(1.0, 4.0), theta2_space(1, 5.0)):
    w = membership(cos, space)
    print(f"member of {space.kind}(M={space.M})? {w.member}"
          f"  (min a = {w.value:.4f}, needs >= {w.limit:.4f})")

# cell averages J_{j,n}: closed form from the coefficients; their mean is a_0
J = local_averages(cos, 8)
print("cell averages at n=8:", np.round(J, 4))
print("mean of averages (= a_0):", round(float(np.mean(J)), 12))

# Fourier truncation: a smooth density loses only its coefficient tail
geom = SpectralDensity(np.array([2.0 ** -k for k in range(21)], dtype=complex))
for m in (5, 9, 17):
    kept, err = fourier_truncate(geom, m)
    print(f"truncation to |k| <= {(m - 1) // 2}: sup error = {err:.3e}")
