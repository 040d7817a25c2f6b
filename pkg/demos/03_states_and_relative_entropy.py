"""Gaussian states through their symbols: entropy, Pinsker, thermal modes.

Everything is computed at the symbol level via Q = (A-I)/2 and
R = (A-I)(A+I)^{-1}.  A diagonal symbol is a product of thermal modes whose
number outcomes are geometric, which gives an independent classical check
of the entropy formula.
"""

import math

import numpy as np

from qsts import (
    covariance_from_symbol,
    pinsker_trace_bound,
    relative_entropy,
    thermal_pmf,
)

# one mode: symbol a = 3 is the thermal state with geometric photon number
pmf, tail = thermal_pmf(3.0, k_max=6)
print("thermal photon pmf at a=3:", np.round(pmf, 5), f"tail {tail:.1e}")
print("covariance of that mode:", covariance_from_symbol(
    np.array([[3.0]], dtype=complex)).diagonal())

# entropy between two thermal modes equals the geometric KL divergence
S = relative_entropy(np.array([[3.0]], dtype=complex),
                     np.array([[5.0]], dtype=complex))
kl = math.log(0.5 / (1 / 3)) + 1.0 * math.log(0.5 / (2 / 3))
print(f"\nS(a=3 || a=5) = {S:.10f}; geometric KL = {kl:.10f}")

# additivity on diagonal (commuting) symbols
d1 = np.array([2.0, 3.0, 4.0])
d2 = np.array([2.5, 2.8, 4.4])
S_joint = relative_entropy(np.diag(d1).astype(complex),
                           np.diag(d2).astype(complex))
S_sum = sum(relative_entropy(np.array([[x]], dtype=complex),
                             np.array([[y]], dtype=complex))
            for x, y in zip(d1, d2))
print(f"product state: joint S = {S_joint:.10f}, mode sum = {S_sum:.10f}")

# non-commuting pair: entropy is basis independent
rng = np.random.default_rng(1)
H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
H = 0.5 * (H + H.conj().T) / 2
A1 = H + (1.5 - np.linalg.eigvalsh(H)[0]) * np.eye(4)
A2 = A1 + 0.1 * np.diag([1.0, -0.5, 0.25, 0.0])
Q, R = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
U = Q * (np.diag(R) / np.abs(np.diag(R)))
print(f"\nS before conjugation: {relative_entropy(A1, A2):.12f}")
print(f"S after conjugation:  "
      f"{relative_entropy(U.conj().T @ A1 @ U, U.conj().T @ A2 @ U):.12f}")

# the Pinsker bound turns entropy into a trace-distance bound
print(f"\ntrace-distance bound sqrt(2S) = {pinsker_trace_bound(A1, A2):.6f}")
