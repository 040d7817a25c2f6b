"""Exact classical simulation of the commuting number-operator measurement.

After the DFT change of basis the observables N_j = B_j* B_j commute, and
for a symbol A >= I their joint law is an exactly samplable Gaussian mixture
of independent Poissons: with M = U* A U and Q' = (M - I)/2 >= 0, draw a
complex normal alpha with E[alpha alpha*] = Q' and then N_j ~ Poisson(|alpha_j|^2).
Marginals are geometric with parameter p(M_jj), means are Q'_jj and
cross covariances |Q'_jk|^2, which is what the moment formulas demand; the
probability generating function is det(I + Q'(I - Z))^{-1}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import (
    DimensionError,
    NotFaithful,
    NotPSD,
    RangeError,
    TooSmall,
)
from .harness import RngStream
from .spectral import SpectralDensity, psi_basis, fourier_frequencies
from .toeplitz import DftUnitary, SymbolMatrix, abs_square, toeplitz_from_density

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class BlockScheme:
    """Partition of n modes into r blocks of m modes with gaps of length d.

    m = 2 floor(log(n)/2) + 1 (natural log, forced odd) and
    r = floor(n / (m + d)), so r (m + d) <= n.
    """

    n: int
    d: int
    m: int
    r: int

    def __post_init__(self):
        if self.m % 2 == 0:
            raise RangeError("block size m must be odd")
        if self.r * (self.m + self.d) > self.n:
            raise RangeError("blocks and gaps exceed n modes")


def block_scheme(n: int, d: int) -> BlockScheme:
    """Blocking scheme for an n-mode d-dependent series; errors if no block fits."""
    if n < 8:
        raise RangeError("need n >= 8")
    if d < 0:
        raise RangeError("need d >= 0")
    m = 2 * int(math.floor(math.log(n) / 2.0)) + 1
    r = int(math.floor(n / (m + d)))
    if r < 1:
        raise TooSmall(f"no block of size {m}+{d} fits into n={n}")
    return BlockScheme(n=n, d=d, m=m, r=r)


@dataclass(frozen=True)
class MeasurementDraw:
    """Simulated number outcomes per block and the averaged observable.

    ``blocks`` is the r x m integer matrix of N outcomes; ``pi_bar`` is the
    length-m average of 2 N + 1 over blocks.
    """

    blocks: np.ndarray
    pi_bar: np.ndarray
    scheme: BlockScheme
    seed_path: tuple = field(default=(), compare=False)
    density_label: str = field(default="", compare=False)

    def __post_init__(self):
        b = np.asarray(self.blocks)
        if b.shape != (self.scheme.r, self.scheme.m):
            raise DimensionError("blocks matrix does not match the scheme")
        if np.any(b < 0):
            raise RangeError("number outcomes must be nonnegative")
        expect = np.mean(2.0 * b + 1.0, axis=0)
        if not np.array_equal(expect, np.asarray(self.pi_bar)):
            raise DimensionError("pi_bar inconsistent with blocks")

    def write_csv(self, fh: IO[str], no_timestamp: bool = True,
                  seed: int | None = None):
        """CSV rows (block, j, N) preceded by a JSON header comment line."""
        header = {
            "seed": seed if seed is not None else (
                self.seed_path[0] if self.seed_path else None),
            "n": self.scheme.n,
            "d": self.scheme.d,
            "m": self.scheme.m,
            "r": self.scheme.r,
            "density": self.density_label,
        }
        if not no_timestamp:
            import datetime
            header["written"] = datetime.datetime.now().isoformat()
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("block,j,N\n")
        half = (self.scheme.m - 1) // 2
        for b in range(self.scheme.r):
            for idx in range(self.scheme.m):
                fh.write(f"{b},{idx - half},{int(self.blocks[b, idx])}\n")


def _dft_conjugate(A: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    if m % 2 == 1:
        U = DftUnitary(m).matrix
        return U.conj().T @ A @ U
    # even dimension has no symmetric frequency grid; measure in the given basis
    return A.copy()


def pi_moments(A) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the observable vector Pi = 2N + 1.

    mean_j = u_j* A u_j and Cov(Pi) = (U* A U)^[2] - I; requires a strictly
    faithful symbol (lambda_min(A) > 1).
    """
    M = A.entries if isinstance(A, SymbolMatrix) else np.asarray(A, dtype=complex)
    lam_min = float(np.linalg.eigvalsh(M)[0])
    if lam_min <= 1.0:
        raise NotFaithful(f"pi moments need lambda_min(A) > 1, got {lam_min:.6g}")
    D = _dft_conjugate(M)
    mean = np.diag(D)
    if np.max(np.abs(mean.imag)) > 1e-10 * (1.0 + np.max(np.abs(mean.real))):
        raise NotFaithful("diagonal of U*AU is not real")
    cov = abs_square(D) - np.eye(M.shape[0])
    return mean.real.copy(), cov


def _poisson_mixture_factor(M: np.ndarray) -> np.ndarray:
    """Factor B with B B* = Q' = (M - I)/2, clamping tiny negative modes."""
    Q = 0.5 * (M - np.eye(M.shape[0]))
    lams, V = np.linalg.eigh(Q)
    if lams[0] < -_PSD_TOL:
        raise NotPSD(f"Q' has eigenvalue {lams[0]:.3g} < -{_PSD_TOL:g}")
    lams = np.clip(lams, 0.0, None)
    return V * np.sqrt(lams)


class NumberOpSampler:
    """Reusable sampler for the commuting number outcomes of one symbol.

    Precomputes the mixture factor B with B B* = (U* A U - I)/2 once;
    ``draw`` then costs one complex normal batch and one Poisson batch.
    """

    def __init__(self, A):
        M = A.entries if isinstance(A, SymbolMatrix) else np.asarray(A, dtype=complex)
        self.m = M.shape[0]
        self.factor = _poisson_mixture_factor(_dft_conjugate(M))

    def draw(self, rng, size: int | None = None) -> np.ndarray:
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        rows = 1 if size is None else int(size)
        z = (gen.standard_normal((rows, self.m))
             + 1j * gen.standard_normal((rows, self.m)))
        z /= math.sqrt(2.0)
        alpha = z @ self.factor.T
        N = gen.poisson(np.abs(alpha) ** 2)
        return N[0] if size is None else N


def sample_number_ops(A, rng, size: int | None = None) -> np.ndarray:
    """Draw the commuting number outcomes N for a symbol A >= I.

    For odd dimension the observables live in the DFT basis (M = U* A U);
    even dimension is sampled in the given basis, which the mixture law
    supports equally.  ``rng`` is an RngStream or numpy Generator; ``size``
    draws a batch of rows from the single stream.  For repeated draws from
    the same symbol build a NumberOpSampler once instead.
    """
    return NumberOpSampler(A).draw(rng, size)


def sample_pi_blocks(a: SpectralDensity, scheme: BlockScheme,
                     stream: RngStream) -> MeasurementDraw:
    """Draw r independent m-mode blocks and aggregate the averaged observable.

    Each block uses the independent substream ``stream.child(b)``, so the
    draw is deterministic given (seed path, scheme, density) and identical
    under any parallel execution of the blocks.
    """
    A = toeplitz_from_density(a, scheme.m)
    lam_min = float(np.linalg.eigvalsh(A.entries)[0])
    if lam_min <= 1.0:
        raise NotFaithful(
            f"block symbol has lambda_min = {lam_min:.6g}, need > 1")
    B = _poisson_mixture_factor(_dft_conjugate(A.entries))
    blocks = np.empty((scheme.r, scheme.m), dtype=np.int64)
    for b in range(scheme.r):
        gen = stream.child(b).generator()
        z = (gen.standard_normal(scheme.m) + 1j * gen.standard_normal(scheme.m))
        z /= math.sqrt(2.0)
        alpha = B @ z
        blocks[b] = gen.poisson(np.abs(alpha) ** 2)
    pi_bar = np.mean(2.0 * blocks + 1.0, axis=0)
    return MeasurementDraw(blocks=blocks, pi_bar=pi_bar, scheme=scheme,
                           seed_path=stream.path, density_label=a.label)


def v_vector(j: int, n: int) -> np.ndarray:
    """v_{j,n} = n^{-1/2} (phi_j(w_{k,n}))_{|k| <= (n-1)/2}; orthonormal in j."""
    if n % 2 == 0:
        raise RangeError("v vectors need odd n")
    w = fourier_frequencies(n)
    return np.exp(1j * j * w) / math.sqrt(n)


def w_vector(j: int, n: int) -> np.ndarray:
    """w_{j,n} = n^{-1/2} (psi_j(w_{k,n}))_{|k| <= (n-1)/2}; real orthonormal."""
    if n % 2 == 0:
        raise RangeError("w vectors need odd n")
    w = fourier_frequencies(n)
    return psi_basis(j, w) / math.sqrt(n)


def unbiased_cov_estimates(pi: np.ndarray, d: int) -> np.ndarray:
    """Unbiased symbol-coefficient estimates from one observable vector.

    a_check_j = (n^{1/2} / (n - |j|)) v_j* Pi for |j| <= d, returned as a
    complex array indexed j = -d..d (position j + d).
    """
    pi = np.asarray(pi, dtype=float).reshape(-1)
    n = pi.size
    if n % 2 == 0:
        raise DimensionError("observable vector must have odd length")
    if d > (n - 1) // 2:
        raise DimensionError(f"d = {d} exceeds (n-1)/2 = {(n - 1) // 2}")
    out = np.empty(2 * d + 1, dtype=complex)
    for j in range(-d, d + 1):
        out[j + d] = math.sqrt(n) / (n - abs(j)) * (v_vector(j, n).conj() @ pi)
    return out


def joint_pmf_from_pgf(A, k_max: int = 12, grid: int = 64) -> np.ndarray:
    """Joint pmf of N on {0..k_max}^m by inverting the generating function.

    E prod z_j^{N_j} = 1 / det(I + Q'(I - Z)); the inversion samples each
    z_j on a ``grid``-point unit circle and takes the inverse DFT.  Only
    intended for m <= 2 (cost grows like grid^m).
    """
    M = A.entries if isinstance(A, SymbolMatrix) else np.asarray(A, dtype=complex)
    m = M.shape[0]
    if m > 2:
        raise DimensionError("generating-function inversion supports m <= 2")
    D = _dft_conjugate(M)
    Q = 0.5 * (D - np.eye(m))
    zs = np.exp(2j * math.pi * np.arange(grid) / grid)
    if m == 1:
        vals = np.array([1.0 / (1.0 + Q[0, 0] * (1.0 - z)) for z in zs])
        pmf = np.fft.fft(vals) / grid
        out = pmf[: k_max + 1].real
        return np.clip(out, 0.0, None)
    vals = np.empty((grid, grid), dtype=complex)
    eye = np.eye(2)
    for i1, z1 in enumerate(zs):
        for i2, z2 in enumerate(zs):
            Z = np.diag([z1, z2])
            vals[i1, i2] = 1.0 / np.linalg.det(eye + Q @ (eye - Z))
    pmf = np.fft.fft2(vals) / grid ** 2
    return np.clip(pmf[: k_max + 1, : k_max + 1].real, 0.0, None)
