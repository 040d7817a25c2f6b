"""Symbol matrices, circulant approximants and matrix distance bounds.

The n x n Hermitian Toeplitz matrix A_n(a) with entries A[j][k] = a_{k-j}
is the parameter of an n-mode gauge-invariant Gaussian state.  Its circulant
approximant shares the central Fourier band and is diagonalized exactly by
a reordered DFT unitary, which is what turns the state into a product of
thermal modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    EigenFailure,
    InputError,
    NotCirculant,
    RangeError,
)
from .spectral import (
    SpectralDensity,
    density_grid,
    fourier_frequencies,
    sobolev_norm,
)

_HERMITIZE_TOL = 1e-12


@dataclass(frozen=True)
class SymbolMatrix:
    """Dense Hermitian matrix with a structure tag.

    The tag records how the matrix was built ("toeplitz", "circulant" or
    "general"); operations that need the structure check the tag.  Entries
    are Hermitized on construction; an asymmetry above 1e-12 is an error.
    """

    entries: np.ndarray
    tag: str = "general"
    label: str = field(default="", compare=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionError(f"symbol matrix must be square, got {e.shape}")
        if self.tag not in ("toeplitz", "circulant", "general"):
            raise InputError(f"unknown tag {self.tag!r}")
        gap = np.max(np.abs(e - e.conj().T)) if e.size else 0.0
        if gap > _HERMITIZE_TOL * (1.0 + np.max(np.abs(e))):
            raise InputError(f"matrix is not Hermitian (asymmetry {gap:g})")
        e = 0.5 * (e + e.conj().T)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def eigvals(self) -> np.ndarray:
        try:
            return np.linalg.eigvalsh(self.entries)
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from exc

    def eig(self):
        try:
            return np.linalg.eigh(self.entries)
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from exc

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "tag": self.tag,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SymbolMatrix":
        try:
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj["im"], dtype=float)
            tag = obj["tag"]
            n = int(obj["n"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed matrix JSON: {exc}") from exc
        if re.shape != (n, n) or im.shape != (n, n):
            raise DimensionError("matrix JSON dimensions do not match n")
        return cls(re + 1j * im, tag=tag)


@dataclass(frozen=True)
class DftUnitary:
    """Reordered DFT unitary with columns u_j, j = -(m-1)/2 .. (m-1)/2.

    u_j = m^{-1/2} (1, e_j, e_j^2, ..., e_j^{m-1})' with e_j = exp(2 pi i j / m).
    """

    m: int
    matrix: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise RangeError("DFT unitary needs odd m >= 1")
        half = (self.m - 1) // 2
        rows = np.arange(self.m)[:, None]
        js = np.arange(-half, half + 1)[None, :]
        u = np.exp(2j * math.pi * rows * js / self.m) / math.sqrt(self.m)
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    def column(self, j: int) -> np.ndarray:
        half = (self.m - 1) // 2
        if abs(j) > half:
            raise DimensionError(f"column index {j} outside +-{half}")
        return self.matrix[:, j + half]


def toeplitz_from_density(a: SpectralDensity, n: int) -> SymbolMatrix:
    """Symbol matrix A_n(a) with A[j][k] = a_{k-j}."""
    if n < 1:
        raise RangeError("n must be >= 1")
    idx = np.arange(n)
    lags = idx[None, :] - idx[:, None]
    full = a.full_coeffs(n - 1)
    return SymbolMatrix(full[lags + (n - 1)], tag="toeplitz", label=a.label)


def circulant_from_density(a: SpectralDensity, m: int) -> SymbolMatrix:
    """Hermitian circulant approximant with representing vector

    c = (a_0, a_{-1}, ..., a_{-(m-1)/2}, a_{(m-1)/2}, ..., a_1).

    Column k of the matrix is the k-th cyclic shift of c, so the entry at
    (j, k) is c_{(j-k) mod m}; on the central band |k-j| <= (m-1)/2 this
    agrees with the Toeplitz matrix of the truncated density.
    """
    if m < 1 or m % 2 == 0:
        raise RangeError("m must be odd and >= 1")
    half = (m - 1) // 2
    c = np.zeros(m, dtype=complex)
    for i in range(half + 1):
        c[i] = a.coeff(-i)
    for i in range(half + 1, m):
        c[i] = a.coeff(m - i)
    idx = np.arange(m)
    entries = c[(idx[:, None] - idx[None, :]) % m]
    return SymbolMatrix(entries, tag="circulant", label=a.label)


def representing_vector(C: SymbolMatrix) -> np.ndarray:
    """First column of a circulant matrix, verifying the cyclic structure."""
    if C.tag != "circulant":
        raise NotCirculant(f"matrix tagged {C.tag!r}")
    c = C.entries[:, 0]
    idx = np.arange(C.n)
    rebuilt = c[(idx[:, None] - idx[None, :]) % C.n]
    if np.max(np.abs(rebuilt - C.entries)) > 1e-12 * (1 + np.max(np.abs(c))):
        raise NotCirculant("entries are not cyclic shifts of the first column")
    return c


def circulant_eigs(C: SymbolMatrix) -> np.ndarray:
    """Eigenvalues of a Hermitian circulant, indexed j = -(m-1)/2..(m-1)/2.

    eigenvalue_j = sum_{|k| <= (m-1)/2} c_{-k} exp(i k w_{j,m}) evaluated at
    the Fourier frequencies; no dense solve is involved (the dense
    eigendecomposition is kept as a test oracle only).
    """
    c = representing_vector(C)
    m = C.n
    half = (m - 1) // 2
    # coefficient with lag k is c_{(-k) mod m}
    ks = np.arange(-half, half + 1)
    coeff = c[(-ks) % m]
    w = fourier_frequencies(m)
    vals = np.exp(1j * np.outer(w, ks)) @ coeff
    if np.max(np.abs(vals.imag)) > 1e-10 * (1.0 + np.max(np.abs(vals.real))):
        raise NotCirculant("circulant is not Hermitian: complex eigenvalues")
    return vals.real


def principal_submatrix(A: SymbolMatrix, n: int) -> SymbolMatrix:
    """Upper-left n x n block; the structure tag is downgraded to general."""
    if n < 1 or n > A.n:
        raise DimensionError(f"block size {n} outside 1..{A.n}")
    if n == A.n:
        return A
    return SymbolMatrix(A.entries[:n, :n].copy(), tag="general", label=A.label)


def abs_square(M: np.ndarray) -> np.ndarray:
    """Entrywise squared modulus |M_{jl}|^2 as a real matrix."""
    M = np.asarray(M)
    return (M * M.conj()).real


def hs_distance(A, B) -> float:
    """Hilbert-Schmidt (Frobenius) distance ||A - B||_2."""
    A = A.entries if isinstance(A, SymbolMatrix) else np.asarray(A)
    B = B.entries if isinstance(B, SymbolMatrix) else np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def op_norm(A) -> float:
    """Operator norm; for Hermitian input this is max |eigenvalue|."""
    M = A.entries if isinstance(A, SymbolMatrix) else np.asarray(A)
    if np.allclose(M, M.conj().T, atol=1e-12):
        return float(np.max(np.abs(np.linalg.eigvalsh(M))))
    return float(np.linalg.norm(M, 2))


def toeplitz_circulant_gap(a: SpectralDensity, n: int, m: int,
                           alpha: float, M: float):
    """Squared HS gap between A_n(a) and the circulant block, with its bound.

    Requires odd m with n < m < 2(n-1).  The gap is computed both entrywise
    and through the lag-sum formula

        2 sum_{k=(m+1)/2}^{n-1} (n-k) |a_k - conj(a_{m-k})|^2,

    which must agree to 1e-10; the returned bound is 4 (m-n+1)^{1-2 alpha} M,
    valid whenever the Sobolev norm of a at smoothness alpha is at most M
    with alpha > 1/2.
    """
    if m % 2 == 0 or not (n < m < 2 * (n - 1)):
        raise RangeError(f"need odd m with n < m < 2(n-1), got n={n}, m={m}")
    if alpha <= 0.5:
        raise RangeError("the bound needs alpha > 1/2")
    A_n = toeplitz_from_density(a, n)
    block = principal_submatrix(circulant_from_density(a, m), n)
    dense = hs_distance(A_n, block) ** 2

    ks = np.arange((m + 1) // 2, n)
    diffs = np.array([a.coeff(k) - np.conj(a.coeff(m - k)) for k in ks])
    lag_sum = 2.0 * float(np.sum((n - ks) * np.abs(diffs) ** 2))
    if abs(dense - lag_sum) > 1e-10 * (1.0 + abs(dense)):
        raise EigenFailure(
            f"gap formulas disagree: dense {dense!r} vs lag sum {lag_sum!r}")
    bound = 4.0 * (m - n + 1) ** (1.0 - 2.0 * alpha) * M
    return dense, bound


def eigen_bracket_check(a: SpectralDensity, n: int, grid_size: int = 4096):
    """Check inf a - tol <= lambda_min(A_n) and lambda_max(A_n) <= sup a + tol.

    The quadratic form <x, A_n x> is an average of a against |trig poly|^2,
    hence trapped between the extremes of a; the extremes here are taken
    over a uniform grid (endpoints included) refined by the exact minimum
    for small supports.  Returns (lambda_min, lambda_max, inf_a, sup_a, pass).
    """
    A = toeplitz_from_density(a, n)
    lams = A.eigvals()
    lam_min, lam_max = float(lams[0]), float(lams[-1])
    _, vals = density_grid(a, grid_size, endpoint=True)
    inf_a, sup_a = float(np.min(vals)), float(np.max(vals))
    if a.k_max <= 2:
        from .spectral import density_min
        inf_a = min(inf_a, density_min(a)[0])
        neg = SpectralDensity(np.concatenate(([-a.coeffs[0].real], -a.coeffs[1:])))
        sup_a = max(sup_a, -density_min(neg)[0])
    ok = (inf_a - 1e-9 <= lam_min) and (lam_max <= sup_a + 1e-9)
    return lam_min, lam_max, inf_a, sup_a, ok


def diagonalization_residue(a: SpectralDensity, m: int) -> float:
    """Max off-diagonal modulus of U* A~_m(a) U; zero in exact arithmetic."""
    C = circulant_from_density(a, m)
    U = DftUnitary(m).matrix
    D = U.conj().T @ C.entries @ U
    off = D - np.diag(np.diag(D))
    return float(np.max(np.abs(off)))


def gap_bound_report(a: SpectralDensity, n: int, alpha: float,
                     M: float | None = None):
    """(m, gap, bound) rows for every admissible odd m at this n."""
    if M is None:
        _, M = sobolev_norm(a, alpha)
    rows = []
    m = n + 1 if n % 2 == 0 else n + 2
    while m < 2 * (n - 1):
        gap, bound = toeplitz_circulant_gap(a, n, m, alpha, M)
        rows.append((m, gap, bound))
        m += 2
    return rows
