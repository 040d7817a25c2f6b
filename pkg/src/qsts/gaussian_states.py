"""Gauge-invariant centered Gaussian states represented by their symbols.

A state with Hermitian symbol A >= I is handled entirely at the symbol
level through

    Q = (A - I)/2,   R = (A - I)(A + I)^{-1},

with the covariance matrix, the relative entropy in closed form, the
Pinsker bound and the symbol-distance entropy bound.  No Fock-space
density operator is ever materialized; the one exception is the photon
number law of a single thermal mode, which is plain geometric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    EigenFailure,
    NotFaithful,
    RangeError,
    SpectralRangeError,
)
from .toeplitz import SymbolMatrix, hs_distance

#: relative gate on lambda_min(A) - 1 below which entropy ops refuse
EPS_FAITHFUL = 1e-8

#: eigenvalues of R are clamped into [EPS_CLAMP, 1 - EPS_CLAMP] before log
EPS_CLAMP = 1e-14

#: a clamp wider than this indicates broken input, not rounding
_MAX_CLAMP = 1e-12


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, SymbolMatrix):
        return A.entries
    return np.asarray(A, dtype=complex)


def covariance_from_symbol(A) -> np.ndarray:
    """Real 2n x 2n covariance matrix of the state with symbol A,

    Sigma = (1/2) [[Re A, -Im A], [Im A, Re A]].
    """
    M = _as_matrix(A)
    re, im = M.real, M.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return 0.5 * np.vstack([top, bot])


def _check_faithful(M: np.ndarray, eps: float) -> np.ndarray:
    lams = np.linalg.eigvalsh(M)
    if lams[0] <= 1.0 + eps:
        raise NotFaithful(
            f"lambda_min(A) = {lams[0]:.12g} is not above 1 + {eps:g}")
    return lams


def r_from_symbol(A) -> np.ndarray:
    """R = (A - I)(A + I)^{-1} by a Hermitian solve, re-Hermitized."""
    M = _as_matrix(A)
    n = M.shape[0]
    R = scipy.linalg.solve(M + np.eye(n), M - np.eye(n), assume_a="her")
    return 0.5 * (R + R.conj().T)


def _log_psd(H: np.ndarray) -> np.ndarray:
    """Matrix log of a Hermitian matrix with spectrum expected in (0, 1).

    Eigenvalues are clamped into [EPS_CLAMP, 1 - EPS_CLAMP]; a clamp wider
    than 1e-12 raises rather than silently regularizing.
    """
    try:
        lams, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    clamped = np.clip(lams, EPS_CLAMP, 1.0 - EPS_CLAMP)
    if np.max(np.abs(clamped - lams)) > _MAX_CLAMP:
        raise EigenFailure(
            f"spectrum outside (0,1) beyond rounding: range "
            f"[{lams.min():.3g}, {lams.max():.3g}]")
    return (V * np.log(clamped)) @ V.conj().T


def _check_r_open_interval(R: np.ndarray, lo: float, hi: float, what: str):
    lams = np.linalg.eigvalsh(R)
    if lams[0] <= lo or lams[-1] >= hi:
        raise SpectralRangeError(
            f"{what}: spectrum [{lams[0]:.6g}, {lams[-1]:.6g}] "
            f"not inside ({lo:g}, {hi:g})")
    return lams


def s2_matrix(R1: np.ndarray, R2: np.ndarray) -> np.ndarray:
    """Hermitian part of R1 (log R1 - log R2) + (I-R1)(log(I-R1) - log(I-R2)).

    The raw operator polarization is not Hermitian when R1 and R2 do not
    commute, but only its Hermitian part survives the trace against any
    Hermitian weight, so that part is what this returns.
    """
    R1 = np.asarray(R1, dtype=complex)
    R2 = np.asarray(R2, dtype=complex)
    if R1.shape != R2.shape:
        raise SpectralRangeError("R1 and R2 must have equal shape")
    n = R1.shape[0]
    _check_r_open_interval(R1, 0.0, 1.0, "R1")
    _check_r_open_interval(R2, 0.0, 1.0, "R2")
    eye = np.eye(n)
    raw = (R1 @ (_log_psd(R1) - _log_psd(R2))
           + (eye - R1) @ (_log_psd(eye - R1) - _log_psd(eye - R2)))
    return 0.5 * (raw + raw.conj().T)


def relative_entropy(A1, A2, eps_faithful: float = EPS_FAITHFUL) -> float:
    """Relative entropy S(rho_1 || rho_2) between the states with these symbols.

    S = Re Tr[(I + Q1) (R1 (log R1 - log R2)
                        + (I - R1)(log(I - R1) - log(I - R2)))]

    with Q = (A - I)/2 and R = (A - I)(A + I)^{-1}.  Both symbols must be
    strictly faithful: lambda_min(A) > 1 + eps_faithful.
    """
    M1, M2 = _as_matrix(A1), _as_matrix(A2)
    if M1.shape != M2.shape:
        raise SpectralRangeError("symbols must have equal dimension")
    _check_faithful(M1, eps_faithful)
    _check_faithful(M2, eps_faithful)
    n = M1.shape[0]
    Q1 = 0.5 * (M1 - np.eye(n))
    R1, R2 = r_from_symbol(M1), r_from_symbol(M2)
    S2 = s2_matrix(R1, R2)
    tr = np.trace((np.eye(n) + Q1) @ S2)
    S = float(tr.real)
    if abs(tr.imag) > 1e-8 * (1.0 + abs(S)):
        raise EigenFailure(f"entropy trace has imaginary residue {tr.imag:g}")
    if S < -1e-10:
        raise EigenFailure(f"relative entropy came out negative: {S:g}")
    return S


def pinsker_trace_bound(A1, A2, eps_faithful: float = EPS_FAITHFUL) -> float:
    """sqrt(2 S(rho_1 || rho_2)), an upper bound on the trace distance."""
    return math.sqrt(2.0 * max(relative_entropy(A1, A2, eps_faithful), 0.0))


class SymbolBoundReport(NamedTuple):
    """Outcome of the symbol-distance entropy bound check."""

    delta: float
    holds: bool
    vacuous: bool       # True when ||R1 - R2|| >= delta, the bound's precondition fails
    h_norm: float       # ||R1 - R2||_2
    symbol_norm: float  # ||A1 - A2||_2
    entropy: float


def entropy_symbol_bound(A1, A2, lam: float) -> SymbolBoundReport:
    """Audit S(rho1||rho2) <= delta^{-1} ||R1 - R2||_2^2 for small perturbations.

    Requires (1 - lam) I < R_i < lam I for the given lam in (1/2, 1); then
    delta = min((1 - lam)/2, (1 - lam)^3 / (8 lam)) and the entropy bound
    holds whenever ||R1 - R2||_2 < delta.  The report also verifies the
    symbol-level control ||R1 - R2||_2^2 <= (1 - lam)^{-2} ||A1 - A2||_2^2.
    """
    if not 0.5 < lam < 1.0:
        raise RangeError("lam must lie in (1/2, 1)")
    M1, M2 = _as_matrix(A1), _as_matrix(A2)
    R1, R2 = r_from_symbol(M1), r_from_symbol(M2)
    _check_r_open_interval(R1, 1.0 - lam, lam, "R1 bracket")
    _check_r_open_interval(R2, 1.0 - lam, lam, "R2 bracket")
    delta = min((1.0 - lam) / 2.0, (1.0 - lam) ** 3 / (8.0 * lam))
    h_norm = hs_distance(R1, R2)
    symbol_norm = hs_distance(M1, M2)
    S = relative_entropy(M1, M2)
    if h_norm ** 2 > (1.0 - lam) ** -2 * symbol_norm ** 2 + 1e-9:
        raise SpectralRangeError(
            "||R1-R2|| exceeds its symbol-distance control; inputs inconsistent")
    vacuous = h_norm >= delta
    holds = vacuous or (S <= h_norm ** 2 / delta + 1e-9)
    return SymbolBoundReport(delta, holds, vacuous, h_norm, symbol_norm, S)


def thermal_pmf(a: float, k_max: int):
    """Photon number pmf of a one-mode thermal state with symbol a >= 1.

    pmf(k) = (1 - p) p^k with p = (a - 1)/(a + 1) for k = 0..k_max;
    the second return value is the tail mass p^{k_max + 1}.
    """
    if a < 1.0:
        raise RangeError("thermal symbol must satisfy a >= 1")
    if k_max < 0:
        raise RangeError("k_max must be nonnegative")
    p = (a - 1.0) / (a + 1.0)
    ks = np.arange(k_max + 1)
    pmf = (1.0 - p) * p ** ks
    return pmf, float(p ** (k_max + 1))


@dataclass(frozen=True)
class GaussState:
    """Immutable state wrapper caching the derived Q and R matrices."""

    symbol: SymbolMatrix
    eps_faithful: float = EPS_FAITHFUL

    def __post_init__(self):
        lams = np.linalg.eigvalsh(self.symbol.entries)
        if lams[0] < 1.0 - 1e-10:
            raise NotFaithful(
                f"symbol admits no state: lambda_min = {lams[0]:.12g} < 1")

    @property
    def n(self) -> int:
        return self.symbol.n

    @property
    def q_matrix(self) -> np.ndarray:
        return 0.5 * (self.symbol.entries - np.eye(self.n))

    @property
    def r_matrix(self) -> np.ndarray:
        # recomputed on demand; idempotent, hence race-free
        return r_from_symbol(self.symbol.entries)

    @property
    def covariance(self) -> np.ndarray:
        return covariance_from_symbol(self.symbol)

    def is_faithful(self) -> bool:
        lams = np.linalg.eigvalsh(self.symbol.entries)
        return bool(lams[0] > 1.0 + self.eps_faithful)

    def relative_entropy_to(self, other: "GaussState") -> float:
        return relative_entropy(self.symbol, other.symbol, self.eps_faithful)
