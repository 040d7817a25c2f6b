"""Spectral densities, parameter spaces and approximation operators.

A density is a real function a(w) on [-pi, pi] stored through finitely many
Fourier coefficients a_k with the Hermitian symmetry a_{-k} = conj(a_k),

    a(w) = sum_k a_k exp(i k w).

All L2 norms on [-pi, pi] carry the 1/(2 pi) weight; the convention is fixed
here once and used by every module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .errors import HermitianSymmetryViolation, InputError, RangeError

TWO_PI = 2.0 * math.pi

#: quadrature size used when building coefficients from a callable
_FROM_FUNCTION_GRID = 8192

#: grid used for sup-norm reports
_SUP_GRID = 4096


def reduce_angle(omega: float) -> float:
    """Reduce an angle to [-pi, pi] with round-half-to-even; ties map to pi."""
    w = omega - TWO_PI * np.rint(omega / TWO_PI)
    if w == -math.pi:
        return math.pi
    return float(w)


@dataclass(frozen=True)
class SpectralDensity:
    """Finite Hermitian Fourier coefficient sequence.

    Parameters
    ----------
    coeffs : complex ndarray, shape (K_max + 1,)
        Coefficients a_0 .. a_{K_max}; negative lags are implied by
        a_{-k} = conj(a_k), so symmetry holds by construction.
    """

    coeffs: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size == 0:
            raise InputError("density needs at least the lag-0 coefficient")
        if abs(c[0].imag) > 1e-12 * (1.0 + abs(c[0].real)):
            raise HermitianSymmetryViolation(
                f"a_0 must be real, got imaginary part {c[0].imag!r}"
            )
        c = c.copy()
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_coeff_map(cls, coeffs: Mapping[int, complex], label: str = "") -> "SpectralDensity":
        """Build from a map lag -> value, checking a_{-k} = conj(a_k).

        Lags may be given for either or both signs; when both are present
        they must be conjugate within 1e-12 or the construction is refused.
        """
        if not coeffs:
            raise InputError("empty coefficient map")
        kmax = max(abs(int(k)) for k in coeffs)
        out = np.zeros(kmax + 1, dtype=complex)
        seen = set()
        for k, v in coeffs.items():
            k = int(k)
            v = complex(v)
            pos, val = (k, v) if k >= 0 else (-k, np.conj(v))
            if pos in seen:
                if abs(out[pos] - val) > 1e-12 * (1.0 + abs(val)):
                    raise HermitianSymmetryViolation(
                        f"lags +-{pos} are not conjugate: {out[pos]!r} vs {val!r}"
                    )
            else:
                out[pos] = val
                seen.add(pos)
        return cls(out, label=label)

    @classmethod
    def constant(cls, a0: float, label: str = "") -> "SpectralDensity":
        return cls(np.array([float(a0)], dtype=complex), label=label or f"const:{a0:g}")

    @classmethod
    def cosine(cls, a0: float, a1: float, label: str = "") -> "SpectralDensity":
        """Density a(w) = a0 + a1 cos(w), i.e. coefficients (a0, a1/2)."""
        return cls(np.array([a0, a1 / 2.0], dtype=complex),
                   label=label or f"cos:{a0:g},{a1:g}")

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], k_max: int,
                      label: str = "") -> "SpectralDensity":
        """Fourier coefficients of a callable by periodic trapezoid quadrature.

        a_k = (1/2 pi) int exp(-i k w) a(w) dw on an 8192-point uniform grid;
        the integrand is periodic so the rule is spectrally accurate.  Only
        k >= 0 is computed, which enforces Hermitian symmetry exactly.
        """
        w = -math.pi + TWO_PI * np.arange(_FROM_FUNCTION_GRID) / _FROM_FUNCTION_GRID
        vals = np.asarray(fn(w), dtype=float)
        ks = np.arange(k_max + 1)
        phases = np.exp(-1j * np.outer(ks, w))
        c = phases @ vals / _FROM_FUNCTION_GRID
        c[0] = c[0].real
        return cls(c, label=label)

    # -- basic queries -----------------------------------------------------

    @property
    def k_max(self) -> int:
        return self.coeffs.size - 1

    def coeff(self, k: int) -> complex:
        """Coefficient a_k for any integer lag (0 outside the support)."""
        k = int(k)
        if abs(k) > self.k_max:
            return 0.0 + 0.0j
        return complex(self.coeffs[k]) if k >= 0 else complex(np.conj(self.coeffs[-k]))

    def full_coeffs(self, k_max: int | None = None) -> np.ndarray:
        """Coefficients a_{-k_max} .. a_{k_max} as one array."""
        k_max = self.k_max if k_max is None else int(k_max)
        ks = np.arange(-k_max, k_max + 1)
        out = np.zeros(ks.size, dtype=complex)
        lim = min(k_max, self.k_max)
        out[k_max:k_max + lim + 1] = self.coeffs[:lim + 1]
        out[k_max - lim:k_max] = np.conj(self.coeffs[1:lim + 1][::-1])
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "K_max": self.k_max,
            "coeffs": [
                {"k": int(k), "re": float(c.real), "im": float(c.imag)}
                for k, c in enumerate(self.coeffs)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, label: str = "") -> "SpectralDensity":
        try:
            kmax = int(obj["K_max"])
            entries = obj["coeffs"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed density JSON: {exc}") from exc
        c = np.zeros(kmax + 1, dtype=complex)
        for e in entries:
            k = int(e["k"])
            if k < 0 or k > kmax:
                raise InputError(f"density JSON stores lag {k} outside 0..{kmax}")
            c[k] = float(e["re"]) + 1j * float(e["im"])
        return cls(c, label=label)


class MembershipWitness(NamedTuple):
    """Outcome of a parameter-space membership test."""

    member: bool
    constraint: str      # "norm" or "lower_bound" or "support", "" if member
    location: float      # frequency of the violation when relevant
    value: float
    limit: float


@dataclass(frozen=True)
class ParameterSpace:
    """One of the three density classes used throughout.

    kind "theta1":      Sobolev ball of smoothness alpha, radius M, plus the
                        uniform lower bound a >= 1 + 1/M.
    kind "theta2":      band-limited to |k| <= d with sum |a_k|^2 <= M, plus
                        the same lower bound.
    kind "theta2prime": the same set seen through the real parameter theta
                        (the two norms coincide), used by the estimators.
    """

    kind: str
    M: float
    alpha: float = 0.0
    d: int = 0
    grid_size: int = 1024

    def __post_init__(self):
        if self.kind not in ("theta1", "theta2", "theta2prime"):
            raise InputError(f"unknown parameter space kind {self.kind!r}")
        if self.M <= 1.0:
            raise RangeError("parameter space needs M > 1")
        if self.kind == "theta1" and self.alpha <= 0.0:
            raise RangeError("theta1 needs alpha > 0")
        if self.grid_size < 256:
            raise RangeError("membership grid must have at least 256 points")


def theta1_space(alpha: float, M: float, grid_size: int = 1024) -> ParameterSpace:
    return ParameterSpace("theta1", M=float(M), alpha=float(alpha), grid_size=grid_size)


def theta2_space(d: int, M: float, grid_size: int = 1024) -> ParameterSpace:
    return ParameterSpace("theta2", M=float(M), d=int(d), grid_size=grid_size)


def theta2prime_space(d: int, M: float, grid_size: int = 1024) -> ParameterSpace:
    return ParameterSpace("theta2prime", M=float(M), d=int(d), grid_size=grid_size)


@dataclass(frozen=True)
class RealParam:
    """Real vector theta of length 2d+1 equivalent to a band-limited density.

    theta_0 = a_0, theta_j = sqrt(2) Re a_j, theta_{-j} = -sqrt(2) Im a_j.
    Stored as an array indexed j = -d..d (position j + d).
    """

    d: int
    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float).reshape(-1)
        if th.size != 2 * self.d + 1:
            raise InputError(f"theta must have length {2 * self.d + 1}, got {th.size}")
        th = th.copy()
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    def __getitem__(self, j: int) -> float:
        if abs(j) > self.d:
            raise IndexError(j)
        return float(self.theta[j + self.d])

    def to_density(self, label: str = "") -> SpectralDensity:
        c = np.zeros(self.d + 1, dtype=complex)
        c[0] = self[0]
        for j in range(1, self.d + 1):
            c[j] = (self[j] - 1j * self[-j]) / math.sqrt(2.0)
        return SpectralDensity(c, label=label)

    @classmethod
    def from_density(cls, a: SpectralDensity, d: int | None = None) -> "RealParam":
        d = a.k_max if d is None else int(d)
        th = np.zeros(2 * d + 1)
        th[d] = a.coeff(0).real
        for j in range(1, d + 1):
            aj = a.coeff(j)
            th[d + j] = math.sqrt(2.0) * aj.real
            th[d - j] = -math.sqrt(2.0) * aj.imag
        return cls(d, th)


def psi_basis(j: int, omega: np.ndarray) -> np.ndarray:
    """Real orthonormal trigonometric basis under the 1/(2 pi) inner product.

    psi_0 = 1, psi_j = sqrt(2) cos(j w), psi_{-j} = sqrt(2) sin(j w).
    """
    omega = np.asarray(omega, dtype=float)
    if j == 0:
        return np.ones_like(omega)
    if j > 0:
        return math.sqrt(2.0) * np.cos(j * omega)
    return math.sqrt(2.0) * np.sin(-j * omega)


def eval_density(a: SpectralDensity, omega) -> float | np.ndarray:
    """Evaluate a(w) = sum_k a_k exp(i k w) over both lag signs.

    The imaginary residue is discarded after asserting
    |Im| < 1e-10 (1 + |Re|); a violation means the symmetry invariant was
    broken upstream.  Scalars are reduced mod 2 pi first.
    """
    scalar = np.isscalar(omega)
    if scalar:
        w = np.array([reduce_angle(float(omega))])
    else:
        w = np.asarray(omega, dtype=float)
    ks = np.arange(-a.k_max, a.k_max + 1)
    vals = np.exp(1j * np.outer(w, ks)) @ a.full_coeffs()
    bad = np.abs(vals.imag) > 1e-10 * (1.0 + np.abs(vals.real))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise HermitianSymmetryViolation(
            f"evaluation at w={w[i]:g} has imaginary residue {vals.imag[i]:g}"
        )
    out = vals.real
    return float(out[0]) if scalar else out


def density_grid(a: SpectralDensity, size: int = _SUP_GRID, endpoint: bool = True):
    """Values of a on a uniform grid over [-pi, pi]; returns (omegas, values)."""
    if endpoint:
        w = np.linspace(-math.pi, math.pi, size + 1)
    else:
        w = -math.pi + TWO_PI * np.arange(size) / size
    return w, eval_density(a, w)


def density_min(a: SpectralDensity, grid_size: int = 1024):
    """Minimum of a over [-pi, pi]; exact for K_max <= 2, grid surrogate above.

    For K_max <= 2 the critical points solve a small polynomial in
    z = exp(i w), so the global minimum is found exactly; larger supports
    fall back to the grid (plus both endpoints).  Returns (min, argmin).
    """
    w, vals = density_grid(a, grid_size, endpoint=True)
    i = int(np.argmin(vals))
    best_w, best = float(w[i]), float(vals[i])
    if a.k_max <= 2 and a.k_max >= 1:
        # a'(w) = 0 as polynomial: sum_k i k a_k z^k = 0, z on the unit circle.
        # Multiply by z^{k_max}: poly of degree 2 k_max in z.
        K = a.k_max
        full = a.full_coeffs()                     # indices -K..K
        ks = np.arange(-K, K + 1)
        poly = (1j * ks * full)[::-1]              # np.roots wants leading-first
        if np.any(np.abs(poly) > 0):
            roots = np.roots(poly)
            for z in roots:
                if abs(abs(z) - 1.0) < 1e-8:
                    wc = float(np.angle(z))
                    vc = float(eval_density(a, wc))
                    if vc < best:
                        best, best_w = vc, wc
    return best, best_w


def sobolev_norm(a: SpectralDensity, alpha: float):
    """Sobolev seminorm and norm squared.

    seminorm_sq = sum_{k != 0} |k|^{2 alpha} |a_k|^2  (both signs of k),
    norm_sq = a_0^2 + seminorm_sq.
    """
    if alpha <= 0:
        raise RangeError("alpha must be positive")
    ks = np.arange(1, a.k_max + 1, dtype=float)
    semi = 2.0 * float(np.sum(ks ** (2.0 * alpha) * np.abs(a.coeffs[1:]) ** 2))
    return semi, float(a.coeffs[0].real) ** 2 + semi


def membership(a: SpectralDensity, space: ParameterSpace) -> MembershipWitness:
    """Test membership of a density in a parameter space, with witness.

    True iff the norm constraint holds and min a(w) >= 1 + 1/M - 1e-12,
    the minimum taken over the space's frequency grid (exactly for
    K_max <= 2).
    """
    slack = 1e-12
    if space.kind == "theta1":
        _, norm_sq = sobolev_norm(a, space.alpha)
        if norm_sq > space.M + slack:
            return MembershipWitness(False, "norm", math.nan, norm_sq, space.M)
    else:
        if a.k_max > space.d:
            extra = np.abs(a.coeffs[space.d + 1:])
            if np.any(extra > 1e-12):
                k_bad = space.d + 1 + int(np.argmax(extra > 1e-12))
                return MembershipWitness(False, "support", float(k_bad),
                                         float(np.max(extra)), 0.0)
        norm_sq = float(a.coeffs[0].real) ** 2 + 2.0 * float(
            np.sum(np.abs(a.coeffs[1:space.d + 1]) ** 2))
        if norm_sq > space.M + slack:
            return MembershipWitness(False, "norm", math.nan, norm_sq, space.M)
    lower = 1.0 + 1.0 / space.M
    amin, at = density_min(a, space.grid_size)
    if amin < lower - slack:
        return MembershipWitness(False, "lower_bound", at, amin, lower)
    return MembershipWitness(True, "", math.nan, amin, lower)


def local_averages(a: SpectralDensity, n: int) -> np.ndarray:
    """Cell averages J_j = n int_{(j-1)/n}^{j/n} a(2 pi (x - 1/2)) dx, j = 1..n.

    Computed in closed form from the coefficients: the change of variables
    maps cell j to W_{j,n} = 2 pi ((j-1)/n - 1/2, j/n - 1/2) and
    int exp(i k w) dw has an elementary antiderivative.
    """
    if n < 1:
        raise RangeError("n must be >= 1")
    j = np.arange(1, n + 1)
    w_lo = TWO_PI * ((j - 1) / n - 0.5)
    w_hi = TWO_PI * (j / n - 0.5)
    out = np.full(n, float(a.coeffs[0].real))
    for k in range(1, a.k_max + 1):
        ak = a.coeffs[k]
        integral = (np.exp(1j * k * w_hi) - np.exp(1j * k * w_lo)) / (1j * k)
        # k and -k contribute conjugate terms: 2 Re(a_k * integral)
        out = out + (n / TWO_PI) * 2.0 * (ak * integral).real
    return out


def piecewise_project(a: SpectralDensity, n: int) -> np.ndarray:
    """Step heights of the L2 projection onto piecewise constants on W_{j,n}.

    Identical to ``local_averages``: with the 1/(2 pi)-weighted inner
    product the projection height on each cell is the plain cell average.
    """
    return local_averages(a, n)


class TruncationResult(NamedTuple):
    density: SpectralDensity
    sup_error: float


def fourier_truncate(a: SpectralDensity, m: int) -> TruncationResult:
    """Keep lags |k| <= (m-1)/2; reports the sup-error on a 4096 grid."""
    if m < 1 or m % 2 == 0:
        raise RangeError("m must be odd and >= 1")
    half = (m - 1) // 2
    kept = SpectralDensity(a.coeffs[:min(half, a.k_max) + 1].copy(), label=a.label)
    w = np.linspace(-math.pi, math.pi, _SUP_GRID + 1)
    err = float(np.max(np.abs(eval_density(a, w) - eval_density(kept, w))))
    return TruncationResult(kept, err)


def grids(n: int, m: int):
    """Equidistant point grid t_{j,n} and Fourier frequency grid w_{j,m}.

    t_{j,n} = 2 pi (j/n - 1/2) for j = 1..n;
    w_{j,m} = 2 pi j / m for j = -(m-1)/2 .. (m-1)/2 (m odd).
    """
    if n < 1:
        raise RangeError("n must be >= 1")
    if m < 1 or m % 2 == 0:
        raise RangeError("m must be odd and >= 1")
    t = TWO_PI * (np.arange(1, n + 1) / n - 0.5)
    half = (m - 1) // 2
    w = TWO_PI * np.arange(-half, half + 1) / m
    return t, w


def fourier_frequencies(m: int) -> np.ndarray:
    return grids(1, m)[1]


def l2_distance_sq(a: SpectralDensity, values_fn, grid: int = 8192) -> float:
    """Weighted L2 distance^2 between a and an arbitrary function of w.

    (1/2 pi) int |a(w) - f(w)|^2 dw by periodic trapezoid on ``grid`` points.
    ``values_fn`` maps an array of frequencies to function values.
    """
    w = -math.pi + TWO_PI * np.arange(grid) / grid
    diff = eval_density(a, w) - np.asarray(values_fn(w), dtype=float)
    return float(np.mean(diff ** 2))


def step_function_values(heights: np.ndarray, omega: np.ndarray, n: int) -> np.ndarray:
    """Evaluate the piecewise-constant function with given cell heights."""
    x = np.clip((np.asarray(omega) / TWO_PI + 0.5) * n, 0, n - 1e-9)
    return np.asarray(heights)[x.astype(int)]


def parse_density(text: str) -> SpectralDensity:
    """Parse the CLI shorthand: ``const:<v>``, ``cos:<a0>,<a1>`` or a JSON path."""
    if text.startswith("const:"):
        return SpectralDensity.constant(float(text[6:]))
    if text.startswith("cos:"):
        parts = text[4:].split(",")
        if len(parts) != 2:
            raise InputError(f"cos density wants two numbers, got {text!r}")
        return SpectralDensity.cosine(float(parts[0]), float(parts[1]))
    try:
        with open(text) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read density {text!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid density JSON in {text!r}: {exc}") from exc
    return SpectralDensity.from_json(obj, label=text)
