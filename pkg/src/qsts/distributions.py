"""Geometric and negative binomial laws, their distances and error exponents.

The symbol value a > 1 of a thermal mode parameterizes a geometric law
through p = (a - 1)/(a + 1); everything here is written in terms of a where
that is the natural parameter.  Exact series are truncated when the running
geometric tail bound drops below 1e-14.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import NotPSD, RangeError
from .spectral import SpectralDensity, eval_density, TWO_PI

_SERIES_TAIL = 1e-14


def p_of_a(a: float) -> float:
    """Geometric parameter p = (a - 1)/(a + 1) of the thermal symbol a."""
    if a <= 1.0:
        raise RangeError(f"need a > 1, got {a!r}")
    return (a - 1.0) / (a + 1.0)


def a_of_p(p: float) -> float:
    if not 0.0 <= p < 1.0:
        raise RangeError(f"need p in [0, 1), got {p!r}")
    return (1.0 + p) / (1.0 - p)


@dataclass(frozen=True)
class Geometric:
    """Law P(X = k) = (1 - p) p^k on k = 0, 1, ..."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise RangeError(f"p must lie in [0, 1), got {self.p!r}")

    def pmf(self, k) -> np.ndarray:
        k = np.asarray(k)
        return (1.0 - self.p) * self.p ** k

    @property
    def mean(self) -> float:
        return self.p / (1.0 - self.p)

    @property
    def var(self) -> float:
        return self.p / (1.0 - self.p) ** 2

    def sample(self, rng: np.random.Generator, size=None):
        # numpy's geometric counts trials to first success (support 1, 2, ...)
        return rng.geometric(1.0 - self.p, size=size) - 1


@dataclass(frozen=True)
class NegBinomial:
    """Law P(X = k) = Gamma(k+r)/(k! Gamma(r)) (1-p)^r p^k on k = 0, 1, ..."""

    r: float
    p: float

    def __post_init__(self):
        if self.r <= 0.0:
            raise RangeError("r must be positive")
        if not 0.0 < self.p < 1.0:
            raise RangeError("p must lie in (0, 1)")

    def log_pmf(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return (gammaln(k + self.r) - gammaln(k + 1.0) - gammaln(self.r)
                + self.r * math.log1p(-self.p) + k * math.log(self.p))

    def pmf(self, k) -> np.ndarray:
        return np.exp(self.log_pmf(k))

    @property
    def mean(self) -> float:
        return self.r * self.p / (1.0 - self.p)

    @property
    def var(self) -> float:
        return self.r * self.p / (1.0 - self.p) ** 2


class GeoStats(NamedTuple):
    p: float
    mean: float
    var: float
    m4_bound: float
    fisher_j: float
    tau: float


def geo_stats(a: float) -> GeoStats:
    """Moments, fourth-moment bound, Fisher information and log p at symbol a.

    p = (a-1)/(a+1), mean = (a-1)/2, var = (a^2-1)/4,
    E(X - EX)^4 <= (5/8)(a+1)^4, J(a) = 1/(a^2 - 1), tau = log p.
    """
    p = p_of_a(a)
    return GeoStats(
        p=p,
        mean=(a - 1.0) / 2.0,
        var=(a * a - 1.0) / 4.0,
        m4_bound=0.625 * (a + 1.0) ** 4,
        fisher_j=1.0 / (a * a - 1.0),
        tau=math.log(p),
    )


def score(x, a: float):
    """Score of the geometric law in the symbol parameter a,

    s(x, a) = (x - (a-1)/2) * 2/(a^2 - 1);

    zero mean under Geo(p(a)) and E s^2 = 1/(a^2 - 1).
    """
    if a <= 1.0:
        raise RangeError("need a > 1")
    x = np.asarray(x, dtype=float)
    out = (x - (a - 1.0) / 2.0) * 2.0 / (a * a - 1.0)
    return float(out) if out.ndim == 0 else out


def hellinger_geo(lam: float, mu: float):
    """Exact squared Hellinger distance of two geometrics and its ratio bound.

    With p_i the geometric parameters of lam and mu,

        h2_exact = 2 (1 - sqrt((1-p1)(1-p2)) / (1 - sqrt(p1 p2))),
        h2_bound = (lam - mu)^2 / ((lam - 1)(mu - 1)),

    and h2_exact <= h2_bound always.
    """
    p1, p2 = p_of_a(lam), p_of_a(mu)
    bc = math.sqrt((1.0 - p1) * (1.0 - p2)) / (1.0 - math.sqrt(p1 * p2))
    h2_exact = 2.0 * (1.0 - bc)
    h2_bound = (lam - mu) ** 2 / ((lam - 1.0) * (mu - 1.0))
    return h2_exact, h2_bound


def hellinger_geo_exact_p(p1: float, p2: float) -> float:
    """Closed-form H^2 between Geo(p1) and Geo(p2), allowing p = 0."""
    bc = math.sqrt((1.0 - p1) * (1.0 - p2)) / (1.0 - math.sqrt(p1 * p2))
    return 2.0 * (1.0 - bc)


def nb_hellinger_bound_symbols(r: float, a1: float, a2: float) -> float:
    """Bound H^2(NB(r, p(a1)), NB(r, p(a2))) <= r (a1-a2)^2 / ((a1-1)(a2-1))."""
    if r <= 0:
        raise RangeError("r must be positive")
    if a1 <= 1.0 or a2 <= 1.0:
        raise RangeError("need a_i > 1")
    return r * (a1 - a2) ** 2 / ((a1 - 1.0) * (a2 - 1.0))


def nb_hellinger_bound_shapes(r1: float, r2: float) -> float:
    """Bound H^2(NB(r1, p), NB(r2, p)) <= 1 - G((r1+r2)/2)/sqrt(G(r1) G(r2))."""
    if r1 <= 0 or r2 <= 0:
        raise RangeError("shapes must be positive")
    return 1.0 - math.exp(gammaln((r1 + r2) / 2.0)
                          - 0.5 * gammaln(r1) - 0.5 * gammaln(r2))


def nb_hellinger_exact(r1: float, p1: float, r2: float, p2: float,
                       tail: float = 1e-12) -> float:
    """H^2 between two negative binomials by Bhattacharyya series.

    Terms decay like sqrt(p1 p2)^k; summation stops once the geometric
    tail bound of the remainder falls below ``tail``.
    """
    q1, q2 = NegBinomial(r1, p1), NegBinomial(r2, p2)
    ratio = math.sqrt(p1 * p2)
    bc, k = 0.0, 0
    while True:
        term = math.exp(0.5 * (q1.log_pmf(k) + q2.log_pmf(k)))
        bc += term
        # for k >= max(r1, r2): term_{k+1}/term_k <= sqrt(p1 p2) * (1 + r/k)
        if k > max(r1, r2, 8):
            bound = term * ratio * (1.0 + max(r1, r2) / k) / (1.0 - ratio)
            if bound < tail:
                break
        k += 1
        if k > 10_000_000:
            raise RangeError("Bhattacharyya series did not converge")
    return 2.0 * (1.0 - bc)


def nb_sample(r: float, p: float, rng: np.random.Generator, size=None):
    """Draw from NB(r, p) as a Gamma-Poisson mixture.

    lam ~ Gamma(shape r, rate (1-p)/p), then Poisson(lam); works for any
    real r > 0 including r < 1.
    """
    if r <= 0:
        raise RangeError("r must be positive")
    if not 0.0 < p < 1.0:
        raise RangeError("p must lie in (0, 1)")
    lam = rng.gamma(shape=r, scale=p / (1.0 - p), size=size)
    return rng.poisson(lam)


def chernoff_geo(a0: float, a1: float, t: float) -> float:
    """Binary error exponent term for two geometric laws at mixing weight t,

    psi(t) = -log (1/2) [(a0+1)^t (a1+1)^{1-t} - (a0-1)^t (a1-1)^{1-t}].
    """
    if a0 <= 1.0 or a1 <= 1.0:
        raise RangeError("need a_i > 1")
    if not 0.0 <= t <= 1.0:
        raise RangeError("t must lie in [0, 1]")
    bracket = ((a0 + 1.0) ** t * (a1 + 1.0) ** (1.0 - t)
               - (a0 - 1.0) ** t * (a1 - 1.0) ** (1.0 - t))
    return -math.log(0.5 * bracket)


def _golden_section_min(fn, lo: float, hi: float, tol: float = 1e-10):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _guarded_infimum(fn, tol: float = 1e-10, grid: int = 101):
    """Golden section on [0,1] cross-checked against a grid minimum."""
    ts = np.linspace(0.0, 1.0, grid)
    vals = np.array([fn(t) for t in ts])
    i = int(np.argmin(vals))
    t_star, v_star = _golden_section_min(fn, 0.0, 1.0, tol)
    if vals[i] < v_star:
        t_star, v_star = float(ts[i]), float(vals[i])
    return t_star, v_star


def chernoff_geo_inf(a0: float, a1: float, tol: float = 1e-10):
    """Infimum over t in [0, 1] of chernoff_geo; returns (t*, value)."""
    return _guarded_infimum(lambda t: chernoff_geo(a0, a1, t), tol)


def chernoff_quantum(a0: SpectralDensity, a1: SpectralDensity, t: float,
                     grid: int = 4096) -> float:
    """Error exponent term for two quantum spectral densities at weight t,

    psi(t) = -(1/2 pi) int_0^{2 pi}
             log (1/2)[(a0(w)+1)^t (a1(w)+1)^{1-t}
                       - (a0(w)-1)^t (a1(w)-1)^{1-t}] dw,

    computed by periodic trapezoid quadrature on ``grid`` points.  The
    integrand is 2 pi periodic, so integrating over [0, 2 pi] or
    [-pi, pi] gives the same value.
    """
    if not 0.0 <= t <= 1.0:
        raise RangeError("t must lie in [0, 1]")
    w = TWO_PI * np.arange(grid) / grid
    v0 = np.asarray(eval_density(a0, w), dtype=float)
    v1 = np.asarray(eval_density(a1, w), dtype=float)
    if np.min(v0) <= 1.0 or np.min(v1) <= 1.0:
        raise RangeError("densities must stay strictly above 1 on the grid")
    bracket = ((v0 + 1.0) ** t * (v1 + 1.0) ** (1.0 - t)
               - (v0 - 1.0) ** t * (v1 - 1.0) ** (1.0 - t))
    return float(-np.mean(np.log(0.5 * bracket)))


def chernoff_quantum_inf(a0: SpectralDensity, a1: SpectralDensity,
                         tol: float = 1e-10, grid: int = 4096):
    """Infimum over t in [0, 1] of chernoff_quantum; returns (t*, value)."""
    return _guarded_infimum(lambda t: chernoff_quantum(a0, a1, t, grid), tol)


def varstab_arccosh(a: float) -> float:
    """Variance-stabilizing transform g(a) = log(a + sqrt(a^2 - 1))."""
    if a <= 1.0:
        raise RangeError("need a > 1")
    return math.log(a + math.sqrt(a * a - 1.0))


def varstab_ode_residual(a: float) -> float:
    """|g'(a) - 1/sqrt(a^2-1)| with g' computed analytically.

    g' must equal the square root of the geometric Fisher information;
    the residual is pure floating point noise, below 1e-12.
    """
    if a <= 1.0:
        raise RangeError("need a > 1")
    s = math.sqrt(a * a - 1.0)
    g_prime = (1.0 + a / s) / (a + s)
    return abs(g_prime - 1.0 / s)


def gaussian_square_cov(sx2: float, sy2: float, sxy: float):
    """Moments of squares of a centered bivariate normal pair.

    E[X^2 Y^2] = 2 sxy^2 + sx2 sy2 and Cov(X^2, Y^2) = 2 sxy^2.
    """
    if sx2 < 0 or sy2 < 0 or sx2 * sy2 - sxy * sxy < -1e-15 * max(1.0, sx2 * sy2):
        raise NotPSD("covariance matrix is not positive semidefinite")
    exy = 2.0 * sxy * sxy + sx2 * sy2
    return exy, 2.0 * sxy * sxy


def geo_kl(a1: float, a2: float) -> float:
    """KL(Geo(p(a1)) || Geo(p(a2))) in closed form."""
    p1, p2 = p_of_a(a1), p_of_a(a2)
    return math.log((1.0 - p1) / (1.0 - p2)) + (p1 / (1.0 - p1)) * math.log(p1 / p2)


def geo_l1(a1: float, a2: float, tail: float = _SERIES_TAIL) -> float:
    """Exact L1 distance between two geometric laws by series."""
    p1, p2 = p_of_a(a1), p_of_a(a2)
    total, k = 0.0, 0
    while True:
        q1 = (1.0 - p1) * p1 ** k
        q2 = (1.0 - p2) * p2 ** k
        total += abs(q1 - q2)
        pmx = max(p1, p2)
        if (q1 + q2) / (1.0 - pmx) < tail:
            break
        k += 1
    return total
