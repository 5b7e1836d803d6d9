"""Combinants, the multiplicity distribution and the convergence regime.

The multiplicity generating function is exp(sum_n C_n (z^n - 1)) with

    C_n = (n0^n / n) [gamma_plus^(n/2) - gamma_minus^(n/2)]^(-3),

so the C_n are the combinants of the distribution and p_n follows from
the compound-Poisson recurrence n p_n = sum_k k C_k p_{n-k}.  Everything
is computed in log space: log C_n folds gamma_minus in through
log1p((gamma_minus/gamma_plus)^(n/2)), which stays finite for n well
beyond the point where gamma_plus^n overflows.

The large-n behaviour of n C_n is (n0/nc)^n with nc = gamma_plus^(3/2):
below nc the series converge, at nc the terms tend to 1, above nc the
mean multiplicity diverges (condensation).  Divergent regimes refuse
summation instead of silently truncating.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import DivergentMean
from .params import DerivedParams

#: relative half-width of the band around nc classified as Critical
CRITICAL_BAND = 1e-9
#: a term of sum n C_n below this fraction of the running sum stops summation
TRUNCATION_EPS = 1e-14
#: hard cap on any series order
N_MAX = 100_000


class Regime(enum.Enum):
    CONVERGENT = "Convergent"
    CRITICAL = "Critical"
    CONDENSED = "Condensed"


def classify_regime(d: DerivedParams, n0: float) -> Regime:
    """Trichotomy in n0 against the critical value nc = gamma_plus^(3/2)."""
    if abs(n0 - d.nc) <= CRITICAL_BAND * d.nc:
        return Regime.CRITICAL
    return Regime.CONVERGENT if n0 < d.nc else Regime.CONDENSED


def log_combinants(d: DerivedParams, n0: float, orders: np.ndarray) -> np.ndarray:
    """log C_n for an integer array of orders n >= 1 (vectorized).

    Returns -inf entries when n0 == 0.
    """
    n = np.asarray(orders, dtype=float)
    log_gp = math.log(d.gamma_plus)
    # log(gamma_plus^(n/2) - gamma_minus^(n/2)) without forming either power
    ratio = d.gamma_ratio
    log_r = math.log(ratio) if ratio > 0.0 else -math.inf
    with np.errstate(divide="ignore"):
        log_diff = 0.5 * n * log_gp + np.log1p(-np.exp(0.5 * n * log_r))
        log_n0 = np.log(n0) if n0 > 0.0 else -math.inf
    return n * log_n0 - np.log(n) - 3.0 * log_diff


@dataclass(frozen=True)
class CombinantSeries:
    """Combinants C_1..C_N in log-magnitude form (all positive here).

    truncation_error bounds the neglected tail of sum_n n C_n by a
    geometric extrapolation with ratio n0/nc; it is inf when that ratio
    is >= 1.
    """

    log_c: np.ndarray
    n0: float
    derived: DerivedParams
    truncation_error: float

    @property
    def n_terms(self) -> int:
        return len(self.log_c)

    @property
    def c(self) -> np.ndarray:
        """C_n for n = 1..N in linear space."""
        return np.exp(self.log_c)

    def regime(self) -> Regime:
        return classify_regime(self.derived, self.n0)


def _tail_bound(d: DerivedParams, n0: float, last_log_term: float) -> float:
    """Geometric bound on sum_{k>N} k C_k given log(N C_N)."""
    rho = n0 / d.nc
    if rho >= 1.0 or last_log_term == -math.inf:
        return math.inf if rho >= 1.0 else 0.0
    return math.exp(last_log_term) * rho / (1.0 - rho)


def combinants(d: DerivedParams, n0: float, N: int) -> CombinantSeries:
    """Exact combinants up to order N (pure formula, any regime)."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    orders = np.arange(1, N + 1)
    log_c = log_combinants(d, n0, orders)
    tail = _tail_bound(d, n0, log_c[-1] + math.log(N))
    return CombinantSeries(log_c=log_c, n0=n0, derived=d, truncation_error=tail)


def auto_order(d: DerivedParams, n0: float, eps: float = TRUNCATION_EPS,
               n_max: int = N_MAX) -> int:
    """Truncation order for sum n C_n under the relative-term stopping rule.

    Stops at the first n whose term n C_n falls below eps times the
    running sum; requires the Convergent regime, since elsewhere the
    divergence is physical and no order is adequate.
    """
    if classify_regime(d, n0) is not Regime.CONVERGENT:
        raise DivergentMean(
            f"series diverge at n0={n0} >= nc={d.nc}; refusing to truncate")
    if n0 == 0.0:
        return 1
    chunk = 256
    total = 0.0
    start = 1
    while start <= n_max:
        orders = np.arange(start, min(start + chunk, n_max + 1))
        terms = np.exp(log_combinants(d, n0, orders) + np.log(orders))
        running = total + np.cumsum(terms)
        small = np.nonzero(terms < eps * running)[0]
        if small.size:
            return int(orders[small[0]])
        total = running[-1]
        start = orders[-1] + 1
        chunk = min(2 * chunk, 16384)
    return n_max


def mean_multiplicity(series: CombinantSeries) -> float:
    """Mean multiplicity sum_i i C_i, with the tail bound enforced.

    The series is extended (the formula is closed-form in n) until the
    geometric tail bound drops below 1e-8 of the sum; if the hard cap
    N_MAX cannot achieve that, the parameter point is numerically
    indistinguishable from critical and DivergentMean is raised.
    """
    d, n0 = series.derived, series.n0
    if classify_regime(d, n0) is not Regime.CONVERGENT:
        raise DivergentMean(f"mean multiplicity is infinite for n0={n0} >= nc={d.nc}")
    if n0 == 0.0:
        return 0.0
    log_c = series.log_c
    tail = series.truncation_error
    n = series.n_terms
    total = float(np.exp(logsumexp(log_c + np.log(np.arange(1, n + 1)))))
    while tail > 1e-8 * total:
        if n >= N_MAX:
            raise DivergentMean(
                f"tail bound {tail:.3e} not met by order {N_MAX}; "
                f"n0={n0} is too close to nc={d.nc}")
        n_new = min(2 * n + 64, N_MAX)
        orders = np.arange(n + 1, n_new + 1)
        extra = logsumexp(log_combinants(d, n0, orders) + np.log(orders))
        total += float(np.exp(extra))
        n = n_new
        last = log_combinants(d, n0, np.array([n]))[0] + math.log(n)
        tail = _tail_bound(d, n0, last)
    return total


@dataclass(frozen=True)
class MultiplicityDistribution:
    """p_0..p_N with the mean and the regime label.

    Truncated so the neglected probability mass stays below the 1e-9
    contract (the default truncation is deeper); the mean is the
    combinant sum, which the recurrence reproduces identically.
    """

    p: np.ndarray
    mean: float
    regime: Regime

    @property
    def omega(self) -> np.ndarray:
        """Sector weights p_n / p_0."""
        return self.p / self.p[0]


def multiplicity_distribution(series: CombinantSeries, mass_tol: float = 1e-12,
                              n_max: int = N_MAX) -> MultiplicityDistribution:
    """p_n from the compound-Poisson recurrence n p_n = sum_k k C_k p_{n-k}.

    p_0 = exp(-sum C_k).  The stored series defines the distribution:
    combinants beyond its truncation order are zero, so a series holding
    only C_1 yields the exact Poisson.  The recurrence itself runs until
    the cumulative probability reaches 1 - mass_tol; the default is well
    below the 1e-9 mass defect contract because the truncated tail also
    eats into the mean identity sum(n p_n) = sum(k C_k) at roughly
    mass_tol times the typical multiplicity.
    """
    d, n0 = series.derived, series.n0
    regime = classify_regime(d, n0)
    if regime is not Regime.CONVERGENT:
        raise DivergentMean(
            f"p_n is exposed only in the Convergent regime, got {regime.value} "
            f"(n0={n0}, nc={d.nc})")
    if n0 == 0.0:
        return MultiplicityDistribution(p=np.array([1.0]), mean=0.0, regime=regime)

    mean = mean_multiplicity(series)
    sum_c = float(np.exp(logsumexp(series.log_c)))
    kc = np.exp(series.log_c + np.log(np.arange(1, series.n_terms + 1)))  # k C_k

    p = [math.exp(-sum_c)]
    cumulative = p[0]
    n = 0
    rho = n0 / d.nc   # asymptotic decay ratio of p_n
    while 1.0 - cumulative > mass_tol:
        n += 1
        if n > n_max:
            raise DivergentMean(
                f"probability mass {cumulative} has not reached {1 - mass_tol} "
                f"by order {n_max}")
        k = min(n, len(kc))
        p_n = float(np.dot(kc[:k], p[n - 1::-1][:k])) / n
        p.append(p_n)
        cumulative += p_n
        # float accumulation can stall just short of a deep mass_tol on
        # long (near-critical) series; once the true geometric tail is
        # negligible, stop and hold the series to the 1e-9 mass contract
        if n > 2 and p_n * rho / (1.0 - rho) < 0.1 * mass_tol:
            break
    if 1.0 - cumulative > 1e-9:
        raise DivergentMean(
            f"probability mass stalled at {cumulative} before reaching 1 - 1e-9")
    return MultiplicityDistribution(p=np.array(p), mean=mean, regime=regime)


@lru_cache(maxsize=256)
def _log_omegas_cached(d: DerivedParams, n0: float, N: int) -> tuple:
    if n0 == 0.0:
        return (0.0,) + (-math.inf,) * N
    log_kc = log_combinants(d, n0, np.arange(1, N + 1)) + np.log(np.arange(1, N + 1))
    log_w = np.empty(N + 1)
    log_w[0] = 0.0
    for n in range(1, N + 1):
        log_w[n] = logsumexp(log_kc[:n] + log_w[n - 1::-1]) - math.log(n)
    return tuple(log_w)


def log_omegas(d: DerivedParams, n0: float, N: int) -> np.ndarray:
    """log(p_n / p_0) for n = 0..N from the recurrence, any regime.

    Fixed-multiplicity weights stay finite above nc, so this never
    refuses; with n0 = 0 every omega_n vanishes for n >= 1 and the log
    is -inf.
    """
    return np.array(_log_omegas_cached(d, n0, N))
