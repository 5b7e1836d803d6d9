"""Exact Gaussian two-momentum kernels and the spectra built from them.

The order-n kernel is

    G_n(k1, k2) = j_n exp(-(b_n/2) [(gp^n k1 - gm^n k2)^2
                                  + (gp^n k2 - gm^n k1)^2])

with gp = gamma_plus^(1/2), gm = gamma_minus^(1/2) applied per order
(gp^n here means gamma_plus^(n/2)), j_n = n0^n (b_n/pi)^(3/2) and
b_n = (gamma_plus - gamma_minus) / (sigma_T^2 (gamma_plus^n - gamma_minus^n)).

Expanding the squares gives the equivalent symmetric quadratic form

    G_n(k1, k2) = n0^n h_n exp(-a_n (k1^2 + k2^2) + g_n k1.k2),
    a_n = (b_n/2)(gamma_plus^n + gamma_minus^n),
    g_n = 2 b_n (x/2)^n,          h_n = (b_n/pi)^(3/2),

which is the numerically safe parameterization: a_n and g_n are O(1)
ratios of the gamma powers and never overflow, while b_n and
gamma_plus^(n/2) separately do for large n.  Kernels are therefore
evaluated in log space through (log j_n, a_n, g_n) and exponentiated
last; sums of kernel products accumulate through logsumexp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (DegenerateDenominator, DivergentMean, InvalidOrder,
                     UnderflowRegime, ZeroMeanMomentum)
from .multiplicity import Regime, classify_regime, log_omegas
from .params import DerivedParams

LOG_PI = math.log(math.pi)


def momentum(kx: float = 0.0, ky: float = 0.0, kz: float = 0.0) -> np.ndarray:
    """A 3-momentum in MeV as a float ndarray."""
    k = np.array([kx, ky, kz], dtype=float)
    if not np.all(np.isfinite(k)):
        raise ValueError(f"momentum components must be finite, got {k}")
    return k


def pair_from_magnitudes(k1: float, k2: float, cos_angle: float = 1.0):
    """Scalar fast path for spherically symmetric scans.

    Places k1 along z and k2 in the xz plane at the given opening angle.
    """
    s = math.sqrt(max(0.0, 1.0 - cos_angle ** 2))
    return momentum(0.0, 0.0, k1), momentum(k2 * s, 0.0, k2 * cos_angle)


@dataclass(frozen=True)
class GaussianKernel:
    """Order-n kernel in log-safe coefficient form.

    The raw closed-form pieces (b_n, gamma_plus^(n/2), gamma_minus^(n/2))
    are exposed as properties computed from their logs; they can overflow
    or underflow for very large n, which is why evaluation goes through
    (log_jn, an, gn) instead.
    """

    n: int
    log_jn: float
    an: float       # MeV^-2
    gn: float       # MeV^-2
    log_bn: float
    log_gpn: float  # log gamma_plus^(n/2)
    log_gmn: float  # log gamma_minus^(n/2); -inf at x = 0

    @property
    def bn(self) -> float:
        return math.exp(self.log_bn)

    @property
    def gpn(self) -> float:
        return math.exp(self.log_gpn)

    @property
    def gmn(self) -> float:
        return math.exp(self.log_gmn)

    @property
    def hn(self) -> float:
        """(b_n/pi)^(3/2): prefactor with the n0^n factor taken out."""
        return math.exp(1.5 * (self.log_bn - LOG_PI))

    @property
    def jn(self) -> float:
        return math.exp(self.log_jn)

    def log_evaluate(self, k1: np.ndarray, k2: np.ndarray) -> float:
        k1 = np.asarray(k1, dtype=float)
        k2 = np.asarray(k2, dtype=float)
        return (self.log_jn - self.an * (k1 @ k1 + k2 @ k2) + self.gn * (k1 @ k2))

    def evaluate(self, k1: np.ndarray, k2: np.ndarray) -> float:
        """G_n(k1, k2) in MeV^-3."""
        return math.exp(self.log_evaluate(k1, k2))

    def log_diagonal(self, kmag2) -> np.ndarray:
        """log G_n(k, k) for an array of squared magnitudes |k|^2."""
        return self.log_jn - (2.0 * self.an - self.gn) * np.asarray(kmag2, dtype=float)

    @property
    def diagonal_coefficient(self) -> float:
        """Gaussian coefficient of |k|^2 on the diagonal (MeV^-2)."""
        return 2.0 * self.an - self.gn


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel coefficients for n = 1..N, shared read-only across threads."""

    derived: DerivedParams
    n0: float
    log_j: np.ndarray   # index 0 unused
    a: np.ndarray
    g: np.ndarray
    log_b: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def kernel(self, n: int) -> GaussianKernel:
        d = self.derived
        log_gp = math.log(d.gamma_plus)
        log_gm = math.log(d.gamma_minus) if d.gamma_minus > 0.0 else -math.inf
        return GaussianKernel(
            n=n, log_jn=float(self.log_j[n]), an=float(self.a[n]), gn=float(self.g[n]),
            log_bn=float(self.log_b[n]), log_gpn=0.5 * n * log_gp, log_gmn=0.5 * n * log_gm)

    def log_diagonal(self, orders: np.ndarray, kmag2: np.ndarray) -> np.ndarray:
        """log G_n(k,k) on an (orders, points) grid."""
        coef = 2.0 * self.a[orders] - self.g[orders]
        return self.log_j[orders][:, None] - coef[:, None] * kmag2[None, :]


@lru_cache(maxsize=64)
def kernel_table(d: DerivedParams, n0: float, N: int) -> KernelTable:
    """Build (and cache) the coefficient table up to order N."""
    n = np.arange(0, N + 1, dtype=float)
    log_r = math.log(d.gamma_ratio) if d.gamma_minus > 0.0 else -math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        rn = np.exp(n * log_r)                      # (gm/gp)^n
        one_minus_rn = -np.expm1(n * log_r)         # 1 - (gm/gp)^n, stable near 1
        log_b = (math.log(d.beta) - n * math.log(d.gamma_plus) - np.log(one_minus_rn))
        a = 0.5 * d.beta * (1.0 + rn) / one_minus_rn
        g = d.beta * 2.0 * np.exp(0.5 * n * log_r) / one_minus_rn
        log_n0 = math.log(n0) if n0 > 0.0 else -math.inf
        log_j = n * log_n0 + 1.5 * (log_b - LOG_PI)
    # order 0 is a placeholder
    for arr in (log_b, a, g, log_j):
        arr[0] = math.nan
    return KernelTable(derived=d, n0=n0, log_j=log_j, a=a, g=g, log_b=log_b)


def kernel(d: DerivedParams, n0: float, n: int) -> GaussianKernel:
    """The order-n kernel G_n."""
    if n < 1:
        raise InvalidOrder(f"kernel order must be >= 1, got {n}")
    table = kernel_table(d, n0, n)
    return table.kernel(n)


def _require_convergent(d: DerivedParams, n0: float):
    regime = classify_regime(d, n0)
    if regime is not Regime.CONVERGENT:
        raise DivergentMean(
            f"inclusive sums diverge in the {regime.value} regime "
            f"(n0={n0}, nc={d.nc})")


N_TERMS_CAP = 100_000


def _inclusive_terms(d: DerivedParams, n0: float, rel_tol: float = 1e-12) -> int:
    """Number of terms after which sum_n G_n has relative tail < rel_tol.

    The term ratio tends to n0/nc from above on the diagonal at k = 0,
    which is the slowest-converging point, so the order found there is
    valid for every momentum pair.
    """
    _require_convergent(d, n0)
    if n0 == 0.0:
        return 1
    rho = n0 / d.nc
    n_est = max(8, int(math.log(rel_tol * (1.0 - rho)) / math.log(rho)) + 8)
    while True:
        if n_est >= N_TERMS_CAP:
            # geometrically slow: the point is numerically critical
            raise DivergentMean(
                f"inclusive series need more than {N_TERMS_CAP} terms at "
                f"n0={n0} (nc={d.nc}); the point is effectively critical")
        table = kernel_table(d, n0, n_est)
        log_j = table.log_j[1:]
        total = logsumexp(log_j)
        if log_j[-1] + math.log(rho / (1.0 - rho)) < total + math.log(rel_tol):
            return n_est
        n_est *= 2


def log_inclusive_g(d: DerivedParams, n0: float, k1: np.ndarray, k2: np.ndarray,
                    rel_tol: float = 1e-12) -> float:
    """log of G(k1,k2) = sum_n G_n(k1,k2), with relative tail below rel_tol."""
    N = _inclusive_terms(d, n0, rel_tol)
    table = kernel_table(d, n0, N)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    quad = -table.a[1:] * (k1 @ k1 + k2 @ k2) + table.g[1:] * (k1 @ k2)
    return float(logsumexp(table.log_j[1:] + quad))


def inclusive_g(d: DerivedParams, n0: float, k1: np.ndarray, k2: np.ndarray,
                rel_tol: float = 1e-12) -> float:
    """Multiplicity-averaged kernel G(k1,k2); N1(k) is its diagonal.  MeV^-3."""
    return math.exp(log_inclusive_g(d, n0, k1, k2, rel_tol))


def inclusive_n1(d: DerivedParams, n0: float, k: np.ndarray) -> float:
    """Inclusive single-particle spectrum N1(k) = G(k, k)."""
    return inclusive_g(d, n0, k, k)


def inclusive_n1_grid(d: DerivedParams, n0: float, kmags: np.ndarray,
                      rel_tol: float = 1e-12) -> np.ndarray:
    """N1 on a grid of momentum magnitudes (spherical symmetry)."""
    N = _inclusive_terms(d, n0, rel_tol)
    table = kernel_table(d, n0, N)
    kmag2 = np.asarray(kmags, dtype=float) ** 2
    return np.exp(logsumexp(table.log_diagonal(np.arange(1, N + 1), kmag2), axis=0))


def inclusive_c2(d: DerivedParams, n0: float, k1: np.ndarray, k2: np.ndarray) -> float:
    """Inclusive correlation C2 = 1 + G(1,2) G(2,1) / (G(1,1) G(2,2))."""
    _require_convergent(d, n0)
    cross = log_inclusive_g(d, n0, k1, k2)
    diag1 = log_inclusive_g(d, n0, k1, k1)
    diag2 = log_inclusive_g(d, n0, k2, k2)
    return 1.0 + math.exp(2.0 * cross - diag1 - diag2)


def _log_exclusive_n1(table: KernelTable, log_w: np.ndarray, n: int,
                      kmag2: np.ndarray) -> np.ndarray:
    """log N1^(n) on squared-magnitude grid; log_w = log omega_0..omega_n."""
    orders = np.arange(1, n + 1)
    weights = log_w[n - orders] - log_w[n]
    return logsumexp(weights[:, None] + table.log_diagonal(orders, kmag2), axis=0)


def exclusive_n1(d: DerivedParams, n0: float, n: int, k: np.ndarray) -> float:
    """Fixed-multiplicity spectrum N1^(n)(k) = sum_i (w_{n-i}/w_n) G_i(k,k).

    Defined in every regime: fixed-n quantities are finite above nc too.
    """
    if n < 1:
        raise InvalidOrder(f"n must be >= 1, got {n}")
    log_w = log_omegas(d, n0, n)
    if not math.isfinite(log_w[n]):
        raise UnderflowRegime(f"omega_{n} vanished in log space (n0={n0})")
    table = kernel_table(d, n0, n)
    k = np.asarray(k, dtype=float)
    return float(np.exp(_log_exclusive_n1(table, log_w, n, np.array([k @ k]))[0]))


def exclusive_n1_grid(d: DerivedParams, n0: float, n: int, kmags) -> np.ndarray:
    """N1^(n) on a grid of momentum magnitudes."""
    if n < 1:
        raise InvalidOrder(f"n must be >= 1, got {n}")
    log_w = log_omegas(d, n0, n)
    if not math.isfinite(log_w[n]):
        raise UnderflowRegime(f"omega_{n} vanished in log space (n0={n0})")
    table = kernel_table(d, n0, n)
    kmag2 = np.asarray(kmags, dtype=float) ** 2
    return np.exp(_log_exclusive_n1(table, log_w, n, kmag2))


def _log_exclusive_n2(d: DerivedParams, n0: float, n: int, k1: np.ndarray,
                      k2: np.ndarray) -> float:
    log_w = log_omegas(d, n0, n)
    if not math.isfinite(log_w[n]):
        raise UnderflowRegime(f"omega_{n} vanished in log space (n0={n0})")
    table = kernel_table(d, n0, n)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    k1sq, k2sq, k12 = k1 @ k1, k2 @ k2, k1 @ k2
    orders = np.arange(1, n + 1)
    log_d1 = table.log_j[orders] - (2 * table.a[orders] - table.g[orders]) * k1sq
    log_d2 = table.log_j[orders] - (2 * table.a[orders] - table.g[orders]) * k2sq
    log_x = table.log_j[orders] - table.a[orders] * (k1sq + k2sq) + table.g[orders] * k12
    terms = []
    for l in range(2, n + 1):
        m = np.arange(1, l)
        # G_m(1,1) G_{l-m}(2,2) + G_m(1,2) G_{l-m}(2,1); both cross factors
        # are the same symmetric function of (k1, k2)
        direct = log_d1[m - 1] + log_d2[l - m - 1]
        cross = log_x[m - 1] + log_x[l - m - 1]
        terms.append((log_w[n - l] - log_w[n]) + np.logaddexp(direct, cross))
    return float(logsumexp(np.concatenate(terms)))


def exclusive_n2(d: DerivedParams, n0: float, n: int, k1: np.ndarray,
                 k2: np.ndarray) -> float:
    """Fixed-multiplicity pair spectrum N2^(n)(k1,k2) in MeV^-6."""
    if n < 2:
        raise InvalidOrder(f"pair spectrum needs n >= 2, got {n}")
    return math.exp(_log_exclusive_n2(d, n0, n, k1, k2))


def exclusive_c2(d: DerivedParams, n0: float, n: int, k1: np.ndarray,
                 k2: np.ndarray) -> float:
    """Normalized fixed-multiplicity correlator.

    C2^(n) = [n^2 / (n(n-1))] N2^(n)(k1,k2) / (N1^(n)(k1) N1^(n)(k2)).
    """
    if n < 2:
        raise InvalidOrder(f"correlator needs n >= 2, got {n}")
    log_w = log_omegas(d, n0, n)
    if not math.isfinite(log_w[n]):
        raise UnderflowRegime(f"omega_{n} vanished in log space (n0={n0})")
    table = kernel_table(d, n0, n)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    with np.errstate(over="ignore"):
        mags = np.array([k1 @ k1, k2 @ k2])
    log_n1 = _log_exclusive_n1(table, log_w, n, mags)
    if not np.all(np.isfinite(log_n1)):
        raise DegenerateDenominator(
            f"N1^({n}) underflowed at |k1|^2={mags[0]} or |k2|^2={mags[1]}")
    log_n2 = _log_exclusive_n2(d, n0, n, k1, k2)
    return math.exp(math.log(n / (n - 1.0)) + log_n2 - log_n1[0] - log_n1[1])


def side_out_split(K: np.ndarray, dk: np.ndarray):
    """Split a relative momentum into components along and transverse to K.

    Returns (dk_out, dk_side) with dk_out parallel to the pair mean
    momentum K and dk_side orthogonal to it.
    """
    K = np.asarray(K, dtype=float)
    dk = np.asarray(dk, dtype=float)
    k2 = K @ K
    if k2 == 0.0:
        raise ZeroMeanMomentum("side/out split undefined at K = 0; "
                               "use the isotropic form instead")
    dk_out = K * (dk @ K) / k2
    return dk_out, dk - dk_out


@dataclass
class SpectrumTable:
    """Sampled single-particle spectrum with its provenance."""

    grid: np.ndarray                 # |k| magnitudes, MeV
    values: np.ndarray               # MeV^-3
    metadata: dict = field(default_factory=dict)


@dataclass
class CorrelationTable:
    """Sampled two-particle correlator; kind is 'inclusive' or 'exclusive(n)'."""

    pairs: np.ndarray                # (M, 2, 3) momentum pairs, MeV
    values: np.ndarray               # dimensionless
    kind: str = "inclusive"
    metadata: dict = field(default_factory=dict)


def spectrum_table(d: DerivedParams, n0: float, kmags, n: int | None = None) -> SpectrumTable:
    """Inclusive N1 (n is None) or exclusive N1^(n) on a magnitude grid."""
    kmags = np.asarray(kmags, dtype=float)
    if n is None:
        values = inclusive_n1_grid(d, n0, kmags)
    else:
        values = exclusive_n1_grid(d, n0, n, kmags)
    return SpectrumTable(grid=kmags, values=values,
                         metadata={"n0": n0, "fixed_n": n,
                                   "kind": "inclusive" if n is None else f"exclusive({n})"})


def correlation_table(d: DerivedParams, n0: float, K: np.ndarray, dks,
                      direction: str = "out", n: int | None = None) -> CorrelationTable:
    """Inclusive C2 (n is None) or exclusive C2^(n) along a dk scan at fixed K."""
    K = np.asarray(K, dtype=float)
    pairs = correlation_pairs(K, dks, direction=direction)
    if n is None:
        values = np.array([inclusive_c2(d, n0, k1, k2) for k1, k2 in pairs])
        kind = "inclusive"
    else:
        values = np.array([exclusive_c2(d, n0, n, k1, k2) for k1, k2 in pairs])
        kind = f"exclusive({n})"
    return CorrelationTable(pairs=pairs, values=values, kind=kind,
                            metadata={"n0": n0, "K": K.tolist(),
                                      "direction": direction, "fixed_n": n})


def correlation_pairs(K: np.ndarray, dks: Sequence[float], direction: str = "out"):
    """Momentum pairs k1,2 = K +- dk/2 with dk along ('out') or across ('side') K.

    With K = 0 the split is undefined and the dk direction is arbitrary
    by spherical symmetry; 'out' placement along z is used.
    """
    K = np.asarray(K, dtype=float)
    kmag = math.sqrt(K @ K)
    if direction not in ("out", "side"):
        raise ValueError(f"direction must be 'out' or 'side', got {direction!r}")
    if kmag == 0.0:
        unit = np.array([0.0, 0.0, 1.0])
    elif direction == "out":
        unit = K / kmag
    else:
        # any unit vector orthogonal to K
        trial = np.array([1.0, 0.0, 0.0])
        if abs(K @ trial) > 0.9 * kmag:
            trial = np.array([0.0, 1.0, 0.0])
        unit = trial - K * (K @ trial) / (kmag ** 2)
        unit /= math.sqrt(unit @ unit)
    pairs = np.empty((len(dks), 2, 3))
    for i, dk in enumerate(dks):
        pairs[i, 0] = K + 0.5 * dk * unit
        pairs[i, 1] = K - 0.5 * dk * unit
    return pairs
