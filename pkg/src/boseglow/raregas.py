"""Rare-gas (x >> 1) approximations and their deviation from the exact forms.

In the rare limit the combinants reduce to

    C_n ~ (n0^n / n^4) (2/x)^(3(n-1)/2)

and the kernels to

    G_n(k1,k2) ~ j_n exp[-n (k1^2+k2^2)/(2 sigma_T^2) - R_e^2 dk^2/(2n)],
    j_n = n^(5/2) C_n / (pi sigma_T^2)^(3/2),

so order n contributes with effective temperature sigma_T^2/(2mn) and
effective squared radius R_e^2/n.  The fixed-multiplicity correlator in
Gaussian approximation acquires a mean-momentum dependent intercept and
radii; those leading-order formulas live here, together with a harness
that measures how far they sit from the exact correlator.  Validity is
advisory: everything is computed at any x, with a flag recording whether
x >= 100 and how large the expansion parameter n (2x)^(-3/2) is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectra
from .errors import InvalidOrder
from .params import HBARC, DerivedParams

#: advisory threshold below which the expansion is flagged as out of validity
RARE_GAS_MIN_X = 100.0


def _k_magnitude(K) -> float:
    """Scalars pass through; 3-vectors reduce to |K| (spherical symmetry)."""
    arr = np.asarray(K, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return float(math.sqrt(arr @ arr))


def _log_rare_cn(d: DerivedParams, n0: float, n: int) -> float:
    log_n0 = math.log(n0) if n0 > 0.0 else -math.inf
    return n * log_n0 - 4.0 * math.log(n) + 1.5 * (n - 1) * math.log(2.0 / d.x)


def rare_cn(d: DerivedParams, n0: float, n: int) -> float:
    """Leading-order combinant n0^n n^-4 (2/x)^(3(n-1)/2)."""
    return math.exp(_log_rare_cn(d, n0, n))


def log_rare_kernel(d: DerivedParams, n0: float, n: int, k1: np.ndarray,
                    k2: np.ndarray) -> float:
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    dk = k1 - k2
    log_j = (_log_rare_cn(d, n0, n) + 2.5 * math.log(n)
             - 1.5 * math.log(math.pi * d.sigma_t2))
    return (log_j - 0.5 * n * (k1 @ k1 + k2 @ k2) / d.sigma_t2
            - 0.5 * d.re2_natural * (dk @ dk) / n)


def rare_kernel(d: DerivedParams, n0: float, n: int, k1: np.ndarray,
                k2: np.ndarray) -> float:
    """Rare-gas kernel approximation, MeV^-3.  No validity check; the
    deviation from the exact kernel is measured, not forbidden."""
    return math.exp(log_rare_kernel(d, n0, n, k1, k2))


def intercept_lambda(d: DerivedParams, n0: float, K) -> float:
    """Mean-momentum dependent intercept of the fixed-n correlator.

    lambda_K = 1 + 2 (2x)^(-3/2) [1 - 2^(5/2) exp(-K^2/sigma_T^2)];
    below 1 at K = 0, increasing in K, independent of n and n0.  K may
    be a magnitude or a 3-vector.
    """
    K = _k_magnitude(K)
    eps = (2.0 * d.x) ** -1.5
    return 1.0 + 2.0 * eps * (1.0 - 2.0 ** 2.5 * math.exp(-K * K / d.sigma_t2))


@dataclass(frozen=True)
class RareGasPrediction:
    """Gaussian-approximation parameters of the exclusive correlator at one K.

    Radii are in fm^2; correction_scale = n (2x)^(-3/2) is the size of
    the leading correction the formulas keep, surfaced because the
    expansion couples n and x (large n eats into the validity margin).
    """

    lambda_k: float
    rside2: float
    rout2: float
    k_mean: float
    n: int
    correction_scale: float
    valid: bool


def radius_params(d: DerivedParams, n0: float, n: int, K) -> RareGasPrediction:
    """Intercept and side/out radii of the rare-gas exclusive correlator.

    K enters through its magnitude only (spherical symmetry).  The out
    radius carries the extra term (n/x^(3/2)) (K^2/sigma_T^4) e^(-K^2/sigma_T^2),
    non-negative and vanishing at both K = 0 and K -> infinity.
    """
    if n < 2:
        raise InvalidOrder(f"correlator radii need n >= 2, got {n}")
    K = _k_magnitude(K)
    eps = (2.0 * d.x) ** -1.5
    boltz = math.exp(-K * K / d.sigma_t2)
    re2n = d.re2_natural
    rside2 = re2n + eps * (re2n - math.sqrt(2.0) * boltz * ((n + 2) * re2n + 2.0 / d.sigma_t2))
    rout2 = rside2 + (n / d.x ** 1.5) * (K * K / d.sigma_t2 ** 2) * boltz
    scale = n * eps
    return RareGasPrediction(
        lambda_k=intercept_lambda(d, n0, K),
        rside2=rside2 * HBARC ** 2,
        rout2=rout2 * HBARC ** 2,
        k_mean=K,
        n=n,
        correction_scale=scale,
        valid=d.x >= RARE_GAS_MIN_X,
    )


def gaussian_c2(pred: RareGasPrediction, d: DerivedParams, K: np.ndarray,
                dk: np.ndarray) -> float:
    """1 + lambda_K exp(-R_s^2 dk_side^2 - R_o^2 dk_out^2) for a momentum pair.

    At K = 0 the side/out split is undefined but the two radii coincide,
    so the isotropic form is used there.
    """
    K = np.asarray(K, dtype=float)
    dk = np.asarray(dk, dtype=float)
    rs2 = pred.rside2 / HBARC ** 2
    ro2 = pred.rout2 / HBARC ** 2
    if K @ K == 0.0:
        expo = -rs2 * (dk @ dk)
    else:
        dk_out, dk_side = spectra.side_out_split(K, dk)
        expo = -rs2 * (dk_side @ dk_side) - ro2 * (dk_out @ dk_out)
    return 1.0 + pred.lambda_k * math.exp(expo)


@dataclass
class DeviationReport:
    """Pointwise exact-vs-approximate correlator comparison on a grid."""

    k_mean: np.ndarray
    dk: np.ndarray
    c2_exact: np.ndarray
    c2_rare: np.ndarray
    direction: str
    n: int
    n0: float
    x: float
    valid: bool
    metadata: dict = field(default_factory=dict)

    @property
    def abs_dev(self) -> np.ndarray:
        return np.abs(self.c2_exact - self.c2_rare)

    @property
    def rel_dev(self) -> np.ndarray:
        return self.abs_dev / np.abs(self.c2_exact)

    @property
    def max_abs_dev(self) -> float:
        return float(self.abs_dev.max())

    @property
    def mean_abs_dev(self) -> float:
        return float(self.abs_dev.mean())


def compare_exact_vs_rare(d: DerivedParams, n0: float, n: int, k_means,
                          dks, direction: str = "out") -> DeviationReport:
    """Exact exclusive correlator against the rare-gas Gaussian form.

    k_means are |K| values (K placed along z); dks are relative-momentum
    magnitudes placed along K ('out') or orthogonal to it ('side').
    Produces a report at any x; out-of-validity use shows up as a large
    deviation, not an error.
    """
    k_means = np.asarray(k_means, dtype=float)
    dks = np.asarray(dks, dtype=float)
    rows_K, rows_dk, exact, rare = [], [], [], []
    for kmag in k_means:
        K = np.array([0.0, 0.0, kmag])
        pred = radius_params(d, n0, n, kmag)
        pairs = spectra.correlation_pairs(K, dks, direction=direction)
        for dk_mag, (k1, k2) in zip(dks, pairs):
            rows_K.append(kmag)
            rows_dk.append(dk_mag)
            exact.append(spectra.exclusive_c2(d, n0, n, k1, k2))
            rare.append(gaussian_c2(pred, d, K, k1 - k2))
    return DeviationReport(
        k_mean=np.array(rows_K), dk=np.array(rows_dk),
        c2_exact=np.array(exact), c2_rare=np.array(rare),
        direction=direction, n=n, n0=n0, x=d.x,
        valid=d.x >= RARE_GAS_MIN_X,
    )
