"""Independent verification paths for the closed-form kernels and spectra.

Two oracles, sharing nothing with the production formulas beyond the
physical inputs:

1. Ring recursion.  The family of Gaussian kernels is closed under the
   composition G_a * G_b (k1,k2) = integral d^3k' G_a(k1,k') G_b(k',k2).
   Writing G = h exp(-a(k1^2+k2^2) + g k1.k2) (the n0^n factor kept
   outside), completing the square in k' gives, with S = a1 + a2,

       integral d^3k' exp(-S k'^2 + (g1 k1 + g2 k2).k')
           = (pi/S)^(3/2) exp[(g1 k1 + g2 k2)^2 / (4S)],

   hence the closed-form update

       h = h1 h2 (pi/S)^(3/2),
       a(k1^2 term) = a1 - g1^2/(4S),   a(k2^2 term) = a2 - g2^2/(4S),
       g = g1 g2 / (2S).

   Symmetry of the two quadratic coefficients is not imposed; it falls
   out of the composition when the seed is right, and its failure (or a
   non-integrable quadratic form) raises NumericalBreakdown.  Seeding
   with the order-1 kernel and composing repeatedly therefore rebuilds
   every order from the integral definition alone.

2. Wave-packet Monte Carlo.  Packet centers are drawn from the source
   densities, each configuration is weighted by the permanent of its
   overlap matrix (the stimulated-emission weight, in [1, n!] for a
   Hermitian PSD matrix with unit diagonal), and the one-body momentum
   density of the symmetrized state is accumulated on a grid.  The
   self-normalized ratio estimator avoids the unknown sector
   normalization.

The equal-width, equal-time overlap is obtained by Gaussian integration
of the two packet kernels; with dp = p_i - p_j, dx = x_i - x_j and
xb = (x_i + x_j)/2 (positions in natural units),

    <i|j> = exp(-dp^2/(4 sigma^2) - sigma^2 dx^2/4 - i xb.dp).

The free-evolution phases cancel exactly because all packets share one
emission time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np

from .errors import (InsufficientSamples, NumericalBreakdown, SeedRequired,
                     SizeLimit)
from .params import HBARC, DerivedParams, ModelParams, derive

MAX_PERMANENT_SIZE = 10
MAX_MC_MULTIPLICITY = 4


# ---------------------------------------------------------------------------
# ring recursion


@dataclass(frozen=True)
class RingCoefficients:
    """Coefficients of G_n(k1,k2) = n0^n h exp(-a (k1^2+k2^2) + g k1.k2)."""

    n: int
    h: float   # MeV^-3
    a: float   # MeV^-2
    g: float   # MeV^-2


def ring_seed(d: DerivedParams) -> RingCoefficients:
    """Order-1 coefficients of the exact kernel."""
    return RingCoefficients(
        n=1,
        h=(math.pi * d.sigma_t2) ** -1.5,
        a=0.5 * (1.0 + d.x) / d.sigma_t2,
        g=d.x / d.sigma_t2,
    )


def ring_seed_from_model(params: ModelParams) -> RingCoefficients:
    """Order-1 coefficients straight from the source densities.

    Averaging one packet's momentum density matrix over Gaussian position
    and momentum centers gives, with K = (k1+k2)/2 and dk = k1-k2,

        G_1/n0 = (pi sigma_T^2)^(-3/2)
                 exp[-K^2/sigma_T^2 - dk^2/(4 sigma^2) - R^2 dk^2 / 2],

    independent of the closed-form route through gamma_plus/minus.
    """
    sigma2 = params.sigma ** 2
    sigma_t2 = sigma2 + 2.0 * params.m * params.T
    r2 = (params.R / HBARC) ** 2
    return RingCoefficients(
        n=1,
        h=(math.pi * sigma_t2) ** -1.5,
        a=0.25 / sigma_t2 + 0.25 / sigma2 + 0.5 * r2,
        g=-0.5 / sigma_t2 + 0.5 / sigma2 + r2,
    )


def ring_compose(first: RingCoefficients, second: RingCoefficients) -> RingCoefficients:
    """Convolve two kernels over the shared momentum argument."""
    s = first.a + second.a
    a1 = first.a - first.g ** 2 / (4.0 * s)
    a2 = second.a - second.g ** 2 / (4.0 * s)
    if not math.isclose(a1, a2, rel_tol=1e-9, abs_tol=0.0):
        raise NumericalBreakdown(
            f"composed kernel lost k1<->k2 symmetry at order "
            f"{first.n + second.n}: {a1} vs {a2}")
    out = RingCoefficients(
        n=first.n + second.n,
        h=first.h * second.h * (math.pi / s) ** 1.5,
        a=0.5 * (a1 + a2),
        g=first.g * second.g / (2.0 * s),
    )
    if not (out.a > 0.0 and 0.0 < out.g < 2.0 * out.a):
        raise NumericalBreakdown(
            f"composed kernel not integrable/positive at order {out.n}: "
            f"a={out.a}, g={out.g}")
    return out


def ring_recursion(d: DerivedParams, n0: float, N: int) -> list[RingCoefficients]:
    """Kernels for n = 1..N built from the seed by repeated composition.

    n0 does not enter the (h, a, g) coefficients (the n0^n factor is kept
    outside by convention); it is accepted to mirror the closed-form
    kernel interface.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    coeffs = [ring_seed(d)]
    for _ in range(N - 1):
        coeffs.append(ring_compose(coeffs[0], coeffs[-1]))
    return coeffs


# ---------------------------------------------------------------------------
# wave-packet overlaps and permanents


def overlap(alpha_i, alpha_j, sigma: float) -> complex:
    """<alpha_i|alpha_j> for equal widths and a common emission time.

    alpha = (xi, pi) with the spatial center xi in fm and the momentum
    center pi in MeV.  Unit modulus iff the packets coincide.
    """
    xi_i, pi_i = (np.asarray(a, dtype=float) for a in alpha_i)
    xi_j, pi_j = (np.asarray(a, dtype=float) for a in alpha_j)
    dp = pi_i - pi_j
    dx = (xi_i - xi_j) / HBARC
    xb = (xi_i + xi_j) / (2.0 * HBARC)
    magnitude = -0.25 * (dp @ dp) / sigma ** 2 - 0.25 * sigma ** 2 * (dx @ dx)
    return complex(math.exp(magnitude) * complex(math.cos(xb @ dp), -math.sin(xb @ dp)))


@dataclass(frozen=True)
class WavePacketConfig:
    """One sampled n-packet configuration.

    xi: (n, 3) spatial centers in fm; pi: (n, 3) momentum centers in MeV.
    """

    xi: np.ndarray
    pi: np.ndarray
    sigma: float

    @property
    def n(self) -> int:
        return len(self.xi)

    @cached_property
    def overlap_matrix(self) -> np.ndarray:
        """Hermitian PSD matrix of pairwise overlaps, unit diagonal."""
        n = self.n
        a = np.eye(n, dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                a[i, j] = overlap((self.xi[i], self.pi[i]),
                                  (self.xi[j], self.pi[j]), self.sigma)
                a[j, i] = a[i, j].conjugate()
        return a

    @cached_property
    def weight(self) -> float:
        """Permanent of the overlap matrix; the stimulated-emission weight."""
        return permanent_weight(self)


def permanent_direct(a: np.ndarray) -> complex:
    """Permanent by direct sum over permutations; O(n! n)."""
    n = len(a)
    rows = range(n)
    return sum(np.prod(a[rows, perm]) for perm in permutations(range(n)))


def permanent_ryser(a: np.ndarray) -> complex:
    """Permanent by inclusion-exclusion over column subsets (Gray code).

    O(2^n n), preferable to direct enumeration above n ~ 6.
    """
    n = len(a)
    rowsum = np.zeros(n, dtype=a.dtype)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1
    for k in range(1, 2 ** n):
        new_gray = k ^ (k >> 1)
        bit = new_gray ^ gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            rowsum += a[:, j]
        else:
            rowsum -= a[:, j]
        gray = new_gray
        sign = -sign
        total += sign * np.prod(rowsum)
    return complex(total * (-1) ** n)


def permanent_weight(config: WavePacketConfig) -> float:
    """Real non-negative permanent of the overlap matrix.

    Restricted to n <= 10: the inclusion-exclusion cost is 2^n n and
    nothing above that is needed for verification.
    """
    n = config.n
    if n > MAX_PERMANENT_SIZE:
        raise SizeLimit(f"permanent weight limited to n <= {MAX_PERMANENT_SIZE}, got {n}")
    a = config.overlap_matrix
    value = permanent_direct(a) if n <= 6 else permanent_ryser(a)
    return float(value.real)


# ---------------------------------------------------------------------------
# Monte Carlo exclusive spectrum


@dataclass
class MCSpectrumResult:
    """Self-normalized estimate of N1^(n)(k)/n on a |k| grid.

    values and errors are the ratio estimate and its bootstrap standard
    error; mean_weight is the plain average of the permanent weights
    (the unnormalized sector weight), whose ratios across n probe
    combinations of the sector probabilities.
    """

    k: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    mean_weight: float
    mean_weight_error: float
    weight_min: float
    weight_max: float
    n: int
    n_samples: int
    n_streams: int
    seed: int
    metadata: dict = field(default_factory=dict)


def _batched_permanent(a: np.ndarray) -> np.ndarray:
    """Permanents of a (B, n, n) stack by direct enumeration (n <= 4)."""
    n = a.shape[-1]
    total = np.zeros(a.shape[0], dtype=complex)
    for perm in permutations(range(n)):
        term = a[:, 0, perm[0]].copy()
        for i in range(1, n):
            term *= a[:, i, perm[i]]
        total += term
    return total


def _minor_permanents(a: np.ndarray) -> np.ndarray:
    """perm of a with row i and column j removed, for all (i, j); (B, n, n)."""
    b, n, _ = a.shape
    out = np.empty((b, n, n), dtype=complex)
    idx = list(range(n))
    for i in range(n):
        rows = idx[:i] + idx[i + 1:]
        for j in range(n):
            cols = idx[:j] + idx[j + 1:]
            if n == 1:
                out[:, i, j] = 1.0
            else:
                out[:, i, j] = _batched_permanent(a[:, rows][:, :, cols])
    return out


def mc_exclusive_spectrum(params: ModelParams, n: int, n_samples: int,
                          seed: int | None, k_grid=None, n_streams: int = 8,
                          n_bootstrap: int = 400,
                          peak_rel_tol: float | None = None) -> MCSpectrumResult:
    """Permanent-weighted wave-packet estimate of the fixed-n spectrum.

    Packet centers are proposed from the unweighted source densities and
    reweighted by the permanent of the overlap matrix; the one-body
    momentum density of the symmetrized state is evaluated on the grid
    analytically per configuration, so the only statistical error is the
    configuration sampling.  Streams are split off the master seed by
    index (counter-based Philox), making the result bit-reproducible for
    a fixed (seed, n_samples, n_streams).

    Verification use is meant to run with n_samples >= 1e5 (the
    acceptance checks use 1e6); smaller runs are allowed for smoke tests
    and report their weakness through the bootstrap errors or, when
    peak_rel_tol is given, InsufficientSamples.
    """
    if seed is None:
        raise SeedRequired("Monte Carlo sampling requires an explicit seed")
    if not 2 <= n <= MAX_MC_MULTIPLICITY:
        raise SizeLimit(
            f"MC spectrum supports 2 <= n <= {MAX_MC_MULTIPLICITY}, got {n}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")

    d = derive(params)
    sigma2 = params.sigma ** 2
    r_nat = params.R / HBARC
    mom_scale = math.sqrt(params.m * params.T)
    if k_grid is None:
        k_grid = np.linspace(0.0, 3.0 * math.sqrt(d.sigma_t2), 13)
    k_grid = np.asarray(k_grid, dtype=float)
    kvecs = np.zeros((len(k_grid), 3))
    kvecs[:, 2] = k_grid
    psi_norm2 = (math.pi * sigma2) ** -1.5   # |psi|^2 prefactor

    batch = 32768
    per_stream = [n_samples // n_streams] * n_streams
    for i in range(n_samples % n_streams):
        per_stream[i] += 1

    num_blocks: list[np.ndarray] = []   # per batch: sum_f over samples, per k
    den_blocks: list[float] = []        # per batch: sum of weights
    block_sizes: list[int] = []
    w_min, w_max = math.inf, -math.inf

    for stream in range(n_streams):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(stream,))))
        remaining = per_stream[stream]
        while remaining > 0:
            b = min(batch, remaining)
            remaining -= b
            xi = rng.normal(0.0, r_nat, size=(b, n, 3))      # natural units MeV^-1
            pi = rng.normal(0.0, mom_scale, size=(b, n, 3))

            a = np.ones((b, n, n), dtype=complex)
            for i in range(n):
                for j in range(i + 1, n):
                    dp = pi[:, i] - pi[:, j]
                    dx = xi[:, i] - xi[:, j]
                    xb = 0.5 * (xi[:, i] + xi[:, j])
                    mag = (-0.25 * np.sum(dp * dp, axis=1) / sigma2
                           - 0.25 * sigma2 * np.sum(dx * dx, axis=1))
                    phase = -np.sum(xb * dp, axis=1)
                    a[:, i, j] = np.exp(mag + 1j * phase)
                    a[:, j, i] = np.conj(a[:, i, j])

            w = _batched_permanent(a).real
            w_min = min(w_min, float(w.min()))
            w_max = max(w_max, float(w.max()))
            minors = _minor_permanents(a)

            f_sums = np.empty(len(k_grid))
            for ik, k in enumerate(kvecs):
                dkp = k[None, None, :] - pi                   # (b, n, 3)
                gauss = np.exp(-0.5 * np.sum(dkp * dkp, axis=2) / sigma2)
                phase = -np.sum(xi * dkp, axis=2)
                psi = gauss * np.exp(1j * phase)              # (b, n), unit prefactor
                f = np.einsum("bi,bj,bij->b", np.conj(psi), psi, minors)
                f_sums[ik] = float(np.sum(f.real))
            num_blocks.append(psi_norm2 * f_sums)
            den_blocks.append(float(np.sum(w)))
            block_sizes.append(b)

    num = np.array(num_blocks)                 # (n_blocks, n_k)
    den = np.array(den_blocks)                 # (n_blocks,)
    sizes = np.array(block_sizes, dtype=float)
    total_num = np.array([math.fsum(num[:, ik]) for ik in range(num.shape[1])])
    total_den = math.fsum(den)
    values = total_num / total_den / n

    # resample blocks pairwise; blocks can differ in size, so the plain
    # weight average renormalizes by the resampled sample count
    boot_rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(0xB00F,))))
    n_blocks = len(den)
    ratios = np.empty((n_bootstrap, len(k_grid)))
    weights = np.empty(n_bootstrap)
    for it in range(n_bootstrap):
        pick = boot_rng.integers(0, n_blocks, size=n_blocks)
        ratios[it] = num[pick].sum(axis=0) / den[pick].sum() / n
        weights[it] = den[pick].sum() / sizes[pick].sum()
    errors = ratios.std(axis=0, ddof=1)
    mean_weight = total_den / n_samples
    mean_weight_error = float(weights.std(ddof=1))

    if peak_rel_tol is not None:
        peak = int(np.argmax(values))
        rel = errors[peak] / values[peak]
        if rel > peak_rel_tol:
            raise InsufficientSamples(
                f"bootstrap error at the peak is {rel:.3%} > {peak_rel_tol:.3%}; "
                f"increase n_samples")

    return MCSpectrumResult(
        k=k_grid, values=values, errors=errors,
        mean_weight=mean_weight, mean_weight_error=mean_weight_error,
        weight_min=w_min, weight_max=w_max,
        n=n, n_samples=n_samples, n_streams=n_streams, seed=seed,
        metadata={"params": params, "batch": batch},
    )
