"""Physical model parameters and the derived auxiliary quantities.

Unit convention: momenta, masses, temperatures and wave-packet widths are
in MeV, lengths in fm.  The two systems meet once, in :func:`derive`,
through hbar*c = 197.327 MeV fm, which forms the dimensionless density
parameter x and converts the momentum-space contribution to the effective
squared radius into fm^2.  Everything downstream of
:class:`DerivedParams` works in MeV-only natural units, where a squared
length is x / sigma_T^2 (MeV^-2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter

#: hbar * c in MeV fm.  The only place fm and MeV are converted.
HBARC = 197.327


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the model.

    n0     mean multiplicity of the rare-gas seed Poisson (dimensionless)
    R      source radius in fm
    T      source temperature in MeV
    m      boson mass in MeV
    sigma  wave-packet momentum width in MeV
    t0     common emission time in fm/c; bookkeeping only.  All packets
           share one emission time, so the free time-evolution phases
           cancel in every overlap and t0 never enters a number.
    """

    n0: float
    R: float
    T: float
    m: float
    sigma: float
    t0: float = 0.0

    def __post_init__(self):
        for name in ("R", "T", "m", "sigma"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidParameter(name, f"must be positive and finite, got {value}")
        if not (self.n0 >= 0.0 and math.isfinite(self.n0)):
            raise InvalidParameter("n0", f"must be non-negative and finite, got {self.n0}")
        if not math.isfinite(self.t0):
            raise InvalidParameter("t0", f"must be finite, got {self.t0}")

    @classmethod
    def from_natural(cls, n0: float, x: float | None = None, sigma_t2: float = 1.0,
                     re2_natural: float | None = None, m: float = 139.57) -> "ModelParams":
        """Build a parameter set hitting exact (x, sigma_T^2) in natural units.

        Test-fixture constructor: give either the dimensionless ``x`` or the
        effective squared radius ``re2_natural`` in MeV^-2 (they are
        redundant, x = re2_natural * sigma_t2; supplying both is checked for
        consistency).  The split of sigma_T^2 between the packet width and
        the thermal term is chosen as sigma^2 = sigma_T^2 / (1 + x), which
        keeps R^2 positive for every x > 0.
        """
        if x is None and re2_natural is None:
            raise InvalidParameter("x", "either x or re2_natural is required")
        if x is None:
            x = re2_natural * sigma_t2
        elif re2_natural is not None:
            if not math.isclose(x, re2_natural * sigma_t2, rel_tol=1e-12):
                raise InvalidParameter(
                    "re2_natural", f"inconsistent with x: {re2_natural * sigma_t2} != {x}")
        if not (x > 0.0 and math.isfinite(x)):
            raise InvalidParameter("x", f"must be positive and finite, got {x}")
        if not (sigma_t2 > 0.0 and math.isfinite(sigma_t2)):
            raise InvalidParameter("sigma_t2", f"must be positive and finite, got {sigma_t2}")
        sigma2 = sigma_t2 / (1.0 + x)
        temperature = (sigma_t2 - sigma2) / (2.0 * m)
        r_nat2 = 0.5 * x / sigma_t2          # MeV^-2; equals re2_nat - mT/(sigma^2 sigma_T^2)
        return cls(n0=n0, R=math.sqrt(r_nat2) * HBARC, T=temperature, m=m,
                   sigma=math.sqrt(sigma2))


@dataclass(frozen=True)
class DerivedParams:
    """Auxiliary quantities of the analytic solution.

    sigma_t2     sigma_T^2 = sigma^2 + 2 m T  (MeV^2)
    re2          R_e^2 = R^2 + (hbar c)^2 m T / (sigma^2 sigma_T^2)  (fm^2)
    x            R_e^2 sigma_T^2 / (hbar c)^2  (dimensionless)
    gamma_plus   larger root of y^2 - (1+x) y + x^2/4 = 0
    gamma_minus  smaller root; gamma_plus * gamma_minus = x^2/4
    nc           critical seed multiplicity gamma_plus^(3/2)
    te           effective temperature sigma_T^2 / (2 m)  (MeV)
    """

    sigma_t2: float
    re2: float
    x: float
    gamma_plus: float
    gamma_minus: float
    nc: float
    te: float

    @property
    def re2_natural(self) -> float:
        """Effective squared radius in MeV^-2 (re2 with hbar*c folded in)."""
        return self.x / self.sigma_t2

    @property
    def gamma_ratio(self) -> float:
        """gamma_minus / gamma_plus, in [0, 1); controls all large-n decay."""
        return self.gamma_minus / self.gamma_plus

    @property
    def beta(self) -> float:
        """(gamma_plus - gamma_minus) / sigma_T^2 = sqrt(1+2x)/sigma_T^2 (MeV^-2)."""
        return (self.gamma_plus - self.gamma_minus) / self.sigma_t2


def derive(params: ModelParams) -> DerivedParams:
    """Compute all derived quantities from the physical inputs.

    gamma_minus is formed as x^2 / (4 gamma_plus) rather than by the
    subtractive root formula, so the product identity is exact and no
    cancellation occurs at small x.
    """
    sigma2 = params.sigma ** 2
    sigma_t2 = sigma2 + 2.0 * params.m * params.T
    re2 = params.R ** 2 + HBARC ** 2 * params.m * params.T / (sigma2 * sigma_t2)
    x = re2 * sigma_t2 / HBARC ** 2
    s = math.sqrt(1.0 + 2.0 * x)
    gamma_plus = 0.5 * (1.0 + x + s)
    gamma_minus = x * x / (4.0 * gamma_plus)
    return DerivedParams(
        sigma_t2=sigma_t2,
        re2=re2,
        x=x,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        nc=gamma_plus ** 1.5,
        te=sigma_t2 / (2.0 * params.m),
    )
