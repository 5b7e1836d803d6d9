"""Analytic multiplicity distributions, momentum spectra and Bose-Einstein
correlations for a gas of overlapping boson wave packets with stimulated
emission, together with independent brute-force oracles for every closed
form."""

from .errors import (BoseglowError, ConfigError, DegenerateDenominator,
                     DivergentMean, InsufficientSamples, InvalidOrder,
                     InvalidParameter, NumericalBreakdown, SeedRequired,
                     SizeLimit, UnderflowRegime, ZeroMeanMomentum)
from .multiplicity import (CombinantSeries, MultiplicityDistribution, Regime,
                           classify_regime, combinants, log_omegas,
                           mean_multiplicity, multiplicity_distribution)
from .params import HBARC, DerivedParams, ModelParams, derive
from .raregas import (RareGasPrediction, compare_exact_vs_rare,
                      intercept_lambda, radius_params, rare_cn, rare_kernel)
from .spectra import (CorrelationTable, GaussianKernel, SpectrumTable,
                      correlation_table, exclusive_c2, exclusive_n1,
                      exclusive_n1_grid, exclusive_n2, inclusive_c2,
                      inclusive_g, inclusive_n1, inclusive_n1_grid, kernel,
                      momentum, pair_from_magnitudes, side_out_split,
                      spectrum_table)

__all__ = [
    "BoseglowError", "ConfigError", "DegenerateDenominator", "DivergentMean",
    "InsufficientSamples", "InvalidOrder", "InvalidParameter",
    "NumericalBreakdown", "SeedRequired", "SizeLimit", "UnderflowRegime",
    "ZeroMeanMomentum",
    "CombinantSeries", "MultiplicityDistribution", "Regime", "classify_regime",
    "combinants", "log_omegas", "mean_multiplicity", "multiplicity_distribution",
    "HBARC", "DerivedParams", "ModelParams", "derive",
    "RareGasPrediction", "compare_exact_vs_rare", "intercept_lambda",
    "radius_params", "rare_cn", "rare_kernel",
    "CorrelationTable", "GaussianKernel", "SpectrumTable", "correlation_table",
    "exclusive_c2", "exclusive_n1", "exclusive_n1_grid", "exclusive_n2",
    "inclusive_c2", "inclusive_g", "inclusive_n1", "inclusive_n1_grid",
    "kernel", "momentum", "pair_from_magnitudes", "side_out_split",
    "spectrum_table",
]

__version__ = "0.1.0"
