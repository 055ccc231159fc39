"""Rank-based test of the bivariate extreme-value dependence condition.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from ._core import (
    AtomMeasure,
    BivariateSample,
    QuantileTable,
    RankData,
    SpectralCdf,
    TestReport,
    cauchy_limit_quantiles,
    compute_ranks,
    exponent_measure,
    gen_alternative,
    gen_cauchy,
    gen_gumbel,
    k_scan,
    limit_quantiles,
    load_sample,
    run_test,
    save_sample,
    spectral_cdf,
    stdf_rank,
    stdf_spectral,
    test_statistic,
)

__all__ = [
    "AtomMeasure",
    "BivariateSample",
    "QuantileTable",
    "RankData",
    "SpectralCdf",
    "TestReport",
    "cauchy_limit_quantiles",
    "compute_ranks",
    "exponent_measure",
    "gen_alternative",
    "gen_cauchy",
    "gen_gumbel",
    "k_scan",
    "limit_quantiles",
    "load_sample",
    "run_test",
    "save_sample",
    "spectral_cdf",
    "stdf_rank",
    "stdf_spectral",
    "test_statistic",
]

__version__ = "0.1.0"
