"""Sliced-Wasserstein distance estimation toolkit.

Estimates SW_p^p(mu, nu) by averaging exact one-dimensional transport costs
over directions on the unit sphere, with variance reduction from even-degree
spherical harmonics used as regression control variates, plus single-control,
nearest-neighbor and quasi-Monte Carlo baselines, exact Gaussian oracles and
a seeded benchmark harness.
"""

__version__ = "0.1.0"

from .bench import (
    BenchmarkConfig,
    BenchmarkRow,
    TWO_ATOM_SW22,
    build_scenario,
    derive_seed,
    ground_truth,
    run_benchmark,
    summarize,
)
from .estimators import (
    EstimatorReport,
    LinearRuleWeights,
    cv_lower,
    cv_upper,
    cvnn,
    mc_estimate,
    olsmc,
    qmc_estimate,
    rqmc_estimate,
    shcv,
    shcv_weights,
)
from .gaussian_exact import (
    bures_w2_squared,
    gaussian_integrand,
    sw2_gaussian_proportional,
    sw2_gaussian_reference,
)
from .harmonics import (
    GegenbauerEvaluator,
    HarmonicBasis,
    build_basis,
    count_degree,
    count_even_cumulative,
    evaluate_basis,
    gegenbauer_eval,
)
from .kernel import GramResult, gram_mc, gram_shcv
from .measures import (
    DiscreteMeasure,
    GaussianMeasure,
    Projected1D,
    lipschitz_bound,
    load_point_cloud,
    moment_p,
    project,
    project_gaussian,
)
from .sphere import (
    DirectionSet,
    inverse_normal_cdf,
    low_discrepancy,
    qmc_directions,
    random_rotation,
    rqmc_directions,
    sample_uniform,
)
from .wasserstein1d import IntegrandHandle, integrand_eval, w1d_equal_mass, w1d_weighted

__all__ = [
    "__version__",
    "BenchmarkConfig",
    "BenchmarkRow",
    "TWO_ATOM_SW22",
    "build_scenario",
    "derive_seed",
    "ground_truth",
    "run_benchmark",
    "summarize",
    "EstimatorReport",
    "LinearRuleWeights",
    "cv_lower",
    "cv_upper",
    "cvnn",
    "mc_estimate",
    "olsmc",
    "qmc_estimate",
    "rqmc_estimate",
    "shcv",
    "shcv_weights",
    "bures_w2_squared",
    "gaussian_integrand",
    "sw2_gaussian_proportional",
    "sw2_gaussian_reference",
    "GegenbauerEvaluator",
    "HarmonicBasis",
    "build_basis",
    "count_degree",
    "count_even_cumulative",
    "evaluate_basis",
    "gegenbauer_eval",
    "GramResult",
    "gram_mc",
    "gram_shcv",
    "DiscreteMeasure",
    "GaussianMeasure",
    "Projected1D",
    "lipschitz_bound",
    "load_point_cloud",
    "moment_p",
    "project",
    "project_gaussian",
    "DirectionSet",
    "inverse_normal_cdf",
    "low_discrepancy",
    "qmc_directions",
    "random_rotation",
    "rqmc_directions",
    "sample_uniform",
    "IntegrandHandle",
    "integrand_eval",
    "w1d_equal_mass",
    "w1d_weighted",
]
