"""oscillab: long-memory Gaussian processes, Hermite-process limits, and
one-dimensional random homogenization, with Monte Carlo verification of the
associated oscillatory-integral and corrector limit theorems."""

from .errors import (
    ConditioningError,
    ConstructionError,
    CoverageError,
    InputDomainError,
    OscillabError,
    ParameterError,
    ResolutionError,
    TruncationError,
)
from .hermite_core import (
    CoefficientSampler,
    HermiteExpansion,
    RankedFunction,
    coefficient_sampler,
    construct_rank_2_bounded,
    construct_rank_m,
    expand,
    hermite_eval,
    ou_semigroup,
    pure_hermite,
    vandermonde_weights,
    zero_transform,
)
from .hermite_process import (
    HermiteProcessConfig,
    IntegrandFn,
    ProcessPath,
    continuous_integrand,
    fbm_oracle,
    lambda_norm,
    normalizing_K,
    simulate_Z,
    simulate_Z_ensemble,
    step_integrand,
    wiener_integral,
)
from .homogenize1d import (
    CorrectorDecomposition,
    ProblemSpec,
    SolutionPair,
    antiderivative_F,
    decompose,
    effective_coefficient,
    limit_kernel,
    residual_check,
    sample_fast_path,
    solve_homogenized,
    solve_random,
)
from .limit_lab import (
    ConvergenceReport,
    ExperimentConfig,
    covariance_decay_report,
    finite_eps_variance,
    limit_sample,
    oscillatory_integral,
    run_convergence,
    taqqu_variance_oracle,
    taqqu_variance_report,
)
from .lrd_gauss import (
    CONSTANT_ONE,
    GaussianPath,
    KernelSpec,
    SlowVaryingSpec,
    corrector_scale,
    d_scale,
    eval_kernel,
    normalization_constant,
    potter_constant,
    potter_ratio_bound,
    simulate_path,
    theoretical_covariance,
)

__version__ = "0.1.0"
