from .weighted import (
    CholeskyFactor,
    ObjectiveForm,
    WeightingMode,
    WeightVector,
    cholesky,
    log_gauss_pdf,
    log_marginal,
    predict,
    weighted_cov,
    weighted_log_marginal,
    weighted_log_marginal_and_grad,
)
from .fit import FitOptions, FitResult, fit, fit_multiseed, log_uniform_seeds
from .oracle import (
    OracleReport,
    ReplicatedGaussian,
    WeightedTerm,
    build_corollary,
    build_replicated,
    check_corollary,
    check_lemma_determinant,
    check_lemma_inverse,
    check_lemma_quadform,
    check_theorem,
    random_corollary,
    random_replicated,
    run_oracle_suite,
    theorem_offset,
)
