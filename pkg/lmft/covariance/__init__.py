from .expr import (
    COV_EXPR_SCHEMA,
    CovExpr,
    CovKind,
    Param,
    as_points,
    cov_eval,
    cov_grad,
    cov_matrix,
    cov_matrix_and_grad,
    cross_cov,
    noise_diagonal,
    noise_diagonal_and_grad,
    prior_diagonal,
)
