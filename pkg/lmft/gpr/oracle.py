"""
Brute-force replication oracle for the weighted likelihood.

A point with integer weight w behaves like w independent copies of itself. These checks build
the replicated covariance explicitly and compare it against the closed forms used by the
weighted objective: determinant and inverse structure, the quadratic form, and the log
density offset for one or many weighted points.
"""

import numpy as np
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple
from lmft.gpr.weighted import LOG_2PI, log_gauss_pdf
from lmft.utils import constants as CONST
from lmft.utils.errors import ValidationError
from lmft.utils.logging import logger

CHECKS = ("lemma_determinant", "lemma_inverse", "lemma_quadform", "theorem", "corollary")


@dataclass(frozen=True)
class ReplicatedGaussian:
    """
    Base block ``B0`` (n x n), cross covariance ``b`` of the replicated variable, scale ``u``
    and copy count ``w``. Each copy has variance ``u * w``; copies are mutually uncorrelated.
    """

    B0: np.ndarray
    b: np.ndarray
    u: float
    w: int

    def __post_init__(self):
        B0 = np.atleast_2d(np.asarray(self.B0, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).ravel()
        if B0.shape != (b.size, b.size):
            raise ValidationError(f"B0 is {B0.shape} but b has {b.size} entries")
        if not np.array_equal(B0, B0.T):
            raise ValidationError("B0 must be symmetric")
        if not self.u > 0:
            raise ValidationError(f"u must be > 0, got {self.u}")
        if int(self.w) != self.w or self.w < 1:
            raise ValidationError(f"w must be an integer >= 1, got {self.w}")
        object.__setattr__(self, "B0", B0)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "w", int(self.w))

    @property
    def n(self) -> int:
        return int(self.b.size)

    def with_copies(self, w: int) -> "ReplicatedGaussian":
        return ReplicatedGaussian(self.B0, self.b, self.u, w)


def build_replicated(oracle: ReplicatedGaussian) -> Tuple[np.ndarray, Dict[str, Any]]:
    n, w = oracle.n, oracle.w
    B = np.zeros((n + w, n + w))
    B[:n, :n] = oracle.B0
    B[:n, n:] = oracle.b[:, None]
    B[n:, :n] = oracle.b[None, :]
    B[n:, n:] = oracle.u * w * np.eye(w)
    return B, {"n": n, "w": w, "copies": list(range(n, n + w))}


def _base(oracle: ReplicatedGaussian) -> np.ndarray:
    return build_replicated(oracle.with_copies(1))[0]


def lemma_determinant_error(oracle: ReplicatedGaussian) -> float:
    B_w, _ = build_replicated(oracle)
    sign_w, logdet_w = np.linalg.slogdet(B_w)
    sign_1, logdet_1 = np.linalg.slogdet(_base(oracle))
    if sign_w <= 0 or sign_1 <= 0:
        return np.inf
    lhs = logdet_w - oracle.w * np.log(oracle.u * oracle.w)
    rhs = logdet_1 - np.log(oracle.u)
    return float(abs(np.expm1(lhs - rhs)))


def check_lemma_determinant(oracle: ReplicatedGaussian) -> bool:
    """det(B_w) / (u w)^w == det(B_1) / u."""
    return lemma_determinant_error(oracle) <= CONST.ORACLE_TOLERANCE


def assemble_inverse(oracle: ReplicatedGaussian) -> np.ndarray:
    """B_w^-1 built from the blocks of B_1^-1 without inverting B_w."""
    n, w, u = oracle.n, oracle.w, oracle.u
    inv_1 = np.linalg.inv(_base(oracle))
    A, c, z = inv_1[:n, :n], inv_1[:n, n], inv_1[n, n]
    M = np.zeros((n + w, n + w))
    M[:n, :n] = A
    M[:n, n:] = (c / w)[:, None]
    M[n:, :n] = (c / w)[None, :]
    M[n:, n:] = (z * u - 1.0) / (w ** 2 * u) * np.ones((w, w)) + np.eye(w) / (u * w)
    return M


def lemma_inverse_error(oracle: ReplicatedGaussian) -> float:
    B_w, _ = build_replicated(oracle)
    product = B_w @ assemble_inverse(oracle)
    return float(np.max(np.abs(product - np.eye(len(B_w)))))


def check_lemma_inverse(oracle: ReplicatedGaussian) -> bool:
    return lemma_inverse_error(oracle) <= CONST.ORACLE_TOLERANCE


def _extended(y: np.ndarray, x: float, w: int) -> np.ndarray:
    return np.concatenate([np.asarray(y, dtype=float).ravel(), np.full(w, float(x))])


def lemma_quadform_error(oracle: ReplicatedGaussian, y, x: float) -> float:
    B_w, _ = build_replicated(oracle)
    y_w = _extended(y, x, oracle.w)
    y_1 = _extended(y, x, 1)
    lhs = float(y_w @ np.linalg.solve(B_w, y_w))
    rhs = float(y_1 @ np.linalg.solve(_base(oracle), y_1))
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def check_lemma_quadform(oracle: ReplicatedGaussian, y, x: float) -> bool:
    """The quadratic form ignores how many identical copies of x are appended."""
    return lemma_quadform_error(oracle, y, x) <= CONST.ORACLE_TOLERANCE


def theorem_offset(u: float, w: int) -> float:
    """log G(y_w | B_w) - log G(y_1 | B_1); negative for w > 1."""
    return -(0.5 * (w - 1) * np.log(u) + 0.5 * w * np.log(w) + 0.5 * (w - 1) * LOG_2PI)


def theorem_error(oracle: ReplicatedGaussian, y, x: float) -> float:
    B_w, _ = build_replicated(oracle)
    difference = (log_gauss_pdf(_extended(y, x, oracle.w), B_w)
                  - log_gauss_pdf(_extended(y, x, 1), _base(oracle)))
    return float(abs(difference - theorem_offset(oracle.u, oracle.w)))


def check_theorem(oracle: ReplicatedGaussian, y, x: float) -> bool:
    return theorem_error(oracle, y, x) <= CONST.ORACLE_TOLERANCE


@dataclass(frozen=True)
class WeightedTerm:
    """One variable of the multi-weight construction: covariances ``b`` with the earlier
    variables, per-copy variance ``u`` and integer weight ``w``."""

    b: np.ndarray
    u: float
    w: int


def _as_terms(specs: Sequence) -> List[WeightedTerm]:
    terms = []
    for i, spec in enumerate(specs):
        term = spec if isinstance(spec, WeightedTerm) else WeightedTerm(*spec)
        b = np.atleast_1d(np.asarray(term.b, dtype=float)).ravel() if i > 0 else np.zeros(0)
        if b.size != i:
            raise ValidationError(f"Variable {i} needs {i} cross covariances, got {b.size}")
        if not term.u > 0 or int(term.w) != term.w or term.w < 1:
            raise ValidationError(f"Variable {i} needs u > 0 and an integer w >= 1")
        terms.append(WeightedTerm(b, float(term.u), int(term.w)))
    return terms


def build_corollary(specs: Sequence) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns (Sigma_n, C, owner): the fully replicated covariance, the collapsed covariance
    with diagonal u_i / w_i, and for every row of Sigma_n the variable it copies.
    """
    terms = _as_terms(specs)
    n = len(terms)
    C = np.zeros((n, n))
    for i, term in enumerate(terms):
        C[i, :i] = term.b
        C[:i, i] = term.b
        C[i, i] = term.u / term.w
    owner = np.repeat(np.arange(n), [t.w for t in terms])
    Sigma = C[np.ix_(owner, owner)].copy()
    same_variable = owner[:, None] == owner[None, :]
    Sigma[same_variable] = 0.0
    copies = np.array([terms[i].u for i in owner])
    Sigma[np.diag_indices_from(Sigma)] = copies
    return Sigma, C, owner


def corollary_offset(specs: Sequence) -> float:
    terms = _as_terms(specs)
    return -float(sum(0.5 * (t.w - 1) * np.log(t.u) + 0.5 * np.log(t.w) + 0.5 * (t.w - 1) * LOG_2PI
                      for t in terms))


def corollary_error(specs: Sequence, y) -> float:
    Sigma, C, owner = build_corollary(specs)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != len(C):
        raise ValidationError(f"{y.size} observations for {len(C)} variables")
    lhs = log_gauss_pdf(y[owner], Sigma)
    rhs = log_gauss_pdf(y, C) + corollary_offset(specs)
    return float(abs(lhs - rhs) / max(1.0, abs(rhs)))


def check_corollary(specs: Sequence, y) -> bool:
    """Replicating each variable w_i times equals the collapsed density plus a constant."""
    return corollary_error(specs, y) <= CONST.COROLLARY_TOLERANCE


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.5) -> np.ndarray:
    A = rng.normal(size=(n, n))
    S = A @ A.T / n + floor * np.eye(n)
    return 0.5 * (S + S.T)


def random_replicated(rng: np.random.Generator, n_max: int = 6,
                      w_max: int = 5) -> Tuple[ReplicatedGaussian, np.ndarray, float]:
    """Random instance whose w = 1 assembly has Schur complement at least u / 2."""
    n = int(rng.integers(1, n_max + 1))
    B0 = random_spd(rng, n)
    u = float(rng.uniform(0.5, 2.0))
    v = rng.normal(size=n)
    target = rng.uniform(0.0, 0.5) * u
    b = v * np.sqrt(target / float(v @ np.linalg.solve(B0, v)))
    w = int(rng.integers(1, w_max + 1))
    return ReplicatedGaussian(B0, b, u, w), rng.normal(size=n), float(rng.normal())


def random_corollary(rng: np.random.Generator, n_max: int = 6,
                     w_max: int = 5) -> Tuple[List[WeightedTerm], np.ndarray]:
    n = int(rng.integers(1, n_max + 1))
    C = random_spd(rng, n)
    weights = rng.integers(1, w_max + 1, size=n)
    terms = [WeightedTerm(C[i, :i].copy(), float(weights[i] * C[i, i]), int(weights[i]))
             for i in range(n)]
    return terms, rng.normal(size=n)


@dataclass
class OracleReport:
    instances: int
    corollary_instances: int
    failures: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in CHECKS})
    max_abs_error: Dict[str, float] = field(default_factory=lambda: {name: 0.0 for name in CHECKS})

    def record(self, name: str, error: float, tolerance: float):
        if not error <= tolerance:
            self.failures[name] += 1
        self.max_abs_error[name] = max(self.max_abs_error[name], float(error))

    @property
    def total_failures(self) -> int:
        return int(sum(self.failures.values()))

    @property
    def passed(self) -> bool:
        return self.total_failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "instances": self.instances,
            "corollary_instances": self.corollary_instances,
            "failures": dict(self.failures),
            "total_failures": self.total_failures,
            "max_abs_error": {**self.max_abs_error, "overall": max(self.max_abs_error.values())},
        }


def run_oracle_suite(instances: int = CONST.ORACLE_INSTANCES, seed: int = 0, n_max: int = 6,
                     w_max: int = 5,
                     corollary_instances: int = CONST.COROLLARY_INSTANCES) -> OracleReport:
    if instances < 0 or corollary_instances < 0:
        raise ValidationError("Instance counts must be >= 0")
    rng = np.random.default_rng(seed)
    report = OracleReport(instances=instances, corollary_instances=corollary_instances)
    for _ in range(instances):
        oracle, y, x = random_replicated(rng, n_max, w_max)
        report.record("lemma_determinant", lemma_determinant_error(oracle), CONST.ORACLE_TOLERANCE)
        report.record("lemma_inverse", lemma_inverse_error(oracle), CONST.ORACLE_TOLERANCE)
        report.record("lemma_quadform", lemma_quadform_error(oracle, y, x), CONST.ORACLE_TOLERANCE)
        report.record("theorem", theorem_error(oracle, y, x), CONST.ORACLE_TOLERANCE)
    for _ in range(corollary_instances):
        terms, y = random_corollary(rng, n_max, w_max)
        report.record("corollary", corollary_error(terms, y), CONST.COROLLARY_TOLERANCE)
    logger.info(f"oracle suite: {instances} instances, {corollary_instances} multi-weight "
                f"instances, {report.total_failures} failures")
    return report
