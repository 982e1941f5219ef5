import math
import time
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from lmft.gpr import (
    ReplicatedGaussian,
    WeightedTerm,
    build_corollary,
    build_replicated,
    check_corollary,
    check_lemma_determinant,
    check_lemma_inverse,
    check_lemma_quadform,
    check_theorem,
    log_gauss_pdf,
    random_replicated,
    run_oracle_suite,
    theorem_offset,
)
from lmft.utils.errors import ValidationError
from .utils import random_spd

LOG_2PI = math.log(2 * math.pi)


def scalar_example(w: int) -> ReplicatedGaussian:
    return ReplicatedGaussian(np.array([[1.0]]), np.array([0.5]), 1.0, w)


def test_build_replicated_examples():
    B1, _ = build_replicated(scalar_example(1))
    assert np.array_equal(B1, [[1.0, 0.5], [0.5, 1.0]])
    B2, meta = build_replicated(scalar_example(2))
    assert np.array_equal(B2, [[1.0, 0.5, 0.5], [0.5, 2.0, 0.0], [0.5, 0.0, 2.0]])
    assert np.linalg.det(B2) == pytest.approx(3.0)
    assert meta["copies"] == [1, 2]
    B5, _ = build_replicated(scalar_example(5))
    copies = B5[1:, 1:]
    assert np.array_equal(copies, np.diag(np.diag(copies)))


def test_scalar_example_checks():
    for w in (1, 2, 3):
        oracle = scalar_example(w)
        assert check_lemma_determinant(oracle)
        assert check_lemma_inverse(oracle)
        assert check_lemma_quadform(oracle, [1.0], 1.0)
        assert check_lemma_quadform(oracle, [1.0], 0.0)
        assert check_theorem(oracle, [1.0], 1.0)


def test_theorem_offset_sign():
    assert theorem_offset(1.0, 1) == 0.0
    assert theorem_offset(1.0, 2) == pytest.approx(-(math.log(2) + 0.5 * LOG_2PI), abs=1e-15)
    oracle = scalar_example(2)
    B2, _ = build_replicated(oracle)
    B1, _ = build_replicated(oracle.with_copies(1))
    difference = log_gauss_pdf([0.3, -0.2, -0.2], B2) - log_gauss_pdf([0.3, -0.2], B1)
    assert difference == pytest.approx(-(math.log(2) + 0.5 * LOG_2PI), abs=1e-12)


def test_invalid_oracle_rejected():
    with pytest.raises(ValidationError):
        ReplicatedGaussian(np.eye(2), np.ones(3), 1.0, 2)
    with pytest.raises(ValidationError):
        ReplicatedGaussian(np.eye(1), np.ones(1), 1.0, 0)
    with pytest.raises(ValidationError):
        ReplicatedGaussian(np.eye(1), np.ones(1), -1.0, 2)


def test_corollary_examples():
    assert check_corollary([WeightedTerm(np.zeros(0), 2.0, 1), WeightedTerm([0.3], 1.5, 1)], [0.4, -1.0])
    Sigma, C, _ = build_corollary([(None, 2.0, 1), ([0.3], 1.5, 1)])
    assert np.array_equal(Sigma, C)
    assert check_corollary([(None, 4.0, 2), ([0.3], 1.5, 1)], [0.4, -1.0])
    rng = np.random.default_rng(8)
    C = random_spd(rng, 3) / 3
    terms = [(C[i, :i], (i + 1) * C[i, i], i + 1) for i in range(3)]
    assert check_corollary(terms, rng.normal(size=3))


def test_random_instances_are_positive_definite():
    rng = np.random.default_rng(0)
    for _ in range(200):
        oracle, y, x = random_replicated(rng)
        B1, _ = build_replicated(oracle.with_copies(1))
        assert np.linalg.eigvalsh(B1).min() > 0
        assert y.size == oracle.n


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), w=st.integers(1, 5))
def test_identities_hold_for_any_instance(seed, w):
    rng = np.random.default_rng(seed)
    oracle, y, x = random_replicated(rng)
    oracle = oracle.with_copies(w)
    assert check_lemma_determinant(oracle)
    assert check_lemma_inverse(oracle)
    assert check_lemma_quadform(oracle, y, x)
    assert check_theorem(oracle, y, x)


def test_oracle_suite_thousand_instances():
    start = time.perf_counter()
    report = run_oracle_suite(instances=1000, seed=42)
    elapsed = time.perf_counter() - start
    print(report.to_dict(), f"{elapsed:.2f}s")
    assert report.passed
    assert report.max_abs_error["theorem"] < 1e-9
    assert report.max_abs_error["corollary"] < 1e-8
    assert report.corollary_instances == 200
    assert elapsed < 5.0


def test_oracle_report_counts_failures():
    report = run_oracle_suite(instances=3, seed=1, corollary_instances=2)
    report.record("theorem", 1.0, 1e-9)
    data = report.to_dict()
    assert data["failures"]["theorem"] == 1
    assert data["total_failures"] == 1
    assert data["max_abs_error"]["overall"] == 1.0
    assert not report.passed
