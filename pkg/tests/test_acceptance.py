"""Acceptance gate: the ten release criteria at their stated scale and tolerances.

Each test records a one-line PASS/FAIL verdict which is printed in the
terminal summary of the pytest run.
"""
from tripletag import checks

from conftest import ACCEPTANCE_LINES


def _record(number, result, extra_ok=True, note=""):
    passed = result.passed and extra_ok
    line = f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {result.name}: {result.detail}{note} ({result.seconds:.2f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def test_c01_codec_bijection():
    r = checks.check_codec(count=10_000, seed=0, max_n=12, max_m=4)
    _record(1, r, r.seconds < 10.0, " runtime<10s")


def test_c02_worked_examples():
    _record(2, checks.check_worked_examples())


def test_c03_inference_exactness():
    r = checks.check_inference(count=1000, seed=0, tol=1e-9)
    _record(3, r, r.seconds < 120.0, " runtime<2min")


def test_c04_normalization():
    _record(4, checks.check_normalization(count=1000, seed=0, tol=1e-9))


def test_c05_gradient_correctness():
    r = checks.check_gradients(count=20, seed=0, step=1e-4, tol=1e-5)
    _record(5, r, r.seconds < 60.0, " runtime<1min")


def test_c06_trainability():
    _record(6, checks.check_trainability(seed=0, max_epochs=200, hidden=32, M=3, dev_target=0.9))


def test_c07_complexity_scaling():
    _record(7, checks.check_scaling(hidden=300, m_band=(2.5, 6.5), n_band=(1.6, 2.6)))


def test_c08_evaluation_semantics():
    _record(8, checks.check_eval_semantics(count=1000, seed=0))


def test_c09_ensemble_monotonicity():
    _record(9, checks.check_ensemble(count=1000, seed=0))


def test_c10_ablation_flags():
    _record(10, checks.check_ablation(count=50, seed=0))
