import numpy as np
import pytest
from scipy import stats

from hedgebench.exceptions import ContractError
from hedgebench.harness import (
    Evaluation,
    early_stop_check,
    early_stop_rule,
    evaluate,
    generate_datasets,
    welch_t_test_one_sided,
)


def _welch_by_hand(a, b):
    a, b = np.asarray(a), np.asarray(b)
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    t = (a.mean() - b.mean()) / np.sqrt(va + vb)
    dof = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return stats.t.cdf(t, dof)


@pytest.mark.parametrize(
    "log,baseline,expected",
    [
        ([0.80, 0.81, 0.82, 0.83, 0.84, 0.85], 0.9, True),
        ([0.80, 0.81, 0.82, 0.83, 0.84, 0.85], 0.84, False),
        ([0.80, 0.81, 0.79, 0.83, 0.84, 0.85], 0.9, False),
        ([0.80, 0.81, 0.82, 0.83, 0.84], 0.9, False),
        ([0.70, 0.95, 0.80, 0.81, 0.82, 0.83, 0.84, 0.85], 0.9, True),
        ([0.80, 0.81, 0.82, 0.80, 0.84, 0.85], 0.9, False),
        ([], 0.9, False),
        ([0.85, 0.86, 0.87, 0.88, 0.89, 0.90], 0.9038, True),
        ([0.85, 0.86, 0.87, 0.88, 0.89, 0.84], 0.9038, False),
        ([0.95, 0.96, 0.97, 0.98, 0.99, 1.00], 0.9038, False),
    ],
)
def test_early_stop_check(log, baseline, expected):
    assert early_stop_check(log, baseline) is expected
    assert early_stop_rule(baseline)(log) is expected


def test_evaluation_statistics():
    result = Evaluation.from_rsqps([0.9, 0.92, 0.88])
    assert result.mean == pytest.approx(0.9)
    assert result.std == pytest.approx(0.02)
    assert result.std_defined

    single = Evaluation.from_rsqps([0.9])
    assert single.std == 0.0
    assert not single.std_defined
    with pytest.raises(ContractError):
        Evaluation.from_rsqps([])


def test_evaluate(tiny_spec, constant, caplog):
    datasets = generate_datasets(tiny_spec)
    result = evaluate(constant(0.5), datasets.tests, tiny_spec.env)
    assert len(result.rsqps) == 3
    assert result.std > 0
    assert result.mean == pytest.approx(np.mean(result.rsqps))

    single = evaluate(constant(0.5), datasets.tests[:1], tiny_spec.env)
    assert single.rsqps == result.rsqps[:1]
    assert "single test set" in caplog.text
    with pytest.raises(ContractError):
        evaluate(constant(0.5), [], tiny_spec.env)


def test_welch_identical_samples():
    a = [0.80, 0.81, 0.82]
    assert welch_t_test_one_sided(a, a) == 0.5


def test_welch_oracle_cases():
    a, b = [0.80, 0.81, 0.82], [0.90, 0.89, 0.91]
    p = welch_t_test_one_sided(a, b)
    assert p < 0.01
    assert abs(p - _welch_by_hand(a, b)) < 1e-6
    swapped = welch_t_test_one_sided(b, a)
    assert swapped > 0.99
    assert abs(swapped - _welch_by_hand(b, a)) < 1e-6


def test_welch_degenerate_samples():
    assert welch_t_test_one_sided([1.0, 1.0], [1.0, 1.0]) == 0.5
    assert welch_t_test_one_sided([0.5, 0.5], [1.0, 1.0]) == 0.0
    assert welch_t_test_one_sided([1.5, 1.5], [1.0, 1.0]) == 1.0
    # one constant sample is fine
    assert 0 < welch_t_test_one_sided([1.0, 1.0], [0.9, 1.2, 1.1]) < 1
    with pytest.raises(ContractError):
        welch_t_test_one_sided([1.0], [1.0, 2.0])
