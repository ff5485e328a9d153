import numpy as np
import pytest
from scipy import stats

from cnqe_lab.core.errors import NumericError
from cnqe_lab.metrics.stats import bonferroni, compare_groups, component_summary, correlations, welch_t_test


def test_welch_reference_values():
    result = welch_t_test([1, 2, 3, 4], [2, 4, 6, 8])
    assert result.t == pytest.approx(-np.sqrt(3))
    assert result.dof == pytest.approx(75 / 17)
    reference = stats.ttest_ind([1, 2, 3, 4], [2, 4, 6, 8], equal_var=False)
    assert result.p_value == pytest.approx(reference.pvalue)


def test_welch_degenerate_inputs():
    same = welch_t_test([1.0, 1.0, 1.0], [1.0, 1.0])
    assert (same.t, same.p_value) == (0.0, 1.0)
    apart = welch_t_test([2.0, 2.0], [1.0, 1.0])
    assert apart.t == np.inf and apart.p_value == 0.0
    with pytest.raises(NumericError):
        welch_t_test([1.0], [1.0, 2.0])


def test_bonferroni():
    assert bonferroni([0.02], 3) == pytest.approx([0.06])
    assert bonferroni([0.5], 3) == [1.0]
    assert bonferroni([0.0, 0.01], 3) == pytest.approx([0.0, 0.03])
    with pytest.raises(NumericError):
        bonferroni([0.1, 0.2, 0.3], 2)


def test_correlations():
    x = np.arange(1.0, 8.0)
    linear = correlations(x, 2 * x + 1)
    assert linear.pearson_r == pytest.approx(1.0)
    assert linear.spearman_rho == pytest.approx(1.0)
    cubic = correlations(x - 4, (x - 4) ** 3)
    assert cubic.spearman_rho == pytest.approx(1.0)
    assert cubic.pearson_r < 1.0
    assert correlations(x, -x).pearson_r == pytest.approx(-1.0)
    with pytest.raises(NumericError):
        correlations(x, np.ones_like(x))
    with pytest.raises(NumericError):
        correlations([1.0, 2.0], [2.0, 1.0])


def test_compare_groups_orders_levels_and_adjusts():
    groups = {"GC": [0.9, 0.8, 0.85], "GA": [0.5, 0.6, 0.55], "GB": [0.7, 0.72, 0.68]}
    comparisons = compare_groups(groups)
    assert [c.label for c in comparisons] == ["GA vs GB", "GA vs GC", "GB vs GC"]
    for c in comparisons:
        assert c.p_adjusted == pytest.approx(min(1.0, 3 * c.p_raw))


def test_component_summary():
    records = [
        {"interface": "GA", "loss_kind": "fidelity", "feature_map": "zz", "trace_distance": 0.5},
        {"interface": "GA", "loss_kind": "hs", "feature_map": "zz", "trace_distance": 0.7},
        {"interface": "GC", "loss_kind": "fidelity", "feature_map": "zz", "trace_distance": 0.9},
        {"interface": "GC", "loss_kind": "hs", "feature_map": "zz", "trace_distance": 0.8},
    ]
    summary, comparisons = component_summary(records, "interface")
    assert [(s.level, s.n) for s in summary] == [("GA", 2), ("GC", 2)]
    assert summary[0].mean == pytest.approx(0.6)
    assert len(comparisons) == 1
    single, none = component_summary(records, "feature_map")
    assert single[0].n == 4 and none == []
    with pytest.raises(NumericError):
        component_summary(records, "optimizer")
