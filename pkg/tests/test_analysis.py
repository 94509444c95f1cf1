import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelm.analysis import (
    IncompleteDataError,
    aggregate_region,
    analyze_contrast,
    analyze_npi,
    analyze_wh_interaction,
    index_records,
    wh_interaction,
)
from treelm.records import SurprisalRecord
from treelm.suites import Condition, Item, Region, TestSuite


def rec(item, condition, region, idx, surprisal, suite="demo", model="m"):
    return SurprisalRecord(suite, item, condition, region, idx, f"t{idx}", surprisal, model)


# ---------------------------------------------------------------------------
# aggregation


def test_aggregate_sums_token_surprisals():
    idx = index_records([rec("1", "c", "r", 0, 2.0), rec("1", "c", "r", 1, 3.5)])
    assert aggregate_region(idx, "1", "c", ["r"]) == pytest.approx(5.5)


def test_empty_region_selection_is_error_not_zero():
    idx = index_records([rec("1", "c", "r", 0, 2.0)])
    with pytest.raises(IncompleteDataError, match="empty measured-region"):
        aggregate_region(idx, "1", "c", [])


def test_missing_records_listed_as_gaps():
    idx = index_records([rec("1", "c", "r", 0, 2.0)])
    with pytest.raises(IncompleteDataError, match="missing"):
        aggregate_region(idx, "1", "c", ["r", "absent"])


def test_token_count_mismatch_detected():
    idx = index_records([rec("1", "c", "r", 0, 2.0)])
    with pytest.raises(IncompleteDataError, match="1/2 tokens"):
        aggregate_region(idx, "1", "c", ["r"], expected_tokens={"r": 2})


def test_region_convention_changes_the_sum():
    records = [
        rec("1", "c", "subject", 0, 4.0),
        rec("1", "c", "verb", 1, 2.0),
        rec("1", "c", "postgap", 2, 1.0),
    ]
    idx = index_records(records)
    whole = aggregate_region(idx, "1", "c", ["subject", "verb", "postgap"])
    post_only = aggregate_region(idx, "1", "c", ["postgap"])
    assert whole == pytest.approx(7.0)
    assert post_only == pytest.approx(1.0)
    assert whole != post_only


# ---------------------------------------------------------------------------
# wh interaction formula


def test_wh_interaction_fixture():
    assert wh_interaction(10.0, 14.0, 12.0, 8.0) == pytest.approx(8.0, abs=1e-12)


def test_wh_interaction_equal_inputs_zero():
    assert wh_interaction(3.3, 3.3, 3.3, 3.3) == 0.0


@given(st.tuples(*(st.floats(-100, 100) for _ in range(4))))
@settings(max_examples=60, deadline=None)
def test_wh_interaction_gap_swap_antisymmetry(vals):
    a, b, c, d = vals
    assert wh_interaction(c, d, a, b) == pytest.approx(-wh_interaction(a, b, c, d), abs=1e-9)


@given(st.tuples(*(st.floats(-100, 100) for _ in range(4))), st.floats(-50, 50))
@settings(max_examples=60, deadline=None)
def test_wh_interaction_additive_nuisance_invariance(vals, k):
    a, b, c, d = vals
    assert wh_interaction(a + k, b + k, c + k, d + k) == pytest.approx(
        wh_interaction(a, b, c, d), abs=1e-6
    )


# ---------------------------------------------------------------------------
# suite-level analyses on constructed fixtures


WH_FACTORS = {
    "a_cond": {"filler": False, "gap": False},
    "b_cond": {"filler": True, "gap": False},
    "c_cond": {"filler": False, "gap": True},
    "d_cond": {"filler": True, "gap": True},
}


def wh_suite(n_items=3):
    items = []
    for i in range(1, n_items + 1):
        conditions = {
            name: Condition(name, (Region("m", ("x", "y"), True),)) for name in WH_FACTORS
        }
        items.append(Item(str(i), conditions))
    return TestSuite("demo", "wh-interaction", WH_FACTORS, items).validate()


def wh_records(sums_by_item, model="m"):
    records = []
    for item, sums in sums_by_item.items():
        for cond, total in sums.items():
            records.append(rec(item, cond, "m", 0, total / 2, model=model))
            records.append(rec(item, cond, "m", 1, total / 2, model=model))
    return records


def test_analyze_wh_interaction_per_item_and_aggregates():
    suite = wh_suite(3)
    sums = {
        "1": {"a_cond": 10.0, "b_cond": 14.0, "c_cond": 12.0, "d_cond": 8.0},
        "2": {"a_cond": 10.0, "b_cond": 13.0, "c_cond": 12.0, "d_cond": 9.0},
        "3": {"a_cond": 10.0, "b_cond": 15.0, "c_cond": 12.0, "d_cond": 7.0},
    }
    summary = analyze_wh_interaction(suite, wh_records(sums), "m")
    assert [r.interaction for r in summary.items] == pytest.approx([8.0, 6.0, 10.0])
    assert summary.mean_interaction == pytest.approx(8.0)
    assert summary.effect_size.value == pytest.approx(8.0 / 2.0)
    assert summary.p_regression < 0.05
    assert summary.condition_ci.means["a_cond"] == pytest.approx(10.0)


def test_analyze_wh_requires_complete_data_unless_dropping():
    suite = wh_suite(2)
    sums = {
        "1": {"a_cond": 10.0, "b_cond": 14.0, "c_cond": 12.0, "d_cond": 8.0},
        "2": {"a_cond": 10.0, "b_cond": 13.0, "c_cond": 12.0, "d_cond": 9.0},
    }
    records = [r for r in wh_records(sums) if not (r.item == "2" and r.condition == "d_cond")]
    with pytest.raises(IncompleteDataError):
        analyze_wh_interaction(suite, records, "m")
    summary = analyze_wh_interaction(suite, records, "m", drop_incomplete=True)
    assert summary.dropped_items == ["2"]
    assert len(summary.items) == 1


def test_analyze_filters_by_model_tag():
    suite = wh_suite(2)
    sums = {
        "1": {"a_cond": 1.0, "b_cond": 2.0, "c_cond": 3.0, "d_cond": 4.0},
        "2": {"a_cond": 1.0, "b_cond": 2.0, "c_cond": 3.0, "d_cond": 4.0},
    }
    records = wh_records(sums, model="m1") + wh_records(
        {k: {c: v * 2 for c, v in s.items()} for k, s in sums.items()}, model="m2"
    )
    s1 = analyze_wh_interaction(suite, records, "m1")
    s2 = analyze_wh_interaction(suite, records, "m2")
    assert s2.mean_interaction == pytest.approx(2 * s1.mean_interaction)


NPI_FACTORS = {
    "the_the": {"licensor": "pos", "distractor": "pos"},
    "no_the": {"licensor": "neg", "distractor": "pos"},
    "the_no": {"licensor": "pos", "distractor": "neg"},
    "no_no": {"licensor": "neg", "distractor": "neg"},
}


def npi_suite(n_items=2):
    items = []
    for i in range(1, n_items + 1):
        conditions = {
            name: Condition(name, (Region("npi", ("ever",), True),)) for name in NPI_FACTORS
        }
        items.append(Item(str(i), conditions))
    return TestSuite("npi_demo", "npi", NPI_FACTORS, items).validate()


def npi_records(per_item):
    records = []
    for item, by_cond in per_item.items():
        for cond, s in by_cond.items():
            records.append(rec(item, cond, "npi", 0, s, suite="npi_demo"))
    return records


def test_npi_equal_conditions_zero_effects():
    suite = npi_suite(2)
    vals = {c: 4.0 for c in NPI_FACTORS}
    summary = analyze_npi(suite, npi_records({"1": vals, "2": vals}), "m")
    assert summary.licensor_effect == pytest.approx(0.0)
    assert summary.distractor_effect == pytest.approx(0.0)
    assert summary.accuracy.accuracy == 0.0  # ties count as incorrect
    assert summary.ties == 2


def test_npi_constructed_effects():
    # negative licensor lowers NPI surprisal by 2 bits; distractor does nothing
    vals = {"the_the": 5.0, "no_the": 3.0, "the_no": 5.0, "no_no": 3.0}
    suite = npi_suite(2)
    summary = analyze_npi(suite, npi_records({"1": vals, "2": vals}), "m")
    assert summary.licensor_effect == pytest.approx(-2.0)
    assert summary.distractor_effect == pytest.approx(0.0)
    assert summary.accuracy.accuracy == 1.0  # S(no_the) < S(the_no)


def test_npi_accuracy_all_correct():
    vals = {"the_the": 5.0, "no_the": 3.0, "the_no": 5.0, "no_no": 3.0}
    suite = npi_suite(27)
    per_item = {str(i): vals for i in range(1, 28)}
    summary = analyze_npi(suite, npi_records(per_item), "m")
    assert summary.accuracy.accuracy == 1.0
    assert summary.accuracy.n == 27
    assert summary.accuracy.p_value < 1e-6


def test_npi_accuracy_alternating_is_chance():
    suite = npi_suite(20)
    per_item = {}
    for i in range(1, 21):
        correct = i % 2 == 0
        per_item[str(i)] = {
            "the_the": 5.0,
            "no_the": 3.0 if correct else 6.0,
            "the_no": 5.0,
            "no_no": 3.0,
        }
    summary = analyze_npi(suite, npi_records(per_item), "m")
    assert summary.accuracy.accuracy == 0.5
    assert summary.accuracy.p_value == pytest.approx(1.0)


def test_npi_correct_ties_errors_partition():
    suite = npi_suite(9)
    per_item = {}
    for i in range(1, 10):
        kind = i % 3
        s_lic = 3.0 if kind == 0 else (5.0 if kind == 1 else 7.0)
        per_item[str(i)] = {"the_the": 5.0, "no_the": s_lic, "the_no": 5.0, "no_no": 3.0}
    summary = analyze_npi(suite, npi_records(per_item), "m")
    correct = summary.accuracy.successes
    ties = summary.ties
    errors = summary.accuracy.n - correct - ties
    assert correct + ties + errors == 9
    assert (correct, ties, errors) == (3, 3, 3)


def test_custom_contrast_analysis():
    factors = {"minuend": "hard", "subtrahend": "easy"}
    items = []
    for i in ("1", "2"):
        items.append(
            Item(i, {
                "hard": Condition("hard", (Region("r", ("x",), True),)),
                "easy": Condition("easy", (Region("r", ("x",), True),)),
            })
        )
    suite = TestSuite("contrast_demo", "custom-contrast", factors, items).validate()
    records = [
        rec("1", "hard", "r", 0, 6.0, suite="contrast_demo"),
        rec("1", "easy", "r", 0, 4.0, suite="contrast_demo"),
        rec("2", "hard", "r", 0, 7.0, suite="contrast_demo"),
        rec("2", "easy", "r", 0, 4.0, suite="contrast_demo"),
    ]
    summary = analyze_contrast(suite, records, "m")
    assert summary.mean_difference == pytest.approx(2.5)
    assert summary.differences == {"1": 2.0, "2": 3.0}
