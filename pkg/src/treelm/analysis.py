"""Suite-level analyses over surprisal records: wh-licensing interaction,
NPI contrasts and classification accuracy, and simple custom contrasts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .records import SurprisalRecord, fmt_float
from .stats import (
    BinomialSummary,
    CohensD,
    ConditionCI,
    binomial_accuracy,
    cohens_d,
    mean_ci,
    permutation_test_mean,
    sum_coded_regression,
    within_item_ci,
)
from .suites import TestSuite


class IncompleteDataError(ValueError):
    """Records are missing for part of the requested selection."""


def index_records(records: list[SurprisalRecord]) -> dict[tuple[str, str, str], list[SurprisalRecord]]:
    """(item, condition, region) -> records ordered by token index."""
    idx: dict[tuple[str, str, str], list[SurprisalRecord]] = {}
    for rec in records:
        idx.setdefault((rec.item, rec.condition, rec.region), []).append(rec)
    for recs in idx.values():
        recs.sort(key=lambda r: r.token_idx)
    return idx


def aggregate_region(
    records_index: dict,
    item: str,
    condition: str,
    regions: list[str],
    expected_tokens: dict[str, int] | None = None,
) -> float:
    """Summed token surprisal (bits) over the selected regions.

    An empty region selection is an error, not zero; missing records raise
    with the list of gaps.
    """
    if not regions:
        raise IncompleteDataError(
            f"item {item!r} condition {condition!r}: empty measured-region selection"
        )
    total = 0.0
    gaps = []
    for region in regions:
        recs = records_index.get((item, condition, region))
        if not recs:
            gaps.append(region)
            continue
        if expected_tokens is not None and len(recs) != expected_tokens.get(region, len(recs)):
            gaps.append(f"{region} ({len(recs)}/{expected_tokens[region]} tokens)")
            continue
        total += sum(r.surprisal_bits for r in recs)
    if gaps:
        raise IncompleteDataError(
            f"item {item!r} condition {condition!r}: missing records for regions {gaps}"
        )
    return total


def wh_interaction(a: float, b: float, c: float, d: float) -> float:
    """Difference of differences over the 2x2 filler x gap design.

    a, b, c, d are summed surprisals for [-F-G], [+F-G], [-F+G], [+F+G];
    the interaction (b - a) - (d - c) is positive when a filler both
    penalizes a filled position and rewards a gap.
    """
    return (b - a) - (d - c)


@dataclass
class InteractionResult:
    item: str
    a: float  # -filler -gap
    b: float  # +filler -gap
    c: float  # -filler +gap
    d: float  # +filler +gap
    interaction: float


@dataclass
class InteractionSummary:
    suite: str
    model: str
    items: list[InteractionResult]
    dropped_items: list[str]
    mean_interaction: float
    interaction_ci_half: float
    effect_size: CohensD
    p_permutation: float
    p_regression: float
    condition_ci: ConditionCI

    def rows(self) -> list[list[str]]:
        out = [["item", "a_nofiller_nogap", "b_filler_nogap", "c_nofiller_gap", "d_filler_gap", "interaction_bits"]]
        for r in self.items:
            out.append([r.item, fmt_float(r.a), fmt_float(r.b), fmt_float(r.c), fmt_float(r.d), fmt_float(r.interaction)])
        return out


def analyze_wh_interaction(
    suite: TestSuite,
    records: list[SurprisalRecord],
    model: str,
    permutation_seed: int = 0,
    drop_incomplete: bool = False,
) -> InteractionSummary:
    """Per-item interactions over the measured regions plus suite aggregates.

    The permutation p-value (sign flips on per-item interactions) is the
    default report; a sum-coded regression with by-item intercepts gives the
    secondary p-value on the filler x gap coefficient.
    """
    idx = index_records([r for r in records if r.model == model and r.suite == suite.name])
    cell = {
        "a": suite.condition_for_cell(filler=False, gap=False),
        "b": suite.condition_for_cell(filler=True, gap=False),
        "c": suite.condition_for_cell(filler=False, gap=True),
        "d": suite.condition_for_cell(filler=True, gap=True),
    }
    results: list[InteractionResult] = []
    dropped: list[str] = []
    for item in suite.items:
        sums = {}
        try:
            for key, cond_name in cell.items():
                cond = item.conditions[cond_name]
                expected = {r.name: len(r.tokens) for r in cond.regions if r.measure}
                sums[key] = aggregate_region(
                    idx, item.item_id, cond_name, cond.measured_region_names(), expected
                )
        except IncompleteDataError:
            if drop_incomplete:
                dropped.append(item.item_id)
                continue
            raise
        results.append(
            InteractionResult(
                item.item_id,
                sums["a"],
                sums["b"],
                sums["c"],
                sums["d"],
                wh_interaction(sums["a"], sums["b"], sums["c"], sums["d"]),
            )
        )
    if not results:
        raise IncompleteDataError(f"suite {suite.name!r}: no analyzable items for model {model!r}")
    interactions = [r.interaction for r in results]
    mean, half = mean_ci(interactions) if len(interactions) > 1 else (interactions[0], float("nan"))
    table = {
        r.item: {cell["a"]: r.a, cell["b"]: r.b, cell["c"]: r.c, cell["d"]: r.d} for r in results
    }
    cond_ci = within_item_ci(table) if len(results) > 1 else ConditionCI(
        {cell[k]: getattr(results[0], k) for k in "abcd"}, {cell[k]: float("nan") for k in "abcd"}
    )
    p_perm = permutation_test_mean(interactions, seed=permutation_seed)
    p_reg = _interaction_regression_p(results)
    return InteractionSummary(
        suite=suite.name,
        model=model,
        items=results,
        dropped_items=dropped,
        mean_interaction=mean,
        interaction_ci_half=half,
        effect_size=cohens_d(interactions) if len(interactions) > 1 else CohensD(float("nan"), False),
        p_permutation=p_perm,
        p_regression=p_reg,
        condition_ci=cond_ci,
    )


def _interaction_regression_p(results: list[InteractionResult]) -> float:
    """Sum-coded filler x gap regression with by-item intercepts.

    The filler:gap coefficient is -interaction/4 under +/-1 coding, so its
    two-sided p-value tests the same effect.
    """
    y, filler, gap, fg, items = [], [], [], [], []
    for r in results:
        for key, (f_sign, g_sign) in (("a", (-1, -1)), ("b", (1, -1)), ("c", (-1, 1)), ("d", (1, 1))):
            y.append(getattr(r, key))
            filler.append(f_sign)
            gap.append(g_sign)
            fg.append(f_sign * g_sign)
            items.append(r.item)
    if len(set(items)) < 2:
        return float("nan")
    reg = sum_coded_regression(
        y, {"filler": filler, "gap": gap, "filler:gap": fg}, item_ids=items
    )
    return reg.p_value("filler:gap")


# ---------------------------------------------------------------------------
# NPI


@dataclass
class NpiItemResult:
    item: str
    surprisals: dict[str, float]  # condition -> NPI-region surprisal


@dataclass
class NpiSummary:
    suite: str
    model: str
    items: list[NpiItemResult]
    dropped_items: list[str]
    licensor_effect: float  # mean S(neg licensor) - S(pos licensor)
    distractor_effect: float
    p_licensor: float
    p_distractor: float
    accuracy: BinomialSummary
    ties: int
    condition_ci: ConditionCI | None


def analyze_npi(
    suite: TestSuite,
    records: list[SurprisalRecord],
    model: str,
    permutation_seed: int = 0,
    drop_incomplete: bool = False,
) -> NpiSummary:
    """NPI-region surprisal per condition, polarity effects, and accuracy.

    An item classifies correctly when the licensor-only condition gives the
    NPI lower surprisal than the distractor-only condition; ties count as
    incorrect and are reported.
    """
    idx = index_records([r for r in records if r.model == model and r.suite == suite.name])
    items: list[NpiItemResult] = []
    dropped: list[str] = []
    for item in suite.items:
        per_cond = {}
        try:
            for cond_name, cond in item.conditions.items():
                expected = {r.name: len(r.tokens) for r in cond.regions if r.measure}
                per_cond[cond_name] = aggregate_region(
                    idx, item.item_id, cond_name, cond.measured_region_names(), expected
                )
        except IncompleteDataError:
            if drop_incomplete:
                dropped.append(item.item_id)
                continue
            raise
        items.append(NpiItemResult(item.item_id, per_cond))
    if not items:
        raise IncompleteDataError(f"suite {suite.name!r}: no analyzable items for model {model!r}")

    def cond(licensor, distractor):
        return suite.condition_for_cell(licensor=licensor, distractor=distractor)

    lic_diffs, dis_diffs = [], []
    for r in items:
        lic_diffs.extend(
            r.surprisals[cond("neg", d)] - r.surprisals[cond("pos", d)] for d in ("pos", "neg")
        )
        dis_diffs.extend(
            r.surprisals[cond(l, "neg")] - r.surprisals[cond(l, "pos")] for l in ("pos", "neg")
        )
    licensor_only = cond("neg", "pos")
    distractor_only = cond("pos", "neg")
    correct, ties = 0, 0
    for r in items:
        s_lic, s_dis = r.surprisals[licensor_only], r.surprisals[distractor_only]
        if s_lic < s_dis:
            correct += 1
        elif s_lic == s_dis:
            ties += 1
    table = {r.item: r.surprisals for r in items}
    return NpiSummary(
        suite=suite.name,
        model=model,
        items=items,
        dropped_items=dropped,
        licensor_effect=float(np.mean(lic_diffs)),
        distractor_effect=float(np.mean(dis_diffs)),
        p_licensor=permutation_test_mean(lic_diffs, seed=permutation_seed),
        p_distractor=permutation_test_mean(dis_diffs, seed=permutation_seed),
        accuracy=binomial_accuracy(correct, len(items)),
        ties=ties,
        condition_ci=within_item_ci(table) if len(items) > 1 else None,
    )


# ---------------------------------------------------------------------------
# custom contrast


@dataclass
class ContrastSummary:
    suite: str
    model: str
    differences: dict[str, float]
    dropped_items: list[str]
    mean_difference: float
    p_permutation: float


def analyze_contrast(
    suite: TestSuite,
    records: list[SurprisalRecord],
    model: str,
    permutation_seed: int = 0,
    drop_incomplete: bool = False,
) -> ContrastSummary:
    """Per-item measured-surprisal difference between two named conditions."""
    minuend = suite.factors["minuend"]
    subtrahend = suite.factors["subtrahend"]
    idx = index_records([r for r in records if r.model == model and r.suite == suite.name])
    diffs: dict[str, float] = {}
    dropped: list[str] = []
    for item in suite.items:
        try:
            vals = {}
            for cond_name in (minuend, subtrahend):
                cond = item.conditions[cond_name]
                expected = {r.name: len(r.tokens) for r in cond.regions if r.measure}
                vals[cond_name] = aggregate_region(
                    idx, item.item_id, cond_name, cond.measured_region_names(), expected
                )
        except IncompleteDataError:
            if drop_incomplete:
                dropped.append(item.item_id)
                continue
            raise
        diffs[item.item_id] = vals[minuend] - vals[subtrahend]
    if not diffs:
        raise IncompleteDataError(f"suite {suite.name!r}: no analyzable items for model {model!r}")
    values = list(diffs.values())
    return ContrastSummary(
        suite=suite.name,
        model=model,
        differences=diffs,
        dropped_items=dropped,
        mean_difference=float(np.mean(values)),
        p_permutation=permutation_test_mean(values, seed=permutation_seed),
    )
