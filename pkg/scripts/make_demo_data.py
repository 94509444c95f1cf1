#!/usr/bin/env python3
"""Regenerate the shipped demonstration suites from the toy-grammar lexicons.

The suites are committed as static JSON; run this only when the grammars or
item templates change.
"""

import itertools
from pathlib import Path

import numpy as np

from treelm.suites import Condition, Item, Region, TestSuite, save_suite

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "treelm" / "data" / "suites"

SUBJECT_NOUNS = ["boy", "girl", "dog", "cat", "bird", "fox", "horse", "farmer", "robber", "painter"]
TRANS_VERBS = ["chased", "saw", "found", "pushed", "caught", "admired", "followed", "carried"]
EMB_VERBS = ["knew", "said", "heard", "discovered"]
PREPS = ["at", "near", "behind"]
LOC_NOUNS = ["sunrise", "noon", "night", "school", "home"]

NPI_SUBJECTS = ["senator", "lawyer", "judge", "farmer", "teacher", "doctor", "writer", "singer"]
NPI_RC_VERBS = ["supported", "liked", "opposed", "praised"]
NPI_OBJECTS = ["measure", "bill", "plan", "idea", "reform"]
NPI_VPS = ["slept", "smiled", "laughed", "sighed"]


def make_object_gap_suite(n_items: int, seed: int, whole_clause: bool) -> TestSuite:
    rng = np.random.default_rng(seed)
    items = []
    combos = set()
    while len(items) < n_items:
        m_subj = SUBJECT_NOUNS[rng.integers(len(SUBJECT_NOUNS))]
        e_verb = EMB_VERBS[rng.integers(len(EMB_VERBS))]
        subj = SUBJECT_NOUNS[rng.integers(len(SUBJECT_NOUNS))]
        verb = TRANS_VERBS[rng.integers(len(TRANS_VERBS))]
        obj = SUBJECT_NOUNS[rng.integers(len(SUBJECT_NOUNS))]
        prep = PREPS[rng.integers(len(PREPS))]
        loc = LOC_NOUNS[rng.integers(len(LOC_NOUNS))]
        key = (m_subj, e_verb, subj, verb, obj, prep, loc)
        if subj == obj or m_subj == subj or key in combos:
            continue
        combos.add(key)
        conditions = {}
        for cond_name, filler, gap in (
            ("that_nogap", False, False),
            ("what_nogap", True, False),
            ("that_gap", False, True),
            ("what_gap", True, True),
        ):
            comp = "what" if filler else "that"
            obj_tokens = () if gap else ("the", obj)
            if whole_clause:
                regions = (
                    Region("prefix", ("the", m_subj, e_verb), False),
                    Region("comp", (comp,), False),
                    Region("embedded", ("the", subj, verb) + obj_tokens + (prep, loc), True),
                )
            else:
                regions = (
                    Region("prefix", ("the", m_subj, e_verb), False),
                    Region("comp", (comp,), False),
                    Region("subject", ("the", subj), False),
                    Region("verb", (verb,), False),
                    Region("object", obj_tokens, False),
                    Region("postgap", (prep, loc), True),
                )
            conditions[cond_name] = Condition(cond_name, regions)
        items.append(Item(str(len(items) + 1), conditions))
    name = "object_gap" if whole_clause else "object_gap_postgap"
    suite = TestSuite(
        name=name,
        analysis="wh-interaction",
        factors={
            "that_nogap": {"filler": False, "gap": False},
            "what_nogap": {"filler": True, "gap": False},
            "that_gap": {"filler": False, "gap": True},
            "what_gap": {"filler": True, "gap": True},
        },
        items=items,
        markers={"what_gap": "strong", "what_nogap": "reduced", "that_gap": "reduced"},
    )
    return suite.validate()


def make_npi_suite(n_items: int, seed: int) -> TestSuite:
    rng = np.random.default_rng(seed)
    items = []
    combos = set()
    while len(items) < n_items:
        subj = NPI_SUBJECTS[rng.integers(len(NPI_SUBJECTS))]
        rc_verb = NPI_RC_VERBS[rng.integers(len(NPI_RC_VERBS))]
        obj = NPI_OBJECTS[rng.integers(len(NPI_OBJECTS))]
        vp = NPI_VPS[rng.integers(len(NPI_VPS))]
        key = (subj, rc_verb, obj, vp)
        if key in combos:
            continue
        combos.add(key)
        conditions = {}
        for cond_name, licensor, distractor in (
            ("the_the", "pos", "pos"),
            ("no_the", "neg", "pos"),
            ("the_no", "pos", "neg"),
            ("no_no", "neg", "neg"),
        ):
            lic_det = "no" if licensor == "neg" else "the"
            dis_det = "no" if distractor == "neg" else "the"
            regions = (
                Region("subj_det", (lic_det,), False),
                Region("subject", (subj,), False),
                Region("rc", ("that", rc_verb), False),
                Region("dist_det", (dis_det,), False),
                Region("rc_obj", (obj,), False),
                Region("aux", ("has",), False),
                Region("npi", ("ever",), True),
                Region("vp", (vp,), False),
            )
            conditions[cond_name] = Condition(cond_name, regions)
        items.append(Item(str(len(items) + 1), conditions))
    suite = TestSuite(
        name="npi_ever",
        analysis="npi",
        factors={
            "the_the": {"licensor": "pos", "distractor": "pos"},
            "no_the": {"licensor": "neg", "distractor": "pos"},
            "the_no": {"licensor": "pos", "distractor": "neg"},
            "no_no": {"licensor": "neg", "distractor": "neg"},
        },
        items=items,
        markers={"no_the": "strong", "no_no": "strong", "the_the": "reduced", "the_no": "reduced"},
    )
    return suite.validate()


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    save_suite(make_object_gap_suite(24, seed=11, whole_clause=True), DATA_DIR / "object_gap.json")
    save_suite(
        make_object_gap_suite(24, seed=11, whole_clause=False), DATA_DIR / "object_gap_postgap.json"
    )
    save_suite(make_npi_suite(24, seed=13), DATA_DIR / "npi_ever.json")
    print(f"wrote suites to {DATA_DIR}")


if __name__ == "__main__":
    main()
