"""Psycholinguistic test-suite schema and its JSON document format.

A suite is a self-describing document: name, analysis kind, a factor map over
condition names, and items whose conditions share region names in order.
Measured regions are marked in the data, so region conventions (whole
embedded clause vs. post-gap material only) live in suite files, not code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ANALYSIS_KINDS = ("wh-interaction", "npi", "custom-contrast")

# canonical wh-interaction condition roles
WH_FACTORS = ("filler", "gap")
NPI_FACTORS = ("licensor", "distractor")


class SuiteError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    name: str
    tokens: tuple[str, ...]
    measure: bool = False


@dataclass(frozen=True)
class Condition:
    name: str
    regions: tuple[Region, ...]

    def tokens(self) -> list[str]:
        return [tok for region in self.regions for tok in region.tokens]

    def measured_region_names(self) -> list[str]:
        return [r.name for r in self.regions if r.measure]


@dataclass(frozen=True)
class Item:
    item_id: str
    conditions: dict[str, Condition]


@dataclass
class TestSuite:
    name: str
    analysis: str
    factors: dict[str, dict]
    items: list[Item]
    markers: dict[str, str] = field(default_factory=dict)  # condition -> "strong" | "reduced"

    __test__ = False  # not a pytest class despite the name

    def validate(self):
        if self.analysis not in ANALYSIS_KINDS:
            raise SuiteError(f"unknown analysis kind {self.analysis!r}")
        if not self.factors:
            raise SuiteError("suite has no condition factor map")
        condition_names = sorted(self.factors)
        if self.analysis == "wh-interaction":
            seen = set()
            for cond, fac in self.factors.items():
                key = (bool(fac.get("filler")), bool(fac.get("gap")))
                if key in seen:
                    raise SuiteError(f"duplicate filler/gap cell for condition {cond!r}")
                seen.add(key)
            if len(seen) != 4:
                raise SuiteError("wh-interaction suite must cross filler x gap (4 conditions)")
        if self.analysis == "npi":
            seen = set()
            for cond, fac in self.factors.items():
                key = (fac.get("licensor"), fac.get("distractor"))
                if None in key:
                    raise SuiteError(f"condition {cond!r} missing licensor/distractor polarity")
                seen.add(key)
            if len(seen) != 4:
                raise SuiteError("npi suite must cross licensor x distractor polarity")
        if self.analysis == "custom-contrast":
            if "minuend" not in self.factors or "subtrahend" not in self.factors:
                raise SuiteError("custom-contrast suite needs 'minuend' and 'subtrahend' factor keys")
        region_order: list[str] | None = None
        for item in self.items:
            if sorted(item.conditions) != condition_names and self.analysis != "custom-contrast":
                raise SuiteError(
                    f"item {item.item_id!r} conditions {sorted(item.conditions)} "
                    f"do not match factor map {condition_names}"
                )
            item_order = None
            for cond in item.conditions.values():
                names = [r.name for r in cond.regions]
                if len(set(names)) != len(names):
                    raise SuiteError(f"item {item.item_id!r} repeats region names in {cond.name!r}")
                if item_order is None:
                    item_order = names
                elif names != item_order:
                    raise SuiteError(
                        f"item {item.item_id!r} condition {cond.name!r} region order {names} "
                        f"differs from {item_order}"
                    )
                for region in cond.regions:
                    if region.measure and not region.tokens:
                        raise SuiteError(
                            f"item {item.item_id!r} condition {cond.name!r}: "
                            f"measured region {region.name!r} is empty"
                        )
                if not cond.measured_region_names():
                    raise SuiteError(
                        f"item {item.item_id!r} condition {cond.name!r} has no measured region"
                    )
            region_order = region_order or item_order
        return self

    def condition_for_cell(self, **cell) -> str:
        """Condition name whose factor map matches the given cell exactly."""
        for cond, fac in self.factors.items():
            if all(fac.get(k) == v for k, v in cell.items()):
                return cond
        raise SuiteError(f"no condition with factors {cell}")


def suite_from_dict(data: dict) -> TestSuite:
    items = []
    for item_data in data["items"]:
        conditions = {}
        for cond_name, cond_data in item_data["conditions"].items():
            regions = tuple(
                Region(r["name"], tuple(r["tokens"]), bool(r.get("measure", False)))
                for r in cond_data["regions"]
            )
            conditions[cond_name] = Condition(cond_name, regions)
        items.append(Item(str(item_data["id"]), conditions))
    suite = TestSuite(
        name=data["name"],
        analysis=data["analysis"],
        factors=data["factors"],
        items=items,
        markers=data.get("markers", {}),
    )
    return suite.validate()


def suite_to_dict(suite: TestSuite) -> dict:
    return {
        "name": suite.name,
        "analysis": suite.analysis,
        "factors": suite.factors,
        "markers": suite.markers,
        "items": [
            {
                "id": item.item_id,
                "conditions": {
                    name: {
                        "regions": [
                            {"name": r.name, "tokens": list(r.tokens), "measure": r.measure}
                            for r in cond.regions
                        ]
                    }
                    for name, cond in item.conditions.items()
                },
            }
            for item in suite.items
        ],
    }


def load_suite(path) -> TestSuite:
    with open(path, encoding="utf-8") as f:
        return suite_from_dict(json.load(f))


def save_suite(suite: TestSuite, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(suite_to_dict(suite), f, indent=1, sort_keys=True)
        f.write("\n")
