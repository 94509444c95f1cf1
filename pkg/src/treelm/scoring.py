"""Score test suites with a model: per-token surprisal records with region
provenance, beam-failure accounting, and optional per-item parallelism."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .decode import BeamConfig, BeamFailure, surprisal_direct, word_sync_beam
from .records import SurprisalRecord
from .suites import TestSuite


@dataclass
class ScoreFailure:
    item: str
    condition: str
    word_index: int
    reason: str


@dataclass
class ScoreResult:
    records: list[SurprisalRecord] = field(default_factory=list)
    failures: list[ScoreFailure] = field(default_factory=list)
    used_fallback: int = 0


def _score_sentence(model, tokens: list[str], beam: BeamConfig | None):
    ids = model.vocab.encode(tokens) if model.architecture == "lstm-lm" else model.space.vocab.encode(tokens)
    if model.architecture == "lstm-lm":
        return surprisal_direct(model, ids), False
    result = word_sync_beam(model, ids, beam or BeamConfig())
    return result.surprisals_bits, result.used_fallback


def _score_item(model, suite_name: str, item, model_tag: str, beam: BeamConfig | None):
    records: list[SurprisalRecord] = []
    failures: list[ScoreFailure] = []
    fallbacks = 0
    for cond_name in sorted(item.conditions):
        cond = item.conditions[cond_name]
        tokens = cond.tokens()
        try:
            surprisals, used_fallback = _score_sentence(model, tokens, beam)
        except BeamFailure as exc:
            failures.append(ScoreFailure(item.item_id, cond_name, exc.word_index, str(exc)))
            continue
        fallbacks += int(used_fallback)
        idx = 0
        for region in cond.regions:
            for tok in region.tokens:
                records.append(
                    SurprisalRecord(
                        suite=suite_name,
                        item=item.item_id,
                        condition=cond_name,
                        region=region.name,
                        token_idx=idx,
                        token=tok,
                        surprisal_bits=surprisals[idx],
                        model=model_tag,
                    )
                )
                idx += 1
    return records, failures, fallbacks


_WORKER_STATE: dict = {}


def _init_worker(model, suite, model_tag, beam):
    _WORKER_STATE["args"] = (model, suite, model_tag, beam)


def _run_item(item_index: int):
    model, suite, model_tag, beam = _WORKER_STATE["args"]
    return _score_item(model, suite.name, suite.items[item_index], model_tag, beam)


def score_suite(
    model,
    suite: TestSuite,
    model_tag: str,
    beam: BeamConfig | None = None,
    workers: int = 1,
) -> ScoreResult:
    """Surprisal records for every (item, condition, token) of the suite.

    Beam failures are recorded and excluded rather than fatal; results merge
    deterministically in item order regardless of worker count.
    """
    result = ScoreResult()
    if workers <= 1:
        outputs = [_score_item(model, suite.name, item, model_tag, beam) for item in suite.items]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(model, suite, model_tag, beam)
        ) as pool:
            outputs = list(pool.map(_run_item, range(len(suite.items))))
    for records, failures, fallbacks in outputs:
        result.records.extend(records)
        result.failures.extend(failures)
        result.used_fallback += fallbacks
    return result
