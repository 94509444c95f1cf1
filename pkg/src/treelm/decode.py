"""Per-token surprisal estimation.

The LSTM language model gives surprisal directly from its softmax chain. The
transition models marginalize over incremental parses with word-synchronous
beam search: between words, hypotheses expand by structural actions in
fringes; taking GEN of the next observed word moves a hypothesis into the
completed set for that word. Prefix probabilities are approximated by the
forward-probability mass of completed hypotheses, accumulated with
log-sum-exp, and the per-word surprisal is the log-ratio of consecutive
prefix masses. An exact enumeration routine over the same event conventions
serves as the reference on small parse spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG2 = math.log(2.0)
NEG_INF = float("-inf")


class BeamFailure(RuntimeError):
    """No hypothesis could complete the next word; names the word index."""

    def __init__(self, word_index: int, message: str | None = None):
        super().__init__(message or f"beam exhausted before word index {word_index}")
        self.word_index = word_index


@dataclass(frozen=True)
class BeamConfig:
    action_beam_size: int = 100
    word_beam_size: int = 10
    struct_cap: int = 8  # max consecutive structural actions between words
    fallback_factor: int = 4  # action-beam multiplier for the one retry

    def __post_init__(self):
        if self.action_beam_size < 1 or self.word_beam_size < 1:
            raise ValueError("beam sizes must be positive")
        if self.word_beam_size > self.action_beam_size:
            raise ValueError(
                f"word beam {self.word_beam_size} exceeds action beam {self.action_beam_size}"
            )

    def widened(self) -> "BeamConfig":
        return BeamConfig(
            self.action_beam_size * self.fallback_factor,
            self.word_beam_size,
            self.struct_cap,
            self.fallback_factor,
        )


@dataclass
class BeamEntry:
    """One incremental parse: state, forward log probability, action prefix."""

    state: object
    log_prob: float  # nats; equals state.log_prob
    actions: tuple[int, ...]

    def sort_key(self):
        # ties broken by lexicographic action order (event ids), then length
        return (-self.log_prob, self.actions)


@dataclass
class BeamResult:
    surprisals_bits: list[float]
    top_parses: list[list[tuple[float, tuple[int, ...]]]]  # per word: (log prob, actions)
    used_fallback: bool = False


def logsumexp(values: list[float]) -> float:
    if not values:
        return NEG_INF
    m = max(values)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(sum(math.exp(v - m) for v in values))


def surprisal_direct(model, word_ids: list[int]) -> list[float]:
    """Per-token surprisal in bits from the LSTM-LM softmax chain."""
    out = []
    state = model.start()
    for w in word_ids:
        lp = float(model.next_word_log_probs(state)[w])
        out.append(-lp / LOG2)
        state = model.advance(state, w, step_log_prob=lp)
    return out


def word_sync_beam(model, word_ids: list[int], config: BeamConfig = BeamConfig()) -> BeamResult:
    """Word-synchronous beam surprisal for a transition model.

    On beam exhaustion the whole sentence is retried once with the action
    beam widened by the fallback factor; a second failure raises BeamFailure.
    """
    try:
        return _beam_pass(model, word_ids, config)
    except BeamFailure:
        result = _beam_pass(model, word_ids, config.widened())
        result.used_fallback = True
        return result


def _beam_pass(model, word_ids, config: BeamConfig) -> BeamResult:
    if not word_ids:
        return BeamResult([], [])
    space = model.space
    beam = [BeamEntry(model.start(), 0.0, ())]
    prev_mass = 0.0  # log of the kept-beam forward mass after the previous word
    surprisals: list[float] = []
    top_parses: list[list[tuple[float, tuple[int, ...]]]] = []
    for i, word in enumerate(word_ids):
        mass, kept = _advance_one_word(model, space, beam, word, config)
        if not kept:
            raise BeamFailure(i)
        surprisals.append(-(mass - prev_mass) / LOG2)
        beam = kept
        prev_mass = logsumexp([e.log_prob for e in beam])
        top_parses.append([(e.log_prob, e.actions) for e in beam])
    return BeamResult(surprisals, top_parses)


def _advance_one_word(model, space, beam, word: int, config: BeamConfig):
    """Returns (log mass of all completions found, kept completed entries).

    Hypotheses are advanced lazily: candidate expansions are scored from the
    parent's distribution and only the surviving top action-beam slice (and
    the top word-beam completions) materialize new states.
    """
    completions: list[tuple[float, tuple[int, ...], BeamEntry]] = []
    fringe = list(beam)
    gen_event = space.gen_event(word)
    for depth in range(config.struct_cap + 1):
        expansions: list[tuple[float, tuple[int, ...], BeamEntry, int]] = []
        for entry in fringe:
            legality = model.legality(entry.state)
            if not (legality.nt or legality.reduce or legality.gen):
                continue  # terminated parse: dead for further words
            slp = model.struct_log_probs(entry.state)
            if legality.gen:
                lp = entry.log_prob + float(slp[space.gen_struct]) \
                    + float(model.word_log_probs(entry.state)[word])
                completions.append((lp, entry.actions + (gen_event,), entry))
            if depth == config.struct_cap:
                continue
            if legality.nt:
                for event in range(space.num_nts):
                    expansions.append(
                        (entry.log_prob + float(slp[event]), entry.actions + (event,), entry, event)
                    )
            if legality.reduce:
                expansions.append(
                    (
                        entry.log_prob + float(slp[space.reduce_struct]),
                        entry.actions + (space.reduce_event,),
                        entry,
                        space.reduce_event,
                    )
                )
        if len(completions) >= config.word_beam_size:
            completions.sort(key=lambda c: (-c[0], c[1]))
            worst_kept = completions[config.word_beam_size - 1][0]
            best_fringe = max((e[0] for e in expansions), default=NEG_INF)
            if best_fringe <= worst_kept:
                break
        if not expansions:
            break
        expansions.sort(key=lambda e: (-e[0], e[1]))
        fringe = [
            BeamEntry(
                model.advance(parent.state, event, step_log_prob=lp - parent.log_prob),
                lp,
                actions,
            )
            for lp, actions, parent, event in expansions[: config.action_beam_size]
        ]
    completions.sort(key=lambda c: (-c[0], c[1]))
    mass = logsumexp([lp for lp, _, _ in completions])
    kept = [
        BeamEntry(
            model.advance(parent.state, gen_event, step_log_prob=lp - parent.log_prob), lp, actions
        )
        for lp, actions, parent in completions[: config.word_beam_size]
    ]
    return mass, kept


# ---------------------------------------------------------------------------
# exact enumeration (reference implementation for small parse spaces)


def enumerate_prefix_masses(model, word_ids: list[int], struct_cap: int = 8) -> list[float]:
    """Exact log prefix mass after each word by depth-first enumeration.

    Explores every legal action sequence whose word yield matches the
    sentence, with at most struct_cap consecutive structural actions between
    words (the same convention the beam search uses).
    """
    space = model.space
    n = len(word_ids)
    masses: list[list[float]] = [[] for _ in range(n)]

    def explore(state, i, depth_left):
        legality = model.legality(state)
        if not (legality.nt or legality.reduce or legality.gen):
            return
        slp = model.struct_log_probs(state)
        if legality.gen and i < n:
            word = word_ids[i]
            lp = state.log_prob + slp[space.gen_struct] + float(model.word_log_probs(state)[word])
            masses[i].append(lp)
            if i + 1 < n:
                event = space.gen_event(word)
                new_state = model.advance(state, event, step_log_prob=lp - state.log_prob)
                explore(new_state, i + 1, struct_cap)
        if depth_left <= 0:
            return
        for event in range(space.num_nts + 1):
            if event < space.num_nts:
                if not legality.nt:
                    continue
                step = slp[event]
            else:
                if not legality.reduce:
                    continue
                step = slp[space.reduce_struct]
            new_state = model.advance(state, event, step_log_prob=float(step))
            explore(new_state, i, depth_left - 1)

    explore(model.start(), 0, struct_cap)
    return [logsumexp(m) for m in masses]


def enumerate_surprisals(model, word_ids: list[int], struct_cap: int = 8) -> list[float]:
    """Exact per-token surprisal in bits on enumerable models."""
    masses = enumerate_prefix_masses(model, word_ids, struct_cap=struct_cap)
    out = []
    prev = 0.0
    for m in masses:
        out.append(-(m - prev) / LOG2)
        prev = m
    return out


# ---------------------------------------------------------------------------
# gold-parse presence checks


@dataclass
class GoldCheck:
    word_index: int
    present: bool
    rank: int | None  # 1-based rank within the kept word beam


def verify_gold_on_beam(model, word_ids: list[int], gold_events: list[int],
                        config: BeamConfig = BeamConfig()) -> list[GoldCheck]:
    """Check whether the gold incremental parse survives each word beam.

    gold_events is the oracle action sequence for the gold tree; its prefix
    up to and including the i-th GEN is the gold incremental parse at word i.
    Absence from a beam is data, not an error.
    """
    space = model.space
    gold_prefixes: list[tuple[int, ...]] = []
    count = 0
    for idx, ev in enumerate(gold_events):
        if space.is_gen(ev):
            count += 1
            gold_prefixes.append(tuple(gold_events[: idx + 1]))
    if count != len(word_ids):
        raise ValueError(
            f"gold sequence generates {count} words but sentence has {len(word_ids)}"
        )
    result = word_sync_beam(model, word_ids, config)
    checks = []
    for i, parses in enumerate(result.top_parses):
        rank = None
        for pos, (_, actions) in enumerate(parses, start=1):
            if actions == gold_prefixes[i]:
                rank = pos
                break
        checks.append(GoldCheck(i, rank is not None, rank))
    return checks
