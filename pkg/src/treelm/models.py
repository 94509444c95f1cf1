"""The three incremental language models behind one event-scoring interface.

* LstmLm scores word sequences directly.
* ActionLstm scores generative transition sequences with a single LSTM over
  embedded action tokens (nonterminal labels, words, and a generic phrasal
  boundary marker for REDUCE); no stack, no composition.
* Rnng additionally keeps a neural stack with constituent composition on
  REDUCE, a terminal LSTM over generated words, and an action-history LSTM.

States are persistent values: advancing returns a new state and never mutates
the source, so many hypotheses can share structure during beam search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .layers import BiLstmComposer, LstmCellParams, LstmStack, StackState, uniform_tensor
from .treebank import Action, Gen, Nt, Reduce, REDUCE
from .vocab import Vocabulary

NEG_INF = float("-inf")


class TransitionError(ValueError):
    """An event was applied in a state where it is illegal."""


@dataclass
class ModelConfig:
    word_dim: int = 256
    hidden_dim: int = 256
    num_layers: int = 2
    dropout: float = 0.3
    max_open_nts: int = 60
    max_actions: int = 300

    def to_dict(self) -> dict:
        return {
            "word_dim": self.word_dim,
            "hidden_dim": self.hidden_dim,
            "num_layers": self.num_layers,
            "dropout": self.dropout,
            "max_open_nts": self.max_open_nts,
            "max_actions": self.max_actions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# action space


@dataclass(frozen=True)
class ActionSpace:
    """Event inventory: NT per label, REDUCE, GEN per vocabulary word.

    Event ids: NT(k) = k for k < K, REDUCE = K, GEN(w) = K + 1 + w.
    The structural head has K + 2 outputs ([NT_0..NT_{K-1}, REDUCE, GEN]);
    GEN is factored as P(GEN) * P(word | GEN) with a single word softmax.
    """

    nt_labels: tuple[str, ...]
    vocab: Vocabulary

    def __post_init__(self):
        object.__setattr__(self, "_nt_index", {l: i for i, l in enumerate(self.nt_labels)})

    @classmethod
    def create(cls, nt_labels: Sequence[str], vocab: Vocabulary) -> "ActionSpace":
        return cls(tuple(sorted(set(nt_labels))), vocab)

    @property
    def num_nts(self) -> int:
        return len(self.nt_labels)

    @property
    def reduce_struct(self) -> int:
        return self.num_nts

    @property
    def gen_struct(self) -> int:
        return self.num_nts + 1

    @property
    def struct_size(self) -> int:
        return self.num_nts + 2

    @property
    def reduce_event(self) -> int:
        return self.num_nts

    @property
    def event_size(self) -> int:
        return self.num_nts + 1 + self.vocab.size

    def nt_event(self, label: str) -> int:
        return self._nt_index[label]

    def gen_event(self, word_id: int) -> int:
        return self.num_nts + 1 + word_id

    def is_gen(self, event: int) -> bool:
        return event > self.num_nts

    def word_of_event(self, event: int) -> int:
        return event - self.num_nts - 1

    def event_of_action(self, action: Action) -> int:
        if isinstance(action, Nt):
            idx = self._nt_index.get(action.label)
            if idx is None:
                raise KeyError(f"unknown nonterminal label {action.label!r}")
            return idx
        if isinstance(action, Gen):
            return self.gen_event(self.vocab.id_of(action.word))
        return self.reduce_event

    def action_of_event(self, event: int) -> Action:
        if event < self.num_nts:
            return Nt(self.nt_labels[event])
        if event == self.reduce_event:
            return REDUCE
        return Gen(self.vocab.word_of(self.word_of_event(event)))

    def encode(self, actions: Sequence[Action]) -> list[int]:
        return [self.event_of_action(a) for a in actions]

    def decode(self, events: Sequence[int]) -> list[Action]:
        return [self.action_of_event(e) for e in events]

    def describe(self, event: int) -> str:
        return str(self.action_of_event(event))


@dataclass(frozen=True)
class Legality:
    nt: bool
    reduce: bool
    gen: bool

    def structural_mask(self, space: ActionSpace) -> np.ndarray:
        mask = np.zeros(space.struct_size, dtype=bool)
        mask[: space.num_nts] = self.nt
        mask[space.reduce_struct] = self.reduce
        mask[space.gen_struct] = self.gen
        return mask

    def allows_struct(self, space: ActionSpace, struct_idx: int) -> bool:
        if struct_idx < space.num_nts:
            return self.nt
        if struct_idx == space.reduce_struct:
            return self.reduce
        return self.gen


def transition_legality(opens: int, actions: int, top_open_empty: bool, config: ModelConfig) -> Legality:
    """Legal structural moves given the transition counters.

    First action must be NT; REDUCE needs an open nonterminal with at least
    one completed element; GEN needs an open nonterminal; NT is blocked at the
    open-nonterminal and action caps. Past the action cap, GEN is also blocked
    whenever REDUCE is available, which forces every derivation to terminate.
    """
    if actions == 0:
        return Legality(nt=True, reduce=False, gen=False)
    if opens == 0:
        return Legality(nt=False, reduce=False, gen=False)
    reduce_ok = not top_open_empty
    gen_ok = True
    if actions >= config.max_actions and reduce_ok:
        gen_ok = False
    nt_ok = opens < config.max_open_nts and actions < config.max_actions
    return Legality(nt=nt_ok, reduce=reduce_ok, gen=gen_ok)


def masked_log_softmax_np(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, NEG_INF)
    legal = values[mask]
    if legal.size == 0:
        return out
    m = legal.max()
    out[mask] = (legal - m) - np.log(np.sum(np.exp(legal - m)))
    return out


def log_softmax_np(values: np.ndarray) -> np.ndarray:
    shifted = values - values.max()
    return shifted - np.log(np.sum(np.exp(shifted)))


# ---------------------------------------------------------------------------
# persistent stack pieces


class StackEntry:
    """Node of the persistent RNNG stack; spine holds the stack-LSTM state
    after this entry was pushed."""

    __slots__ = ("prev", "emb", "is_open", "label_id", "spine", "depth")

    def __init__(self, prev, emb, is_open, label_id, spine):
        self.prev = prev
        self.emb = emb
        self.is_open = is_open
        self.label_id = label_id
        self.spine = spine
        self.depth = 1 if prev is None else prev.depth + 1


class FlagNode:
    """Persistent stack of open constituents for stackless models: tracks
    whether the innermost open nonterminal has any completed elements."""

    __slots__ = ("prev", "has_content")

    def __init__(self, prev, has_content):
        self.prev = prev
        self.has_content = has_content


# ---------------------------------------------------------------------------
# LSTM language model


@dataclass
class LstmLmState:
    lstm: StackState
    log_prob: float = 0.0
    steps: int = 0


class LstmLm:
    architecture = "lstm-lm"

    def __init__(self, vocab: Vocabulary, config: ModelConfig, rng: np.random.Generator | None):
        self.vocab = vocab
        self.config = config
        d, h = config.word_dim, config.hidden_dim
        if rng is None:
            self.word_emb = Tensor(np.zeros((vocab.size, d)))
            self.lstm = LstmStack(
                [LstmCellParams.zeros(d if i == 0 else h, h) for i in range(config.num_layers)],
                config.dropout,
            )
            self.w_out = Tensor(np.zeros((vocab.size, h)))
        else:
            self.word_emb = uniform_tensor(rng, (vocab.size, d))
            self.lstm = LstmStack.create(d, h, config.num_layers, rng, config.dropout)
            self.w_out = uniform_tensor(rng, (vocab.size, h))
        self.b_out = Tensor(np.zeros(vocab.size))

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        out = [("word_emb", self.word_emb)]
        out += self.lstm.parameters("lstm")
        out += [("w_out", self.w_out), ("b_out", self.b_out)]
        return out

    def start(self, rng=None, training=False) -> LstmLmState:
        return LstmLmState(self.lstm.initial_state())

    def word_logits(self, state: LstmLmState) -> Tensor:
        return ag.affine(self.w_out, self.lstm.top_h(state.lstm), self.b_out)

    def next_word_log_probs(self, state: LstmLmState) -> np.ndarray:
        return log_softmax_np(self.word_logits(state).values)

    def advance(self, state: LstmLmState, word_id: int, step_log_prob=None, rng=None, training=False) -> LstmLmState:
        if not 0 <= word_id < self.vocab.size:
            raise IndexError(f"word id {word_id} out of vocabulary range {self.vocab.size}")
        if step_log_prob is None:
            step_log_prob = float(self.next_word_log_probs(state)[word_id])
        emb = ag.dropout(ag.pick_row(self.word_emb, word_id), self.config.dropout, rng, training)
        return LstmLmState(
            self.lstm.step(emb, state.lstm, rng=rng, training=training),
            state.log_prob + step_log_prob,
            state.steps + 1,
        )

    def sequence_loss(self, word_ids: Sequence[int], rng=None, training=True):
        """Summed next-word cross entropy along the sequence; eos included by caller."""
        state = self.start(rng=rng, training=training)
        total = None
        for w in word_ids:
            loss = ag.cross_entropy(self.word_logits(state), w)
            total = loss if total is None else ag.add(total, loss)
            state = self.advance(state, w, step_log_prob=-loss.item(), rng=rng, training=training)
        return total, len(word_ids)

    def sequence_nll(self, word_ids: Sequence[int]) -> float:
        state = self.start()
        nll = 0.0
        for w in word_ids:
            nll -= float(self.next_word_log_probs(state)[w])
            state = self.advance(state, w, step_log_prob=0.0)
        return nll


# ---------------------------------------------------------------------------
# shared machinery for the two transition models


class _TransitionModel:
    space: ActionSpace
    config: ModelConfig

    # subclasses provide: start, advance, _features, legality counters

    def legality(self, state) -> Legality:
        return transition_legality(state.opens, state.actions, state.top_open_empty, self.config)

    def is_terminal(self, state) -> bool:
        return state.actions > 0 and state.opens == 0

    def struct_logits(self, state) -> Tensor:
        return ag.affine(self.w_struct, self._features(state), self.b_struct)

    def word_logits(self, state) -> Tensor:
        return ag.affine(self.w_word, self._features(state), self.b_word)

    def struct_log_probs(self, state) -> np.ndarray:
        """Masked, renormalized log probabilities over [NT..., REDUCE, GEN]."""
        mask = self.legality(state).structural_mask(self.space)
        return masked_log_softmax_np(self.struct_logits(state).values, mask)

    def word_log_probs(self, state) -> np.ndarray:
        return log_softmax_np(self.word_logits(state).values)

    def event_log_probs(self, state) -> np.ndarray:
        """Full next-event distribution: GEN mass factored over the word softmax."""
        space = self.space
        slp = self.struct_log_probs(state)
        out = np.full(space.event_size, NEG_INF)
        out[: space.num_nts] = slp[: space.num_nts]
        out[space.reduce_event] = slp[space.reduce_struct]
        if slp[space.gen_struct] > NEG_INF:
            out[space.num_nts + 1:] = slp[space.gen_struct] + self.word_log_probs(state)
        return out

    def event_step_log_prob(self, state, event: int) -> float:
        space = self.space
        slp = self.struct_log_probs(state)
        if space.is_gen(event):
            return float(slp[space.gen_struct] + self.word_log_probs(state)[space.word_of_event(event)])
        if event == space.reduce_event:
            return float(slp[space.reduce_struct])
        return float(slp[event])

    def _check_legal(self, state, event: int):
        space = self.space
        legality = self.legality(state)
        if space.is_gen(event):
            ok = legality.gen
        elif event == space.reduce_event:
            ok = legality.reduce
        else:
            ok = legality.nt
        if not ok:
            raise TransitionError(
                f"illegal action {space.describe(event)} "
                f"(opens={state.opens}, actions={state.actions})"
            )

    def sequence_loss(self, events: Sequence[int], rng=None, training=True):
        """Summed masked cross entropy over actions, word softmax included for GEN."""
        space = self.space
        state = self.start(rng=rng, training=training)
        total = None
        for ev in events:
            mask = self.legality(state).structural_mask(space)
            if space.is_gen(ev):
                struct_idx = space.gen_struct
            elif ev == space.reduce_event:
                struct_idx = space.reduce_struct
            else:
                struct_idx = ev
            loss = ag.masked_cross_entropy(self.struct_logits(state), struct_idx, mask)
            if space.is_gen(ev):
                loss = ag.add(loss, ag.cross_entropy(self.word_logits(state), space.word_of_event(ev)))
            total = loss if total is None else ag.add(total, loss)
            state = self.advance(state, ev, step_log_prob=-loss.item(), rng=rng, training=training)
        return total, len(events)

    def sequence_nll(self, events: Sequence[int]) -> float:
        state = self.start()
        nll = 0.0
        for ev in events:
            lp = self.event_step_log_prob(state, ev)
            nll -= lp
            state = self.advance(state, ev, step_log_prob=lp)
        return nll


# ---------------------------------------------------------------------------
# ActionLSTM


@dataclass
class ActionLstmState:
    lstm: StackState
    flags: FlagNode | None
    opens: int
    actions: int
    words: int
    log_prob: float
    _u: Tensor | None = field(default=None, repr=False)

    @property
    def top_open_empty(self) -> bool:
        return self.flags is not None and not self.flags.has_content


class ActionLstm(_TransitionModel):
    architecture = "action-lstm"

    def __init__(self, space: ActionSpace, config: ModelConfig, rng: np.random.Generator | None):
        self.space = space
        self.config = config
        d, h = config.word_dim, config.hidden_dim
        k, v = space.num_nts, space.vocab.size
        if rng is None:
            rng_or = lambda shape: Tensor(np.zeros(shape))
            self.lstm = LstmStack(
                [LstmCellParams.zeros(d if i == 0 else h, h) for i in range(config.num_layers)],
                config.dropout,
            )
        else:
            rng_or = lambda shape: uniform_tensor(rng, shape)
            self.lstm = LstmStack.create(d, h, config.num_layers, rng, config.dropout)
        self.word_emb = rng_or((v, d))
        self.nt_emb = rng_or((k, d))
        self.reduce_emb = rng_or((d,))
        self.start_emb = rng_or((d,))
        self.w_feat = rng_or((h, h))
        self.b_feat = Tensor(np.zeros(h))
        self.w_struct = rng_or((space.struct_size, h))
        self.b_struct = Tensor(np.zeros(space.struct_size))
        self.w_word = rng_or((v, h))
        self.b_word = Tensor(np.zeros(v))

    def named_parameters(self):
        out = [
            ("word_emb", self.word_emb),
            ("nt_emb", self.nt_emb),
            ("reduce_emb", self.reduce_emb),
            ("start_emb", self.start_emb),
        ]
        out += self.lstm.parameters("lstm")
        out += [
            ("w_feat", self.w_feat),
            ("b_feat", self.b_feat),
            ("w_struct", self.w_struct),
            ("b_struct", self.b_struct),
            ("w_word", self.w_word),
            ("b_word", self.b_word),
        ]
        return out

    def start(self, rng=None, training=False) -> ActionLstmState:
        emb = ag.dropout(self.start_emb, self.config.dropout, rng, training)
        lstm = self.lstm.step(emb, self.lstm.initial_state(), rng=rng, training=training)
        return ActionLstmState(lstm, None, 0, 0, 0, 0.0)

    def _features(self, state: ActionLstmState) -> Tensor:
        if state._u is None:
            state._u = ag.tanh(ag.affine(self.w_feat, self.lstm.top_h(state.lstm), self.b_feat))
        return state._u

    def _event_embedding(self, event: int) -> Tensor:
        space = self.space
        if space.is_gen(event):
            return ag.pick_row(self.word_emb, space.word_of_event(event))
        if event == space.reduce_event:
            return self.reduce_emb
        return ag.pick_row(self.nt_emb, event)

    def advance(self, state: ActionLstmState, event: int, step_log_prob=None, rng=None, training=False) -> ActionLstmState:
        self._check_legal(state, event)
        if step_log_prob is None:
            step_log_prob = self.event_step_log_prob(state, event)
        space = self.space
        emb = ag.dropout(self._event_embedding(event), self.config.dropout, rng, training)
        lstm = self.lstm.step(emb, state.lstm, rng=rng, training=training)
        if space.is_gen(event):
            flags = FlagNode(state.flags.prev, True) if not state.flags.has_content else state.flags
            return ActionLstmState(lstm, flags, state.opens, state.actions + 1, state.words + 1,
                                   state.log_prob + step_log_prob)
        if event == space.reduce_event:
            below = state.flags.prev
            flags = None if below is None else (below if below.has_content else FlagNode(below.prev, True))
            return ActionLstmState(lstm, flags, state.opens - 1, state.actions + 1, state.words,
                                   state.log_prob + step_log_prob)
        return ActionLstmState(lstm, FlagNode(state.flags, False), state.opens + 1,
                               state.actions + 1, state.words, state.log_prob + step_log_prob)


# ---------------------------------------------------------------------------
# RNNG


@dataclass
class RnngState:
    entries: StackEntry | None
    base_spine: StackState
    term: StackState
    act: StackState
    opens: int
    actions: int
    words: int
    log_prob: float
    _u: Tensor | None = field(default=None, repr=False)

    @property
    def top_open_empty(self) -> bool:
        return self.entries is not None and self.entries.is_open

    @property
    def stack_depth(self) -> int:
        return 0 if self.entries is None else self.entries.depth


class Rnng(_TransitionModel):
    architecture = "rnng"

    def __init__(self, space: ActionSpace, config: ModelConfig, rng: np.random.Generator | None):
        self.space = space
        self.config = config
        d, h = config.word_dim, config.hidden_dim
        k, v = space.num_nts, space.vocab.size
        if rng is None:
            rng_or = lambda shape: Tensor(np.zeros(shape))
            self.stack_lstm = self._zero_stack(d, h, config)
            self.term_lstm = self._zero_stack(d, h, config)
            self.act_lstm = self._zero_stack(d, h, config)
            self.composer = BiLstmComposer.zeros(d)
        else:
            rng_or = lambda shape: uniform_tensor(rng, shape)
            self.stack_lstm = LstmStack.create(d, h, config.num_layers, rng, config.dropout)
            self.term_lstm = LstmStack.create(d, h, config.num_layers, rng, config.dropout)
            self.act_lstm = LstmStack.create(d, h, config.num_layers, rng, config.dropout)
            self.composer = BiLstmComposer.create(d, rng)
        self.word_emb = rng_or((v, d))
        self.nt_emb = rng_or((k, d))
        # action-history embeddings: one per NT label, REDUCE, generic GEN
        self.act_emb = rng_or((space.struct_size, d))
        self.start_emb = rng_or((d,))
        self.w_feat = rng_or((h, 3 * h))
        self.b_feat = Tensor(np.zeros(h))
        self.w_struct = rng_or((space.struct_size, h))
        self.b_struct = Tensor(np.zeros(space.struct_size))
        self.w_word = rng_or((v, h))
        self.b_word = Tensor(np.zeros(v))

    @staticmethod
    def _zero_stack(d, h, config):
        return LstmStack(
            [LstmCellParams.zeros(d if i == 0 else h, h) for i in range(config.num_layers)],
            config.dropout,
        )

    def named_parameters(self):
        out = [
            ("word_emb", self.word_emb),
            ("nt_emb", self.nt_emb),
            ("act_emb", self.act_emb),
            ("start_emb", self.start_emb),
        ]
        out += self.stack_lstm.parameters("stack_lstm")
        out += self.term_lstm.parameters("term_lstm")
        out += self.act_lstm.parameters("act_lstm")
        out += self.composer.parameters("composer")
        out += [
            ("w_feat", self.w_feat),
            ("b_feat", self.b_feat),
            ("w_struct", self.w_struct),
            ("b_struct", self.b_struct),
            ("w_word", self.w_word),
            ("b_word", self.b_word),
        ]
        return out

    def start(self, rng=None, training=False) -> RnngState:
        emb = ag.dropout(self.start_emb, self.config.dropout, rng, training)
        base = self.stack_lstm.step(emb, self.stack_lstm.initial_state(), rng=rng, training=training)
        term = self.term_lstm.step(emb, self.term_lstm.initial_state(), rng=rng, training=training)
        act = self.act_lstm.step(emb, self.act_lstm.initial_state(), rng=rng, training=training)
        return RnngState(None, base, term, act, 0, 0, 0, 0.0)

    def _features(self, state: RnngState) -> Tensor:
        if state._u is None:
            spine = state.entries.spine if state.entries is not None else state.base_spine
            feats = ag.concat([
                self.stack_lstm.top_h(spine),
                self.term_lstm.top_h(state.term),
                self.act_lstm.top_h(state.act),
            ])
            state._u = ag.tanh(ag.affine(self.w_feat, feats, self.b_feat))
        return state._u

    def advance(self, state: RnngState, event: int, step_log_prob=None, rng=None, training=False) -> RnngState:
        self._check_legal(state, event)
        if step_log_prob is None:
            step_log_prob = self.event_step_log_prob(state, event)
        space = self.space
        if space.is_gen(event):
            act_idx = space.gen_struct
        elif event == space.reduce_event:
            act_idx = space.reduce_struct
        else:
            act_idx = event
        act_in = ag.dropout(ag.pick_row(self.act_emb, act_idx), self.config.dropout, rng, training)
        act = self.act_lstm.step(act_in, state.act, rng=rng, training=training)

        if space.is_gen(event):
            word = space.word_of_event(event)
            emb = ag.dropout(ag.pick_row(self.word_emb, word), self.config.dropout, rng, training)
            spine_prev = state.entries.spine if state.entries is not None else state.base_spine
            spine = self.stack_lstm.step(emb, spine_prev, rng=rng, training=training)
            entry = StackEntry(state.entries, emb, False, -1, spine)
            term = self.term_lstm.step(emb, state.term, rng=rng, training=training)
            return RnngState(entry, state.base_spine, term, act, state.opens,
                             state.actions + 1, state.words + 1, state.log_prob + step_log_prob)

        if event == space.reduce_event:
            children: list[Tensor] = []
            node = state.entries
            while node is not None and not node.is_open:
                children.append(node.emb)
                node = node.prev
            if node is None:
                raise TransitionError("REDUCE with no open nonterminal on the stack")
            children.reverse()
            composed = self.composer.compose(children, node.emb)
            below = node.prev
            below_spine = below.spine if below is not None else state.base_spine
            spine = self.stack_lstm.step(composed, below_spine, rng=rng, training=training)
            entry = StackEntry(below, composed, False, -1, spine)
            return RnngState(entry, state.base_spine, state.term, act, state.opens - 1,
                             state.actions + 1, state.words, state.log_prob + step_log_prob)

        emb = ag.dropout(ag.pick_row(self.nt_emb, event), self.config.dropout, rng, training)
        spine_prev = state.entries.spine if state.entries is not None else state.base_spine
        spine = self.stack_lstm.step(emb, spine_prev, rng=rng, training=training)
        entry = StackEntry(state.entries, emb, True, event, spine)
        return RnngState(entry, state.base_spine, state.term, act, state.opens + 1,
                         state.actions + 1, state.words, state.log_prob + step_log_prob)


# ---------------------------------------------------------------------------
# construction and checkpoint round trips

ARCHITECTURES = ("lstm-lm", "action-lstm", "rnng")


def build_model(architecture: str, vocab: Vocabulary, nt_labels, config: ModelConfig, seed: int | None):
    """Fresh model; seed None gives all-zero parameters (uniform distributions)."""
    rng = None if seed is None else np.random.default_rng(seed)
    if architecture == "lstm-lm":
        return LstmLm(vocab, config, rng)
    space = ActionSpace.create(nt_labels, vocab)
    if architecture == "action-lstm":
        return ActionLstm(space, config, rng)
    if architecture == "rnng":
        return Rnng(space, config, rng)
    raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")


def model_nt_labels(model) -> tuple[str, ...]:
    return model.space.nt_labels if hasattr(model, "space") else ()


def load_model(ckpt) -> "LstmLm | ActionLstm | Rnng":
    """Rebuild a model from checkpoint data, copying parameters by name."""
    config = ModelConfig.from_dict(ckpt.config)
    model = build_model(ckpt.architecture, ckpt.vocab, ckpt.nt_labels, config, seed=None)
    named = dict(model.named_parameters())
    missing = set(named) - set(ckpt.params)
    extra = set(ckpt.params) - set(named)
    if missing or extra:
        raise ValueError(
            f"checkpoint parameter mismatch: missing={sorted(missing)} extra={sorted(extra)}"
        )
    for name, tensor in named.items():
        saved = ckpt.params[name]
        if saved.shape != tensor.values.shape:
            raise ValueError(
                f"parameter {name!r} has shape {saved.shape}, expected {tensor.values.shape}"
            )
        tensor.values[...] = saved
    return model
