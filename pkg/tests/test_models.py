import math

import numpy as np
import pytest

from conftest import plain_vocab, tiny_model
from treelm.grammar import load_pcfg, sample_corpus
from treelm.models import (
    ActionSpace,
    Legality,
    ModelConfig,
    TransitionError,
    build_model,
    transition_legality,
)
from treelm.treebank import Gen, Nt, REDUCE, actions_to_tree, strip_annotations, tree_to_actions


from oracles import brute_force_legal_events, prefix_status  # noqa: E402


# ---------------------------------------------------------------------------
# action space


def test_event_id_layout_round_trips():
    space = ActionSpace.create(["VP", "NP", "S"], plain_vocab(["a", "b"]))
    assert space.nt_labels == ("NP", "S", "VP")
    actions = [Nt("S"), Gen("a"), REDUCE]
    assert space.decode(space.encode(actions)) == actions
    assert space.event_size == 3 + 1 + 2


def test_action_space_rejects_unknown_label():
    space = ActionSpace.create(["S"], plain_vocab(["a"]))
    with pytest.raises(KeyError):
        space.event_of_action(Nt("ZP"))


# ---------------------------------------------------------------------------
# legality mask


def test_initial_state_only_nt_legal():
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch)
        legality = model.legality(model.start())
        assert legality == Legality(nt=True, reduce=False, gen=False)


def test_reduce_illegal_immediately_after_nt():
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch)
        state = model.advance(model.start(), model.space.nt_event("X"))
        legality = model.legality(state)
        assert legality.reduce is False
        assert legality.gen is True
        with pytest.raises(TransitionError):
            model.advance(state, model.space.reduce_event)


def test_after_nt_gen_all_kinds_legal_matches_brute_force():
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch, max_opens=4)
        space = model.space
        events = [space.nt_event("X"), space.gen_event(0)]
        state = model.start()
        for ev in events:
            state = model.advance(state, ev)
        legality = model.legality(state)
        assert legality == Legality(nt=True, reduce=True, gen=True)
        elp = model.event_log_probs(state)
        model_legal = {e for e in range(space.event_size) if np.isfinite(elp[e])}
        assert model_legal == brute_force_legal_events(space, events)


def test_terminated_state_has_no_legal_events():
    model = tiny_model("rnng")
    space = model.space
    state = model.start()
    for ev in (space.nt_event("X"), space.gen_event(0), space.reduce_event):
        state = model.advance(state, ev)
    assert model.is_terminal(state)
    legality = model.legality(state)
    assert not (legality.nt or legality.reduce or legality.gen)


def test_nt_blocked_at_open_cap():
    model = tiny_model("rnng", max_opens=2)
    space = model.space
    state = model.start()
    state = model.advance(state, space.nt_event("X"))
    state = model.advance(state, space.nt_event("X"))
    assert model.legality(state).nt is False


def test_gen_deferred_to_reduce_past_action_cap():
    cfg_legality = transition_legality(
        opens=3, actions=500, top_open_empty=False, config=ModelConfig(max_actions=300)
    )
    assert cfg_legality.gen is False and cfg_legality.reduce is True and cfg_legality.nt is False
    # with an empty open constituent GEN stays available so derivations can close
    cfg_legality = transition_legality(
        opens=3, actions=500, top_open_empty=True, config=ModelConfig(max_actions=300)
    )
    assert cfg_legality.gen is True and cfg_legality.reduce is False


# ---------------------------------------------------------------------------
# distributions


@pytest.mark.parametrize("arch", ["rnng", "action-lstm"])
def test_masked_distribution_sums_to_one(arch):
    model = tiny_model(arch, seed=13, max_opens=3)
    space = model.space
    rng = np.random.default_rng(0)
    state = model.start()
    for _ in range(30):
        elp = model.event_log_probs(state)
        legal = np.flatnonzero(np.isfinite(elp))
        if len(legal) == 0:
            assert model.is_terminal(state)
            break
        assert abs(np.exp(elp[legal]).sum() - 1.0) <= 1e-9
        ev = int(rng.choice(legal))
        state = model.advance(state, ev, step_log_prob=float(elp[ev]))


def test_zero_weight_lstm_lm_is_uniform():
    vocab = plain_vocab([f"w{i}" for i in range(8)])
    model = build_model("lstm-lm", vocab, [], ModelConfig(word_dim=4, hidden_dim=4, num_layers=1, dropout=0.0), seed=None)
    state = model.start()
    lp = model.next_word_log_probs(state)
    assert np.allclose(lp, -math.log(8), atol=1e-12)
    state = model.advance(state, 3)
    assert np.allclose(model.next_word_log_probs(state), -math.log(8), atol=1e-12)


def test_zero_weight_transition_model_is_masked_uniform():
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch, seed=None, nts=("X", "Y"))
        state = model.start()
        slp = model.struct_log_probs(state)
        # only the two NT options are legal: each gets probability 1/2
        assert np.isfinite(slp[0]) and np.isfinite(slp[1])
        assert slp[0] == pytest.approx(-math.log(2), abs=1e-12)
        wlp = model.word_log_probs(state)
        assert np.allclose(wlp, -math.log(model.space.vocab.size), atol=1e-12)


def test_zero_weight_joint_log_prob_counts_legal_options():
    # teacher-forcing an oracle through a zero-weight model: each step costs
    # ln(#legal structural options), GEN steps add ln V for the word factor
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch, seed=None, nts=("S", "NP"), words=("the", "dog"), max_opens=4)
        space = model.space
        tree = actions_to_tree(
            [Nt("S"), Nt("NP"), Gen("the"), Gen("dog"), REDUCE, Nt("NP"), Gen("dog"), REDUCE, REDUCE]
        )
        events = space.encode(tree_to_actions(tree))
        state = model.start()
        expected = 0.0
        for ev in events:
            legality = model.legality(state)
            n_struct = (space.num_nts if legality.nt else 0) + int(legality.reduce) + int(legality.gen)
            expected -= math.log(n_struct)
            if space.is_gen(ev):
                expected -= math.log(space.vocab.size)
            state = model.advance(state, ev)
        assert state.log_prob == pytest.approx(expected, abs=1e-9)
        assert model.is_terminal(state)


@pytest.mark.parametrize("arch", ["rnng", "action-lstm"])
def test_joint_log_prob_factorizes_along_path(arch):
    model = tiny_model(arch, seed=21, max_opens=3)
    space = model.space
    rng = np.random.default_rng(5)
    state = model.start()
    total = 0.0
    for _ in range(25):
        elp = model.event_log_probs(state)
        legal = np.flatnonzero(np.isfinite(elp))
        if len(legal) == 0:
            break
        ev = int(rng.choice(legal))
        total += float(elp[ev])
        state = model.advance(state, ev)  # recomputes its own step log prob
    assert state.log_prob == pytest.approx(total, abs=1e-9)


# ---------------------------------------------------------------------------
# oracle sequences and stack arithmetic


def test_oracle_sequences_fully_legal_for_both_models(filler_gap_grammar):
    trees, _ = sample_corpus(filler_gap_grammar, 30, seed=4)
    stripped = [strip_annotations(t) for t in trees]
    vocab_words = sorted({w for t in stripped for w in t.terminals()})
    nts = sorted({n.label for t in stripped for n in _internal(t)})
    for arch in ("rnng", "action-lstm"):
        model = tiny_model(arch, words=vocab_words, nts=nts, seed=2, max_opens=16, max_actions=200)
        space = model.space
        for tree in stripped:
            state = model.start()
            for ev in space.encode(tree_to_actions(tree)):
                state = model.advance(state, ev)  # raises TransitionError if illegal
            assert model.is_terminal(state)


def _internal(tree):
    if not tree.is_terminal:
        yield tree
        for c in tree.children:
            yield from _internal(c)


def test_reduce_pops_constituent_to_one_entry():
    model = tiny_model("rnng", words=("the", "dog"), nts=("NP",), seed=1)
    space = model.space
    state = model.start()
    state = model.advance(state, space.nt_event("NP"))
    state = model.advance(state, space.gen_event(space.vocab.id_of("the")))
    state = model.advance(state, space.gen_event(space.vocab.id_of("dog")))
    assert state.stack_depth == 3
    state = model.advance(state, space.reduce_event)
    # two terminals and the open nonterminal replaced by one composed entry
    assert state.stack_depth == 1
    assert state.opens == 0


def test_stack_arithmetic_matches_shadow_counters_random_walk():
    model = tiny_model("rnng", seed=17, max_opens=5, max_actions=10_000)
    space = model.space
    rng = np.random.default_rng(11)
    steps = 0
    state = model.start()
    shadow_depth, shadow_opens, shadow_elems = 0, 0, []
    while steps < 10_000:
        elp = model.event_log_probs(state)
        legal = np.flatnonzero(np.isfinite(elp))
        if len(legal) == 0:
            state = model.start()
            shadow_depth, shadow_opens, shadow_elems = 0, 0, []
            continue
        ev = int(rng.choice(legal))
        state = model.advance(state, ev)
        steps += 1
        if space.is_gen(ev):
            shadow_depth += 1
            shadow_elems.append("w")
        elif ev == space.reduce_event:
            popped = 0
            while shadow_elems and shadow_elems[-1] == "w":
                shadow_elems.pop()
                popped += 1
            shadow_elems.pop()  # the open nonterminal
            shadow_elems.append("w")
            shadow_depth += 1 - popped - 1
            shadow_opens -= 1
        else:
            shadow_depth += 1
            shadow_opens += 1
            shadow_elems.append("nt")
        assert state.stack_depth == shadow_depth
        assert state.opens == shadow_opens


def test_advancing_copied_state_leaves_original_unchanged():
    for arch in ("rnng", "action-lstm", "lstm-lm"):
        model = tiny_model(arch, seed=23)
        state = model.start()
        if arch == "lstm-lm":
            before = model.next_word_log_probs(state).tobytes()
            model.advance(state, 0)
            model.advance(state, 1)
            assert model.next_word_log_probs(state).tobytes() == before
        else:
            state = model.advance(state, model.space.nt_event("X"))
            before = model.event_log_probs(state).tobytes()
            model.advance(state, model.space.gen_event(0))
            model.advance(state, model.space.nt_event("X"))
            assert model.event_log_probs(state).tobytes() == before


def test_forward_deterministic_across_instances():
    a = tiny_model("rnng", seed=31)
    b = tiny_model("rnng", seed=31)
    sa, sb = a.start(), b.start()
    for ev in (a.space.nt_event("X"), a.space.gen_event(1)):
        assert a.event_log_probs(sa).tobytes() == b.event_log_probs(sb).tobytes()
        sa = a.advance(sa, ev)
        sb = b.advance(sb, ev)


def test_lstm_lm_rejects_out_of_range_word():
    model = tiny_model("lstm-lm")
    with pytest.raises(IndexError):
        model.advance(model.start(), 99)
