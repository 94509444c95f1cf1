import pytest

from treelm.vocab import EOS, UNK_CLASSES, Vocabulary, build_vocab, unk_signature, unkify


def test_known_word_maps_to_its_id():
    v = build_vocab([["the", "dog", "the"]])
    assert v.lookup("the") == v.id_of("the")
    assert v.word_of(v.id_of("dog")) == "dog"


def test_ids_dense_from_zero_and_eos_first():
    v = build_vocab([["b", "a"]])
    assert v.words[0] == EOS
    assert list(range(v.size)) == [v.id_of(w) for w in v.words]


def test_min_count_filters_to_unk():
    v = build_vocab([["rare", "common", "common"]], min_count=2)
    assert "common" in v
    assert "rare" not in v
    assert v.word_of(v.lookup("rare")) in UNK_CLASSES


def test_unseen_word_stable_across_calls():
    v = build_vocab([["a"]])
    first = v.lookup("flibbertigibbet", position=4)
    assert all(v.lookup("flibbertigibbet", position=4) == first for _ in range(5))
    assert v.word_of(first) == "<unk>"


@pytest.mark.parametrize(
    "word,position,expected",
    [
        ("x123", 3, "<unk-num>"),
        ("Gizmodo", 3, "<unk-cap>"),
        # sentence-initial capitalization falls through to the lowercase signature
        ("Gizmos", 0, "<unk-s>"),
        ("Walking", 0, "<unk-ing>"),
        ("anti-hero", 2, "<unk-dash>"),
        ("nominalization", 1, "<unk-ion>"),
        ("quickestly", 1, "<unk-ly>"),
        ("brightest", 1, "<unk-est>"),
        ("gizmoed", 1, "<unk-ed>"),
        ("blumpy", 1, "<unk-y>"),
        ("zorp", 1, "<unk>"),
    ],
)
def test_signature_rules(word, position, expected):
    assert unk_signature(word, position) == expected


def test_unkify_matches_lookup():
    v = build_vocab([["a"]])
    assert unkify("Zorps", 0, v) == v.lookup("Zorps", 0)


def test_encode_is_position_aware():
    v = build_vocab([["said", "the", "dog"]])
    ids = v.encode(["Zorps", "said", "Zorps"])
    assert v.word_of(ids[0]) == "<unk-s>"  # initial cap lowercased
    assert v.word_of(ids[2]) == "<unk-cap>"


def test_round_trip_serialization():
    v = build_vocab([["a", "b"]], min_count=1)
    assert Vocabulary.from_dict(v.to_dict()) == v
