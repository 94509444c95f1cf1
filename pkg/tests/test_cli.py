import json
import math
import os
from pathlib import Path

import pytest

from treelm.checkpoint import save_checkpoint
from treelm.cli import builtin_path, main
from treelm.models import ModelConfig, build_model
from treelm.records import SurprisalRecord, read_records, write_records
from treelm.reporting import load_bundle
from treelm.suites import load_suite
from treelm.vocab import build_vocab


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.delenv("TREELM_DATA_ROOT", raising=False)
    return tmp_path


def prepare_small(workdir, n=80, seed=3):
    out = workdir / "corpus"
    code = run(
        "prepare", "--grammar", "builtin:filler_gap.pcfg", "--out", out,
        "--n-sentences", n, "--seed", seed,
    )
    assert code == 0
    return out


def train_small(workdir, corpus, arch="lstm-lm", **over):
    ckpt = workdir / f"{arch}.ckpt"
    args = [
        "train", "--corpus", corpus, "--out", ckpt, "--architecture", arch,
        "--word-dim", 8, "--hidden-dim", 8, "--num-layers", 1, "--dropout", 0.0,
        "--max-epochs", 1, "--lr", 0.3, "--seed", 1,
    ]
    for key, value in over.items():
        args += [f"--{key.replace('_', '-')}", value]
    assert run(*args) == 0
    return ckpt


def test_prepare_manifest_identical_across_runs(workdir):
    out1 = workdir / "c1"
    out2 = workdir / "c2"
    for out in (out1, out2):
        assert run("prepare", "--grammar", "builtin:filler_gap.pcfg", "--out", out,
                   "--n-sentences", 60, "--seed", 9) == 0
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["files"] == m2["files"]
    assert m1["provenance"]["config_hash"] == m2["provenance"]["config_hash"]
    assert (out1 / "train.trees").read_bytes() == (out2 / "train.trees").read_bytes()


def test_prepare_bad_line_with_zero_threshold_fails(workdir, capsys):
    bank = workdir / "bank.trees"
    bank.write_text("(S (NP (DT the) (NN dog)) (VP (VBZ barks)))\n(S (NP broken\n")
    code = run("prepare", "--treebank", bank, "--out", workdir / "corpus")
    assert code == 2
    err = capsys.readouterr().err
    assert "malformed" in err and "2" in err


def test_prepare_bad_line_passes_with_loose_threshold(workdir):
    bank = workdir / "bank.trees"
    bank.write_text("(S (NP (DT the) (NN dog)) (VP (VBZ barks)))\n(S (NP broken\n")
    code = run("prepare", "--treebank", bank, "--out", workdir / "corpus",
               "--error-threshold", 0.9, "--dev-fraction", 0)
    assert code == 0
    manifest = json.loads((workdir / "corpus" / "manifest.json").read_text())
    assert manifest["malformed"] == 1


def test_pipeline_rerun_is_byte_identical(workdir):
    corpus = prepare_small(workdir)
    ckpt = train_small(workdir, corpus)
    records1 = workdir / "r1.tsv"
    records2 = workdir / "r2.tsv"
    for out in (records1, records2):
        assert run("score", "--checkpoint", ckpt, "--suite", "builtin:object_gap.json",
                   "--out", out) == 0
    assert records1.read_bytes() == records2.read_bytes()
    b1, b2 = workdir / "b1.json", workdir / "b2.json"
    for records, bundle in ((records1, b1), (records2, b2)):
        assert run("analyze", "--records", records, "--suite", "builtin:object_gap.json",
                   "--out", bundle) == 0
    assert b1.read_bytes() == b2.read_bytes()
    rep1, rep2 = workdir / "rep1", workdir / "rep2"
    for bundle, rep in ((b1, rep1), (b2, rep2)):
        assert run("report", "--bundle", bundle, "--out", rep) == 0
    for name in sorted(os.listdir(rep1)):
        assert (rep1 / name).read_bytes() == (rep2 / name).read_bytes()


def test_zero_weight_model_gives_zero_interaction(workdir):
    # uniform distributions: filler manipulation changes nothing, so the
    # interaction is exactly 0 with zero-width intervals
    suite = load_suite(builtin_path("object_gap.json"))
    vocab = build_vocab([c.tokens() for item in suite.items for c in item.conditions.values()])
    cfg = ModelConfig(word_dim=4, hidden_dim=4, num_layers=1, dropout=0.0)
    model = build_model("lstm-lm", vocab, [], cfg, seed=None)
    ckpt = workdir / "zero.ckpt"
    save_checkpoint(ckpt, "lstm-lm", cfg.to_dict(), vocab, (), 0, model.named_parameters())
    records = workdir / "records.tsv"
    assert run("score", "--checkpoint", ckpt, "--suite", "builtin:object_gap.json",
               "--out", records) == 0
    bundle_path = workdir / "bundle.json"
    assert run("analyze", "--records", records, "--suite", "builtin:object_gap.json",
               "--out", bundle_path) == 0
    bundle = load_bundle(bundle_path)
    summary = {row[0]: row[1] for row in bundle.tables["lstm-lm.summary"]}
    assert float(summary["mean_interaction_bits"]) == pytest.approx(0.0, abs=1e-9)
    assert float(summary["interaction_ci_half"]) == pytest.approx(0.0, abs=1e-9)


def test_analyze_accepts_externally_supplied_records(workdir):
    # records written by hand (an external model), no local checkpoint involved
    suite = load_suite(builtin_path("object_gap.json"))
    records = []
    for item in suite.items:
        for cond_name, cond in item.conditions.items():
            fac = suite.factors[cond_name]
            idx = 0
            for region in cond.regions:
                for tok in region.tokens:
                    value = 2.0
                    if fac["filler"] and not fac["gap"] and region.measure:
                        value = 3.0  # external model penalizes filled positions
                    records.append(SurprisalRecord(suite.name, item.item_id, cond_name,
                                                   region.name, idx, tok, value, "external-lm"))
                    idx += 1
    path = workdir / "external.tsv"
    write_records(path, records)
    bundle_path = workdir / "bundle.json"
    assert run("analyze", "--records", path, "--suite", "builtin:object_gap.json",
               "--out", bundle_path) == 0
    bundle = load_bundle(bundle_path)
    summary = {row[0]: row[1] for row in bundle.tables["external-lm.summary"]}
    assert float(summary["mean_interaction_bits"]) > 0


def test_score_vocab_mismatch_is_provenance_error(workdir, capsys):
    corpus = prepare_small(workdir)
    ckpt = train_small(workdir, corpus)
    other_vocab = workdir / "other_vocab.json"
    other_vocab.write_text(json.dumps(build_vocab([["zzz"]]).to_dict()))
    code = run("score", "--checkpoint", ckpt, "--suite", "builtin:object_gap.json",
               "--out", workdir / "r.tsv", "--vocab", other_vocab)
    assert code == 2
    err = capsys.readouterr().err
    assert err.count("hash") >= 1 and "mismatch" in err


def test_usage_errors_exit_one(workdir):
    assert run("prepare", "--out", workdir / "x") == 1  # neither grammar nor treebank
    assert run("frobnicate") == 1
    assert run("train", "--corpus", "missing") == 1  # missing required --out


def test_missing_input_is_data_error(workdir):
    assert run("score", "--checkpoint", workdir / "nope.ckpt",
               "--suite", "builtin:object_gap.json", "--out", workdir / "r.tsv") == 2


def test_config_file_layering(workdir):
    cfg = workdir / "cfg.json"
    cfg.write_text(json.dumps({"n_sentences": 30, "seed": 5}))
    out = workdir / "corpus"
    assert run("prepare", "--grammar", "builtin:filler_gap.pcfg", "--out", out,
               "--config", cfg, "--seed", 6) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["n_sentences"] == 30  # from file
    assert manifest["config"]["seed"] == 6  # flag wins
    bad = workdir / "bad.json"
    bad.write_text(json.dumps({"bogus_key": 1}))
    assert run("prepare", "--grammar", "builtin:filler_gap.pcfg", "--out", out,
               "--config", bad) == 1


def test_data_root_env_resolves_relative_paths(tmp_path, monkeypatch):
    monkeypatch.setenv("TREELM_DATA_ROOT", str(tmp_path))
    assert run("prepare", "--grammar", "builtin:filler_gap.pcfg", "--out", "corpus",
               "--n-sentences", 20) == 0
    assert (tmp_path / "corpus" / "manifest.json").exists()


def test_count_deps_writes_table(workdir):
    bank = workdir / "bank.trees"
    bank.write_text(
        "(SBAR (WHNP-1 (WP what)) (S (NP (PRP we)) (VP (VBP want) (NP (-NONE- *T*-1)))))\n"
    )
    out = workdir / "deps.tsv"
    assert run("count-deps", "--treebank", bank, "--out", out) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0].startswith("location_of_gap")
    assert lines[1].split("\t")[1] == "1"


def test_verify_beam_cli(workdir):
    corpus = prepare_small(workdir, n=60)
    ckpt = train_small(workdir, corpus, arch="action-lstm", max_open_nts=20)
    out = workdir / "gold.tsv"
    assert run("verify-beam", "--checkpoint", ckpt, "--trees", corpus / "dev.trees",
               "--out", out, "--action-beam", 20, "--word-beam", 5) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0].split("\t") == ["sentence", "word_idx", "token", "present", "rank"]
    assert len(lines) > 1


def test_train_emits_log_with_provenance(workdir):
    corpus = prepare_small(workdir, n=40)
    log = workdir / "train.log"
    ckpt = workdir / "m.ckpt"
    assert run("train", "--corpus", corpus, "--out", ckpt, "--log", log,
               "--architecture", "lstm-lm", "--word-dim", 6, "--hidden-dim", 6,
               "--num-layers", 1, "--max-epochs", 2, "--seed", 0, "--dropout", 0.0) == 0
    lines = log.read_text().splitlines()
    meta = json.loads(lines[0])["meta"]
    assert "config_hash" in meta and "input_hashes" in meta
    epochs = [json.loads(l) for l in lines[1:]]
    assert [e["epoch"] for e in epochs] == list(range(1, len(epochs) + 1))
    assert all(set(e) == {"epoch", "train_ppl", "dev_ppl", "lr"} for e in epochs)
