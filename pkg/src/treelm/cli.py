"""Command-line pipeline: prepare | train | score | analyze | report |
count-deps | verify-beam.

Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure. All artifacts
embed the resolved config hash, input hashes, seed, and tool version, and are
written atomically; re-running a stage on identical inputs is byte-identical.
Relative paths resolve against $TREELM_DATA_ROOT when it is set; inputs named
builtin:<name> come from the packaged data directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import IncompleteDataError, analyze_contrast, analyze_npi, analyze_wh_interaction
from .checkpoint import CheckpointError, hash_vocab, load_checkpoint, save_checkpoint
from .decode import BeamConfig, BeamFailure, verify_gold_on_beam
from .grammar import GrammarError, load_pcfg, sample_corpus
from .models import ModelConfig, TransitionError, build_model, load_model, model_nt_labels
from .optim import GradientError
from .records import RecordError, fmt_float, read_records, write_records
from .reporting import (
    FigureDatum,
    ReportBundle,
    load_bundle,
    render_bar_chart_svg,
    save_bundle,
    write_table_tsv,
)
from .scoring import score_suite
from .stats import DesignError
from .suites import SuiteError, load_suite
from .training import TrainConfig, train_model
from .treebank import (
    EmptyTreeError,
    OracleError,
    TreeParseError,
    count_filler_gap,
    filler_gap_table,
    iter_trees,
    parse_bracketed,
    strip_annotations,
    tree_to_actions,
)
from .vocab import EOS, Vocabulary, build_vocab

DATA_ROOT_ENV = "TREELM_DATA_ROOT"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DATA_ERRORS = (
    TreeParseError,
    EmptyTreeError,
    OracleError,
    GrammarError,
    SuiteError,
    RecordError,
    CheckpointError,
    IncompleteDataError,
    DesignError,
    TransitionError,
    FileNotFoundError,
    KeyError,
    ValueError,
)
NUMERIC_ERRORS = (GradientError, BeamFailure, FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def data_root() -> Path:
    return Path(os.environ.get(DATA_ROOT_ENV, "."))


def resolve_path(path: str, for_output: bool = False) -> Path:
    if path.startswith("builtin:"):
        if for_output:
            raise UsageError("builtin: paths are read-only inputs")
        return builtin_path(path[len("builtin:"):])
    p = Path(path)
    return p if p.is_absolute() else data_root() / p


def builtin_path(name: str) -> Path:
    base = resources.files("treelm") / "data"
    for candidate in (base / name, base / "suites" / name):
        if candidate.is_file():
            return Path(str(candidate))
    raise UsageError(f"no builtin data file named {name!r}")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def write_json(path: Path, payload: dict):
    tmp = Path(f"{path}.tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def write_text(path: Path, text: str):
    tmp = Path(f"{path}.tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def provenance(config: dict, inputs: dict[str, Path], seed) -> dict:
    return {
        "config_hash": config_hash(config),
        "input_hashes": {name: sha256_file(p) for name, p in sorted(inputs.items())},
        "seed": seed,
        "version": __version__,
    }


def flat_meta(config: dict, inputs: dict[str, Path], seed) -> dict:
    prov = provenance(config, inputs, seed)
    meta = {"config_hash": prov["config_hash"], "seed": prov["seed"], "version": prov["version"]}
    for name, digest in prov["input_hashes"].items():
        meta[f"hash_{name}"] = digest
    return meta


def merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    resolved = dict(defaults)
    file_cfg = {}
    if getattr(args, "config", None):
        with open(resolve_path(args.config), encoding="utf-8") as f:
            file_cfg = json.load(f)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    resolved.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


# ---------------------------------------------------------------------------
# prepare


PREPARE_DEFAULTS = {
    "grammar": None,
    "treebank": None,
    "n_sentences": 5000,
    "dev_fraction": 0.05,
    "seed": 1,
    "min_count": 1,
    "max_depth": 40,
    "error_threshold": 0.0,
    "max_tokens": 120,
}


def cmd_prepare(args) -> int:
    cfg = merge_config(args, PREPARE_DEFAULTS)
    out_dir = resolve_path(args.out, for_output=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs: dict[str, Path] = {}
    diagnostics: list[str] = []
    if bool(cfg["grammar"]) == bool(cfg["treebank"]):
        raise UsageError("prepare needs exactly one of --grammar or --treebank")
    if cfg["grammar"]:
        grammar_path = resolve_path(cfg["grammar"])
        inputs["grammar"] = grammar_path
        grammar = load_pcfg(grammar_path)
        raw_trees, stats = sample_corpus(
            grammar, int(cfg["n_sentences"]), seed=int(cfg["seed"]), max_depth=int(cfg["max_depth"])
        )
        if stats.cap_hits:
            diagnostics.append(f"depth-cap resamples: {stats.cap_hits}")
        parse_errors = 0
        total_blocks = len(raw_trees)
    else:
        treebank_path = resolve_path(cfg["treebank"])
        inputs["treebank"] = treebank_path
        raw_trees = []
        parse_errors = 0
        length_skips = 0

        def on_error(message):
            nonlocal parse_errors
            parse_errors += 1
            diagnostics.append(message)

        def on_skip(message):
            nonlocal length_skips
            length_skips += 1
            diagnostics.append(message)

        content = treebank_path.read_text(encoding="utf-8")
        for tree in iter_trees(content, max_tokens=int(cfg["max_tokens"]), on_error=on_error,
                               on_skip=on_skip, source=str(treebank_path)):
            raw_trees.append(tree)
        total_blocks = len(raw_trees) + parse_errors
    stripped = []
    empty_skips = 0
    for i, tree in enumerate(raw_trees):
        try:
            stripped.append(strip_annotations(tree))
        except EmptyTreeError as exc:
            empty_skips += 1
            diagnostics.append(f"sentence {i}: skipped: {exc}")
    for line in diagnostics:
        print(line, file=sys.stderr)
    if total_blocks and parse_errors / total_blocks > float(cfg["error_threshold"]):
        print(
            f"error rate {parse_errors}/{total_blocks} exceeds threshold {cfg['error_threshold']}",
            file=sys.stderr,
        )
        return EXIT_DATA
    n_dev = max(1, int(len(stripped) * float(cfg["dev_fraction"]))) if len(stripped) > 1 else 0
    dev_trees = stripped[:n_dev]
    train_trees = stripped[n_dev:]
    vocab = build_vocab([t.terminals() for t in train_trees], min_count=int(cfg["min_count"]))
    token_count = sum(len(t.terminals()) for t in stripped)

    write_text(out_dir / "train.trees", "".join(t.to_bracketed() + "\n" for t in train_trees))
    write_text(out_dir / "dev.trees", "".join(t.to_bracketed() + "\n" for t in dev_trees))
    write_json(out_dir / "vocab.json", vocab.to_dict())
    file_hashes = {
        name: sha256_file(out_dir / name) for name in ("train.trees", "dev.trees", "vocab.json")
    }
    manifest = {
        "config": cfg,
        "provenance": provenance(cfg, inputs, cfg["seed"]),
        "files": file_hashes,
        "token_count": token_count,
        "sentences": {"train": len(train_trees), "dev": len(dev_trees)},
        "malformed": parse_errors,
        "skipped_empty": empty_skips,
    }
    write_json(out_dir / "manifest.json", manifest)
    print(f"prepared {len(train_trees)} train / {len(dev_trees)} dev sentences, "
          f"{token_count} tokens -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


TRAIN_DEFAULTS = {
    "architecture": "rnng",
    "word_dim": 256,
    "hidden_dim": 256,
    "num_layers": 2,
    "dropout": 0.3,
    "max_open_nts": 60,
    "max_actions": 300,
    "max_epochs": 20,
    "patience": 3,
    "optimizer": "sgd",
    "lr": 0.5,
    "clip_norm": 5.0,
    "lr_decay": 0.5,
    "seed": 0,
}


def load_corpus_dir(corpus_dir: Path):
    trees = {"train": [], "dev": []}
    for split in trees:
        path = corpus_dir / f"{split}.trees"
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    trees[split].append(parse_bracketed(line))
    with open(corpus_dir / "vocab.json", encoding="utf-8") as f:
        vocab = Vocabulary.from_dict(json.load(f))
    return trees["train"], trees["dev"], vocab


def _sequences_for(architecture: str, trees, vocab: Vocabulary, space=None):
    if architecture == "lstm-lm":
        eos = vocab.eos_id
        return [vocab.encode(t.terminals()) + [eos] for t in trees]
    return [space.encode(tree_to_actions(t)) for t in trees]


def cmd_train(args) -> int:
    cfg = merge_config(args, TRAIN_DEFAULTS)
    corpus_dir = resolve_path(args.corpus)
    out_path = resolve_path(args.out, for_output=True)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    train_trees, dev_trees, vocab = load_corpus_dir(corpus_dir)
    nt_labels = sorted({n.label for t in train_trees + dev_trees for n in _internal_nodes(t)})
    model_cfg = ModelConfig(
        word_dim=int(cfg["word_dim"]),
        hidden_dim=int(cfg["hidden_dim"]),
        num_layers=int(cfg["num_layers"]),
        dropout=float(cfg["dropout"]),
        max_open_nts=int(cfg["max_open_nts"]),
        max_actions=int(cfg["max_actions"]),
    )
    model = build_model(cfg["architecture"], vocab, nt_labels, model_cfg, seed=int(cfg["seed"]))
    space = getattr(model, "space", None)
    train_seqs = _sequences_for(cfg["architecture"], train_trees, vocab, space)
    dev_seqs = _sequences_for(cfg["architecture"], dev_trees, vocab, space)
    train_cfg = TrainConfig(
        max_epochs=int(cfg["max_epochs"]),
        patience=int(cfg["patience"]),
        optimizer=cfg["optimizer"],
        lr=float(cfg["lr"]),
        clip_norm=None if cfg["clip_norm"] in (None, 0) else float(cfg["clip_norm"]),
        lr_decay=float(cfg["lr_decay"]),
        seed=int(cfg["seed"]),
    )
    inputs = {
        "train.trees": corpus_dir / "train.trees",
        "dev.trees": corpus_dir / "dev.trees",
        "vocab.json": corpus_dir / "vocab.json",
    }
    log_lines = [json.dumps({"meta": provenance(cfg, inputs, cfg["seed"])}, sort_keys=True)]

    def log_fn(stats):
        line = stats.to_json()
        log_lines.append(line)
        print(line, file=sys.stderr)

    result = train_model(model, train_seqs, dev_seqs, train_cfg, log_fn=log_fn)
    save_checkpoint(
        out_path,
        model.architecture,
        model_cfg.to_dict(),
        vocab,
        model_nt_labels(model),
        int(cfg["seed"]),
        model.named_parameters(),
    )
    if args.log:
        write_text(resolve_path(args.log, for_output=True), "\n".join(log_lines) + "\n")
    if result.diverged:
        print("training diverged (non-finite dev loss); last good checkpoint retained",
              file=sys.stderr)
        return EXIT_NUMERIC
    best = result.log[result.best_epoch - 1] if result.best_epoch > 0 else None
    if best:
        print(f"best dev ppl {best.dev_ppl:.3f} at epoch {best.epoch}; checkpoint -> {out_path}")
    return EXIT_OK


def _internal_nodes(tree):
    if not tree.is_terminal:
        yield tree
        for child in tree.children:
            yield from _internal_nodes(child)


# ---------------------------------------------------------------------------
# score


SCORE_DEFAULTS = {
    "action_beam": 100,
    "word_beam": 10,
    "struct_cap": 8,
    "workers": 1,
    "model_tag": None,
    "vocab": None,
}


def cmd_score(args) -> int:
    cfg = merge_config(args, SCORE_DEFAULTS)
    ckpt_path = resolve_path(args.checkpoint)
    suite_path = resolve_path(args.suite)
    out_path = resolve_path(args.out, for_output=True)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    ckpt = load_checkpoint(ckpt_path)
    if cfg["vocab"]:
        with open(resolve_path(cfg["vocab"]), encoding="utf-8") as f:
            external = Vocabulary.from_dict(json.load(f))
        if hash_vocab(external) != ckpt.vocab_hash:
            print(
                "vocabulary mismatch: checkpoint vocab hash "
                f"{ckpt.vocab_hash} != supplied vocab hash {hash_vocab(external)}",
                file=sys.stderr,
            )
            return EXIT_DATA
    model = load_model(ckpt)
    suite = load_suite(suite_path)
    beam = BeamConfig(int(cfg["action_beam"]), int(cfg["word_beam"]), int(cfg["struct_cap"]))
    tag = cfg["model_tag"] or ckpt.architecture
    result = score_suite(model, suite, tag, beam=beam, workers=int(cfg["workers"]))
    meta = flat_meta(cfg, {"checkpoint": ckpt_path, "suite": suite_path}, ckpt.seed)
    meta["beam_failures"] = len(result.failures)
    meta["beam_fallbacks"] = result.used_fallback
    write_records(out_path, result.records, meta)
    for failure in result.failures:
        print(
            f"beam failure: item {failure.item} condition {failure.condition} "
            f"word {failure.word_index}",
            file=sys.stderr,
        )
    print(f"{len(result.records)} records -> {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


ANALYZE_DEFAULTS = {"model_tag": None, "permutation_seed": 0}


def cmd_analyze(args) -> int:
    cfg = merge_config(args, ANALYZE_DEFAULTS)
    records_path = resolve_path(args.records)
    suite_path = resolve_path(args.suite)
    out_path = resolve_path(args.out, for_output=True)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    records, rec_meta = read_records(records_path)
    suite = load_suite(suite_path)
    tags = sorted({r.model for r in records if r.suite == suite.name})
    if cfg["model_tag"]:
        tags = [cfg["model_tag"]]
    if not tags:
        raise IncompleteDataError(f"no records for suite {suite.name!r} in {records_path}")
    bundle = ReportBundle(suite=suite.name, analysis=suite.analysis)
    bundle.meta = flat_meta(cfg, {"records": records_path, "suite": suite_path},
                            cfg["permutation_seed"])
    bundle.meta["models"] = ",".join(tags)
    if "beam_failures" in rec_meta:
        bundle.meta["upstream_beam_failures"] = rec_meta["beam_failures"]
    seed = int(cfg["permutation_seed"])
    for tag in tags:
        if suite.analysis == "wh-interaction":
            summary = analyze_wh_interaction(suite, records, tag, permutation_seed=seed,
                                             drop_incomplete=True)
            bundle.tables[f"{tag}.items"] = summary.rows()
            bundle.tables[f"{tag}.summary"] = [
                ["measure", "value"],
                ["mean_interaction_bits", fmt_float(summary.mean_interaction)],
                ["interaction_ci_half", fmt_float(summary.interaction_ci_half)],
                ["cohens_d", fmt_float(summary.effect_size.value)],
                ["p_permutation", fmt_float(summary.p_permutation)],
                ["p_regression", fmt_float(summary.p_regression)],
                ["n_items", str(len(summary.items))],
                ["dropped_items", str(len(summary.dropped_items))],
            ]
            bundle.meta[f"{tag}.dropped_items"] = len(summary.dropped_items)
            for cond in sorted(summary.condition_ci.means):
                bundle.figure.append(
                    FigureDatum(
                        group=cond,
                        series=tag,
                        value=summary.condition_ci.means[cond],
                        ci_half=summary.condition_ci.half_widths[cond],
                        marker=suite.markers.get(cond, ""),
                    )
                )
            bundle.figure_title = f"{suite.name}: condition means (within-item 95% CI)"
        elif suite.analysis == "npi":
            summary = analyze_npi(suite, records, tag, permutation_seed=seed, drop_incomplete=True)
            bundle.tables[f"{tag}.summary"] = [
                ["measure", "value"],
                ["licensor_effect_bits", fmt_float(summary.licensor_effect)],
                ["distractor_effect_bits", fmt_float(summary.distractor_effect)],
                ["p_licensor", fmt_float(summary.p_licensor)],
                ["p_distractor", fmt_float(summary.p_distractor)],
                ["accuracy", fmt_float(summary.accuracy.accuracy)],
                ["accuracy_ci_low", fmt_float(summary.accuracy.ci_low)],
                ["accuracy_ci_high", fmt_float(summary.accuracy.ci_high)],
                ["accuracy_p_binomial", fmt_float(summary.accuracy.p_value)],
                ["ties", str(summary.ties)],
                ["n_items", str(len(summary.items))],
                ["dropped_items", str(len(summary.dropped_items))],
            ]
            bundle.meta[f"{tag}.dropped_items"] = len(summary.dropped_items)
            if summary.condition_ci is not None:
                for cond in sorted(summary.condition_ci.means):
                    bundle.figure.append(
                        FigureDatum(
                            group=cond,
                            series=tag,
                            value=summary.condition_ci.means[cond],
                            ci_half=summary.condition_ci.half_widths[cond],
                            marker=suite.markers.get(cond, ""),
                        )
                    )
            bundle.figure_title = f"{suite.name}: NPI-region surprisal (within-item 95% CI)"
            bundle.figure_ylabel = "NPI surprisal (bits)"
        else:
            summary = analyze_contrast(suite, records, tag, permutation_seed=seed,
                                       drop_incomplete=True)
            bundle.tables[f"{tag}.summary"] = [
                ["measure", "value"],
                ["mean_difference_bits", fmt_float(summary.mean_difference)],
                ["p_permutation", fmt_float(summary.p_permutation)],
                ["n_items", str(len(summary.differences))],
                ["dropped_items", str(len(summary.dropped_items))],
            ]
            bundle.figure.append(
                FigureDatum(group="difference", series=tag, value=summary.mean_difference)
            )
            bundle.figure_title = f"{suite.name}: contrast"
    save_bundle(bundle, out_path)
    print(f"analysis bundle -> {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    bundle_path = resolve_path(args.bundle)
    out_dir = resolve_path(args.out, for_output=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(bundle_path)
    meta = dict(bundle.meta)
    meta["bundle_hash"] = sha256_file(bundle_path)
    for name, rows in sorted(bundle.tables.items()):
        write_table_tsv(rows, out_dir / f"{bundle.suite}.{name}.tsv", meta)
    figure_rows = [["group", "series", "value", "ci_half", "marker"]]
    for d in bundle.figure:
        figure_rows.append([d.group, d.series, fmt_float(d.value), fmt_float(d.ci_half), d.marker])
    write_table_tsv(figure_rows, out_dir / f"{bundle.suite}.figure.tsv", meta)
    render_bar_chart_svg(bundle, out_dir / f"{bundle.suite}.figure.svg")
    print(f"report -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# count-deps


def cmd_count_deps(args) -> int:
    out_path = resolve_path(args.out, for_output=True) if args.out else None
    fillers = tuple(args.fillers.split(",")) if args.fillers else ("who", "what")
    paths = [resolve_path(p) for p in args.treebank]
    trees = []
    for path in paths:
        content = path.read_text(encoding="utf-8")
        trees.extend(
            iter_trees(content, on_error=lambda m: print(m, file=sys.stderr), source=str(path))
        )
    counts = count_filler_gap(trees)
    rows = filler_gap_table(counts, fillers)
    meta = flat_meta({"fillers": list(fillers)}, {f"treebank{i}": p for i, p in enumerate(paths)}, 0)
    if out_path:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_table_tsv(rows, out_path, meta)
        print(f"dependency counts -> {out_path}")
    else:
        for row in rows:
            print("\t".join(row))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-beam


def cmd_verify_beam(args) -> int:
    ckpt = load_checkpoint(resolve_path(args.checkpoint))
    model = load_model(ckpt)
    if model.architecture == "lstm-lm":
        raise UsageError("verify-beam requires a transition model checkpoint")
    beam = BeamConfig(int(args.action_beam), int(args.word_beam))
    trees_path = resolve_path(args.trees)
    content = trees_path.read_text(encoding="utf-8")
    rows = [["sentence", "word_idx", "token", "present", "rank"]]
    present = total = 0
    for si, tree in enumerate(iter_trees(content, source=str(trees_path))):
        stripped = strip_annotations(tree)
        events = model.space.encode(tree_to_actions(stripped))
        tokens = stripped.terminals()
        ids = model.space.vocab.encode(tokens)
        checks = verify_gold_on_beam(model, ids, events, beam)
        for check, token in zip(checks, tokens):
            rows.append([
                str(si),
                str(check.word_index),
                token,
                str(check.present).lower(),
                "" if check.rank is None else str(check.rank),
            ])
            present += int(check.present)
            total += 1
    fraction = present / total if total else 0.0
    if args.out:
        out_path = resolve_path(args.out, for_output=True)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        meta = flat_meta(
            {"action_beam": beam.action_beam_size, "word_beam": beam.word_beam_size},
            {"checkpoint": resolve_path(args.checkpoint), "trees": trees_path},
            ckpt.seed,
        )
        meta["gold_present_fraction"] = fmt_float(fraction)
        write_table_tsv(rows, out_path, meta)
    print(f"gold parse present for {present}/{total} words ({fraction:.1%})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> Parser:
    parser = Parser(prog="treelm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"treelm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="sample or ingest a corpus; emit trees, vocab, manifest")
    p.add_argument("--grammar", help="PCFG file (synthetic corpus path)")
    p.add_argument("--treebank", help="bracketed treebank file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file (defaults < file < flags)")
    p.add_argument("--n-sentences", dest="n_sentences", type=int)
    p.add_argument("--dev-fraction", dest="dev_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--error-threshold", dest="error_threshold", type=float)
    p.add_argument("--max-tokens", dest="max_tokens", type=int)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a model on a prepared corpus")
    p.add_argument("--corpus", required=True, help="directory from prepare")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", help="training log path (line-delimited records)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--architecture", choices=("lstm-lm", "action-lstm", "rnng"))
    p.add_argument("--word-dim", dest="word_dim", type=int)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--num-layers", dest="num_layers", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--max-open-nts", dest="max_open_nts", type=int)
    p.add_argument("--max-actions", dest="max_actions", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--optimizer", choices=("sgd", "adam"))
    p.add_argument("--lr", type=float)
    p.add_argument("--clip-norm", dest="clip_norm", type=float)
    p.add_argument("--lr-decay", dest="lr_decay", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score a suite; emit surprisal records TSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--action-beam", dest="action_beam", type=int)
    p.add_argument("--word-beam", dest="word_beam", type=int)
    p.add_argument("--struct-cap", dest="struct_cap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--model-tag", dest="model_tag")
    p.add_argument("--vocab", help="vocab JSON to cross-check against the checkpoint")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="analyze surprisal records against a suite")
    p.add_argument("--records", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True, help="report bundle JSON path")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--model-tag", dest="model_tag")
    p.add_argument("--permutation-seed", dest="permutation_seed", type=int)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render a bundle to SVG figures and TSV tables")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("count-deps", help="filler-gap dependency statistics from traces")
    p.add_argument("--treebank", nargs="+", required=True)
    p.add_argument("--out")
    p.add_argument("--fillers", help="comma-separated filler words (default who,what)")
    p.set_defaults(func=cmd_count_deps)

    p = sub.add_parser("verify-beam", help="check gold parses survive the word beam")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--trees", required=True, help="gold trees (bracketed)")
    p.add_argument("--out")
    p.add_argument("--action-beam", dest="action_beam", type=int, default=100)
    p.add_argument("--word-beam", dest="word_beam", type=int, default=10)
    p.set_defaults(func=cmd_verify_beam)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
