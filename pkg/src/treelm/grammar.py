"""Probabilistic context-free grammars for desk-scale synthetic corpora."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .treebank import ParseTree

PROB_TOL = 1e-9


class GrammarError(ValueError):
    pass


class DepthCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    prob: float


@dataclass
class Pcfg:
    """Rules grouped by left-hand side; probabilities per LHS sum to one.

    Symbols appearing on a left-hand side are nonterminals; all others are
    terminals. Validation also rejects grammars whose expected branching is
    supercritical (infinite expected string length).
    """

    rules: list[Rule]
    start: str = "S"
    nonterminals: frozenset[str] = field(init=False)
    terminals: frozenset[str] = field(init=False)

    def __post_init__(self):
        by_lhs: dict[str, list[Rule]] = defaultdict(list)
        for rule in self.rules:
            by_lhs[rule.lhs].append(rule)
        self.nonterminals = frozenset(by_lhs)
        syms = {s for rule in self.rules for s in rule.rhs}
        self.terminals = frozenset(syms - self.nonterminals)
        object.__setattr__(self, "_by_lhs", dict(by_lhs))
        self._validate()

    def _validate(self):
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} has no rules")
        for lhs, rules in self._by_lhs.items():
            total = sum(r.prob for r in rules)
            if abs(total - 1.0) > PROB_TOL:
                raise GrammarError(f"rule probabilities for {lhs!r} sum to {total}, not 1")
            if any(r.prob < 0 for r in rules):
                raise GrammarError(f"negative rule probability under {lhs!r}")
        radius = self.branching_spectral_radius()
        if radius >= 1.0:
            raise GrammarError(
                f"grammar is not subcritical: expected-branching spectral radius {radius:.4f} >= 1"
            )

    def expansions(self, symbol: str) -> list[Rule]:
        return self._by_lhs[symbol]

    def branching_spectral_radius(self) -> float:
        """Spectral radius of the expected nonterminal-branching matrix."""
        nts = sorted(self.nonterminals)
        index = {nt: i for i, nt in enumerate(nts)}
        m = np.zeros((len(nts), len(nts)))
        for rule in self.rules:
            for sym in rule.rhs:
                if sym in index:
                    m[index[rule.lhs], index[sym]] += rule.prob
        if not len(nts):
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(m))))


def parse_pcfg(text: str, start: str | None = None) -> Pcfg:
    """Parse the grammar text format: one `LHS -> RHS... # prob` per line.

    Lines starting with '%' are comments; the first LHS is the start symbol
    unless overridden.
    """
    rules: list[Rule] = []
    first_lhs = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if "#" not in line:
            raise GrammarError(f"line {lineno}: missing '# prob' suffix: {line!r}")
        body, _, prob_text = line.rpartition("#")
        try:
            prob = float(prob_text.strip())
        except ValueError:
            raise GrammarError(f"line {lineno}: bad probability {prob_text.strip()!r}") from None
        parts = body.split()
        if len(parts) < 3 or parts[1] != "->":
            raise GrammarError(f"line {lineno}: expected 'LHS -> RHS... # prob': {line!r}")
        lhs, rhs = parts[0], tuple(parts[2:])
        if first_lhs is None:
            first_lhs = lhs
        rules.append(Rule(lhs, rhs, prob))
    if not rules:
        raise GrammarError("grammar has no rules")
    return Pcfg(rules, start=start or first_lhs)


def load_pcfg(path, start: str | None = None) -> Pcfg:
    with open(path, encoding="utf-8") as f:
        return parse_pcfg(f.read(), start=start)


def dump_pcfg(grammar: Pcfg) -> str:
    lines = [f"{r.lhs} -> {' '.join(r.rhs)} # {r.prob}" for r in grammar.rules]
    return "\n".join(lines) + "\n"


@dataclass
class SampleStats:
    cap_hits: int = 0


def sample_tree(
    grammar: Pcfg,
    rng: np.random.Generator,
    max_depth: int = 40,
    stats: SampleStats | None = None,
    max_attempts: int = 1000,
) -> ParseTree:
    """One i.i.d. tree; derivations over max_depth are resampled."""
    for _ in range(max_attempts):
        try:
            return _expand(grammar, grammar.start, rng, max_depth)
        except DepthCapError:
            if stats is not None:
                stats.cap_hits += 1
    raise DepthCapError(f"exceeded depth cap {max_depth} in {max_attempts} consecutive attempts")


def _expand(grammar: Pcfg, symbol: str, rng, depth_left: int) -> ParseTree:
    if symbol in grammar.terminals:
        return ParseTree(symbol)
    if depth_left <= 0:
        raise DepthCapError(symbol)
    rules = grammar.expansions(symbol)
    probs = np.array([r.prob for r in rules])
    choice = rules[rng.choice(len(rules), p=probs / probs.sum())]
    children = tuple(_expand(grammar, s, rng, depth_left - 1) for s in choice.rhs)
    return ParseTree(symbol, children)


def sample_corpus(
    grammar: Pcfg,
    n_sentences: int,
    seed: int,
    max_depth: int = 40,
) -> tuple[list[ParseTree], SampleStats]:
    """Deterministic i.i.d. corpus for a seed; reports depth-cap resamples."""
    rng = np.random.default_rng(seed)
    stats = SampleStats()
    trees = [sample_tree(grammar, rng, max_depth=max_depth, stats=stats) for _ in range(n_sentences)]
    return trees, stats
