"""Bracketed constituency trees: reading, annotation stripping, transition
oracles, and filler-gap dependency statistics from trace coindexation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

MAX_SENTENCE_TOKENS = 120

# Penn Treebank part-of-speech inventory; preterminals with these labels are
# deleted during stripping so words attach to their phrasal parent.
PTB_POS_TAGS = frozenset(
    """CC CD DT EX FW IN JJ JJR JJS LS MD NN NNS NNP NNPS PDT POS PRP PRP$
    RB RBR RBS RP SYM TO UH VB VBD VBG VBN VBP VBZ WDT WP WP$ WRB
    . , : `` '' $ # -LRB- -RRB-""".split()
)

# Labels never truncated at '-' despite containing one.
PROTECTED_LABELS = frozenset({"-NONE-", "-LRB-", "-RRB-"})


class TreeParseError(ValueError):
    """Malformed bracketed input; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EmptyTreeError(ValueError):
    """Stripping removed every terminal from the tree."""


class OracleError(ValueError):
    """Ill-formed action sequence; names the first illegal action."""


@dataclass(frozen=True)
class ParseTree:
    """Constituency node: internal nodes carry nonterminal labels, leaves words."""

    label: str
    children: tuple["ParseTree", ...] = ()

    @property
    def is_terminal(self) -> bool:
        return not self.children

    def terminals(self) -> list[str]:
        if self.is_terminal:
            return [self.label]
        out: list[str] = []
        for child in self.children:
            out.extend(child.terminals())
        return out

    def to_bracketed(self) -> str:
        if self.is_terminal:
            return self.label
        inner = " ".join(c.to_bracketed() for c in self.children)
        return f"({self.label} {inner})"

    def __str__(self):
        return self.to_bracketed()


# Generative transition actions over strings; models map these to ids.
@dataclass(frozen=True)
class Nt:
    label: str

    def __str__(self):
        return f"NT({self.label})"


@dataclass(frozen=True)
class Gen:
    word: str

    def __str__(self):
        return f"GEN({self.word})"


@dataclass(frozen=True)
class Reduce:
    def __str__(self):
        return "REDUCE"


Action = Nt | Gen | Reduce
REDUCE = Reduce()


# ---------------------------------------------------------------------------
# reading


_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def parse_bracketed(text: str) -> ParseTree:
    """Parse one s-expression tree, unwrapping the PTB `( (S ...) )` convention."""
    tokens = [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]
    if not tokens:
        raise TreeParseError("empty input", 0)
    tree, pos = _parse_node(text, tokens, 0)
    while pos < len(tokens):
        raise TreeParseError(f"trailing material {tokens[pos][0]!r}", tokens[pos][1])
    # outer wrapper: an unlabeled node with a single child
    while tree.label == "" and len(tree.children) == 1:
        tree = tree.children[0]
    if tree.label == "":
        raise TreeParseError("unlabeled multi-child root", 0)
    return tree


def _parse_node(text: str, tokens, pos: int) -> tuple[ParseTree, int]:
    tok, offset = tokens[pos]
    if tok == ")":
        raise TreeParseError("unexpected ')'", offset)
    if tok != "(":
        return ParseTree(tok), pos + 1
    pos += 1
    if pos >= len(tokens):
        raise TreeParseError("unclosed '('", offset)
    label = ""
    if tokens[pos][0] not in ("(", ")"):
        label = tokens[pos][0]
        pos += 1
    children: list[ParseTree] = []
    while True:
        if pos >= len(tokens):
            raise TreeParseError("unclosed '('", offset)
        if tokens[pos][0] == ")":
            pos += 1
            break
        child, pos = _parse_node(text, tokens, pos)
        children.append(child)
    if not children:
        raise TreeParseError(f"empty constituent {label!r}", offset)
    return ParseTree(label, tuple(children)), pos


def read_trees(path, max_tokens: int = MAX_SENTENCE_TOKENS, on_error=None, on_skip=None) -> Iterator[ParseTree]:
    """Read a treebank file: one tree per line, or blank-line-separated blocks.

    Sentences over max_tokens are skipped via on_skip; malformed blocks go to
    on_error when given, otherwise the parse error propagates.
    """
    with open(path, encoding="utf-8") as f:
        content = f.read()
    yield from iter_trees(content, max_tokens=max_tokens, on_error=on_error, on_skip=on_skip,
                          source=str(path))


def iter_trees(content: str, max_tokens=MAX_SENTENCE_TOKENS, on_error=None, on_skip=None,
               source="<string>"):
    lines = content.split("\n")
    nonblank = [line for line in lines if line.strip()]
    has_separators = len(nonblank) < sum(1 for line in lines[_first_nonblank(lines):_last_nonblank(lines) + 1])
    # blank-line separators (or a single multi-line tree) mean block mode;
    # otherwise treat each line as one tree so bad lines are reported per line
    use_blocks = has_separators or (
        not all(_balanced(line) for line in nonblank) and _balanced(content)
    )
    blocks: list[tuple[str, int]] = []
    if not use_blocks:
        blocks = [(line, i + 1) for i, line in enumerate(lines) if line.strip()]
    else:
        buf: list[str] = []
        start = 1
        for i, line in enumerate(lines):
            if line.strip():
                if not buf:
                    start = i + 1
                buf.append(line)
            elif buf:
                blocks.append(("\n".join(buf), start))
                buf = []
        if buf:
            blocks.append(("\n".join(buf), start))
    for block, lineno in blocks:
        try:
            tree = parse_bracketed(block)
        except TreeParseError as exc:
            if on_error is None:
                raise
            on_error(f"{source}:{lineno}: malformed tree: {exc}")
            continue
        if len(tree.terminals()) > max_tokens:
            if on_skip is not None:
                on_skip(f"{source}:{lineno}: skipped sentence over {max_tokens} tokens")
            continue
        yield tree


def _first_nonblank(lines) -> int:
    for i, line in enumerate(lines):
        if line.strip():
            return i
    return 0


def _last_nonblank(lines) -> int:
    for i in range(len(lines) - 1, -1, -1):
        if lines[i].strip():
            return i
    return len(lines) - 1


def _balanced(line: str) -> bool:
    depth = 0
    for ch in line:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


# ---------------------------------------------------------------------------
# stripping


def strip_label(label: str) -> str:
    """Truncate functional tags and coindexation at the first '-' or '='."""
    if label in PROTECTED_LABELS:
        return label
    cut = len(label)
    for sep in "-=":
        idx = label.find(sep)
        if idx > 0 and idx < cut:
            cut = idx
    return label[:cut]


def strip_annotations(tree: ParseTree, pos_tags: frozenset[str] = PTB_POS_TAGS) -> ParseTree:
    """Remove functional tags, coindexation, empty categories, and the POS layer.

    Empty-category terminals (under -NONE-) are deleted along with any
    internal node left childless; preterminals whose label is in pos_tags are
    deleted so the word attaches to the phrasal parent. Idempotent: a second
    pass finds no -NONE- nodes, no taggable suffixes, and no POS-labeled
    preterminals.
    """
    stripped = _strip_node(tree, pos_tags)
    if stripped is None or stripped.is_terminal:
        raise EmptyTreeError(f"tree is empty after stripping: {tree.to_bracketed()[:80]}")
    return stripped


def _strip_node(node: ParseTree, pos_tags) -> ParseTree | None:
    if node.is_terminal:
        return node
    if node.label == "-NONE-":
        return None
    label = strip_label(node.label)
    children: list[ParseTree] = []
    for child in node.children:
        kept = _strip_node(child, pos_tags)
        if kept is None:
            continue
        if not kept.is_terminal and strip_label(kept.label) in pos_tags and all(
            c.is_terminal for c in kept.children
        ):
            children.extend(kept.children)
        else:
            children.append(kept)
    if not children:
        return None
    return ParseTree(label, tuple(children))


# ---------------------------------------------------------------------------
# transition oracle


def tree_to_actions(tree: ParseTree) -> list[Action]:
    """Top-down generative oracle: NT on entry, GEN per word, REDUCE on exit."""
    if tree.is_terminal:
        raise OracleError(f"cannot build an oracle for bare terminal {tree.label!r}")
    actions: list[Action] = []
    _emit_actions(tree, actions)
    return actions


def _emit_actions(node: ParseTree, actions: list[Action]):
    actions.append(Nt(node.label))
    for child in node.children:
        if child.is_terminal:
            actions.append(Gen(child.label))
        else:
            _emit_actions(child, actions)
    actions.append(REDUCE)


def actions_to_tree(actions: Iterable[Action]) -> ParseTree:
    """Rebuild the tree, validating well-formedness action by action."""
    stack: list[tuple[str, list[ParseTree]]] = []
    done: ParseTree | None = None
    for i, action in enumerate(actions):
        if done is not None:
            raise OracleError(f"action {i} ({action}): sequence continues after completion")
        if isinstance(action, Nt):
            stack.append((action.label, []))
        elif isinstance(action, Gen):
            if not stack:
                raise OracleError(f"action {i} ({action}): GEN with no open nonterminal")
            stack[-1][1].append(ParseTree(action.word))
        elif isinstance(action, Reduce):
            if not stack:
                raise OracleError(f"action {i} (REDUCE): no open nonterminal")
            label, children = stack.pop()
            if not children:
                raise OracleError(f"action {i} (REDUCE): constituent {label!r} is empty")
            node = ParseTree(label, tuple(children))
            if stack:
                stack[-1][1].append(node)
            else:
                done = node
        else:
            raise OracleError(f"action {i}: unknown action {action!r}")
    if done is None:
        raise OracleError(f"sequence ended with {len(stack)} open nonterminal(s)")
    return done


# ---------------------------------------------------------------------------
# filler-gap statistics


@dataclass
class FillerGapCounts:
    """Dependency counts by gap position, overall and per filler word."""

    total: dict[str, int] = field(default_factory=lambda: {p: 0 for p in GAP_POSITIONS})
    by_filler: dict[str, dict[str, int]] = field(default_factory=dict)
    unresolved: int = 0

    def add(self, position: str, filler: str):
        self.total["all"] += 1
        if position in self.total:
            self.total[position] += 1
        per = self.by_filler.setdefault(filler, {p: 0 for p in GAP_POSITIONS})
        per["all"] += 1
        if position in per:
            per[position] += 1

    def merge(self, other: "FillerGapCounts"):
        for k, v in other.total.items():
            self.total[k] += v
        for filler, row in other.by_filler.items():
            mine = self.by_filler.setdefault(filler, {p: 0 for p in GAP_POSITIONS})
            for k, v in row.items():
                mine[k] += v
        self.unresolved += other.unresolved


GAP_POSITIONS = ("all", "subject", "object", "indirect_object", "other")

_WH_INDEX_RE = re.compile(r"^(WH[A-Z]*)(?:[-=][A-Z]+)*-(\d+)$")
_TRACE_RE = re.compile(r"^\*T\*-(\d+)$")

IOBJ_PREPOSITIONS = frozenset({"to", "for"})


def count_filler_gap(trees: Iterable[ParseTree]) -> FillerGapCounts:
    """Resolve WH-phrase coindexation against *T* traces and classify gaps.

    Requires raw trees (traces and coindexation retained). A gap counts as
    subject when its trace NP is the first NP child of an S node; object when
    the trace NP follows the verb inside a VP; indirect object when it is the
    first of two NP sisters under a VP or the NP object of a to/for PP next
    to the verb with a co-occurring object NP.
    """
    counts = FillerGapCounts()
    for tree in trees:
        _count_tree(tree, counts)
    return counts


def _count_tree(tree: ParseTree, counts: FillerGapCounts):
    parents: dict[int, ParseTree] = {}
    order: list[ParseTree] = []

    def walk(node: ParseTree):
        order.append(node)
        for child in node.children:
            parents[id(child)] = node
            walk(child)

    walk(tree)

    traces: dict[str, ParseTree] = {}
    for node in order:
        if node.label == "-NONE-" and node.children and node.children[0].is_terminal:
            m = _TRACE_RE.match(node.children[0].label)
            if m and m.group(1) not in traces:
                traces[m.group(1)] = node

    for node in order:
        if node.is_terminal:
            continue
        m = _WH_INDEX_RE.match(node.label)
        if not m:
            continue
        index = m.group(2)
        trace_node = traces.get(index)
        if trace_node is None:
            counts.unresolved += 1
            continue
        words = node.terminals()
        filler = words[0].lower() if words else "<empty>"
        counts.add(_classify_gap(trace_node, parents), filler)


def _base(label: str) -> str:
    return strip_label(label)


def _classify_gap(trace_preterminal: ParseTree, parents: dict[int, ParseTree]) -> str:
    holder = parents.get(id(trace_preterminal))
    if holder is None:
        return "other"
    parent = parents.get(id(holder))
    holder_base = _base(holder.label)
    if parent is None:
        return "other"
    parent_base = _base(parent.label)

    if holder_base == "NP" and parent_base in ("S", "SINV", "SQ"):
        np_children = [c for c in parent.children if not c.is_terminal and _base(c.label) == "NP"]
        if np_children and np_children[0] is holder:
            return "subject"

    if holder_base == "NP" and parent_base == "VP":
        siblings = list(parent.children)
        pos = siblings.index(holder)
        # raw PTB verbs are VB*/MD preterminals; stripped-style trees have bare words
        has_verb_before = any(
            s.is_terminal or _base(s.label).startswith("VB") or _base(s.label) == "MD"
            for s in siblings[:pos]
        )
        np_sisters = [s for s in siblings if not s.is_terminal and _base(s.label) == "NP"]
        if has_verb_before:
            if len(np_sisters) >= 2 and np_sisters[0] is holder:
                return "indirect_object"
            return "object"

    # NP object of a to/for PP sister to the verb, with a co-occurring object
    if holder_base == "NP" and parent_base == "PP":
        pp = parent
        grand = parents.get(id(pp))
        if grand is not None and _base(grand.label) == "VP":
            prep_words = [
                c.terminals()[0].lower()
                for c in pp.children
                if c is not holder and c.terminals()
            ]
            has_dobj = any(
                not s.is_terminal and _base(s.label) == "NP" for s in grand.children
            )
            if has_dobj and any(p in IOBJ_PREPOSITIONS for p in prep_words):
                return "indirect_object"

    return "other"


def filler_gap_table(counts: FillerGapCounts, filler_words: tuple[str, ...] = ("who", "what")) -> list[list[str]]:
    """Rows mirroring the dependency-statistics table, as strings for TSV output."""
    header = ["location_of_gap", "all_fillers"] + [f"'{w}'" for w in filler_words]
    rows = [header]
    labels = {
        "all": "All Positions",
        "subject": "Subject Position",
        "object": "Object Position",
        "indirect_object": "Indirect Object Position",
    }
    for key in ("all", "subject", "object", "indirect_object"):
        row = [labels[key], str(counts.total[key])]
        for w in filler_words:
            row.append(str(counts.by_filler.get(w, {}).get(key, 0)))
        rows.append(row)
    rows.append(["Unresolved", str(counts.unresolved)] + ["0"] * len(filler_words))
    return rows
