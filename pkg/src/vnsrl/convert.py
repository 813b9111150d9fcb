"""Rule-based conversion of function-tagged trees into coarse semantic roles."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .extraction import Candidate, extract_algorithm1
from .learning import REL, RoleSet
from .treebank import BracketedTree, TreeNode

__all__ = ["ConversionRule", "RuleSet", "load_rules", "parse_rules", "convert_tree"]

TERM_KINDS = ("TAG", "TYPE", "POS", "WORDLIST")


@dataclass(frozen=True)
class ConversionRule:
    priority: int
    role: str
    alternatives: tuple  # of tuples of (kind, frozenset of values)

    def match_tier(self, tree: BracketedTree, candidate: Candidate, predicate: TreeNode,
                   wordlists: dict) -> Optional[int]:
        """Best tier among matching alternatives (0 tag, 1 type/position, 2 lexical)."""
        best = None
        for alt in self.alternatives:
            if all(_term_holds(kind, values, tree, candidate, predicate, wordlists)
                   for kind, values in alt):
                kinds = {kind for kind, _ in alt}
                tier = 0 if "TAG" in kinds else 1 if kinds & {"TYPE", "POS"} else 2
                best = tier if best is None else min(best, tier)
        return best


@dataclass(frozen=True)
class RuleSet:
    rules: tuple = ()
    wordlists: dict = None

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]


def _normalize_words(text: str) -> str:
    return " ".join(text.lower().replace("_", " ").split())


def _term_holds(kind, values, tree, candidate, predicate, wordlists) -> bool:
    node = candidate.node
    if kind == "TAG":
        return (node.function_tag or "NONE") in values
    if kind == "TYPE":
        return node.phrase_type in values
    if kind == "POS":
        where = "before" if candidate.span[1] <= predicate.span[0] else "after"
        return where in values
    if kind == "WORDLIST":
        text = _normalize_words(tree.text(candidate.span))
        for name in values:
            for entry in wordlists[name]:
                if text == entry or text.startswith(entry + " "):
                    return True
        return False
    raise ValueError(f"unknown term kind {kind!r}")


def parse_rules(text: str, role_set: RoleSet = RoleSet()) -> RuleSet:
    wordlists: dict[str, tuple] = {}
    rules: list[ConversionRule] = []
    seen_priorities: set = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("wordlist "):
            name, _, entries = line[len("wordlist "):].partition("=")
            words = tuple(_normalize_words(w) for w in entries.split("|") if w.strip())
            if not name.strip() or not words:
                raise ValueError(f"line {lineno}: malformed word list")
            wordlists[name.strip()] = words
            continue
        parts = line.split(None, 2)
        if len(parts) < 3:
            raise ValueError(f"line {lineno}: expected 'priority role trigger'")
        try:
            priority = int(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: priority must be an integer") from None
        if priority in seen_priorities:
            raise ValueError(f"line {lineno}: duplicate priority {priority}")
        seen_priorities.add(priority)
        try:
            role = role_set.canonical(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: unknown role {parts[1]!r}") from None
        alternatives = []
        for alt_text in parts[2].split("|"):
            terms = []
            for term in alt_text.split():
                kind, sep, value = term.partition("=")
                kind = kind.upper()
                if not sep or kind not in TERM_KINDS or not value:
                    raise ValueError(f"line {lineno}: bad trigger term {term!r}")
                values = frozenset(v for v in value.split(",") if v)
                if kind == "POS" and not values <= {"before", "after"}:
                    raise ValueError(f"line {lineno}: POS must be before or after")
                if kind == "WORDLIST":
                    missing = values - wordlists.keys()
                    if missing:
                        raise ValueError(f"line {lineno}: unknown word list {sorted(missing)}")
                terms.append((kind, values))
            if not terms:
                raise ValueError(f"line {lineno}: empty trigger alternative")
            alternatives.append(tuple(terms))
        rules.append(ConversionRule(priority, role, tuple(alternatives)))
    rules.sort(key=lambda r: r.priority)
    return RuleSet(tuple(rules), wordlists)


def load_rules(path: str | Path | None = None, role_set: RoleSet = RoleSet()) -> RuleSet:
    """Read a rule file; ``None`` loads the bundled default rules."""
    if path is None:
        text = resources.files("vnsrl").joinpath("data/rules.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_rules(text, role_set)


def convert_tree(tree: BracketedTree, predicate, rules: Optional[RuleSet] = None
                 ) -> list[tuple[tuple[int, int], str]]:
    """Label the predicate's candidates by the first matching rule.

    The predicate itself is labelled REL; unmatched candidates are dropped.
    Output is sorted by span.
    """
    if rules is None:
        rules = load_rules()
    candidates = extract_algorithm1(tree, predicate)
    pred = tree.leaf(predicate) if isinstance(predicate, int) else predicate
    out = [(pred.span, REL)]
    for cand in candidates:
        best = None
        for rule in rules:
            tier = rule.match_tier(tree, cand, pred, rules.wordlists)
            if tier is not None and (best is None or (tier, rule.priority) < best[0]):
                best = ((tier, rule.priority), rule.role)
        if best is not None:
            out.append((cand.span, best[1]))
    return sorted(out)
