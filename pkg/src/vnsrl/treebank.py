"""Bracketed constituency trees in VietTreeBank style.

Labels look like ``NP-SUB``, ``V-H`` or ``NP-DOB-H``: a phrase type, an
optional function tag and an optional trailing head marker. Pre-terminals
carry their token directly, so ``(N-H Bà)`` is a single leaf node.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

__all__ = [
    "NodeLabel",
    "TreeNode",
    "BracketedTree",
    "TagInventory",
    "TreeParseError",
    "load_tag_inventory",
    "parse_tree",
    "render_tree",
    "read_treebank",
    "find_predicates",
]

HEAD_MARKER = "H"


class TreeParseError(ValueError):
    """Malformed bracketed input. ``offset`` is a byte offset into the UTF-8 text."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.message = message
        self.offset = offset


@dataclass(frozen=True)
class TagInventory:
    phrasal: frozenset = frozenset()
    ignore: frozenset = frozenset()
    passive_aux: frozenset = frozenset()
    coordinator: frozenset = frozenset({"CC"})

    @classmethod
    def from_dict(cls, data: dict) -> "TagInventory":
        return cls(
            phrasal=frozenset(data.get("phrasal", ())),
            ignore=frozenset(data.get("ignore", ())),
            passive_aux=frozenset(w.lower() for w in data.get("passive_aux", ())),
            coordinator=frozenset(data.get("coordinator", ("CC",))),
        )


def load_tag_inventory(path: str | Path | None = None) -> TagInventory:
    """Load a tag inventory JSON file; ``None`` gives the bundled default."""
    if path is None:
        text = resources.files("vnsrl").joinpath("data/tags.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return TagInventory.from_dict(json.loads(text))


DEFAULT_TAGS = load_tag_inventory()


@dataclass(frozen=True)
class NodeLabel:
    phrase_type: str
    function_tag: Optional[str] = None
    head_marker: bool = False

    def __post_init__(self):
        if not self.phrase_type:
            raise ValueError("phrase_type must be non-empty")

    @classmethod
    def parse(cls, raw: str) -> "NodeLabel":
        # labels such as "-NONE-" or "-LRB-" are atomic
        if raw.startswith("-") or "-" not in raw:
            return cls(raw)
        parts = raw.split("-")
        head = len(parts) > 1 and parts[-1] == HEAD_MARKER
        if head:
            parts = parts[:-1]
        tag = "-".join(parts[1:]) or None
        return cls(parts[0], tag, head)

    def __str__(self) -> str:
        out = self.phrase_type
        if self.function_tag:
            out += "-" + self.function_tag
        if self.head_marker:
            out += "-" + HEAD_MARKER
        return out


class TreeNode:
    """A constituent. Leaves (pre-terminals) have a token and no children."""

    __slots__ = ("label", "children", "token", "span", "parent")

    def __init__(self, label: NodeLabel, children: Sequence["TreeNode"] = (),
                 token: Optional[str] = None, span: tuple[int, int] = (0, 0)):
        if (token is None) == (not children):
            raise ValueError("a node has either a token or at least one child")
        self.label = label
        self.children = tuple(children)
        self.token = token
        self.span = span
        self.parent: Optional[TreeNode] = None
        for child in self.children:
            child.parent = self

    def __repr__(self) -> str:
        if self.is_leaf:
            return f"<TreeNode {self.label} {self.token!r} {self.span}>"
        return f"<TreeNode {self.label} {self.span}>"

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    @property
    def phrase_type(self) -> str:
        return self.label.phrase_type

    @property
    def function_tag(self) -> Optional[str]:
        return self.label.function_tag

    @property
    def root(self) -> "TreeNode":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def path_to_root(self) -> list["TreeNode"]:
        """Ancestors from the parent up to and including the root."""
        out = []
        node = self.parent
        while node is not None:
            out.append(node)
            node = node.parent
        return out

    def siblings(self) -> list["TreeNode"]:
        if self.parent is None:
            return []
        return [c for c in self.parent.children if c is not self]

    def iter_nodes(self) -> Iterator["TreeNode"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def iter_leaves(self) -> Iterator["TreeNode"]:
        return (n for n in self.iter_nodes() if n.is_leaf)

    def depth(self) -> int:
        return len(self.path_to_root())

    def render(self) -> str:
        if self.is_leaf:
            return f"({self.label} {self.token})"
        return f"({self.label} {' '.join(c.render() for c in self.children)})"

    def structure(self):
        """Hashable nested tuple used for structural comparison."""
        if self.is_leaf:
            return (str(self.label), self.token)
        return (str(self.label), tuple(c.structure() for c in self.children))


@dataclass(frozen=True, eq=False)
class BracketedTree:
    root: TreeNode
    inventory: TagInventory = field(default=DEFAULT_TAGS, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "leaf_nodes", tuple(self.root.iter_leaves()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BracketedTree):
            return NotImplemented
        return self.root.structure() == other.root.structure()

    def __hash__(self) -> int:
        return hash(self.root.structure())

    def __len__(self) -> int:
        return len(self.leaf_nodes)

    def __str__(self) -> str:
        return self.root.render()

    @property
    def leaves(self) -> tuple[tuple[str, str], ...]:
        """(token, part-of-speech label) pairs in surface order."""
        return tuple((n.token, str(n.label)) for n in self.leaf_nodes)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(n.token for n in self.leaf_nodes)

    def nodes(self) -> Iterator[TreeNode]:
        return self.root.iter_nodes()

    def owns(self, node: TreeNode) -> bool:
        return node.root is self.root

    def check_owned(self, node: TreeNode) -> None:
        if not self.owns(node):
            raise ValueError(f"node {node!r} does not belong to this tree")

    def leaf(self, index: int) -> TreeNode:
        if not 0 <= index < len(self.leaf_nodes):
            raise IndexError(f"leaf index {index} out of range for {len(self)} leaves")
        return self.leaf_nodes[index]

    def is_phrase(self, node: TreeNode) -> bool:
        return not node.is_leaf and node.phrase_type in self.inventory.phrasal

    def is_ignored(self, node: TreeNode) -> bool:
        return node.phrase_type in self.inventory.ignore

    def path_to_root(self, node: TreeNode) -> list[TreeNode]:
        self.check_owned(node)
        return node.path_to_root()

    def siblings(self, node: TreeNode) -> list[TreeNode]:
        self.check_owned(node)
        return node.siblings()

    def text(self, span: tuple[int, int], readable: bool = False) -> str:
        words = self.tokens[span[0]:span[1]]
        out = " ".join(words)
        return out.replace("_", " ") if readable else out


_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str):
    # (token, byte offset)
    byte_pos = 0
    last = 0
    for m in _TOKEN_RE.finditer(text):
        byte_pos += len(text[last:m.start()].encode("utf-8"))
        last = m.start()
        yield m.group(), byte_pos


def parse_tree(text: str, inventory: TagInventory = DEFAULT_TAGS) -> BracketedTree:
    """Parse one bracketed tree.

    Whitespace-separated tokens inside a single pre-terminal (``(N-H con trai)``)
    are joined with underscores into one word. A label-less outer wrapper, as in
    ``( (S ...) )``, is removed.
    """
    tokens = list(_tokenize(text))
    end_offset = len(text.encode("utf-8"))
    if not tokens:
        raise TreeParseError("empty input", 0)
    pos = 0
    leaf_count = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, end_offset)

    def parse_node() -> Optional[TreeNode]:
        nonlocal pos, leaf_count
        tok, off = peek()
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", off)
        open_off = off
        pos += 1
        tok, off = peek()
        if tok is None:
            raise TreeParseError("unexpected end of input", off)
        if tok == ")":
            raise TreeParseError("empty node", open_off)
        label = None
        if tok != "(":
            label = NodeLabel.parse(tok)
            pos += 1
        start = leaf_count
        words, children = [], []
        while True:
            tok, off = peek()
            if tok is None:
                raise TreeParseError("unbalanced parentheses: unexpected end of input", off)
            if tok == ")":
                pos += 1
                break
            if tok == "(":
                if words:
                    raise TreeParseError("leaf with children", off)
                child = parse_node()
                children.append(child)
            else:
                if children:
                    raise TreeParseError("leaf with children", off)
                words.append(tok)
                pos += 1
        if label is None:
            if len(children) != 1:
                raise TreeParseError("unlabelled node must wrap exactly one tree", open_off)
            return children[0]
        if words:
            leaf_count += 1
            return TreeNode(label, token="_".join(words), span=(start, start + 1))
        if not children:
            raise TreeParseError("empty node", open_off)
        return TreeNode(label, children, span=(start, leaf_count))

    root = parse_node()
    tok, off = peek()
    if tok is not None:
        raise TreeParseError(f"trailing input {tok!r}", off)
    return BracketedTree(root, inventory)


def render_tree(tree: BracketedTree) -> str:
    return tree.root.render()


def read_treebank(lines: Iterable[str], inventory: TagInventory = DEFAULT_TAGS
                  ) -> Iterator[tuple[int, BracketedTree]]:
    """Yield ``(line_number, tree)`` for each non-blank line."""
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield lineno, parse_tree(line, inventory)
        except TreeParseError as exc:
            raise TreeParseError(f"line {lineno}: {exc.message}", exc.offset) from None


def find_predicates(tree: BracketedTree, leaf_indices: Iterable[int]) -> list[TreeNode]:
    """Pre-terminals at the annotated predicate positions. No guessing."""
    return [tree.leaf(i) for i in leaf_indices]
