"""Argument candidate extraction for one predicate of a bracketed tree."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

from .treebank import BracketedTree, TreeNode

__all__ = [
    "Candidate",
    "extract_algorithm1",
    "extract_pruning",
    "extract_node_mapping",
    "extract_all_nodes",
    "get_extractor",
    "EXTRACTORS",
]

PredicateRef = Union[TreeNode, int]


@dataclass(frozen=True)
class Candidate:
    span: tuple[int, int]
    node: TreeNode = field(compare=False, repr=False)
    predicate_leaf: int
    extractor: str

    def __post_init__(self):
        start, end = self.span
        if not start < end:
            raise ValueError(f"empty candidate span {self.span}")
        if start <= self.predicate_leaf < end:
            raise ValueError(f"candidate span {self.span} overlaps the predicate")


def _resolve_predicate(tree: BracketedTree, predicate: PredicateRef) -> TreeNode:
    node = tree.leaf(predicate) if isinstance(predicate, int) else predicate
    if not tree.owns(node):
        raise ValueError("predicate is not in the tree")
    if not node.is_leaf:
        raise ValueError("predicate must be a pre-terminal node")
    if node.parent is None:
        raise ValueError("tree has no nodes besides the predicate")
    return node


def _covers(node: TreeNode, index: int) -> bool:
    return node.span[0] <= index < node.span[1]


def _dedupe(nodes: list[TreeNode]) -> list[TreeNode]:
    """Keep one node per span, the shallowest, at its first position."""
    best: dict[tuple[int, int], TreeNode] = {}
    for node in nodes:
        kept = best.get(node.span)
        if kept is None or node.depth() < kept.depth():
            best[node.span] = node
    seen, out = set(), []
    for node in nodes:
        if node.span not in seen:
            seen.add(node.span)
            out.append(best[node.span])
    return out


def _candidates(nodes, pred: TreeNode, name: str) -> list[Candidate]:
    p = pred.span[0]
    return [Candidate(n.span, n, p, name) for n in nodes]


def _splits_into_children(tree: BracketedTree, node: TreeNode) -> bool:
    kids = node.children
    if len(kids) <= 1 or not tree.is_phrase(kids[0]):
        return False
    phrase_type, func_tag = kids[0].phrase_type, kids[0].function_tag
    for kid in kids[1:]:
        if kid.phrase_type != phrase_type:
            return False
        if kid.function_tag == func_tag:
            return False
    return True


def extract_algorithm1(tree: BracketedTree, predicate: PredicateRef) -> list[Candidate]:
    """Walk from the predicate to the root collecting sisters.

    A sister whose children are all phrases of one type with function tags
    different from the first child's is split into its children; any other
    sister is collected whole.
    """
    pred = _resolve_predicate(tree, predicate)
    collected = []
    current = pred
    while current.parent is not None:
        for sister in current.siblings():
            if tree.is_ignored(sister):
                continue
            if _splits_into_children(tree, sister):
                collected.extend(k for k in sister.children if not tree.is_ignored(k))
            else:
                collected.append(sister)
        current = current.parent
    return _candidates(_dedupe(collected), pred, "algorithm1")


def extract_pruning(tree: BracketedTree, predicate: PredicateRef) -> list[Candidate]:
    """Classic sister pruning.

    Levels where the current node has a coordinator sister are skipped; a PP
    sister contributes itself and its children.
    """
    pred = _resolve_predicate(tree, predicate)
    coordinators = tree.inventory.coordinator
    collected = []
    current = pred
    while current.parent is not None:
        sisters = current.siblings()
        if not any(s.phrase_type in coordinators for s in sisters):
            for sister in sisters:
                if tree.is_ignored(sister):
                    continue
                collected.append(sister)
                if sister.phrase_type == "PP" and not sister.is_leaf:
                    collected.extend(k for k in sister.children if not tree.is_ignored(k))
        current = current.parent
    return _candidates(_dedupe(collected), pred, "pruning")


def extract_node_mapping(tree: BracketedTree, predicate: PredicateRef) -> list[Candidate]:
    """Every node not covering the predicate, one per distinct span."""
    pred = _resolve_predicate(tree, predicate)
    p = pred.span[0]
    nodes = [n for n in tree.nodes() if not _covers(n, p) and not tree.is_ignored(n)]
    return _candidates(_dedupe(nodes), pred, "node_mapping")


def extract_all_nodes(tree: BracketedTree, predicate: PredicateRef) -> list[Candidate]:
    pred = _resolve_predicate(tree, predicate)
    p = pred.span[0]
    nodes = [n for n in tree.nodes() if not _covers(n, p) and not tree.is_ignored(n)]
    return _candidates(nodes, pred, "all_nodes")


EXTRACTORS: dict[str, Callable[[BracketedTree, PredicateRef], list[Candidate]]] = {
    "algorithm1": extract_algorithm1,
    "pruning": extract_pruning,
    "node_mapping": extract_node_mapping,
    "all_nodes": extract_all_nodes,
}


def get_extractor(name: str):
    key = name.replace("-", "_").lower()
    try:
        return EXTRACTORS[key]
    except KeyError:
        raise ValueError(f"unknown extractor {name!r}; choose from {sorted(EXTRACTORS)}") from None
