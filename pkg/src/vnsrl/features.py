"""Feature templates for argument candidates and their one-hot encoding."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .extraction import Candidate
from .treebank import BracketedTree, TreeNode

__all__ = [
    "TEMPLATES",
    "UP",
    "DOWN",
    "FeatureBundle",
    "FeatureSetSpec",
    "FeatureVector",
    "FeatureVectorizer",
    "assemble",
    "check_feature_set_algebra",
    "feature_distance",
    "feature_function_tag",
    "feature_head_word",
    "feature_path",
    "feature_phrase_type",
    "feature_position",
    "feature_predicate_type",
    "feature_predicate_word",
    "feature_subcategorization",
    "feature_voice",
    "get_feature_set",
    "load_feature_sets",
    "tree_path",
]

UP = "↑"
DOWN = "↓"
NONE_TAG = "NONE"

TEMPLATES = (
    "predicate",
    "phrase_type",
    "path",
    "position",
    "voice",
    "head_word",
    "subcategorization",
    "function_tag",
    "distance",
    "predicate_type",
)


def _lowest_common_ancestor(a: TreeNode, b: TreeNode) -> TreeNode:
    ancestors = {id(a)}
    ancestors.update(id(n) for n in a.path_to_root())
    node = b
    while id(node) not in ancestors:
        node = node.parent
        if node is None:
            raise ValueError("nodes belong to different trees")
    return node


def _path_nodes(a: TreeNode, b: TreeNode) -> tuple[list[TreeNode], list[TreeNode]]:
    top = _lowest_common_ancestor(a, b)
    up = [a]
    while up[-1] is not top:
        up.append(up[-1].parent)
    down = [b]
    while down[-1] is not top:
        down.append(down[-1].parent)
    return up, list(reversed(down[:-1]))


def tree_path(a: TreeNode, b: TreeNode) -> str:
    """Phrase types from ``a`` up to the common ancestor and down to ``b``."""
    up, down = _path_nodes(a, b)
    out = UP.join(n.phrase_type for n in up)
    for node in down:
        out += DOWN + node.phrase_type
    return out


def feature_phrase_type(candidate: Candidate) -> str:
    return candidate.node.phrase_type


def feature_path(tree: BracketedTree, candidate: Candidate, predicate: TreeNode) -> str:
    return tree_path(candidate.node, predicate)


def feature_position(candidate: Candidate, predicate: TreeNode) -> int:
    return 0 if candidate.span[1] <= predicate.span[0] else 1


def feature_voice(tree: BracketedTree, predicate: TreeNode) -> int:
    """0 when a passive auxiliary directly precedes the predicate inside its VP."""
    p = predicate.span[0]
    if p == 0:
        return 1
    scope = predicate.parent
    for node in predicate.path_to_root():
        if node.phrase_type == "VP":
            scope = node
            break
    if scope is None or scope.span[0] > p - 1:
        return 1
    prev = tree.tokens[p - 1].lower()
    return 0 if prev in tree.inventory.passive_aux else 1


def feature_head_word(tree: BracketedTree, candidate: Candidate) -> str:
    # first word of the phrase, not a head-rule head
    return tree.tokens[candidate.span[0]]


def feature_subcategorization(predicate: TreeNode) -> str:
    parent = predicate.parent
    if parent is None:
        return predicate.phrase_type
    kids = ", ".join(c.phrase_type for c in parent.children)
    return f"{parent.phrase_type}({kids})"


def feature_function_tag(candidate: Candidate) -> str:
    return candidate.node.function_tag or NONE_TAG


def feature_distance(candidate: Candidate, predicate: TreeNode) -> int:
    up, down = _path_nodes(candidate.node, predicate)
    return len(up) - 1 + len(down)


def feature_predicate_type(predicate: TreeNode) -> str:
    return predicate.phrase_type


def feature_predicate_word(predicate: TreeNode) -> str:
    return predicate.token


_EXTRACTORS = {
    "predicate": lambda t, c, p: feature_predicate_word(p),
    "phrase_type": lambda t, c, p: feature_phrase_type(c),
    "path": lambda t, c, p: feature_path(t, c, p),
    "position": lambda t, c, p: feature_position(c, p),
    "voice": lambda t, c, p: feature_voice(t, p),
    "head_word": lambda t, c, p: feature_head_word(t, c),
    "subcategorization": lambda t, c, p: feature_subcategorization(p),
    "function_tag": lambda t, c, p: feature_function_tag(c),
    "distance": lambda t, c, p: feature_distance(c, p),
    "predicate_type": lambda t, c, p: feature_predicate_type(p),
}


@dataclass(frozen=True)
class FeatureSetSpec:
    name: str
    templates: frozenset

    def __post_init__(self):
        if not self.templates:
            raise ValueError(f"feature set {self.name!r} is empty")
        unknown = set(self.templates) - set(TEMPLATES)
        if unknown:
            raise ValueError(f"unknown feature templates {sorted(unknown)}")

    def ordered(self) -> list[str]:
        return [t for t in TEMPLATES if t in self.templates]


@dataclass
class FeatureBundle:
    """Template values for one candidate; ``dense`` holds substituted embeddings."""

    values: dict = field(default_factory=dict)
    dense: dict = field(default_factory=dict)

    def __getitem__(self, template):
        if template in self.dense:
            return self.dense[template]
        return self.values[template]

    def __contains__(self, template) -> bool:
        return template in self.values or template in self.dense


def assemble(tree: BracketedTree, candidate: Candidate, predicate: TreeNode,
             spec: Optional[FeatureSetSpec] = None) -> FeatureBundle:
    if spec is None:
        spec = get_feature_set("phi11")
    values = {t: _EXTRACTORS[t](tree, candidate, predicate) for t in spec.ordered()}
    return FeatureBundle(values)


def normalize_set_name(name: str) -> str:
    return name.strip().lower().replace("φ", "phi").replace("_", "")


def _parse_feature_sets(text: str) -> dict[str, FeatureSetSpec]:
    sets: dict[str, frozenset] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'name = expression'")
        name, expr = (s.strip() for s in line.split("=", 1))
        key = normalize_set_name(name)
        acc: set = set()
        op = "+"
        for tok in re.findall(r"[+-]|[^\s+-]+", expr):
            if tok in "+-":
                op = tok
                continue
            ref = normalize_set_name(tok)
            if ref in sets:
                term = set(sets[ref])
            elif tok in TEMPLATES:
                term = {tok}
            else:
                raise ValueError(f"line {lineno}: unknown template or set {tok!r}")
            acc = acc | term if op == "+" else acc - term
            op = "+"
        sets[key] = frozenset(acc)
    specs = {k: FeatureSetSpec(k, v) for k, v in sets.items()}
    check_feature_set_algebra(specs)
    return specs


def check_feature_set_algebra(specs: Mapping[str, FeatureSetSpec]) -> None:
    """Verify the defining identities among phi0..phi13 for the sets present."""
    def t(name):
        return specs[name].templates if name in specs else None

    rules = {
        "phi1": ("phi0", {"function_tag"}, set()),
        "phi2": ("phi0", {"predicate_type"}, set()),
        "phi3": ("phi0", {"distance"}, set()),
        "phi4": ("phi0", {"function_tag", "distance"}, set()),
        "phi5": ("phi4", set(), {"function_tag"}),
        "phi6": ("phi4", set(), {"distance"}),
        "phi7": ("phi4", set(), {"head_word"}),
        "phi8": ("phi4", set(), {"path"}),
        "phi9": ("phi4", set(), {"position"}),
        "phi10": ("phi4", set(), {"voice"}),
        "phi11": ("phi4", set(), {"subcategorization"}),
        "phi12": ("phi4", set(), {"predicate"}),
        "phi13": ("phi4", set(), {"phrase_type"}),
    }
    for name, (base, plus, minus) in rules.items():
        if t(name) is None or t(base) is None:
            continue
        expected = (set(t(base)) | plus) - minus
        if set(t(name)) != expected:
            raise ValueError(f"feature set {name} violates {base} algebra: "
                             f"{sorted(t(name))} != {sorted(expected)}")


def load_feature_sets(path: str | Path | None = None) -> dict[str, FeatureSetSpec]:
    if path is None:
        text = resources.files("vnsrl").joinpath("data/featuresets.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return _parse_feature_sets(text)


_DEFAULT_SETS = load_feature_sets()


def get_feature_set(name, sets: Optional[Mapping[str, FeatureSetSpec]] = None) -> FeatureSetSpec:
    """Look up a feature set by name (``phi11``, ``Φ11``), or wrap a template list."""
    if isinstance(name, FeatureSetSpec):
        return name
    if not isinstance(name, str):
        return FeatureSetSpec("custom", frozenset(name))
    sets = _DEFAULT_SETS if sets is None else sets
    key = normalize_set_name(name)
    if key not in sets:
        raise ValueError(f"unknown feature set {name!r}")
    return sets[key]


@dataclass(frozen=True)
class FeatureVector:
    indices: tuple[int, ...]
    dense: tuple[np.ndarray, ...] = ()


class FeatureVectorizer(TransformerMixin, BaseEstimator):
    """One-hot encoder for ``(template, value)`` pairs plus appended dense blocks.

    Works like ``DictVectorizer`` but keeps dense embedding blocks apart. Pairs
    unseen during ``fit`` are dropped at transform time.

    Attributes
    ----------
    vocabulary_ : dict
        ``"template=value"`` -> column index, in first-seen order.
    dense_dims_ : dict
        Substituted template -> block dimension, in first-seen order.
    """

    def fit(self, X: Sequence[FeatureBundle], y=None):
        vocab: dict[str, int] = {}
        dense: dict[str, int] = {}
        for bundle in X:
            for key in _keys(bundle):
                if key not in vocab:
                    vocab[key] = len(vocab)
            for name, vec in bundle.dense.items():
                dim = len(vec)
                if dense.setdefault(name, dim) != dim:
                    raise ValueError(f"dense block {name!r} changes dimension")
        self.vocabulary_ = vocab
        self.dense_dims_ = dense
        return self

    @property
    def n_features_(self) -> int:
        return len(self.vocabulary_) + sum(self.dense_dims_.values())

    def vectorize(self, bundle: FeatureBundle) -> FeatureVector:
        check_is_fitted(self, "vocabulary_")
        idx = tuple(self.vocabulary_[k] for k in _keys(bundle) if k in self.vocabulary_)
        blocks = []
        for name, dim in self.dense_dims_.items():
            vec = np.asarray(bundle.dense[name], dtype=float)
            if vec.shape != (dim,):
                raise ValueError(f"dense block {name!r} must have dimension {dim}")
            blocks.append(vec)
        return FeatureVector(idx, tuple(blocks))

    def transform(self, X: Sequence[FeatureBundle]):
        check_is_fitted(self, "vocabulary_")
        n_onehot = len(self.vocabulary_)
        rows, cols, vals = [], [], []
        for r, bundle in enumerate(X):
            fv = self.vectorize(bundle)
            rows.extend([r] * len(fv.indices))
            cols.extend(fv.indices)
            vals.extend([1.0] * len(fv.indices))
            offset = n_onehot
            for block in fv.dense:
                nz = np.flatnonzero(block)
                rows.extend([r] * len(nz))
                cols.extend((offset + nz).tolist())
                vals.extend(block[nz].tolist())
                offset += len(block)
        shape = (len(X), self.n_features_)
        return sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=float)


def _keys(bundle: FeatureBundle) -> list[str]:
    return [f"{t}={v}" for t, v in bundle.values.items()]
