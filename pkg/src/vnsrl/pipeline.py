"""End-to-end semantic role labeller with an sklearn estimator interface.

``X`` is a sequence of ``(tree, predicate_leaf_index)`` propositions and
``y`` the matching gold ``[(span, role), ...]`` lists (REL entries ignored).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .embeddings import EmbeddingTable, load_embeddings, substitute_embedding
from .extraction import Candidate, get_extractor
from .features import FeatureBundle, FeatureVectorizer, assemble, get_feature_set
from .inference import Assignment, IlpProblem, decode
from .learning import ARG, NULL, REL, LinearClassifier, RoleSet, make_classifier
from .treebank import BracketedTree

__all__ = ["SemanticRoleLabeler", "LabelledProposition", "save_model", "load_model",
           "MODEL_FORMAT_VERSION"]

MODEL_FORMAT_VERSION = 1


@dataclass
class LabelledProposition:
    candidates: list
    labels: tuple
    problem: IlpProblem
    assignment: Assignment

    def arguments(self) -> list[tuple[tuple[int, int], str]]:
        return sorted((c.span, lab) for c, lab in zip(self.candidates, self.labels) if lab != NULL)


def _resolve_table(table):
    if table is None or isinstance(table, EmbeddingTable):
        return table
    return load_embeddings(table)


class SemanticRoleLabeler(BaseEstimator):
    """Candidate extraction, feature templates, linear scoring and ILP decoding.

    Parameters
    ----------
    feature_set : str or sequence of str
        Named set (``"phi11"``, ``"Φ4"``) or explicit template names.
    classifier : {"svm", "maxent"}
    C : float, optional
        Inverse regularisation; defaults to 0.1 for svm and 1.0 for maxent.
    strategy : {"1step", "2step"}
    extractor : {"algorithm1", "pruning", "node_mapping", "all_nodes"}
    use_ilp : bool
    constraint5 : bool
        Forbid Arg2-Arg4 for non-verbal predicates when decoding with ILP.
    predicate_embeddings, headword_embeddings : EmbeddingTable or path, optional
        Replace the one-hot predicate / head word template by averaged vectors.
    n_epochs, eta0, batch_size, random_state
        Passed to the linear classifiers.
    role_set : RoleSet, optional
    """

    def __init__(self, feature_set="phi11", classifier="svm", C=None, strategy="1step",
                 extractor="algorithm1", use_ilp=True, constraint5=True,
                 predicate_embeddings=None, headword_embeddings=None, n_epochs=50,
                 eta0=0.1, batch_size=16, random_state=0, role_set=None):
        self.feature_set = feature_set
        self.classifier = classifier
        self.C = C
        self.strategy = strategy
        self.extractor = extractor
        self.use_ilp = use_ilp
        self.constraint5 = constraint5
        self.predicate_embeddings = predicate_embeddings
        self.headword_embeddings = headword_embeddings
        self.n_epochs = n_epochs
        self.eta0 = eta0
        self.batch_size = batch_size
        self.random_state = random_state
        self.role_set = role_set

    # -- featurisation ------------------------------------------------------

    def _setup(self):
        if self.strategy not in ("1step", "2step"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.role_set_ = self.role_set or RoleSet()
        self.spec_ = get_feature_set(self.feature_set)
        self.extract_ = get_extractor(self.extractor)
        self._tables = {
            "predicate": _resolve_table(self.predicate_embeddings),
            "head_word": _resolve_table(self.headword_embeddings),
        }
        for template, table in self._tables.items():
            if table is not None and template not in self.spec_.templates:
                raise ValueError(f"cannot substitute {template!r}: not in feature set {self.spec_.name}")

    def _candidates(self, tree: BracketedTree, leaf: int) -> list[Candidate]:
        return self.extract_(tree, leaf)

    def _bundles(self, tree: BracketedTree, leaf: int, candidates) -> list[FeatureBundle]:
        pred = tree.leaf(leaf)
        out = []
        for cand in candidates:
            bundle = assemble(tree, cand, pred, self.spec_)
            for template, table in self._tables.items():
                if table is not None:
                    bundle = substitute_embedding(bundle, template, table)
            out.append(bundle)
        return out

    def _featurize(self, X):
        cands, bundles, owners = [], [], []
        for p, (tree, leaf) in enumerate(X):
            c = self._candidates(tree, leaf)
            cands.append(c)
            bundles.extend(self._bundles(tree, leaf, c))
            owners.extend([p] * len(c))
        return cands, bundles, np.asarray(owners, dtype=int)

    # -- estimator API -----------------------------------------------------------

    def _make_classifier(self, label_order):
        return make_classifier(self.classifier, self.C, eta0=self.eta0, n_epochs=self.n_epochs,
                               batch_size=self.batch_size, random_state=self.random_state,
                               label_order=label_order)

    def fit(self, X: Sequence, y: Sequence):
        """Train on propositions ``X`` with gold argument lists ``y``.

        A candidate is a positive example of a role only when its span equals
        the gold argument span exactly; all other candidates are NULL.
        """
        if len(X) != len(y):
            raise ValueError("X and y differ in length")
        self._setup()
        cands, bundles, _ = self._featurize(X)
        if not bundles:
            raise ValueError("no argument candidates in the training data")
        labels = []
        for cs, gold in zip(cands, y):
            by_span = {tuple(span): role for span, role in gold if role != REL}
            labels.extend(by_span.get(c.span, NULL) for c in cs)
        self.vectorizer_ = FeatureVectorizer().fit(bundles)
        Xm = self.vectorizer_.transform(bundles)
        order = list(self.role_set_.labels)
        if self.strategy == "1step":
            self.model_ = self._make_classifier(order).fit(Xm, labels)
            self.id_model_ = self.cls_model_ = None
        else:
            self.model_ = None
            is_arg = [lab != NULL for lab in labels]
            self.id_model_ = self._make_classifier([ARG, NULL]).fit(
                Xm, [ARG if a else NULL for a in is_arg])
            rows = np.flatnonzero(is_arg)
            self.cls_model_ = (self._make_classifier(order).fit(Xm[rows], [labels[r] for r in rows])
                               if len(rows) else None)
        return self

    def _score_matrix(self, Xm) -> tuple[tuple, np.ndarray]:
        """Candidate-by-role scores fed to the decoder."""
        n = Xm.shape[0]
        if self.strategy == "1step":
            roles = tuple(self.model_.classes_)
            scores = self.model_.decision_function(Xm) if n else np.zeros((0, len(roles)))
            if NULL not in roles:
                floor = scores.min() - 1.0 if scores.size else -1.0
                roles += (NULL,)
                scores = np.hstack([scores, np.full((n, 1), floor)])
            return roles, scores
        id_scores = self.id_model_.decision_function(Xm) if n else np.zeros((0, 2))
        id_classes = list(self.id_model_.classes_)
        null_col = id_scores[:, id_classes.index(NULL)] if NULL in id_classes else np.full(n, -1.0)
        arg_col = id_scores[:, id_classes.index(ARG)] if ARG in id_classes else np.full(n, -1.0)
        if self.cls_model_ is None:
            return (NULL,), null_col.reshape(n, 1)
        roles = tuple(self.cls_model_.classes_) + (NULL,)
        cls = self.cls_model_.decision_function(Xm) if n else np.zeros((0, len(roles) - 1))
        # best role scores exactly the identification margin, so the
        # unconstrained argmax reproduces identify-then-classify
        role_scores = arg_col[:, None] + cls - (cls.max(axis=1, keepdims=True) if n else 0.0)
        return roles, np.hstack([role_scores, null_col[:, None]])

    def label_propositions(self, X: Sequence, trace: Optional[TextIO] = None) -> list[LabelledProposition]:
        check_is_fitted(self, "vectorizer_")
        cands, bundles, owners = self._featurize(X)
        Xm = self.vectorizer_.transform(bundles)
        roles, scores = self._score_matrix(Xm)
        out = []
        for p, (tree, leaf) in enumerate(X):
            rows = np.flatnonzero(owners == p)
            problem = IlpProblem(
                scores[rows], roles, spans=tuple(c.span for c in cands[p]),
                predicate_is_verb=tree.leaf(leaf).phrase_type == "V",
                use_constraint5=self.constraint5,
            )
            assignment = decode(problem, self.use_ilp)
            if trace is not None:
                record = {"proposition": p, "predicate": leaf, "problem": problem.to_dict(),
                          "labels": list(assignment.labels), "objective": assignment.objective}
                trace.write(json.dumps(record, ensure_ascii=False) + "\n")
            out.append(LabelledProposition(cands[p], assignment.labels, problem, assignment))
        return out

    def predict(self, X: Sequence, trace: Optional[TextIO] = None) -> list[list]:
        """Predicted ``[(span, role), ...]`` per proposition, NULL omitted."""
        return [lp.arguments() for lp in self.label_propositions(X, trace)]

    def score(self, X, y) -> float:
        from .evaluation import score_labels

        pred, gold = [], []
        for p, (labels, gold_labels) in enumerate(zip(self.predict(X), y)):
            pred.extend((p, tuple(s), r) for s, r in labels)
            gold.extend((p, tuple(s), r) for s, r in gold_labels)
        return score_labels(pred, gold).f1


# -- persistence ---------------------------------------------------------------

def _table_to_json(table):
    if table is None:
        return None
    if isinstance(table, (str, Path)):
        return {"path": str(table)}
    return {"dimension": table.dimension,
            "entries": {w: v.tolist() for w, v in sorted(table.entries.items())}}


def _table_from_json(data):
    if data is None:
        return None
    if "path" in data:
        return data["path"]
    return EmbeddingTable(int(data["dimension"]),
                          {w: np.asarray(v, float) for w, v in data["entries"].items()})


def save_model(labeler: SemanticRoleLabeler, fh: TextIO) -> None:
    check_is_fitted(labeler, "vectorizer_")
    params = labeler.get_params()
    params["feature_set"] = (params["feature_set"] if isinstance(params["feature_set"], str)
                             else sorted(params["feature_set"]))
    params["predicate_embeddings"] = _table_to_json(params["predicate_embeddings"])
    params["headword_embeddings"] = _table_to_json(params["headword_embeddings"])
    rs = labeler.role_set_
    params["role_set"] = {"labels": list(rs.labels), "core": sorted(rs.core)}
    data = {
        "format": "vnsrl-model",
        "version": MODEL_FORMAT_VERSION,
        "params": params,
        "vocabulary": labeler.vectorizer_.vocabulary_,
        "dense_dims": labeler.vectorizer_.dense_dims_,
        "model": labeler.model_.to_dict() if labeler.model_ is not None else None,
        "id_model": labeler.id_model_.to_dict() if labeler.id_model_ is not None else None,
        "cls_model": labeler.cls_model_.to_dict() if labeler.cls_model_ is not None else None,
    }
    json.dump(data, fh, ensure_ascii=False)
    fh.write("\n")


def load_model(fh: TextIO) -> SemanticRoleLabeler:
    data = json.load(fh)
    if data.get("format") != "vnsrl-model" or "version" not in data:
        raise ValueError("not a model file")
    if data["version"] != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {data['version']}")
    params = dict(data["params"])
    params["predicate_embeddings"] = _table_from_json(params["predicate_embeddings"])
    params["headword_embeddings"] = _table_from_json(params["headword_embeddings"])
    rs = params["role_set"]
    params["role_set"] = RoleSet(tuple(rs["labels"]), frozenset(rs["core"]))
    labeler = SemanticRoleLabeler(**params)
    labeler._setup()
    vec = FeatureVectorizer()
    vec.vocabulary_ = dict(data["vocabulary"])
    vec.dense_dims_ = dict(data["dense_dims"])
    labeler.vectorizer_ = vec

    def clf(d):
        return LinearClassifier.from_dict(d) if d is not None else None

    labeler.model_ = clf(data["model"])
    labeler.id_model_ = clf(data["id_model"])
    labeler.cls_model_ = clf(data["cls_model"])
    return labeler
