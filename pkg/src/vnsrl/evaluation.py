"""Labelled-argument scoring, per-role reports, cross-validation, learning curves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.base import clone

from .corpus import GoldRecord, propositions
from .learning import NULL, REL, RoleSet

__all__ = [
    "PRF",
    "FoldPlan",
    "CVResult",
    "score_labels",
    "per_role_report",
    "make_fold_plan",
    "cross_validate",
    "learning_curve",
    "extraction_scores",
    "format_report",
    "format_cv",
    "format_curve_tsv",
]

EXCLUDED = (NULL, REL)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        return cls(p, r, f1_score(p, r), tp, fp, fn)


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean ``2PR / (P + R)``, 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _filtered(items) -> set:
    return {tuple(_freeze(x) for x in item) for item in items if item[-1] not in EXCLUDED}


def _freeze(x):
    return tuple(x) if isinstance(x, list) else x


def score_labels(predicted: Iterable, gold: Iterable) -> PRF:
    """Exact-match scoring of labelled items.

    Items are tuples whose last element is the role, e.g. ``(span, role)``
    or ``(sentence, predicate, span, role)``. NULL and REL are ignored.
    """
    pred, ref = _filtered(predicted), _filtered(gold)
    tp = len(pred & ref)
    return PRF.from_counts(tp, len(pred) - tp, len(ref) - tp)


def per_role_report(predicted: Iterable, gold: Iterable, role_set: RoleSet = RoleSet()) -> dict:
    """``role -> PRF`` for roles seen on either side, plus a micro-averaged ``"total"``."""
    pred, ref = _filtered(predicted), _filtered(gold)
    roles = role_set.order({item[-1] for item in pred | ref})
    report = {}
    for role in roles:
        p = {i for i in pred if i[-1] == role}
        g = {i for i in ref if i[-1] == role}
        tp = len(p & g)
        report[role] = PRF.from_counts(tp, len(p) - tp, len(g) - tp)
    tp = len(pred & ref)
    report["total"] = PRF.from_counts(tp, len(pred) - tp, len(ref) - tp)
    return report


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: dict

    def fold(self, i: int) -> set:
        return {key for key, f in self.assignment.items() if f == i}


def make_fold_plan(ids: Sequence, k: int = 10, seed: int = 0) -> FoldPlan:
    if k < 2:
        raise ValueError("k must be at least 2 so every fold has held-out data")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds the corpus size {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ValueError("sentence ids must be unique")
    perm = np.random.default_rng(seed).permutation(len(ids))
    assignment = {ids[j]: pos % k for pos, j in enumerate(perm)}
    return FoldPlan(k, seed, assignment)


def _evaluate(estimator, train: list[GoldRecord], test: list[GoldRecord]) -> PRF:
    Xtr, ytr, _ = propositions(train)
    Xte, yte, keys = propositions(test)
    model = clone(estimator).fit(Xtr, ytr)
    predicted = model.predict(Xte)
    pred = [(k, tuple(s), r) for k, labels in zip(keys, predicted) for s, r in labels]
    gold = [(k, tuple(s), r) for k, labels in zip(keys, yte) for s, r in labels]
    return score_labels(pred, gold)


@dataclass
class CVResult:
    plan: FoldPlan
    folds: list = field(default_factory=list)

    @property
    def mean(self) -> PRF:
        """Fold-wise arithmetic means of P, R and F1 (counts are summed)."""
        n = len(self.folds)
        return PRF(
            sum(f.precision for f in self.folds) / n,
            sum(f.recall for f in self.folds) / n,
            sum(f.f1 for f in self.folds) / n,
            sum(f.tp for f in self.folds),
            sum(f.fp for f in self.folds),
            sum(f.fn for f in self.folds),
        )


def cross_validate(corpus: Sequence[GoldRecord], estimator, k: int = 10, seed: int = 0) -> CVResult:
    plan = make_fold_plan([r.id for r in corpus], k, seed)
    result = CVResult(plan)
    for i in range(k):
        test = [r for r in corpus if plan.assignment[r.id] == i]
        train = [r for r in corpus if plan.assignment[r.id] != i]
        result.folds.append(_evaluate(estimator, train, test))
    return result


def learning_curve(corpus: Sequence[GoldRecord], estimator, sizes: Sequence[int], seed: int = 0,
                   test_fraction: float = 0.1) -> list[tuple[int, PRF]]:
    """Train on growing random subsets of a fixed training split.

    Subsets are nested prefixes of one seeded permutation and keep corpus
    order, so the full training size reproduces a plain train/test run.
    """
    if not sizes:
        return []
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(corpus))
    n_test = max(1, int(math.ceil(test_fraction * len(corpus))))
    test_idx = sorted(perm[:n_test])
    pool = sorted(perm[n_test:])
    test = [corpus[i] for i in test_idx]
    order = rng.permutation(len(pool))
    out = []
    for size in sizes:
        if not 0 < size <= len(pool):
            raise ValueError(f"size {size} must be in 1..{len(pool)} (training split size)")
        chosen = sorted(pool[j] for j in order[:size])
        out.append((size, _evaluate(estimator, [corpus[i] for i in chosen], test)))
    return out


def extraction_scores(corpus: Sequence[GoldRecord], extractor) -> PRF:
    """Unlabelled span match between extracted candidates and gold arguments."""
    pred, gold = [], []
    for record in corpus:
        for p in record.predicates:
            key = (record.id, p.leaf_index)
            pred.extend((key, c.span, "ARG") for c in extractor(record.tree, p.leaf_index))
            gold.extend((key, a.span, "ARG") for a in p.arguments if a.role not in EXCLUDED)
    return score_labels(pred, gold)


def _pct(x: float) -> str:
    return f"{100 * x:6.2f}%"


def format_report(report: dict, tsv: bool = False) -> str:
    rows = [(role, prf) for role, prf in report.items()]
    if tsv:
        lines = ["role\tprecision\trecall\tf1\ttp\tfp\tfn"]
        lines += [f"{r}\t{p.precision:.6f}\t{p.recall:.6f}\t{p.f1:.6f}\t{p.tp}\t{p.fp}\t{p.fn}"
                  for r, p in rows]
        return "\n".join(lines) + "\n"
    width = max([len("role")] + [len(r) for r, _ in rows])
    lines = [f"{'role':<{width}}  {'P':>7}  {'R':>7}  {'F1':>7}  {'tp':>5}  {'fp':>5}  {'fn':>5}"]
    for r, p in rows:
        lines.append(f"{r:<{width}}  {_pct(p.precision)}  {_pct(p.recall)}  {_pct(p.f1)}  "
                     f"{p.tp:>5}  {p.fp:>5}  {p.fn:>5}")
    return "\n".join(lines) + "\n"


def format_cv(result: CVResult, tsv: bool = False) -> str:
    rows = [(f"fold{i}", f) for i, f in enumerate(result.folds)] + [("mean", result.mean)]
    return format_report(dict(rows), tsv=tsv).replace("role", "fold", 1)


def format_curve_tsv(points: Sequence[tuple[int, PRF]]) -> str:
    lines = ["size\tprecision\trecall\tf1"]
    lines += [f"{n}\t{p.precision:.6f}\t{p.recall:.6f}\t{p.f1:.6f}" for n, p in points]
    return "\n".join(lines) + "\n"
