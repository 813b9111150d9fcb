"""Exact constrained decoding of candidate role scores.

A sentence's decoding problem is a binary ILP: choose one role per candidate
to maximise the summed scores, subject to

* one role per candidate,
* at most one non-NULL role in any pair of overlapping candidates,
* every core role used at most once,
* optionally, no Arg2/Arg3/Arg4 for non-verbal predicates.

``solve`` uses depth-first branch and bound; ``brute_force`` enumerates the
whole label space and is kept as an independent oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .learning import CORE_ROLES, NULL

__all__ = [
    "IlpProblem",
    "Assignment",
    "solve",
    "brute_force",
    "violations",
    "independent_argmax",
    "decode",
    "overlapping_pairs",
    "NON_VERB_FORBIDDEN",
]

NON_VERB_FORBIDDEN = frozenset({"Arg2", "Arg3", "Arg4"})
BRUTE_FORCE_LIMIT = 10 ** 7


def overlapping_pairs(spans: Sequence[tuple[int, int]]) -> frozenset:
    pairs = set()
    for i, (a0, a1) in enumerate(spans):
        for j in range(i + 1, len(spans)):
            b0, b1 = spans[j]
            if a0 < b1 and b0 < a1:
                pairs.add((i, j))
    return frozenset(pairs)


@dataclass(frozen=True)
class IlpProblem:
    scores: np.ndarray
    roles: tuple
    spans: tuple = ()
    predicate_is_verb: bool = True
    overlap_pairs: Optional[frozenset] = None
    use_constraint5: bool = True
    core: frozenset = frozenset(CORE_ROLES)
    null: str = NULL

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        if scores.ndim != 2:
            scores = scores.reshape(len(self.spans) if self.spans else 0, len(self.roles))
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "roles", tuple(self.roles))
        M, R = scores.shape
        if R != len(self.roles):
            raise ValueError(f"scores have {R} columns for {len(self.roles)} roles")
        if np.isnan(scores).any():
            raise ValueError("NaN in scores")
        if not np.isfinite(scores).all():
            raise ValueError("scores must be finite")
        if self.null not in self.roles:
            raise ValueError(f"role set must contain {self.null!r}")
        spans = tuple(tuple(s) for s in self.spans)
        if spans and len(spans) != M:
            raise ValueError("one span per candidate required")
        object.__setattr__(self, "spans", spans)
        if self.overlap_pairs is None:
            pairs = overlapping_pairs(spans)
        else:
            pairs = set()
            for i, j in self.overlap_pairs:
                if i == j:
                    raise ValueError("overlap pairs must be irreflexive")
                if not (0 <= i < M and 0 <= j < M):
                    raise ValueError(f"overlap pair {(i, j)} out of range")
                pairs.add((min(i, j), max(i, j)))
            pairs = frozenset(pairs)
        object.__setattr__(self, "overlap_pairs", pairs)

    @property
    def n_candidates(self) -> int:
        return self.scores.shape[0]

    @property
    def null_index(self) -> int:
        return self.roles.index(self.null)

    def allowed(self) -> np.ndarray:
        """Boolean ``(R,)`` mask of roles permitted for every candidate."""
        mask = np.ones(len(self.roles), dtype=bool)
        if self.use_constraint5 and not self.predicate_is_verb:
            for k, role in enumerate(self.roles):
                if role in NON_VERB_FORBIDDEN:
                    mask[k] = False
        return mask

    def core_indices(self) -> list[int]:
        return [k for k, role in enumerate(self.roles) if role in self.core]

    def objective(self, label_indices: Sequence[int]) -> float:
        return math.fsum(self.scores[i, k] for i, k in enumerate(label_indices))

    def to_dict(self) -> dict:
        return {
            "roles": list(self.roles),
            "scores": self.scores.tolist(),
            "spans": [list(s) for s in self.spans],
            "predicate_is_verb": self.predicate_is_verb,
            "overlap_pairs": sorted(list(p) for p in self.overlap_pairs),
            "use_constraint5": self.use_constraint5,
        }


@dataclass(frozen=True)
class Assignment:
    labels: tuple
    objective: float
    indices: tuple = field(default=(), compare=False, repr=False)


def violations(problem: IlpProblem, labels: Sequence[str]) -> list[str]:
    """Human-readable list of constraint violations; empty when feasible."""
    out = []
    if len(labels) != problem.n_candidates:
        out.append(f"expected {problem.n_candidates} labels, got {len(labels)}")
        return out
    for i, label in enumerate(labels):
        if label not in problem.roles:
            out.append(f"candidate {i}: unknown role {label!r}")
    for i, j in sorted(problem.overlap_pairs):
        if labels[i] != problem.null and labels[j] != problem.null:
            out.append(f"overlapping candidates {i} and {j} are both arguments")
    for role in problem.core:
        count = sum(1 for label in labels if label == role)
        if count > 1:
            out.append(f"core role {role} used {count} times")
    if problem.use_constraint5 and not problem.predicate_is_verb:
        for i, label in enumerate(labels):
            if label in NON_VERB_FORBIDDEN:
                out.append(f"candidate {i}: {label} with a non-verbal predicate")
    return out


def _better(obj: float, idx: tuple, best_obj: float, best_idx: tuple) -> bool:
    return obj > best_obj or (obj == best_obj and idx < best_idx)


def solve(problem: IlpProblem) -> Assignment:
    """Optimal feasible assignment by branch and bound.

    Among equal optima the lexicographically smallest sequence of role
    indices wins. The bound is the partial score plus each remaining
    candidate's best permitted score, or its NULL score once an overlapping
    candidate holds an argument. Candidates with the widest gap between their
    two best permitted scores are branched on first.
    """
    S = problem.scores
    M, R = S.shape
    null = problem.null_index
    allowed = problem.allowed()
    allowed_idx = np.flatnonzero(allowed)
    core = set(problem.core_indices())
    neighbours = [set() for _ in range(M)]
    for i, j in problem.overlap_pairs:
        neighbours[i].add(j)
        neighbours[j].add(i)

    if M == 0:
        return Assignment((), 0.0, ())

    best_allowed = np.empty(M)
    gaps = np.empty(M)
    options = []
    for i in range(M):
        row = S[i, allowed_idx]
        ranked = sorted(range(len(allowed_idx)), key=lambda k: (-row[k], allowed_idx[k]))
        options.append([int(allowed_idx[k]) for k in ranked])
        best_allowed[i] = row[ranked[0]]
        gaps[i] = row[ranked[0]] - row[ranked[1]] if len(ranked) > 1 else math.inf
    order = sorted(range(M), key=lambda i: (-gaps[i], i))
    slack = 1e-9 * (1.0 + float(np.abs(S).sum()))

    labels = [null] * M
    best_idx = tuple(labels)
    best_obj = problem.objective(best_idx)
    used_core: set = set()
    # number of assigned argument neighbours; a blocked candidate can only be NULL
    blocked = [0] * M

    def bound(pos: int) -> float:
        return sum(S[j, null] if blocked[j] else best_allowed[j] for j in order[pos:])

    def search(pos: int, partial: float):
        nonlocal best_idx, best_obj
        if pos == M:
            idx = tuple(labels)
            obj = problem.objective(idx)
            if _better(obj, idx, best_obj, best_idx):
                best_obj, best_idx = obj, idx
            return
        i = order[pos]
        if blocked[i]:
            candidates = [null]
        else:
            candidates = options[i]
        rest = bound(pos + 1)
        for k in candidates:
            # options are sorted by score, so every later option fails the bound too
            if partial + S[i, k] + rest < best_obj - slack:
                break
            if k != null and k in used_core:
                continue
            labels[i] = k
            is_core = k in core
            if is_core:
                used_core.add(k)
            is_arg = k != null
            if is_arg:
                for j in neighbours[i]:
                    blocked[j] += 1
                sub = partial + S[i, k]
                if sub + bound(pos + 1) >= best_obj - slack:
                    search(pos + 1, sub)
                for j in neighbours[i]:
                    blocked[j] -= 1
            else:
                search(pos + 1, partial + S[i, k])
            if is_core:
                used_core.discard(k)
        labels[i] = null

    search(0, 0.0)
    return Assignment(tuple(problem.roles[k] for k in best_idx), best_obj, best_idx)


def brute_force(problem: IlpProblem, limit: int = BRUTE_FORCE_LIMIT) -> Assignment:
    """Exhaustive enumeration of all ``R**M`` labelings (vectorised)."""
    S = problem.scores
    M, R = S.shape
    if R ** M > limit:
        raise ValueError(f"instance too large for brute force: {R}^{M} > {limit}")
    if M == 0:
        return Assignment((), 0.0, ())
    null = problem.null_index
    allowed = problem.allowed()
    roles_axis = np.arange(R)

    def on_axis(vec, i):
        shape = [1] * M
        shape[i] = R
        return np.asarray(vec).reshape(shape)

    total = np.zeros((R,) * M)
    feasible = np.ones((R,) * M, dtype=bool)
    for i in range(M):
        total = total + on_axis(S[i], i)
        feasible &= on_axis(allowed, i)
    for c in problem.core_indices():
        count = np.zeros((1,) * M, dtype=np.int16)
        for i in range(M):
            count = count + on_axis(roles_axis == c, i)
        feasible &= count <= 1
    for i, j in problem.overlap_pairs:
        feasible &= ~(on_axis(roles_axis != null, i) & on_axis(roles_axis != null, j))

    flat = np.flatnonzero(feasible.ravel())
    values = total.ravel()[flat]
    top = values.max()
    near = flat[values >= top - 1e-9 * (1.0 + abs(top))]
    best_idx, best_obj = None, -math.inf
    # C-order flat indices are already in lexicographic order of label tuples
    for f in near:
        idx = tuple(int(k) for k in np.unravel_index(f, (R,) * M))
        obj = problem.objective(idx)
        if best_idx is None or _better(obj, idx, best_obj, best_idx):
            best_obj, best_idx = obj, idx
    return Assignment(tuple(problem.roles[k] for k in best_idx), best_obj, best_idx)


def independent_argmax(problem: IlpProblem) -> Assignment:
    """Unconstrained per-candidate argmax; the first role wins ties."""
    idx = tuple(int(k) for k in np.argmax(problem.scores, axis=1)) if problem.n_candidates else ()
    return Assignment(tuple(problem.roles[k] for k in idx), problem.objective(idx), idx)


def decode(problem: IlpProblem, use_ilp: bool = True) -> Assignment:
    return solve(problem) if use_ilp else independent_argmax(problem)
