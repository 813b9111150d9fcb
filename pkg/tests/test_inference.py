import itertools

import numpy as np
import pytest

from vnsrl.inference import (IlpProblem, brute_force, decode, independent_argmax,
                             overlapping_pairs, solve, violations)
from vnsrl.learning import DEFAULT_ROLES, NULL


# 27 labels plus NULL reaches the 28-role ceiling
ROLE_POOL = DEFAULT_ROLES + ("Arg5",)


def random_problem(rng, max_m=8, max_roles=28, max_space=200_000, ties=False):
    """Random instance with ``|roles| ** M`` small enough for the oracle."""
    n_roles = int(rng.integers(2, max_roles + 1))
    m = int(rng.integers(0, max_m + 1))
    while m and n_roles ** m > max_space:
        m -= 1
    others = list(rng.choice(ROLE_POOL, size=n_roles - 1, replace=False))
    roles = others + [NULL]
    if ties:
        scores = rng.integers(-2, 3, size=(m, n_roles)).astype(float)
    else:
        scores = rng.uniform(-1, 1, size=(m, n_roles))
    pairs = {(i, j) for i in range(m) for j in range(i + 1, m) if rng.random() < 0.25}
    return IlpProblem(scores, roles, predicate_is_verb=bool(rng.random() < 0.5),
                      overlap_pairs=frozenset(pairs), use_constraint5=bool(rng.random() < 0.8))


def test_single_argmax():
    a = solve(IlpProblem([[2.0, 1.0]], ["Arg0", NULL], spans=[(0, 1)]))
    assert a.labels == ("Arg0",) and a.objective == 2.0


def test_core_uniqueness_example():
    problem = IlpProblem([[3.0, 1.0, 0.0], [2.5, 2.4, 0.0]], ["Arg0", "Arg1", NULL],
                         spans=[(0, 1), (2, 3)])
    for assignment in (solve(problem), brute_force(problem)):
        assert assignment.labels == ("Arg0", "Arg1")
        assert assignment.objective == pytest.approx(5.4, abs=1e-12)


def test_constraint5_example():
    problem = IlpProblem([[5.0, 1.0, 0.0]], ["Arg2", "Arg1", NULL], spans=[(0, 1)],
                         predicate_is_verb=False)
    assert solve(problem).labels == ("Arg1",)
    relaxed = IlpProblem([[5.0, 1.0, 0.0]], ["Arg2", "Arg1", NULL], spans=[(0, 1)],
                         predicate_is_verb=False, use_constraint5=False)
    assert solve(relaxed).labels == ("Arg2",)


def test_empty_problem():
    problem = IlpProblem(np.zeros((0, 3)), ["Arg0", "Arg1", NULL])
    for assignment in (solve(problem), brute_force(problem)):
        assert assignment.labels == () and assignment.objective == 0.0


def test_all_negative_gives_null():
    problem = IlpProblem([[-1.0, -2.0, 0.0]] * 3, ["Arg0", "ArgM-LOC", NULL])
    assert set(solve(problem).labels) == {NULL}
    assert set(brute_force(problem).labels) == {NULL}


def test_overlap_keeps_better_candidate():
    problem = IlpProblem([[1.0, 0.0], [2.0, 0.0]], ["ArgM-LOC", NULL], spans=[(0, 3), (1, 2)])
    assert problem.overlap_pairs == {(0, 1)}
    assert solve(problem).labels == (NULL, "ArgM-LOC")


def test_duplicate_arg0_demotes_lower():
    problem = IlpProblem([[2.0, 0.0], [1.5, 0.0], [0.5, 0.0]], ["Arg0", NULL],
                         spans=[(0, 1), (1, 2), (2, 3)])
    assert solve(problem).labels == ("Arg0", NULL, NULL)


def test_ties_prefer_smallest_index_sequence():
    problem = IlpProblem([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]], ["Arg0", "Arg1", NULL])
    assert solve(problem).labels == ("Arg0", "Arg1")
    assert brute_force(problem).labels == ("Arg0", "Arg1")


def test_feasible_independent_solution_unchanged():
    problem = IlpProblem([[2.0, 0.0, 0.1], [0.0, 3.0, 0.1]], ["Arg0", "Arg1", NULL],
                         spans=[(0, 1), (1, 2)])
    assert solve(problem) == independent_argmax(problem)
    assert decode(problem, use_ilp=False) == independent_argmax(problem)


def test_validation():
    with pytest.raises(ValueError, match="NaN"):
        IlpProblem([[np.nan, 0.0]], ["Arg0", NULL])
    with pytest.raises(ValueError, match="finite"):
        IlpProblem([[np.inf, 0.0]], ["Arg0", NULL])
    with pytest.raises(ValueError, match="NULL"):
        IlpProblem([[1.0]], ["Arg0"])
    with pytest.raises(ValueError, match="irreflexive"):
        IlpProblem([[1.0, 0.0]], ["Arg0", NULL], overlap_pairs={(0, 0)})
    with pytest.raises(ValueError, match="out of range"):
        IlpProblem([[1.0, 0.0]], ["Arg0", NULL], overlap_pairs={(0, 1)})
    with pytest.raises(ValueError, match="columns"):
        IlpProblem([[1.0, 0.0, 0.0]], ["Arg0", NULL])


def test_overlap_pairs_symmetric_input_normalised():
    problem = IlpProblem(np.zeros((3, 2)), ["Arg0", NULL], overlap_pairs={(2, 0), (0, 2)})
    assert problem.overlap_pairs == {(0, 2)}
    assert overlapping_pairs([(0, 2), (1, 3), (3, 4)]) == {(0, 1)}


def test_brute_force_limit():
    problem = IlpProblem(np.zeros((8, 10)), list(DEFAULT_ROLES[:9]) + [NULL])
    with pytest.raises(ValueError, match="too large"):
        brute_force(problem)


def test_violations_reported():
    problem = IlpProblem(np.zeros((3, 3)), ["Arg0", "Arg2", NULL], predicate_is_verb=False,
                         overlap_pairs={(0, 1)})
    found = violations(problem, ["Arg0", "Arg0", "Arg2"])
    assert any("overlapping" in v for v in found)
    assert any("Arg0 used 2 times" in v for v in found)
    assert any("non-verbal" in v for v in found)
    assert violations(problem, [NULL, "Arg0", NULL]) == []


@pytest.mark.parametrize("ties", [False, True])
def test_solve_matches_brute_force(ties):
    rng = np.random.default_rng(11 + ties)
    for _ in range(300):
        problem = random_problem(rng, ties=ties)
        fast, slow = solve(problem), brute_force(problem)
        assert fast.labels == slow.labels
        assert abs(fast.objective - slow.objective) <= 1e-9
        assert violations(problem, fast.labels) == []


def test_adding_constraints_never_helps():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = random_problem(rng, max_m=6, max_roles=6)
        loose = IlpProblem(p.scores, p.roles, predicate_is_verb=True, overlap_pairs=frozenset())
        tight = IlpProblem(p.scores, p.roles, predicate_is_verb=False, overlap_pairs=p.overlap_pairs)
        assert solve(tight).objective <= solve(p).objective + 1e-12
        assert solve(p).objective <= solve(loose).objective + 1e-12


def test_ilp_bounded_by_independent_argmax():
    rng = np.random.default_rng(6)
    for _ in range(300):
        p = random_problem(rng, max_m=7, max_roles=8)
        best, free = solve(p), independent_argmax(p)
        assert best.objective <= free.objective + 1e-12
        feasible = not violations(p, free.labels)
        assert feasible == (abs(best.objective - free.objective) <= 1e-12)


def test_exhaustive_small_enumeration():
    # direct itertools enumeration, independent of the vectorised oracle
    rng = np.random.default_rng(8)
    for _ in range(50):
        p = random_problem(rng, max_m=4, max_roles=4)
        best = None
        for labels in itertools.product(range(len(p.roles)), repeat=p.n_candidates):
            names = [p.roles[k] for k in labels]
            if violations(p, names):
                continue
            value = p.objective(labels)
            if best is None or value > best[0] + 1e-12:
                best = (value, labels)
        assert solve(p).indices == best[1]
