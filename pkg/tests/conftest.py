import pytest

from vnsrl import parse_tree

FIGURE = ("(S (NP-SUB (N-H Bà)) (VP (V-H nói) (SBAR (S (NP-SUB (P-H nó)) "
          "(VP (V-H là) (NP (N-H con_trai) (P tôi) (T mà)))))))")
KIA = ("(S (NP-SUB (P-H Kia)) (VP (V-H là) (NP (L những) (Nc-H ngôi) (N nhà) "
       "(NP (N-H vách) (N đất)))) (. .))")

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE: list = []


@pytest.fixture
def figure_tree():
    return parse_tree(FIGURE)


@pytest.fixture
def kia_tree():
    return parse_tree(KIA)


@pytest.fixture
def acceptance():
    def record(name: str, passed: bool, detail: str):
        ACCEPTANCE.append((name, passed, detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
