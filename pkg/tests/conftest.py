import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from avgctrl.graph import validate_pattern  # noqa: E402

FIG1_TOKENS = [
    ("b", "a1"), ("b", "a2"), ("a1", "a3"), ("a2", "a4"), ("a4", "a6"), ("a6", "a2"),
    ("a6", "a8"), ("a3", "a5"), ("a5", "a3"), ("a5", "a7"), ("a7", "a7"), ("a7", "a3"),
    ("a7", "a9"),
]
FIG1 = [(0, 1), (0, 2), (1, 3), (2, 4), (4, 6), (6, 2), (6, 8), (3, 5), (5, 3), (5, 7),
        (7, 7), (7, 3), (7, 9)]
FIG3 = sorted(set(FIG1) - {(7, 3), (7, 7)})
FIG3_ALT = sorted(set(FIG1) - {(5, 3), (7, 7)})
STAR = [(0, 1), (0, 2)]
CHAIN2 = [(0, 1), (1, 2)]
CHAIN3 = [(0, 1), (1, 2), (2, 3)]
LOOP1 = [(0, 1), (1, 1)]


@pytest.fixture
def fig1():
    return validate_pattern(FIG1)


@pytest.fixture
def fig3():
    return validate_pattern(FIG3)


@pytest.fixture
def star():
    return validate_pattern(STAR)


@pytest.fixture
def chain2():
    return validate_pattern(CHAIN2)


def edge_text(edges):
    lab = lambda v: "b" if v == 0 else f"a{v}"  # noqa: E731
    return "".join(f"{lab(u)} {lab(v)}\n" for u, v in edges)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[k])
