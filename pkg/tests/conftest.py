import pytest

from qbnb.tree import ExplicitTree


def toy_tree():
    """r(h1,c1) -> a(h2,c2), b(h5,c3); a -> c(h3,c4), e(h7,c5); b -> f(h6,c6), g(h8,c7)."""
    return ExplicitTree.from_nested(
        (1, 1, [
            (2, 2, [(4, 3, []), (5, 7, [])]),
            (3, 5, [(6, 6, []), (7, 8, [])]),
        ])
    )


R, A, B, C, E, F, G = (), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)
NAMES = {R: "r", A: "a", B: "b", C: "c", E: "e", F: "f", G: "g"}


@pytest.fixture
def toy():
    return toy_tree()


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
