import numpy as np
import pytest

from adrank.embeddings import EmbeddingTable


@pytest.fixture
def toy2():
    """2-d toy table used throughout: cat=(1,0), dog=(0,1), car=(-1,0)."""
    return EmbeddingTable(
        dim=2,
        entries={
            "cat": np.array([1.0, 0.0]),
            "dog": np.array([0.0, 1.0]),
            "car": np.array([-1.0, 0.0]),
        },
    )


def random_table(rng, vocab_size=20, dim=4):
    tokens = [f"tok{i}" for i in range(vocab_size)]
    return EmbeddingTable(
        dim=dim,
        entries={t: rng.normal(size=dim) for t in tokens},
    )


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criteria pass/fail lines in the run summary."""
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
