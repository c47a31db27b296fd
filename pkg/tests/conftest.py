import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coarsenrank import PreferenceDataset  # noqa: E402


def random_dataset(rng, n_items, n_prefs, min_len=2, max_len=None):
    max_len = min(max_len or n_items, n_items)
    prefs = []
    for _ in range(n_prefs):
        k = int(rng.integers(min_len, max_len + 1))
        prefs.append(rng.choice(n_items, size=k, replace=False).tolist())
    return PreferenceDataset.from_lists(prefs, n_items=n_items)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
