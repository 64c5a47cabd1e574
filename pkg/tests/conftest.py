import numpy as np
import pytest

from ecocneat.datasets import Dataset
from ecocneat.neat import NeatConfig


def blobs(k=4, per_class=30, dim=5, spread=0.6, seed=0):
    """Gaussian clusters around well separated centres."""
    rng = np.random.default_rng(seed)
    centres = rng.normal(0, 3, size=(k, dim))
    x = np.concatenate([c + spread * rng.normal(size=(per_class, dim)) for c in centres])
    y = np.repeat(np.arange(k), per_class)
    return Dataset(x, y)


@pytest.fixture
def small_data():
    return blobs()


@pytest.fixture
def tiny_neat():
    return NeatConfig(pop_size=30)


@pytest.fixture
def blobs_csv(tmp_path):
    d = blobs()
    path = tmp_path / "blobs.csv"
    lines = ["f0,f1,f2,f3,f4,label"]
    names = ["alpha", "beta", "gamma", "delta"]
    for row, label in zip(d.samples, d.labels):
        lines.append(",".join(f"{v:.6f}" for v in row) + f",{names[label]}")
    path.write_text("\n".join(lines) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
