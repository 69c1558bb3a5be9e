import csv

import numpy as np
import pytest
from hypothesis import settings

from qmlfraud.dataprep import BANKSIM_COLUMNS, EUROPEAN_COLUMNS

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


def write_banksim(path, n_rows=300, n_fraud=30, seed=0):
    """Small CSV in the BankSim layout, quoted the way the public file is."""
    rng = np.random.default_rng(seed)
    ages = ["0", "1", "2", "3", "4", "5", "6", "U"]
    labels = np.zeros(n_rows, dtype=int)
    labels[rng.choice(n_rows, n_fraud, replace=False)] = 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BANKSIM_COLUMNS)
        for i in range(n_rows):
            w.writerow([
                int(rng.integers(0, 180)),
                f"'C{rng.integers(1000, 1020)}'",
                f"'{ages[rng.integers(0, len(ages))]}'",
                f"'{'MFEU'[rng.integers(0, 4)]}'",
                "'28007'",
                f"'M{rng.integers(100, 110)}'",
                "'28007'",
                f"'es_{['food', 'health', 'travel', 'tech'][rng.integers(0, 4)]}'",
                f"{rng.exponential(40.0) + 200.0 * labels[i]:.2f}",
                int(labels[i]),
            ])
    return path


def write_european(path, n_rows=400, n_fraud=40, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.zeros(n_rows, dtype=int)
    labels[rng.choice(n_rows, n_fraud, replace=False)] = 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f'"{c}"' if c == "Class" else c for c in EUROPEAN_COLUMNS])
        for i in range(n_rows):
            v = rng.normal(size=28) + 1.5 * labels[i] * np.sign(np.arange(28) % 3 - 0.5)
            w.writerow(
                [f"{rng.uniform(0, 172792):.0f}"]
                + [f"{a:.6f}" for a in v]
                + [f"{rng.exponential(80.0):.2f}", f'"{labels[i]}"']
            )
    return path


@pytest.fixture
def banksim_csv(tmp_path):
    return write_banksim(tmp_path / "banksim.csv")


@pytest.fixture
def european_csv(tmp_path):
    return write_european(tmp_path / "creditcard.csv")


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one status line per acceptance criterion; printed in the terminal summary."""

    def record(number, status, text):
        _ACCEPTANCE[number] = f"criterion {number:>2} {status:<4} {text}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
