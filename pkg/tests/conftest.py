import itertools
from functools import reduce

import numpy as np
import pytest


def single_mode_lowering(cutoff):
    """<n-1|a|n> = sqrt(n) on a (cutoff+1)-level oscillator, built by hand."""
    a = np.zeros((cutoff + 1, cutoff + 1))
    for n in range(1, cutoff + 1):
        a[n - 1, n] = np.sqrt(n)
    return a


def kron_lowering(mode_count, cutoff, mode):
    """Tensor-product oracle: mode 0 is the leftmost (slowest) factor."""
    eye = np.eye(cutoff + 1)
    factors = [single_mode_lowering(cutoff) if k == mode else eye for k in range(mode_count)]
    return reduce(np.kron, factors)


def brute_force_basis(mode_count, cutoff, max_total=None):
    states = itertools.product(range(cutoff + 1), repeat=mode_count)
    return [s for s in states if max_total is None or sum(s) <= max_total]


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    x = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = x @ x.conj().T
    return m / np.trace(m).real


def random_state_amplitudes(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion, then assert it."""

    def report(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
