import numpy as np
import pytest


def random_density(n, rng, rank=None):
    k = n if rank is None else rank
    G = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    A = G @ G.conj().T
    return A / np.trace(A).real


def random_complex(n, rng, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_target(rng, on_circle=False):
    r = 1.0 if on_circle else np.sqrt(rng.uniform())
    return r * np.exp(2j * np.pi * rng.uniform())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
