import pytest

from toda2d.manifold import LaxPoint, LoopLaxPoint


@pytest.fixture(scope="session")
def sample_point():
    """λ = z + 0.1, λ̄ = 0.25 z⁻¹."""
    return LaxPoint.from_dicts({0: 0.1}, {-1: 0.25})


@pytest.fixture(scope="session")
def generic_point():
    return LaxPoint.from_dicts({0: 0.1, -1: 0.05 + 0.02j, -2: 0.01},
                               {-1: 0.25, 0: 0.03, 1: 0.02 - 0.01j})


@pytest.fixture(scope="session")
def loop_point():
    """A loop point with x-dependence in several modes of both symbols (M = 32)."""
    return LoopLaxPoint.from_entries({(0, 0): 0.1, (1, 0): 0.05, (-1, -1): 0.03},
                                     {(0, -1): 0.25, (1, -1): 0.025, (0, 0): 0.05, (-1, 1): 0.02},
                                     n=64, m=32)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
