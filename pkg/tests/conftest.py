import numpy as np
import pytest

from seqfromsamples.core import SetFunction
from seqfromsamples.functions import make_modular_instance


class CappedCardinality(SetFunction):
    """``min(|S|, cap)``; no affinity form, so it exercises the generic paths."""

    def __init__(self, n, cap=1):
        self.n = n
        self.cap = cap

    def eval(self, S):
        return float(min(len(set(S)), self.cap))


@pytest.fixture
def modular321():
    return make_modular_instance(3, 2, {"weights": [3, 2, 1]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
