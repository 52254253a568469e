from __future__ import annotations

import math

import pytest

from psibound.arith import sieve


@pytest.fixture(scope="session")
def table_1e6():
    return sieve(10**6)


@pytest.fixture(scope="session")
def table_12e6():
    # large enough for x <= 1e7 stretched by e^lambda in the mass checks
    return sieve(12_000_000)
