import pytest

from murmur.hurwitz import ClassNumbers, build_hurwitz_table
from murmur.lfunc import build_euler_cache


@pytest.fixture(scope="session")
def table():
    return build_hurwitz_table(10**5)


@pytest.fixture(scope="session")
def cache():
    return build_euler_cache(10**7)


@pytest.fixture(scope="session")
def trace_cn():
    # covers every lookup of the trace grid except level 5^7, which counts forms directly
    return ClassNumbers(build_hurwitz_table(2_600_000), allow_direct=True)
