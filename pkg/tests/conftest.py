"""Shared fixtures; session scope keeps expansion builds to one each."""

import pytest

from transasym.expansion import build_expansion
from transasym.systems import builtin


@pytest.fixture(scope="session")
def p1():
    return builtin("p1")[0]


@pytest.fixture(scope="session")
def abel():
    return builtin("abel")[0]


@pytest.fixture(scope="session")
def e_p1(p1):
    return build_expansion(p1, 2, 32)


@pytest.fixture(scope="session")
def e_abel(abel):
    return build_expansion(abel, 2, 48)
