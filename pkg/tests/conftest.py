import pytest

from gmsphere.dirac import Algebra


@pytest.fixture(scope="session")
def alg12():
    """Small truncation for unit tests."""
    return Algebra(12)


@pytest.fixture(scope="session")
def alg30():
    """Default truncation used by the acceptance criteria."""
    return Algebra(30)
