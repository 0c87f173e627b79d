import pytest

from escrowdkg.group_suite import MockSuite, PairingSuite


@pytest.fixture(scope="session")
def mock():
    return MockSuite(101)


@pytest.fixture(scope="session")
def wide():
    return MockSuite(2147483647)


@pytest.fixture(scope="session")
def pairing():
    return PairingSuite()


@pytest.fixture(params=["mock", "pairing"], scope="session")
def suite(request, mock, pairing):
    return mock if request.param == "mock" else pairing
