import pytest

from widthlab import parse_group


@pytest.fixture(scope="session")
def alt5():
    return parse_group("Alt(5)").table()


@pytest.fixture(scope="session")
def sym4():
    return parse_group("Sym(4)").table()


@pytest.fixture(scope="session")
def sym3():
    return parse_group("Sym(3)").table()


@pytest.fixture(scope="session")
def alt4():
    return parse_group("Alt(4)").table()


@pytest.fixture(scope="session")
def sym5():
    return parse_group("Sym(5)").table()


@pytest.fixture(scope="session")
def heis3():
    return parse_group("Heisenberg(3)").table()
