import pytest

from nlscap.equilibria import (
    EquilibriumProblem,
    ValidationCertificate,
    load_family,
    prove_equilibrium,
)
from nlscap.settings import NumberOfThreads

# Worker pools would hide coverage of the proof stages
NumberOfThreads.set(1)


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--run-long",
        action="store_true",
        default=False,
        help="run the extended proofs with thousands of time steps",
    )


def pytest_collection_modifyitems(
    config: pytest.Config, items: list[pytest.Item]
) -> None:
    if config.getoption("--run-long"):
        return
    skip_long = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)


@pytest.fixture(scope="session")
def output_dir(pytestconfig: pytest.Config) -> str:
    return f"{pytestconfig.rootpath}/tests/output/"


@pytest.fixture(scope="session")
def u1_certificate() -> ValidationCertificate:
    problem = EquilibriumProblem(m=14)
    return prove_equilibrium(problem, load_family("u1", problem.m))
