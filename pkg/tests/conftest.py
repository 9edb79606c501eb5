import pytest
from hypothesis import HealthCheck, settings

from ncjet import exterior as ex
from ncjet.algebra import dual_numbers, quaternions, residue_module, upper_triangular
from ncjet.calculus import infinitesimal_calculus, quaternion_calculus, universal_calculus

# Exact arithmetic is slow-ish; examples are few but each is checked exhaustively.
settings.register_profile("ncjet", deadline=None, derandomize=True, print_blob=True,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.function_scoped_fixture])
settings.load_profile("ncjet")


@pytest.fixture(scope="session")
def quat():
    """The {i,j}-terminal calculus on the quaternions with its maximal exterior algebra."""
    c = quaternion_calculus()
    return c, ex.maximal_exterior(c, 3)


@pytest.fixture(scope="session")
def infin():
    c = infinitesimal_calculus()
    return c, ex.maximal_exterior(c, 3)


@pytest.fixture(scope="session")
def residue(infin):
    return residue_module(infin[0].algebra)


@pytest.fixture(scope="session")
def algebras():
    return {"quaternions": quaternions(), "dual_numbers": dual_numbers(),
            "upper_triangular": upper_triangular()}


@pytest.fixture(scope="session")
def universal_quat():
    c = universal_calculus(quaternions())
    return c, ex.maximal_exterior(c, 3)


@pytest.fixture(scope="session")
def universal_dual():
    c = universal_calculus(dual_numbers())
    return c, ex.maximal_exterior(c, 3)
