import pytest

from freqperf import GridParameters, build_path


@pytest.fixture
def path5():
    return build_path(5, 1.0)


@pytest.fixture
def table_params():
    # five-bus benchmark configuration
    return GridParameters(m=1.0, d=1.0, b=1.0, k=4.0,
                          tau_mu=6.0, tau_nu=6.0, tau=6.0, gamma=5.0)
