import pytest

from aggfc import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jitted kernels once so timing-sensitive tests measure
    # steady-state cost, not compilation
    kernels.warmup()
