import pytest

from invariants import CHECKS, M_RANGE, N_RANGE


@pytest.mark.parametrize("name", sorted(CHECKS))
@pytest.mark.parametrize("n", list(N_RANGE))
def test_invariants(name, n):
    for m in M_RANGE:
        CHECKS[name](n, m, seed=100 * n + m)
