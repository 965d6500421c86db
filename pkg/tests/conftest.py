import pytest

from qvolume import lp_model, simplex


@pytest.fixture(scope="session")
def solved_symmetric():
    """Session cache of symmetric solves keyed by (kind, dimension)."""
    cache = {}

    def get(kind: str, dimension: int) -> simplex.LPSolution:
        key = (kind, dimension)
        if key not in cache:
            cache[key] = simplex.solve(lp_model.symmetrize(kind, dimension))
        return cache[key]

    return get
