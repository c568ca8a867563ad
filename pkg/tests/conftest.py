import numpy as np
import pytest

from symreach import SymbolProvider
from symreach import szono as sz


@pytest.fixture
def provider():
    """Fresh id provider per test so frozen expectations stay stable.

    Starts at 1000 so tests may use small literal ids for hand-built sets
    without colliding with provider-allocated ones.
    """
    return SymbolProvider(start=1000)


def random_directions(rng, n, count=100):
    """Unit direction vectors for support-dominance checks."""
    H = rng.normal(size=(count, n))
    return H / np.linalg.norm(H, axis=1, keepdims=True)


def assert_support_dominates(X, points, rng, n_dirs=100, slack=1e-9):
    """Membership surrogate: every point sits under the support function.

    points is (n, m): m candidate members of the set-valued reading of X.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] != X.dim:
        points = points.T
    for h in random_directions(rng, X.dim, n_dirs):
        sup = sz.support(h, X)
        assert (h @ points <= sup + slack).all(), (
            f"direction {h} exceeds support {sup} by "
            f"{float((h @ points).max() - sup)}"
        )


def sample_sigma(rng, ids, m=1):
    """Random symbol valuations in [-1,1]^|ids| keyed by id."""
    vals = rng.uniform(-1.0, 1.0, size=(len(ids), m))
    return {int(s): vals[k] for k, s in enumerate(ids)}
