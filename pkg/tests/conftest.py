import numpy as np
import pytest

from maxstable.angular import MultiIndexGrid, complete_vertex_masses


def make_model(d: int, k: int, seed: int, interior: float = 0.6):
    """Random valid angular model, shrinking the interior mass until the
    vertex completion is feasible."""
    rng = np.random.default_rng(seed)
    grid = MultiIndexGrid(d, k)
    scale = interior
    for _ in range(60):
        phi = rng.dirichlet(np.ones(len(grid))) * scale
        try:
            return complete_vertex_masses(phi, k, d)
        except Exception:
            scale *= 0.9
    raise RuntimeError(f"no feasible model at d={d}, k={k}, seed={seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
