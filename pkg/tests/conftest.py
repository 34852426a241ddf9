import numpy as np
import pytest

from carv import Box, ConstraintSet, DynamicsSpec, Halfspace, Network
from carv.scenario import Scenario


def random_network(rng, dims, scale=0.5):
    """Small ReLU net with the given layer widths, e.g. (2, 4, 4, 1)."""
    layers = []
    for i in range(1, len(dims)):
        w = scale * rng.normal(size=(dims[i], dims[i - 1])) / np.sqrt(dims[i - 1])
        b = scale * 0.1 * rng.normal(size=dims[i])
        act = "relu" if i < len(dims) - 1 else "linear"
        layers.append((w, b, act))
    return Network(input_dim=dims[0], layers=tuple(layers))


def zero_policy(n, m=1):
    return Network(n, ((np.zeros((m, n)), np.zeros(m), "linear"),))


def linear_policy(k_row):
    """u = K x as a single linear layer (ReLU-free)."""
    k = np.atleast_2d(np.asarray(k_row, dtype=float))
    return Network(k.shape[1], ((k, np.zeros(k.shape[0]), "linear"),))


DI = DynamicsSpec("double_integrator", 0.2)
UNI = DynamicsSpec("unicycle", 0.2, v=1.0)

EQ8 = ConstraintSet(
    (Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], -1.0))
)


def di_scenario(policy=None, x0=None, constraints=EQ8, t_f=10, k_max=5, **kw):
    return Scenario(
        dyn=DI,
        policy=policy if policy is not None else zero_policy(2),
        x0=x0 if x0 is not None else Box([0.5, -0.25], [1.0, 0.25]),
        constraints=constraints,
        t_f=t_f,
        k_max=k_max,
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
