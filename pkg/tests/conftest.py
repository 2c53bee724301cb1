import os

import numpy as np
import pytest
from hypothesis import settings

from twoway_secrecy import InputPolicy, builtin_adder, builtin_bmc, builtin_xor

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=["bmc", "xor", "adder"])
def builtin(request):
    return {"bmc": builtin_bmc, "xor": builtin_xor, "adder": builtin_adder}[request.param]()


def random_stochastic(rng, rows, cols, sparsity=0.0):
    """Random row-stochastic matrix; ``sparsity`` zeroes that fraction of entries."""
    m = rng.dirichlet(np.ones(cols), size=rows)
    if sparsity:
        m = m * (rng.random(m.shape) >= sparsity)
        empty = m.sum(axis=1) == 0
        m[empty, rng.integers(cols, size=empty.sum())] = 1.0
        m = m / m.sum(axis=1, keepdims=True)
    return m


def random_policy(rng, x1_card=2, x2_card=2, q_card=None, u1_card=None, u2_card=None):
    q_card = q_card or int(rng.integers(1, 3))
    u1_card = u1_card or int(rng.integers(2, 4))
    u2_card = u2_card or int(rng.integers(2, 4))
    return InputPolicy(
        rng.dirichlet(np.ones(q_card)),
        random_stochastic(rng, q_card, u1_card, 0.2),
        random_stochastic(rng, q_card, u2_card, 0.2),
        random_stochastic(rng, u1_card, x1_card, 0.3),
        random_stochastic(rng, u2_card, x2_card, 0.3),
    )
