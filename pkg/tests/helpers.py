"""Small model builders shared by the tests."""

import numpy as np

from ncs_sched.model import ModePair, ModeProbabilities, NcsModel, NetworkConfig, Plant, make_partition


def scalar_model(a_u=1.2, a_s=0.5, p=0.6, q=0.0):
    """Two scalar plants; plant 1 switches between ``a_s`` and ``a_u``."""
    plants = (Plant(1, [[a_u]], [[1.0]], [[a_s - a_u]]), Plant(2, [[0.5]], [[1.0]], [[0.0]]))
    return NcsModel(plants, NetworkConfig(1, q), make_partition([[1], [2]], [p, 1.0 - p]))


def scalar_modes(a_s, a_u):
    return ModePair(np.array([[a_s]]), np.array([[a_u]]))


def probs(pi_s):
    return ModeProbabilities.closed(pi_s)


# (criterion, passed, title, detail) rows printed in the terminal summary
ACCEPTANCE = []
