import numpy as np
import pytest
from hypothesis import settings

from fracap import (
    AttractiveRepulsive,
    ProblemSpec,
    SingularMems,
    Smooth,
    make_grid,
    sample,
)

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("repo")


def quadratic(n=64, s=0.5, c=1.0, t=0.25, h=0.0):
    g = make_grid(n)
    return ProblemSpec(g, s, c, Smooth(lambda u: u ** 2, lambda u: 2 * u), t=t, h=sample(h, g))


def linear(n=64, s=0.5, c=1.0, t=2.0):
    g = make_grid(n)
    return ProblemSpec(g, s, c, Smooth(lambda u: u, lambda u: np.ones_like(u)), t=t, h=sample(np.cos, g))


def mems(n=64, s=0.5, c=1.0, t=2.0, mu=2.0, beta=1.0):
    g = make_grid(n)
    return ProblemSpec(g, s, c, SingularMems(mu, sample(beta, g)), t=t)


def attractive_repulsive(n=64, s=0.5, c=1.0, mu=2.0, rho=1.0, gamma=1.0, beta=-0.2, e="1+0.1*cos(x)"):
    g = make_grid(n)
    return ProblemSpec(g, s, c, AttractiveRepulsive(mu, rho, sample(gamma, g), sample(beta, g), sample(e, g)))


@pytest.fixture
def grid64():
    return make_grid(64)
