"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from hyperdiscovery.data import Dataset, DataSeries, SyntheticSpec, generate_synthetic
from hyperdiscovery.energy import (
    CATALOG,
    Demiray,
    ModelSpec,
    NeoHookean,
    TermParams,
    classic_to_spec,
)
from hyperdiscovery.kinematics import LoadingMode


def make_states():
    """Loading states spanning all three modes, away from extreme strain."""
    states = []
    for lam in np.linspace(1.02, 1.3, 7):
        states.append((LoadingMode.TENSION, float(lam)))
    for lam in np.linspace(0.78, 0.98, 7):
        states.append((LoadingMode.COMPRESSION, float(lam)))
    for gamma in np.linspace(0.05, 0.5, 6):
        states.append((LoadingMode.SHEAR, float(gamma)))
    return states


def _argument_extrema(states):
    """Largest value of [I1-3] and [I2-3] over the given states."""
    x1 = x2 = 0.0
    for mode, control in states:
        if mode is LoadingMode.SHEAR:
            x1 = max(x1, control * control)
            x2 = max(x2, control * control)
        else:
            x1 = max(x1, control * control + 2.0 / control - 3.0)
            x2 = max(x2, 2.0 * control + 1.0 / control ** 2 - 3.0)
    return x1, x2


def random_model(rng, states, max_terms=12, arg_cap=0.5):
    """A random feasible model whose nonlinear arguments stay below
    ``arg_cap`` at every given state, keeping finite differences accurate
    and log terms far from their poles."""
    x1_max, x2_max = _argument_extrema(states)
    size = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(12, size=size, replace=False) + 1
    terms = {}
    for index in sorted(int(i) for i in picks):
        kind = CATALOG[index - 1]
        outer = float(np.exp(rng.uniform(np.log(1e-3), np.log(10.0))))
        if kind.is_linear:
            terms[index] = TermParams(outer)
            continue
        u_max = (x1_max if kind.invariant == 1 else x2_max) ** kind.power
        inner = float(rng.uniform(0.05, arg_cap) / u_max)
        terms[index] = TermParams(outer, inner)
    return ModelSpec(terms)


def oracle_grids():
    """The noiseless recovery grids: 20 uniaxial points on [0.9, 1.1]
    split at lambda = 1, plus 20 shear points on [0, 0.2]."""
    lam = np.linspace(0.9, 1.1, 20)
    return {
        LoadingMode.COMPRESSION: lam[lam < 1.0],
        LoadingMode.TENSION: lam[lam >= 1.0],
        LoadingMode.SHEAR: np.linspace(0.0, 0.2, 20),
    }


def synthetic_from(model, noise=0.0, seed=0, grids=None):
    return generate_synthetic(SyntheticSpec(
        truth=model, grids=grids or oracle_grids(), noise=noise, seed=seed))


@pytest.fixture(scope="session")
def neo_hookean_dataset():
    return synthetic_from(classic_to_spec(NeoHookean(1.0)))


@pytest.fixture(scope="session")
def demiray_dataset():
    return synthetic_from(classic_to_spec(Demiray(1.0, 5.0)))


@pytest.fixture(scope="session")
def tiny_dataset():
    """A small hand-built dataset with all three modes."""
    return Dataset((
        DataSeries(LoadingMode.TENSION,
                   np.array([1.05, 1.1, 1.15, 1.2]),
                   np.array([0.14, 0.27, 0.39, 0.51])),
        DataSeries(LoadingMode.COMPRESSION,
                   np.array([0.85, 0.9, 0.95]),
                   np.array([-0.55, -0.33, -0.155])),
        DataSeries(LoadingMode.SHEAR,
                   np.array([0.05, 0.1, 0.15, 0.2]),
                   np.array([0.05, 0.1, 0.152, 0.205])),
    ))
