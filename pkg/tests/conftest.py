import numpy as np
import pytest

from esdflow import thermo


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ideal_mix():
    """Single nondimensional perfect gas: r = 1, gamma = 1.4."""
    return thermo.mixture_of("ideal")


@pytest.fixture
def perfect_pair():
    """Two calorically perfect species with equal r, different gamma."""
    s1 = thermo.SpeciesData("a", 0.028, 0.0, (1039.0,))
    s2 = thermo.SpeciesData("b", 0.028, 0.0, (1558.5,))
    return thermo.GasMixture(species=(s1, s2))


@pytest.fixture
def h2n2():
    return thermo.mixture_of("H2", "N2")
