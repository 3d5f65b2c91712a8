"""Shared fixtures."""

import math

import pytest

from app.core import zeno
from app.models.system_params import SystemParams
from app.utils.linalg_utils import propagatorCache


@pytest.fixture
def nominalParams() -> SystemParams:
    """N=3, M=100, g′=1, v=0.5g′, Ω=0.05g′, closed system."""
    return SystemParams.fromGPrimeUnits(3, 100, vFactor=0.5, omegaFactor=0.05)


@pytest.fixture
def protocolParams(nominalParams) -> SystemParams:
    """nominalParams with Ω₁ = (√N+1)Ω."""
    return zeno.protocolParams(nominalParams)


@pytest.fixture
def openParams() -> SystemParams:
    """nominalParams with all three decay channels at 0.01g′."""
    return SystemParams.fromGPrimeUnits(
        3, 100, vFactor=0.5, omegaFactor=0.05, kappaFactor=0.01, gammaFactor=0.01, betaFactor=0.01
    )


@pytest.fixture
def irregularParams() -> SystemParams:
    """nominalParams with Ω, g and v overrides on individual nodes."""
    return SystemParams.fromGPrimeUnits(
        3, 100, vFactor=0.5, omegaFactor=0.05, omegaNodes={2: 0.04, 3: 0.06}, gNodes={1: 0.11, 3: 0.09}, vNodes={2: 0.55}
    )


@pytest.fixture
def drawParams():
    """
    Factory for random networks drawn from a numpy Generator.

    draw(rng, uniform=False, decay=False, maxNodes=6, maxAtoms=400) returns
    SystemParams with per-node Ω, g and v overrides on roughly a third of the
    nodes unless uniform is set, and random decay rates when decay is set.
    """

    def draw(rng, uniform=False, decay=False, maxNodes=6, maxAtoms=400) -> SystemParams:
        n = int(rng.integers(2, maxNodes + 1))
        overrides = {"omegaNodes": {}, "gNodes": {}, "vNodes": {}}
        if not uniform:
            for node in range(1, n + 1):
                if rng.random() < 0.3:
                    overrides["omegaNodes"][node] = rng.uniform(0.001, 0.1)
                if rng.random() < 0.3:
                    overrides["gNodes"][node] = rng.uniform(0.02, 0.5)
                if rng.random() < 0.3:
                    overrides["vNodes"][node] = rng.uniform(0.01, 1.0)
        rates = {}
        if decay:
            rates = {name: rng.uniform(0.0, 0.05) for name in ("kappa", "gamma", "beta")}
            rates["branchingEF"] = rng.uniform(0.0, 1.0)
        return SystemParams(
            nCavities=n,
            mAtoms=int(rng.integers(1, maxAtoms + 1)),
            g=rng.uniform(0.02, 0.5),
            v=rng.uniform(0.01, 1.0),
            omega1=rng.uniform(0.001, 0.3),
            omega=rng.uniform(0.001, 0.1),
            theta=rng.uniform(0.0, math.pi),
            delta=rng.uniform(0.0, 2 * math.pi),
            **overrides,
            **rates,
        )

    return draw


@pytest.fixture(autouse=True)
def clearPropagators():
    """Start every test with an empty propagator cache."""
    propagatorCache.clearCache()
    yield
    propagatorCache.clearCache()
