"""Tests for linear-algebra helpers and the propagator cache."""

import numpy as np
import pytest

from app.utils.linalg_utils import PropagatorCache, dagger, hermiticityError, minEigenvalue, spectralNorm


def test_helpers():
    m = np.array([[1.0, 2.0j], [-2.0j, -1.0]])
    assert np.array_equal(dagger(m), m.conj().T)
    assert hermiticityError(m) == 0.0
    assert hermiticityError(np.array([[0.0, 1.0], [0.0, 0.0]])) == 1.0
    assert spectralNorm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert spectralNorm(np.zeros((0, 0))) == 0.0
    assert minEigenvalue(np.diag([0.5, -0.25])) == pytest.approx(-0.25)


class TestPropagatorCache:
    """Keyed propagator reuse."""

    def test_hit_and_miss(self):
        cache = PropagatorCache()
        calls = []

        def build(generator, step):
            calls.append(step)
            return generator * step

        g = np.eye(2)
        first = cache.getPropagator(g, 0.1, build)
        assert cache.getPropagator(g.copy(), 0.1, build) is first
        cache.getPropagator(g, 0.2, build)
        cache.getPropagator(g, 0.1, build, tag="other")
        assert calls == [0.1, 0.2, 0.1]

    def test_eviction_and_clear(self):
        cache = PropagatorCache(maxEntries=2)
        build = lambda generator, step: generator * step
        for step in (0.1, 0.2, 0.3):
            cache.getPropagator(np.eye(2), step, build)
        assert len(cache.cache) == 2
        cache.clearCache()
        assert not cache.cache
