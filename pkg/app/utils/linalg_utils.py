"""Small dense linear-algebra helpers and the propagator cache."""

import hashlib
import threading
from collections import OrderedDict
from typing import Callable, Optional

import numpy as np


def dagger(matrix: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return matrix.conj().T


def hermiticityError(matrix: np.ndarray) -> float:
    """Max elementwise deviation |A − A†|."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - dagger(matrix))))


def spectralNorm(matrix: np.ndarray) -> float:
    """Largest singular value."""
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def minEigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part."""
    hermitian = 0.5 * (matrix + dagger(matrix))
    return float(np.linalg.eigvalsh(hermitian)[0])


class PropagatorCache:
    """Cache for one-step propagators of time-independent generators."""

    def __init__(self, maxEntries: int = 64):
        """
        Initialize propagator cache.

        Args:
            maxEntries: Number of propagators kept before the oldest is dropped
        """
        self.maxEntries = maxEntries
        self.cache: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def _key(generator: np.ndarray, step: float, tag: str) -> str:
        digest = hashlib.sha1(np.ascontiguousarray(generator).tobytes()).hexdigest()
        return f"{tag}:{generator.shape}:{step!r}:{digest}"

    def getPropagator(
        self,
        generator: np.ndarray,
        step: float,
        build: Callable[[np.ndarray, float], np.ndarray],
        tag: str = "",
    ) -> np.ndarray:
        """
        Get propagator from cache or build it.

        Args:
            generator: Time-independent generator matrix
            step: Time step the propagator advances
            build: Callable(generator, step) producing the propagator
            tag: Distinguishes propagator families built from the same generator

        Returns:
            Propagator matrix (shared; do not mutate)
        """
        cacheKey = self._key(generator, step, tag)
        with self._lock:
            cached: Optional[np.ndarray] = self.cache.get(cacheKey)
            if cached is not None:
                self.cache.move_to_end(cacheKey)
                return cached

        propagator = build(generator, step)
        with self._lock:
            self.cache[cacheKey] = propagator
            while len(self.cache) > self.maxEntries:
                self.cache.popitem(last=False)
        return propagator

    def clearCache(self):
        """Clear the propagator cache."""
        with self._lock:
            self.cache.clear()


# Global propagator cache instance
propagatorCache = PropagatorCache()
