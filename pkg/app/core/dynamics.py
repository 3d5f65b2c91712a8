"""Numerical propagation: Schrödinger, Lindblad and conditional (no-jump) evolution.

Densities are column-stacked into vectors so that the master equation becomes
dρ⃗/dt = L ρ⃗ with a dense Liouvillian. Both generators are time independent,
so a fixed-step RK4 integration is the n-th power of its one-step propagator.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from app.core.errors import NumericalError, ParameterError
from app.models.quantum_types import (
    CollapseOp,
    DensityMatrix,
    IntegratorConfig,
    IntegratorMethod,
    StateVector,
)
from app.utils.linalg_utils import dagger, hermiticityError, minEigenvalue, propagatorCache, spectralNorm

logger = logging.getLogger(__name__)

NORM_TOL = 1e-9
TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8


def _rk4Propagator(generator: np.ndarray, step: float) -> np.ndarray:
    """One RK4 step of dx/dt = G x, i.e. Σ_{k≤4} (hG)^k/k!."""
    scaled = step * generator
    term = np.eye(generator.shape[0], dtype=complex)
    propagator = term.copy()
    for k in range(1, 5):
        term = term @ scaled / k
        propagator = propagator + term
    return propagator


def _checkTimes(times: Sequence[float]) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ParameterError("evolution times must be >= 0")
    if np.any(np.diff(times) < 0):
        raise ParameterError("evolution times must be sorted ascending")
    return times


def _propagateSeries(
    generator: np.ndarray,
    x0: np.ndarray,
    times: np.ndarray,
    cfg: IntegratorConfig,
    scale: float,
    tag: str,
) -> np.ndarray:
    """Sample x(t) = exp(G t) x0 on the grid using the configured method."""
    out = np.zeros((len(times), len(x0)), dtype=complex)
    if cfg.method is IntegratorMethod.EXPM:
        for k, t in enumerate(times):
            out[k] = scipy.linalg.expm(generator * t) @ x0
        return out

    dt = cfg.resolveStep(scale)
    current, previous = x0.astype(complex), 0.0
    totalSteps = 0
    for k, t in enumerate(times):
        interval = t - previous
        if interval > 0:
            nSteps = max(1, math.ceil(interval / dt - 1e-12))
            step = interval / nSteps
            propagator = propagatorCache.getPropagator(generator, step, _rk4Propagator, tag=tag)
            current = np.linalg.matrix_power(propagator, nSteps) @ current
            totalSteps += nSteps
        out[k] = current
        previous = t
    logger.debug("rk4 %s: dt=%.3e, %d steps to t=%.4g", tag, dt, totalSteps, times[-1] if len(times) else 0.0)
    return out


def evolveSchrodingerSeries(
    hamiltonian: np.ndarray,
    psi0: StateVector,
    times: Sequence[float],
    cfg: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """
    Unitary evolution sampled on a sorted time grid.

    Args:
        hamiltonian: Hermitian matrix
        psi0: Initial state
        times: Sorted non-negative times
        cfg: Integrator settings; matrix exponential by default

    Returns:
        Array of shape (len(times), dim)
    """
    cfg = cfg or IntegratorConfig()
    if hamiltonian.shape != (len(psi0), len(psi0)):
        raise ParameterError(f"dimension mismatch: H {hamiltonian.shape}, psi {len(psi0)}")
    times = _checkTimes(times)
    scale = spectralNorm(hamiltonian)
    states = _propagateSeries(-1j * hamiltonian, np.asarray(psi0, dtype=complex), times, cfg, scale, "schrodinger")

    norm0 = np.linalg.norm(psi0)
    tol = NORM_TOL if cfg.errorCap is None else max(NORM_TOL, cfg.errorCap * float(times[-1]))
    drift = np.max(np.abs(np.linalg.norm(states, axis=1) - norm0))
    if drift > tol:
        dt = cfg.resolveStep(scale) if cfg.method is IntegratorMethod.RK4 else float("nan")
        raise NumericalError(f"norm drift {drift:.3e} exceeds {tol:.1e} (method={cfg.method.value}, dt={dt:.3e})")
    return states


def evolveSchrodinger(
    hamiltonian: np.ndarray,
    psi0: StateVector,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
) -> StateVector:
    """
    ψ(t) = exp(−iHt) ψ₀.

    Args:
        hamiltonian: Hermitian matrix
        psi0: Initial state
        t: Time ≥ 0
        cfg: Integrator settings; matrix exponential by default

    Returns:
        Evolved state
    """
    return evolveSchrodingerSeries(hamiltonian, psi0, [t], cfg)[0]


def liouvillian(hamiltonian: np.ndarray, collapseOps: Sequence[CollapseOp]) -> np.ndarray:
    """
    Dense superoperator acting on column-stacked densities.

    vec(AρB) = (Bᵀ ⊗ A) vec(ρ), so −i[H,ρ] maps to −i(I⊗H − Hᵀ⊗I) and each
    channel adds r(L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I).
    """
    dim = hamiltonian.shape[0]
    identity = np.eye(dim, dtype=complex)
    generator = -1j * (np.kron(identity, hamiltonian) - np.kron(hamiltonian.T, identity))
    for rate, jump in collapseOps:
        if rate < 0:
            raise ParameterError(f"decay rate must be >= 0, got {rate}")
        if jump.shape != hamiltonian.shape:
            raise ParameterError(f"jump operator shape {jump.shape} does not match H {hamiltonian.shape}")
        number = dagger(jump) @ jump
        generator += rate * (
            np.kron(jump.conj(), jump) - 0.5 * np.kron(identity, number) - 0.5 * np.kron(number.T, identity)
        )
    return generator


def _checkDensity(rho: np.ndarray, trace0: float, label: str):
    traceDrift = abs(float(np.real(np.trace(rho))) - trace0)
    if traceDrift > TRACE_TOL:
        raise NumericalError(f"{label}: trace drift {traceDrift:.3e} exceeds {TRACE_TOL:.0e}")
    hermError = hermiticityError(rho)
    if hermError > HERMITICITY_TOL:
        raise NumericalError(f"{label}: Hermiticity error {hermError:.3e} exceeds {HERMITICITY_TOL:.0e}")
    lowest = minEigenvalue(rho)
    if lowest < -POSITIVITY_TOL:
        raise NumericalError(f"{label}: negative eigenvalue {lowest:.3e}")


def evolveLindbladSeries(
    hamiltonian: np.ndarray,
    collapseOps: Sequence[CollapseOp],
    rho0: DensityMatrix,
    times: Sequence[float],
    cfg: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """
    Master-equation evolution sampled on a sorted time grid.

    Args:
        hamiltonian: Hermitian matrix
        collapseOps: Decay channels (rate, jump)
        rho0: Initial density matrix
        times: Sorted non-negative times
        cfg: Integrator settings; fixed-step RK4 by default

    Returns:
        Array of shape (len(times), dim, dim)
    """
    cfg = cfg or IntegratorConfig(method=IntegratorMethod.RK4)
    dim = hamiltonian.shape[0]
    if rho0.shape != (dim, dim):
        raise ParameterError(f"dimension mismatch: H {hamiltonian.shape}, rho {rho0.shape}")
    times = _checkTimes(times)

    generator = liouvillian(hamiltonian, collapseOps)
    scale = max([spectralNorm(hamiltonian)] + [op.rate for op in collapseOps])
    vectors = _propagateSeries(generator, np.asarray(rho0, dtype=complex).reshape(-1, order="F"), times, cfg, scale, "lindblad")
    densities = np.stack([vec.reshape(dim, dim, order="F") for vec in vectors])

    trace0 = float(np.real(np.trace(rho0)))
    for k, t in enumerate(times):
        _checkDensity(densities[k], trace0, f"lindblad t={t:.4g}")
    return densities


def evolveLindblad(
    hamiltonian: np.ndarray,
    collapseOps: Sequence[CollapseOp],
    rho0: DensityMatrix,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
) -> DensityMatrix:
    """
    Integrate dρ/dt = −i[H,ρ] + Σ_j r_j(L_jρL_j† − ½{L_j†L_j, ρ}) up to t.

    Args:
        hamiltonian: Hermitian matrix
        collapseOps: Decay channels (rate, jump)
        rho0: Initial density matrix
        t: Time ≥ 0
        cfg: Integrator settings; fixed-step RK4 by default

    Returns:
        Density matrix at t
    """
    return evolveLindbladSeries(hamiltonian, collapseOps, rho0, [t], cfg)[0]


def conditionalHamiltonian(hamiltonian: np.ndarray, collapseOps: Sequence[CollapseOp]) -> np.ndarray:
    """Non-Hermitian H − (i/2)Σ r L†L."""
    effective = hamiltonian.astype(complex)
    for rate, jump in collapseOps:
        effective = effective - 0.5j * rate * (dagger(jump) @ jump)
    return effective


def evolveConditionalSeries(
    hamiltonian: np.ndarray,
    collapseOps: Sequence[CollapseOp],
    psi0: StateVector,
    times: Sequence[float],
) -> np.ndarray:
    """
    No-jump evolution of an unnormalised pure state, sampled on a time grid.

    Args:
        hamiltonian: Hermitian matrix
        collapseOps: Decay channels
        psi0: Initial state
        times: Sorted non-negative times

    Returns:
        Array of shape (len(times), dim); norms are non-increasing
    """
    times = _checkTimes(times)
    generator = -1j * conditionalHamiltonian(hamiltonian, collapseOps)
    states = np.stack([scipy.linalg.expm(generator * t) @ psi0 for t in times])
    norms = np.linalg.norm(states, axis=1)
    if np.any(norms > np.linalg.norm(psi0) + NORM_TOL):
        raise NumericalError("conditional evolution gained norm")
    return states


def evolveConditional(
    hamiltonian: np.ndarray,
    collapseOps: Sequence[CollapseOp],
    psi0: StateVector,
    t: float,
) -> StateVector:
    """Unnormalised no-jump state exp(−i(H − i/2 Σ r L†L)t) ψ₀."""
    return evolveConditionalSeries(hamiltonian, collapseOps, psi0, [t])[0]


def stateFidelity(rho: np.ndarray, psi: StateVector) -> float:
    """
    ⟨ψ|ρ|ψ⟩ for a density matrix, or |⟨ψ|φ⟩|² when rho is a state vector.

    Args:
        rho: Density matrix or (possibly unnormalised) state vector
        psi: Target state

    Returns:
        Fidelity, not renormalised
    """
    psi = np.asarray(psi, dtype=complex)
    if rho.ndim == 1:
        if rho.shape != psi.shape:
            raise ParameterError(f"dimension mismatch: {rho.shape} vs {psi.shape}")
        return float(abs(np.vdot(psi, rho)) ** 2)
    if rho.shape != (len(psi), len(psi)):
        raise ParameterError(f"dimension mismatch: {rho.shape} vs {psi.shape}")
    return float(np.real(np.vdot(psi, rho @ psi)))

