"""Cross-check of the open-system integrator against QuTiP's mesolve."""

import numpy as np
import pytest

from app.core import experiments, hamiltonian
from app.core.observables import wStateFidelity
from app.models.experiment import EvolutionMode
from app.models.quantum_types import InitialKind

qutip = pytest.importorskip("qutip")


@pytest.mark.slow
def test_w_fidelity_matches_mesolve(openParams):
    t0 = experiments.protocolTime(openParams)
    ours = experiments.simulateStates(openParams, EvolutionMode.FULL_OPEN, InitialKind.W_SEED, [t0])[0]

    h = qutip.Qobj(hamiltonian.buildHTotal(openParams))
    cOps = [np.sqrt(rate) * qutip.Qobj(jump) for rate, jump in hamiltonian.buildCollapseOps(openParams) if rate > 0]
    rho0 = qutip.Qobj(hamiltonian.initialDensity(openParams, InitialKind.W_SEED))
    result = qutip.mesolve(h, rho0, [0.0, t0], c_ops=cOps, options={"atol": 1e-10, "rtol": 1e-10, "nsteps": 100000})
    theirs = result.states[-1].full()

    n = openParams.nCavities
    assert wStateFidelity(ours, n) == pytest.approx(wStateFidelity(theirs, n), abs=1e-5)
