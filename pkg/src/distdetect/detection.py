"""Centralized and decentralized belief-update engines.

Both engines accumulate log-likelihood potentials and materialize beliefs on
demand through the overflow-safe exponential-weights normalization. The
decentralized engine diffuses potentials through a mixing matrix each round;
averaging its potentials over agents reproduces the centralized potential
exactly when both are driven by the same signal stream.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateNetwork, DimensionMismatch
from .prob import gibbs_belief
from .signals import log_marginal_vector


@dataclass(frozen=True, eq=False)
class CentralizedState:
    phi: np.ndarray  # length m
    t: int
    eta: float


@dataclass(frozen=True, eq=False)
class DecentralizedState:
    phi: np.ndarray  # n x m, row i = agent i's potential
    t: int
    eta: float


def initial_centralized(m: int, eta: float) -> CentralizedState:
    return CentralizedState(phi=np.zeros(m), t=0, eta=eta)


def initial_decentralized(n: int, m: int, eta: float) -> DecentralizedState:
    return DecentralizedState(phi=np.zeros((n, m)), t=0, eta=eta)


def log_marginal_matrix(model, sample) -> np.ndarray:
    """n x m matrix whose row i is agent i's log-marginal vector for its symbol."""
    return np.stack(
        [log_marginal_vector(model, i, int(s)) for i, s in enumerate(sample)]
    )


def centralized_step(state: CentralizedState, sample, model) -> CentralizedState:
    """phi <- phi + (1/n) sum_i psi_i; the fusion-center accumulation."""
    psi = log_marginal_matrix(model, sample).mean(axis=0)
    return replace(state, phi=state.phi + psi, t=state.t + 1)


def decentralized_step(state: DecentralizedState, w, sample, model) -> DecentralizedState:
    """phi <- W phi + Psi: neighbor-averaged potentials plus fresh log-marginals."""
    w = np.asarray(w, dtype=float)
    if w.shape != (state.phi.shape[0], state.phi.shape[0]):
        raise DimensionMismatch(
            f"mixing matrix shape {w.shape} does not match {state.phi.shape[0]} agents"
        )
    if len(sample) != state.phi.shape[0] or len(model.agents) != state.phi.shape[0]:
        raise DimensionMismatch("sample / model size does not match engine state")
    psi = log_marginal_matrix(model, sample)
    return replace(state, phi=w @ state.phi + psi, t=state.t + 1)


def centralized_belief(state: CentralizedState) -> np.ndarray:
    return gibbs_belief(state.phi, state.eta)


def beliefs(state: DecentralizedState):
    """Per-agent belief vectors from the current potentials."""
    return [gibbs_belief(row, state.eta) for row in state.phi]


def closed_form_phi(matrices, psis, i: int) -> np.ndarray:
    """Direct evaluation of the decentralized potential after t rounds.

    phi_{i,t} = sum_{tau=1}^{t} sum_j [W(t) W(t-1) ... W(tau+1)]_{ij} psi_{j,tau},
    with the empty product (tau = t) taken as the identity. Independent of the
    recursive engine; used as its oracle.
    """
    psis = np.asarray(psis, dtype=float)
    if psis.ndim != 3:
        raise DimensionMismatch("psis must be a t x n x m tensor")
    t, n, m = psis.shape
    if len(matrices) != t:
        raise DimensionMismatch(f"{len(matrices)} matrices for {t} rounds")
    if not 0 <= i < n:
        raise DimensionMismatch(f"agent index {i} outside [0, {n})")
    row = np.zeros(n)
    row[i] = 1.0
    phi = np.zeros(m)
    for tau in range(t, 0, -1):
        phi += row @ psis[tau - 1]
        row = row @ np.asarray(matrices[tau - 1], dtype=float)
    return phi


def theorem1_learning_rate(B: float, n: int, sigma2_w: float) -> float:
    """The spectral-gap-scaled learning rate (1 - sigma2) / (16 B log n)."""
    if n < 2:
        raise DegenerateNetwork(f"need n >= 2, got {n}")
    if not 0 <= sigma2_w < 1:
        raise DegenerateNetwork(f"sigma2 must lie in [0, 1), got {sigma2_w}")
    if B <= 0:
        raise DegenerateNetwork(f"log bound B must be positive, got {B}")
    return (1.0 - sigma2_w) / (16.0 * B * math.log(n))
