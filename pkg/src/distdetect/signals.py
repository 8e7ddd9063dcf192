"""Finite-alphabet signal models and the information quantities they induce.

A model bundles one likelihood table per agent (rows = states, columns =
alphabet symbols). All entries must be strictly positive so the uniform
log-likelihood bound B is finite, and the true state must be globally
identifiable: every false state is distinguished by at least one agent.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadRowSum,
    DimensionMismatch,
    NotIdentifiable,
    ZeroLikelihoodEntry,
)
from .prob import kl_divergence

ROW_SUM_TOL = 1e-12
EQUIV_TOL = 1e-12  # per-entry tolerance for observational equivalence


@dataclass(frozen=True)
class StateSpace:
    m: int
    true_index: int = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"need at least 2 states, got m={self.m}")
        if not 0 <= self.true_index < self.m:
            raise ValueError(f"true_index {self.true_index} outside [0, {self.m})")


@dataclass(frozen=True, eq=False)
class AgentLikelihood:
    """m x |S_i| likelihood table for one agent; row k is l_i(.|theta_k)."""

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", np.asarray(self.table, dtype=float))
        if self.table.ndim != 2:
            raise ValueError("likelihood table must be 2-d (states x symbols)")

    @property
    def alphabet_size(self) -> int:
        return self.table.shape[1]


@dataclass(frozen=True, eq=False)
class SignalModel:
    states: StateSpace
    agents: tuple
    # per-agent row-cumsum over the true state's row, for inverse-CDF sampling
    _true_cdfs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        validate_model(self)
        k = self.states.true_index
        cdfs = tuple(np.cumsum(a.table[k]) for a in self.agents)
        object.__setattr__(self, "_true_cdfs", cdfs)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return self.states.m


@dataclass(frozen=True)
class ValidationReport:
    n: int
    m: int
    log_bound: float
    equivalent_sets: tuple  # per-agent frozenset of state indices
    global_equivalent: frozenset


def validate_model(model) -> ValidationReport:
    """Check positivity, row normalization, n >= 2 and global identifiability.

    Returns the computed bound B and the per-agent observational-equivalence
    sets. Raises on any assumption violation.
    """
    if len(model.agents) < 2:
        raise ValueError(f"need at least 2 agents, got {len(model.agents)}")
    m = model.states.m
    for i, agent in enumerate(model.agents):
        t = agent.table
        if t.shape[0] != m:
            raise DimensionMismatch(
                f"agent {i} table has {t.shape[0]} rows, model has {m} states"
            )
        if np.any(t <= 0):
            raise ZeroLikelihoodEntry(
                f"agent {i} table has a non-positive entry; log-bound would be infinite"
            )
        sums = t.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            raise BadRowSum(f"agent {i} rows {np.flatnonzero(bad).tolist()} sum to {sums[bad]}")

    equiv = tuple(frozenset(equivalent_states(model, i)) for i in range(len(model.agents)))
    common = frozenset.intersection(*equiv)
    if common != {model.states.true_index}:
        raise NotIdentifiable(
            f"states {sorted(common - {model.states.true_index})} are observationally "
            "equivalent to the true state for every agent"
        )
    return ValidationReport(
        n=len(model.agents),
        m=m,
        log_bound=log_bound_B(model),
        equivalent_sets=equiv,
        global_equivalent=common,
    )


def log_bound_B(model) -> float:
    """Tightest uniform bound B on |log l_i(s|theta_k)| over all i, k, s."""
    return max(float(np.abs(np.log(a.table)).max()) for a in model.agents)


def equivalent_states(model, agent: int):
    """State indices whose likelihood row matches the true state's row for this agent."""
    t = model.agents[agent].table
    truth = t[model.states.true_index]
    close = np.abs(t - truth).max(axis=1) <= EQUIV_TOL
    return set(np.flatnonzero(close).tolist())


def pairwise_rate(model, k: int) -> float:
    """Network-averaged KL rate I(theta_1, theta_k) = (1/n) sum_i D_KL(row_true || row_k)."""
    true = model.states.true_index
    if k == true:
        raise ValueError("pairwise rate is defined for k != true state")
    total = sum(
        kl_divergence(a.table[true], a.table[k]) for a in model.agents
    )
    return total / len(model.agents)


def second_state(model):
    """The hardest false state: argmin_k I(theta_1, theta_k), ties to the smallest index.

    Returns (state index, rate). This is the state whose signals look most
    like the true state's, hence the one that controls the convergence rate.
    """
    true = model.states.true_index
    best_k, best_rate = None, None
    for k in range(model.states.m):
        if k == true:
            continue
        r = pairwise_rate(model, k)
        if best_rate is None or r < best_rate:
            best_k, best_rate = k, r
    return best_k, best_rate


def sample_step(model, rng) -> np.ndarray:
    """One synchronous draw: each agent samples a symbol from its true-state row."""
    u = rng.random(model.n)
    out = np.empty(model.n, dtype=np.int64)
    for i, cdf in enumerate(model._true_cdfs):
        out[i] = np.searchsorted(cdf, u[i], side="right")
    return out


def log_marginal_vector(model, agent: int, symbol: int) -> np.ndarray:
    """(log l_agent(symbol | theta_k))_k; every entry lies in [-B, B]."""
    return np.log(model.agents[agent].table[:, symbol])


def log_tables(model):
    """Per-agent elementwise-log likelihood tables (precomputed for hot loops)."""
    return [np.log(a.table) for a in model.agents]
