"""Decentralization cost, theoretical bound evaluation and Monte Carlo checks.

The two high-probability guarantees (a time-independent bound on cumulative
KL cost under fixed networks, and an anytime bound on the log TV error under
random networks) are evaluated here and verified empirically: we run many
independent seeded trials and require the violation frequency to stay below
delta plus three standard errors.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import detection, network, signals
from .errors import DegenerateInputs, InvalidScenario, UnderflowWindow


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Per-step diagnostics of one paired centralized/decentralized run.

    Arrays are indexed by step-1 on the first axis (step t lives at index t-1).
    """

    tv_error: np.ndarray          # T x n, per-agent TV distance to the truth
    kl_increment: np.ndarray      # T x n, D_KL(agent belief || centralized belief)
    centralized_tv: np.ndarray    # T
    exp_gap_sum: np.ndarray       # T x n, sum_{k != true} exp(phi_ik - phi_i,true)
    potential_gap: np.ndarray     # T, max_k |avg_i phi_{i,t}(k) - phi_t(k)|
    seed: tuple
    config_digest: str = ""

    @property
    def horizon(self) -> int:
        return self.tv_error.shape[0]


@dataclass(frozen=True)
class BoundReport:
    total: float
    terms: dict
    inputs: dict
    notes: str = ""


@dataclass(frozen=True)
class MonteCarloReport:
    which: str
    trials: int
    violations: int
    violation_rate: float
    delta: float
    slack: float
    verdict: str  # "pass" | "fail"
    bound: BoundReport
    trial_stats: dict = field(default_factory=dict)


def _logsumexp(z, axis=None):
    zmax = np.max(z, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(z - zmax), axis=axis, keepdims=True)) + zmax
    return np.squeeze(out, axis=axis) if axis is not None else float(out.item())


def trial_rng(base_seed: int, trial: int):
    """Generator for one trial: seeded from SeedSequence(base_seed, spawn_key=(trial,)).

    Fixed function of (base seed, trial index), so enlarging the trial count
    reuses earlier trials' outcomes as a prefix.
    """
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(trial,)))


def simulate_trial(model, process, eta: float, horizon: int,
                   base_seed: int, trial: int = 0,
                   config_digest: str = "") -> TrajectoryRecord:
    """Run both engines on a common signal stream for `horizon` steps."""
    rng = trial_rng(base_seed, trial)
    n, m = model.n, model.m
    true = model.states.true_index
    logtabs = signals.log_tables(model)
    cdfs = model._true_cdfs

    phi_dec = np.zeros((n, m))
    phi_cen = np.zeros(m)

    tv = np.empty((horizon, n))
    kl = np.empty((horizon, n))
    ctv = np.empty(horizon)
    egs = np.empty((horizon, n))
    pgap = np.empty(horizon)

    false_cols = [k for k in range(m) if k != true]
    psi = np.empty((n, m))
    for step in range(horizon):
        w = process.draw(rng)
        u = rng.random(n)
        for i in range(n):
            sym = np.searchsorted(cdfs[i], u[i], side="right")
            psi[i] = logtabs[i][:, sym]
        phi_dec = w @ phi_dec + psi
        phi_cen = phi_cen + psi.mean(axis=0)

        zi = eta * phi_dec
        li = _logsumexp(zi, axis=1)
        mu = np.exp(zi - li[:, None])
        zc = eta * phi_cen
        lc = _logsumexp(zc)
        mu_c = np.exp(zc - lc)

        # TV to the truth is the total false-state mass; summing it directly
        # keeps precision down to float underflow (1 - mu[true] cancels at ~1e-16)
        tv[step] = mu[:, false_cols].sum(axis=1)
        ctv[step] = mu_c[false_cols].sum()
        # KL in potential space: exact even when belief entries underflow
        kl[step] = (mu * (zi - zc[None, :])).sum(axis=1) - li + lc
        with np.errstate(over="ignore"):
            egs[step] = np.exp(
                phi_dec[:, false_cols] - phi_dec[:, [true]]
            ).sum(axis=1)
        pgap[step] = np.abs(phi_dec.mean(axis=0) - phi_cen).max()

    np.maximum(kl, 0.0, out=kl)  # clip rounding noise on identical beliefs
    return TrajectoryRecord(
        tv_error=tv, kl_increment=kl, centralized_tv=ctv, exp_gap_sum=egs,
        potential_gap=pgap, seed=(base_seed, trial), config_digest=config_digest,
    )


def kl_cost(trajectory: TrajectoryRecord, i: int, T: int) -> float:
    """Cumulative decentralization cost sum_{t<=T} D_KL(mu_{i,t} || mu_t)."""
    if T < 1 or T > trajectory.horizon:
        raise ValueError(f"T={T} outside recorded horizon {trajectory.horizon}")
    return float(trajectory.kl_increment[:T, i].sum())


def theorem1_bound(B, I, m, n, delta, sigma2_w) -> BoundReport:
    """High-probability, time-independent bound on the cumulative KL cost.

    The printed statement's network denominator 1 - lambda_max(W) is read as
    the spectral gap 1 - sigma2(W): for these symmetric stochastic matrices
    lambda_max is identically 1, which would make the term degenerate.
    """
    _check_bound_inputs(B=B, I=I, m=m, n=n, delta=delta, sigma2_w=sigma2_w)
    concentration = (18.0 * B**2 / I**2) * max(
        math.log(6.0 * m / delta), 3.0 * B * math.sqrt(2.0) / I
    )
    net = (48.0 * B * math.log(n) / I) * (math.log(m) + 2.0) / (1.0 - sigma2_w)
    return BoundReport(
        total=concentration + net,
        terms={"concentration": concentration, "network": net},
        inputs={"B": B, "I": I, "m": m, "n": n, "delta": delta, "sigma2": sigma2_w},
        notes="network denominator evaluated as spectral gap 1 - sigma2(W)",
    )


def prop1_log_tv_bound(B, I, m, n, delta, sigma2_w, t) -> BoundReport:
    """Anytime high-probability bound on log ||mu_{i,t} - e_true||_TV (natural log)."""
    _check_bound_inputs(B=B, I=I, m=m, n=n, delta=delta, sigma2_w=sigma2_w)
    if t < 1:
        raise DegenerateInputs(f"t must be >= 1, got {t}")
    terms = {
        "rate": -I * t,
        "fluctuation": math.sqrt(2.0 * B**2 * t * math.log(m / delta)),
        "network": 8.0 * B * math.log(n) / (1.0 - sigma2_w),
        "log_m": math.log(m),
    }
    return BoundReport(
        total=sum(terms.values()),
        terms=terms,
        inputs={"B": B, "I": I, "m": m, "n": n, "delta": delta,
                "sigma2": sigma2_w, "t": t},
    )


def _check_bound_inputs(*, B, I, m, n, delta, sigma2_w):
    if n < 2 or m < 2:
        raise DegenerateInputs(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    if B <= 0 or I <= 0:
        raise DegenerateInputs(f"need B > 0 and I > 0, got B={B}, I={I}")
    if not 0 < delta < 1:
        raise DegenerateInputs(f"delta must lie in (0, 1), got {delta}")
    if not 0 <= sigma2_w < 1:
        raise DegenerateInputs(f"sigma2 must lie in [0, 1), got {sigma2_w}")


@dataclass(frozen=True)
class VerificationScenario:
    """Inputs for one Monte Carlo bound check."""

    model: object
    process: network.NetworkProcess
    delta: float
    horizon: int          # T for the cost bound; ignored by the anytime check
    checkpoint: int       # t for the anytime check; ignored by the cost bound
    eta_mode: object = "auto"  # "auto" | "unit" | "theorem1" | float


def _scenario_quantities(sc: VerificationScenario):
    report = signals.validate_model(sc.model)
    if not network.check_expected_connectivity(sc.process):
        raise InvalidScenario("network process is not connected in expectation")
    if sc.process.n != sc.model.n:
        raise InvalidScenario(
            f"process has n={sc.process.n} but model has n={sc.model.n}"
        )
    s2 = network.sigma2(network.expected_matrix(sc.process))
    _, rate = signals.second_state(sc.model)
    return report.log_bound, rate, s2


def resolve_eta(mode, B, n, sigma2_w, which=None) -> float:
    if mode == "auto":
        mode = "theorem1" if which == "theorem1" else "unit"
    if mode == "unit":
        return 1.0
    if mode == "theorem1":
        return detection.theorem1_learning_rate(B, n, sigma2_w)
    return float(mode)


def theorem1_trial_statistic(sc: VerificationScenario, eta, base_seed, trial) -> float:
    traj = simulate_trial(sc.model, sc.process, eta, sc.horizon, base_seed, trial)
    return max(kl_cost(traj, i, sc.horizon) for i in range(sc.model.n))


def prop1_trial_statistic(sc: VerificationScenario, eta, base_seed, trial) -> float:
    traj = simulate_trial(sc.model, sc.process, eta, sc.checkpoint, base_seed, trial)
    tv = traj.tv_error[sc.checkpoint - 1]
    with np.errstate(divide="ignore"):
        return float(np.max(np.log(tv)))  # max over agents; log(0) = -inf is fine


def monte_carlo_verify(sc: VerificationScenario, which: str, R: int,
                       base_seed: int, statistics=None) -> MonteCarloReport:
    """Estimate the violation frequency of a bound over R independent trials.

    `statistics` lets a caller supply precomputed per-trial statistics (e.g.
    from a worker pool); when omitted the trials run here sequentially.
    """
    if which not in ("theorem1", "prop1"):
        raise ValueError(f"unknown verification target {which!r}")
    if R < 1:
        raise ValueError("need at least one trial")
    B, I, s2 = _scenario_quantities(sc)
    eta = resolve_eta(sc.eta_mode, B, sc.model.n, s2, which)
    if which == "theorem1":
        bound = theorem1_bound(B, I, sc.model.m, sc.model.n, sc.delta, s2)
        stat_fn = theorem1_trial_statistic
    else:
        bound = prop1_log_tv_bound(
            B, I, sc.model.m, sc.model.n, sc.delta, s2, sc.checkpoint
        )
        stat_fn = prop1_trial_statistic

    if statistics is None:
        statistics = [stat_fn(sc, eta, base_seed, r) for r in range(R)]
    statistics = list(statistics)
    if len(statistics) != R:
        raise ValueError(f"got {len(statistics)} statistics for {R} trials")

    violations = sum(1 for s in statistics if s > bound.total)
    rate = violations / R
    slack = 3.0 * math.sqrt(sc.delta * (1.0 - sc.delta) / R)
    verdict = "pass" if rate <= sc.delta + slack else "fail"
    finite = [s for s in statistics if math.isfinite(s)]
    return MonteCarloReport(
        which=which, trials=R, violations=violations, violation_rate=rate,
        delta=sc.delta, slack=slack, verdict=verdict, bound=bound,
        trial_stats={
            "eta": eta,
            "max_statistic": max(statistics) if statistics else float("nan"),
            "mean_finite_statistic":
                float(np.mean(finite)) if finite else float("-inf"),
        },
    )


def empirical_rate_slope(trajectory: TrajectoryRecord, i: int, window) -> float:
    """Least-squares slope of ln(TV error) against t over steps t1..t2 inclusive."""
    t1, t2 = window
    if not 1 <= t1 < t2 <= trajectory.horizon:
        raise ValueError(f"bad window {window} for horizon {trajectory.horizon}")
    tv = trajectory.tv_error[t1 - 1:t2, i]
    if np.any(tv <= 0):
        raise UnderflowWindow(f"TV error reached 0 inside window {window}")
    ts = np.arange(t1, t2 + 1, dtype=float)
    return float(np.polyfit(ts, np.log(tv), 1)[0])


def last_positive_tv_step(trajectory: TrajectoryRecord, i: int) -> int:
    """Largest step t with strictly positive TV error for agent i (0 if none)."""
    pos = np.flatnonzero(trajectory.tv_error[:, i] > 0)
    return int(pos[-1] + 1) if pos.size else 0
