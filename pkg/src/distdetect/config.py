"""Declarative experiment configs (YAML) and their validation.

A config bundles a signal model, a network process, run-length parameters
and output locations. Validation enforces the three modeling assumptions
(bounded log-marginals, global identifiability, expected connectivity) and
raises ConfigInvalid naming the specific violation.
"""

import hashlib
import json
from dataclasses import dataclass

import yaml

from . import network, signals
from .errors import ConfigInvalid, DistDetectError


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    model: signals.SignalModel
    process: network.NetworkProcess
    horizon: int
    learning_rate: object      # "unit" | "theorem1" | float
    delta: float
    checkpoints: tuple
    trials: int
    seed: int
    output_dir: str
    digest: str
    raw: dict


def config_digest(raw: dict) -> str:
    """SHA-256 of the canonical JSON serialization of the config tree."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _build_model(spec: dict) -> signals.SignalModel:
    tables = spec["agents"]
    m = len(tables[0])
    states = signals.StateSpace(m=m, true_index=int(spec.get("true_state", 0)))
    agents = [signals.AgentLikelihood(t) for t in tables]
    return signals.SignalModel(states=states, agents=agents)


def _build_process(spec: dict) -> network.NetworkProcess:
    kind = spec["kind"]
    if kind == "fixed":
        return network.fixed_process(spec["matrix"])
    if kind == "gossip":
        g = spec["graph"]
        graph = network.Graph(int(g["n"]), frozenset(tuple(e) for e in g["edges"]))
        return network.gossip_process(graph)
    if kind == "metropolis":
        g = spec["graph"]
        graph = network.Graph(int(g["n"]), frozenset(tuple(e) for e in g["edges"]))
        return network.fixed_process(network.metropolis_matrix(graph))
    if kind == "finite_support":
        pairs = [(item["matrix"], item["prob"]) for item in spec["support"]]
        return network.finite_support_process(pairs)
    raise ConfigInvalid(f"unknown network kind {kind!r}")


def load_config(path) -> ScenarioConfig:
    with open(path) as f:
        raw = yaml.safe_load(f)
    try:
        return build_config(raw)
    except ConfigInvalid:
        raise
    except (DistDetectError, KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{type(exc).__name__}: {exc}") from exc


def build_config(raw: dict) -> ScenarioConfig:
    try:
        model = _build_model(raw["signal_model"])
        process = _build_process(raw["network"])
    except ConfigInvalid:
        raise
    except (DistDetectError, KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{type(exc).__name__}: {exc}") from exc

    if process.n != model.n:
        raise ConfigInvalid(
            f"network has n={process.n} agents but signal model has n={model.n}"
        )
    if not network.check_expected_connectivity(process):
        raise ConfigInvalid("network is not connected in expectation (A3 violated)")

    horizon = int(raw.get("horizon", 1))
    delta = float(raw.get("delta", 0.1))
    trials = int(raw.get("trials", 1))
    lr = raw.get("learning_rate", "unit")
    if lr not in ("unit", "theorem1"):
        lr = float(lr)
    if horizon < 1:
        raise ConfigInvalid(f"horizon must be >= 1, got {horizon}")
    if trials < 1:
        raise ConfigInvalid(f"trials must be >= 1, got {trials}")
    if not 0 < delta < 1:
        raise ConfigInvalid(f"delta must lie in (0, 1), got {delta}")
    checkpoints = tuple(int(t) for t in raw.get("checkpoints", ()))
    for t in checkpoints:
        if not 1 <= t <= horizon:
            raise ConfigInvalid(f"checkpoint {t} outside [1, horizon={horizon}]")

    return ScenarioConfig(
        model=model,
        process=process,
        horizon=horizon,
        learning_rate=lr,
        delta=delta,
        checkpoints=checkpoints,
        trials=trials,
        seed=int(raw.get("seed", 0)),
        output_dir=str(raw.get("output_dir", "out")),
        digest=config_digest(raw),
        raw=raw,
    )
