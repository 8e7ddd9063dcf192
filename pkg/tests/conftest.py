import numpy as np
import pytest

from distdetect import network, signals

INFORMATIVE = [[0.8, 0.2], [0.2, 0.8]]
UNINFORMATIVE_2 = [[0.5, 0.5], [0.5, 0.5]]


def make_model(tables, true_state=0):
    m = len(tables[0])
    return signals.SignalModel(
        states=signals.StateSpace(m=m, true_index=true_state),
        agents=[signals.AgentLikelihood(t) for t in tables],
    )


@pytest.fixture
def two_agent_model():
    """Agent 0 informative, agent 1 uninformative; m = 2."""
    return make_model([INFORMATIVE, UNINFORMATIVE_2])


@pytest.fixture
def reference_model():
    """The reference scenario: n=4, m=3, binary alphabets, two informative agents."""
    uninf = [[0.5, 0.5]] * 3
    return make_model([
        [[0.8, 0.2], [0.5, 0.5], [0.8, 0.2]],
        [[0.8, 0.2], [0.8, 0.2], [0.5, 0.5]],
        uninf,
        uninf,
    ])


@pytest.fixture
def reference_process():
    return network.gossip_process(network.cycle_graph(4))


@pytest.fixture
def path3_matrix():
    return network.metropolis_matrix(network.path_graph(3))


def random_mixing_matrix(rng, n):
    """A random symmetric doubly stochastic matrix (Metropolis on a random connected graph)."""
    edges = {(i, i + 1) for i in range(n - 1)}  # spanning path keeps it connected
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                edges.add((i, j))
    return network.metropolis_matrix(network.Graph(n, frozenset(edges)))
