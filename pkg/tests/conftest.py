import numpy as np
import pytest

from mechpert.data import PerturbationDataset
from mechpert.graph import PpiGraph


@pytest.fixture
def two_node_graph():
    return PpiGraph.from_edges([("A", "B", 1.0)])


@pytest.fixture
def path_graph():
    return PpiGraph.from_edges([("A", "B", 1.0), ("B", "C", 1.0)])


@pytest.fixture
def triangle_graph():
    return PpiGraph.from_edges([("A", "B", 1.0), ("B", "C", 1.0), ("A", "C", 1.0)])


@pytest.fixture
def star_graph():
    return PpiGraph.from_edges(
        [("HUB", "L1", 1.0), ("HUB", "L2", 1.0), ("HUB", "L3", 1.0), ("HUB", "L4", 1.0)]
    )


SIX_NODE_EDGES = [
    ("A", "B", 0.9),
    ("B", "C", 0.8),
    ("A", "C", 0.7),
    ("C", "D", 0.6),
    ("D", "E", 0.9),
    ("E", "F", 0.5),
    ("B", "F", 0.4),
]

SIX_NODE_POINCARE = {
    "A": np.array([0.10, 0.00]),
    "B": np.array([0.15, 0.05]),
    "C": np.array([0.05, -0.10]),
    "D": np.array([0.40, 0.30]),
    "E": np.array([-0.50, 0.20]),
    "F": np.array([0.00, 0.60]),
}

SIX_NODE_PROFILES = {
    "A": np.array([1.0, 0.0, -1.0, 2.0]),
    "B": np.array([0.5, 1.0, 0.0, -1.0]),
    "C": np.array([-1.0, 2.0, 1.0, 0.5]),
    "D": np.array([2.0, -1.0, 0.5, 1.0]),
    "E": np.array([0.0, 0.5, 2.0, -0.5]),
    "F": np.array([1.5, 1.5, -0.5, 0.0]),
}


@pytest.fixture
def six_node_graph():
    return PpiGraph.from_edges(SIX_NODE_EDGES)


@pytest.fixture
def six_node_dataset():
    return PerturbationDataset(
        readout_genes=("R1", "R2", "R3", "R4"),
        profiles={g: v.copy() for g, v in SIX_NODE_PROFILES.items()},
    )


@pytest.fixture
def six_node_poincare():
    return {g: v.copy() for g, v in SIX_NODE_POINCARE.items()}
