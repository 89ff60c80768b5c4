import numpy as np
import pytest

from citegen.generator import CsParams, generate
from citegen.graph import LabeledGraph
from citegen.neardag import inject_back_edges


@pytest.fixture(scope="session")
def three_community_params():
    return CsParams(p=(0.5, 0.3, 0.2), m=(5.0, 4.0, 3.0),
                    rho=(0.3, 0.5, 0.7), sigma2=(9.0, 8.0, 4.0))


@pytest.fixture(scope="session")
def dag_graph(three_community_params):
    return generate(three_community_params, 1500, 42)


@pytest.fixture(scope="session")
def near_dag_graph(dag_graph):
    return inject_back_edges(dag_graph, 0.1, 7)


@pytest.fixture
def make_graph():
    def _make(n, edges, labels=None, timestamps=None):
        src = np.array([e[0] for e in edges], np.int64)
        dst = np.array([e[1] for e in edges], np.int64)
        return LabeledGraph(
            num_nodes=n, src=src, dst=dst,
            labels=None if labels is None else np.asarray(labels, np.int64),
            timestamps=None if timestamps is None
            else np.asarray(timestamps, np.int64))
    return _make
