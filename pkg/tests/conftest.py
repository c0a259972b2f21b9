from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fairsched.model import Edge, Resource, ResourceCatalog, Task, Workflow, WorkflowSet


@pytest.fixture
def diamond() -> Workflow:
    """a -> {b, c} -> d, weighted so the expensive branch runs through c.

    On the unit catalog: avg comm + avg exec is 5 toward b and 9 toward c.
    """
    tasks = [
        Task("a", "wf", 2.0),
        Task("b", "wf", 4.0),
        Task("c", "wf", 8.0),
        Task("d", "wf", 2.0),
    ]
    edges = [
        Edge("a", "b", 10.0),
        Edge("a", "c", 10.0),
        Edge("b", "d", 4.0),
        Edge("c", "d", 6.0),
    ]
    return Workflow("wf", tasks, edges)


@pytest.fixture
def diamond_set(diamond) -> WorkflowSet:
    return WorkflowSet([diamond])


@pytest.fixture
def unit_catalog() -> ResourceCatalog:
    """One resource: capacity 1, bandwidth 10, unit price and interval."""
    return ResourceCatalog((Resource("r0", 1.0, 10.0, 1.0, 1.0),))


@pytest.fixture
def two_chain_set() -> WorkflowSet:
    w1 = Workflow("w1", [Task("a", "w1", 1.0), Task("b", "w1", 1.0)], [Edge("a", "b", 5.0)])
    w2 = Workflow("w2", [Task("x", "w2", 1.0), Task("y", "w2", 1.0)], [Edge("x", "y", 5.0)])
    return WorkflowSet([w1, w2])


@pytest.fixture
def pair_catalog() -> ResourceCatalog:
    return ResourceCatalog(
        (
            Resource("r0", 1.0, 10.0, 1.0, 1.0),
            Resource("r1", 2.0, 5.0, 3.0, 1.0),
        )
    )
