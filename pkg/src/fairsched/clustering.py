"""Task clustering strategies and the interleaved submission order.

Clustering groups tasks so every member of a cluster is pinned to the same
resource, trading scheduling freedom for eliminated transfers. Expected
costs over a heterogeneous catalog use

* avg_exec_time(t)  = mean over resources of workload / cpu_capacity,
* avg_comm_time(e)  = data_size / mean bandwidth.

Note the two aggregate differently on purpose: execution averages the
per-resource times, communication divides by the average bandwidth.

Strategies (all produce a partition of every workflow's tasks):

dfs-cst
    Repeatedly open a cluster at the unclustered task with the highest
    upward rank (rank = avg exec + max over successors of avg comm + rank),
    then extend depth-first, always stepping to the unclustered direct
    successor with the largest avg_comm + avg_exec, until no unclustered
    successor remains. Ties pick the smallest task id.

p2p
    Pipeline-only merging, reconstructed baseline: an edge u -> v is merged
    only when u has out-degree 1 and v has in-degree 1, so clusters are the
    maximal linear runs and everything else stays a singleton.

mdnc
    Multilevel dependent-node merging, reconstructed baseline: tasks are
    levelled by longest-path depth from the entries; scanning levels in
    ascending order (ids ascending within a level) each task merges with its
    smallest-id successor on the next level that no one has claimed yet.
    Chains of such merges spanning several levels form one cluster.

none
    One singleton per task, the no-clustering control.

Ordering: order_interleave() emits tasks round-robin over workflows in
submission order; on a workflow's turn, its lowest-id cluster whose next
unemitted member has every direct predecessor already emitted contributes
that member, and a workflow with no ready cluster passes the turn. The
result is a topological permutation of every task in the set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import GraphError, ResourceCatalog, Task, Workflow, WorkflowSet


@dataclass(frozen=True)
class Cluster:
    id: int
    workflow_id: str
    members: tuple[str, ...]  # in chain order


class ClusterPlan:
    """A partition of every task in a workflow set into clusters."""

    def __init__(self, clusters):
        self.clusters: tuple[Cluster, ...] = tuple(clusters)
        for i, c in enumerate(self.clusters):
            if c.id != i:
                raise ValueError(f"cluster ids must be 0..n-1 in order, got {c.id} at position {i}")
        self.task_to_cluster: dict[str, int] = {}
        for c in self.clusters:
            for m in c.members:
                if m in self.task_to_cluster:
                    raise ValueError(f"task {m!r} appears in two clusters")
                self.task_to_cluster[m] = c.id

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def cluster_of(self, task_id: str) -> int:
        try:
            return self.task_to_cluster[task_id]
        except KeyError:
            raise GraphError(f"task {task_id!r} is not in the plan") from None

    def violations(self, ws: WorkflowSet) -> list[str]:
        """Partition invariants: exactly the set's tasks, each exactly once,
        members inside one workflow, consecutive members joined by edges."""
        out: list[str] = []
        covered = set(self.task_to_cluster)
        expected = {t.id for t in ws.all_tasks()}
        for missing in sorted(expected - covered):
            out.append(f"task {missing!r} is not covered by any cluster")
        for extra in sorted(covered - expected):
            out.append(f"cluster member {extra!r} is not a task of the set")
        for c in self.clusters:
            if not c.members:
                out.append(f"cluster {c.id} is empty")
                continue
            try:
                w = ws.workflow(c.workflow_id)
            except GraphError:
                out.append(f"cluster {c.id} references unknown workflow {c.workflow_id!r}")
                continue
            for m in c.members:
                if not w.has_task(m):
                    out.append(f"cluster {c.id} member {m!r} is outside workflow {c.workflow_id!r}")
            for a, b in zip(c.members, c.members[1:]):
                if w.has_task(a) and w.has_task(b) and b not in w.successors(a):
                    out.append(f"cluster {c.id}: {a!r} -> {b!r} is not an edge")
        return out

    def to_dict(self) -> dict:
        return {
            "clusters": [
                {"id": c.id, "workflow_id": c.workflow_id, "members": list(c.members)} for c in self.clusters
            ]
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClusterPlan":
        clusters = [
            Cluster(int(c["id"]), c["workflow_id"], tuple(c["members"])) for c in doc["clusters"]
        ]
        return cls(clusters)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ClusterPlan":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class OrderedPlan:
    """A global submission order, one entry per task in the set."""

    order: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)


def avg_exec_time(task: Task, catalog: ResourceCatalog) -> float:
    """Mean execution time of a task across every resource type."""
    return sum(task.workload / r.cpu_capacity for r in catalog) / len(catalog)


def avg_comm_time(data_size: float, catalog: ResourceCatalog) -> float:
    """Transfer time of a data size over the mean catalog bandwidth."""
    mean_bw = sum(r.bandwidth for r in catalog) / len(catalog)
    return data_size / mean_bw


def upward_rank(w: Workflow, catalog: ResourceCatalog) -> dict[str, float]:
    """Classic upward rank on the average-cost graph: the expected length of
    the longest path from each task to an exit."""
    mean_bw = sum(r.bandwidth for r in catalog) / len(catalog)
    inv_cu = sum(1.0 / r.cpu_capacity for r in catalog) / len(catalog)
    rank: dict[str, float] = {}
    for tid in reversed(w.topological_order()):
        best = 0.0
        for s in w.successors(tid):
            value = w.edge(tid, s).data_size / mean_bw + rank[s]
            if value > best:
                best = value
        rank[tid] = w.task(tid).workload * inv_cu + best
    return rank


def cluster_dfs_cst(ws: WorkflowSet, catalog: ResourceCatalog) -> ClusterPlan:
    """Depth-first chains along the most expensive successor transitions."""
    mean_bw = sum(r.bandwidth for r in catalog) / len(catalog)
    inv_cu = sum(1.0 / r.cpu_capacity for r in catalog) / len(catalog)
    clusters: list[Cluster] = []
    for w in ws.workflows:
        rank = upward_rank(w, catalog)
        unclustered = {t.id for t in w.tasks}
        id_order = sorted(unclustered)
        while unclustered:
            head = None
            best_rank = -1.0
            for tid in id_order:  # ascending ids, so strict > keeps the smallest on ties
                if tid in unclustered and rank[tid] > best_rank:
                    head, best_rank = tid, rank[tid]
            members = [head]
            unclustered.remove(head)
            current = head
            while True:
                nxt = None
                best = -1.0
                for s in w.successors(current):
                    if s not in unclustered:
                        continue
                    value = w.edge(current, s).data_size / mean_bw + w.task(s).workload * inv_cu
                    if value > best:
                        nxt, best = s, value
                if nxt is None:
                    break
                members.append(nxt)
                unclustered.remove(nxt)
                current = nxt
            clusters.append(Cluster(len(clusters), w.id, tuple(members)))
    return ClusterPlan(clusters)


def cluster_p2p(ws: WorkflowSet, catalog: ResourceCatalog | None = None) -> ClusterPlan:
    """Merge maximal out-degree-1 -> in-degree-1 pipeline runs."""
    clusters: list[Cluster] = []
    for w in ws.workflows:
        topo = w.topological_order()
        link: dict[str, str] = {}
        merged_into: set[str] = set()
        for tid in topo:
            succ = w.successors(tid)
            if len(succ) == 1 and len(w.predecessors(succ[0])) == 1:
                link[tid] = succ[0]
                merged_into.add(succ[0])
        for tid in topo:
            if tid in merged_into:
                continue
            members = [tid]
            while members[-1] in link:
                members.append(link[members[-1]])
            clusters.append(Cluster(len(clusters), w.id, tuple(members)))
    return ClusterPlan(clusters)


def cluster_mdnc(ws: WorkflowSet, catalog: ResourceCatalog | None = None) -> ClusterPlan:
    """Greedy dependent-node merging between consecutive depth levels."""
    clusters: list[Cluster] = []
    for w in ws.workflows:
        topo = w.topological_order()
        level: dict[str, int] = {}
        for tid in topo:
            preds = w.predecessors(tid)
            level[tid] = 1 + max((level[p] for p in preds), default=-1)
        link: dict[str, str] = {}
        claimed: set[str] = set()
        for tid in sorted(topo, key=lambda t: (level[t], t)):
            for s in w.successors(tid):  # sorted, so the first hit is the smallest id
                if level[s] == level[tid] + 1 and s not in claimed:
                    link[tid] = s
                    claimed.add(s)
                    break
        topo_index = {tid: i for i, tid in enumerate(topo)}
        heads = sorted((tid for tid in topo if tid not in claimed), key=topo_index.__getitem__)
        for head in heads:
            members = [head]
            while members[-1] in link:
                members.append(link[members[-1]])
            clusters.append(Cluster(len(clusters), w.id, tuple(members)))
    return ClusterPlan(clusters)


def cluster_none(ws: WorkflowSet, catalog: ResourceCatalog | None = None) -> ClusterPlan:
    """One singleton cluster per task (no-clustering control)."""
    clusters: list[Cluster] = []
    for w in ws.workflows:
        for tid in w.topological_order():
            clusters.append(Cluster(len(clusters), w.id, (tid,)))
    return ClusterPlan(clusters)


CLUSTERERS = {
    "dfs-cst": cluster_dfs_cst,
    "p2p": cluster_p2p,
    "mdnc": cluster_mdnc,
    "none": cluster_none,
}


def make_plan(ws: WorkflowSet, catalog: ResourceCatalog, method: str) -> ClusterPlan:
    try:
        fn = CLUSTERERS[method]
    except KeyError:
        raise ValueError(f"unknown clusterer {method!r}; choose from {sorted(CLUSTERERS)}") from None
    return fn(ws, catalog)


def order_interleave(plan: ClusterPlan, ws: WorkflowSet) -> OrderedPlan:
    """Round-robin the workflows, emitting one ready task per turn.

    On each workflow's turn its clusters are scanned in id order; the first
    cluster whose next unemitted member has all direct predecessors emitted
    contributes that member. A workflow with nothing ready passes. The loop
    ends when every task is emitted; a full round with no progress means the
    plan is inconsistent with the DAGs and raises GraphError.
    """
    by_wf: dict[str, list[list]] = {w.id: [] for w in ws.workflows}
    for c in plan.clusters:
        if c.workflow_id not in by_wf:
            raise GraphError(f"cluster {c.id} references unknown workflow {c.workflow_id!r}")
        by_wf[c.workflow_id].append([c, 0])  # [cluster, next-member index]
    total = ws.n_tasks
    if len(plan.task_to_cluster) != total:
        raise GraphError("plan does not cover the workflow set exactly")
    emitted: set[str] = set()
    order: list[str] = []
    while len(order) < total:
        progressed = False
        for w in ws.workflows:
            for entry in by_wf[w.id]:
                cluster, i = entry
                if i >= len(cluster.members):
                    continue
                nxt = cluster.members[i]
                if all(p in emitted for p in w.predecessors(nxt)):
                    order.append(nxt)
                    emitted.add(nxt)
                    entry[1] = i + 1
                    progressed = True
                    break
        if not progressed:
            raise GraphError("interleaving stalled; plan is inconsistent with the workflow DAGs")
    return OrderedPlan(tuple(order))
