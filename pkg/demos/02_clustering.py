"""
Three ways to cut a DAG into clusters
=====================================

Clustering trades parallelism for silence on the wire: tasks in one
cluster share a machine, so their edges stop costing communication time.
"""

from fairsched import GeneratorSpec, default_catalog, generate, make_plan

# One synthetic workflow set, communication-heavy on purpose (high ccr)
# so the strategies actually disagree.
ws = generate(GeneratorSpec(
    n_workflows=2, task_count_range=(8, 10), ccr=5.0, parallelism_degree=0.5, seed=7,
))
catalog = default_catalog()


def show(plan, ws):
    for w in ws.workflows:
        chains = [c.members for c in plan if c.workflow_id == w.id]
        print(f"  {w.id}: " + "  ".join("->".join(m) for m in chains))


for method in ("none", "p2p", "mdnc", "dfs-cst"):
    plan = make_plan(ws, catalog, method)
    print(f"{method}: {plan.n_clusters} clusters")
    show(plan, ws)
    print()

# none     keeps every task separate: maximum freedom, maximum traffic.
# p2p      only merges straight pipeline segments (single child, single
#          parent), never anything with branching around it.
# mdnc     merges across consecutive depth levels, so clusters span the
#          layered structure of the graph.
# dfs-cst  walks depth-first from the highest-rank task and keeps
#          swallowing the successor with the largest combined
#          communication + computation weight: the expensive paths end
#          up co-located.
