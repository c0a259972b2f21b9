"""Loading and saving workflow sets and resource catalogs.

Two on-disk formats are supported:

* the native JSON format (round-trip safe, used by the experiment runner),
* a subset of the Pegasus DAX 2.x/3.x XML dialect, enough for the classic
  benchmark workflows: job elements with a runtime attribute become tasks,
  child/parent elements become edges, and transfer sizes are aggregated per
  (parent, child) pair from the file sizes the parent writes and the child
  reads.

Schema problems raise FormatError naming the offending field or element.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .model import Edge, Resource, ResourceCatalog, Task, Workflow, WorkflowSet, ensure_valid

DEFAULT_CPU_CAPACITIES = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
DEFAULT_BANDWIDTH = 10.0
PRICE_EXPONENT = 1.2


class FormatError(Exception):
    """A file does not conform to the expected schema."""


def _require(mapping, key, where, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise FormatError(f"{where}: missing field {key!r}")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise FormatError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _number(mapping, key, where, minimum=None, strict=False):
    value = _require(mapping, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}.{key}: expected a number, got {value!r}")
    value = float(value)
    if minimum is not None:
        if strict and not value > minimum:
            raise FormatError(f"{where}.{key}: must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise FormatError(f"{where}.{key}: must be >= {minimum}, got {value}")
    return value


# ---------------------------------------------------------------------------
# native JSON workflow format


def workflow_set_to_dict(ws: WorkflowSet) -> dict:
    return {
        "workflows": [
            {
                "id": w.id,
                "tasks": [{"id": t.id, "workload": t.workload} for t in w.tasks],
                "edges": [{"src": e.src, "dst": e.dst, "data_size": e.data_size} for e in w.edges],
            }
            for w in ws.workflows
        ]
    }


def workflow_set_from_dict(doc: dict, where: str = "document") -> WorkflowSet:
    entries = _require(doc, "workflows", where, list)
    workflows = []
    for wi, wdoc in enumerate(entries):
        wwhere = f"{where}.workflows[{wi}]"
        wid = _require(wdoc, "id", wwhere, str)
        task_ids = set()
        tasks = []
        for ti, tdoc in enumerate(_require(wdoc, "tasks", wwhere, list)):
            twhere = f"{wwhere}.tasks[{ti}]"
            tid = _require(tdoc, "id", twhere, str)
            workload = _number(tdoc, "workload", twhere, minimum=0.0)
            tasks.append(Task(tid, wid, workload))
            task_ids.add(tid)
        edges = []
        for ei, edoc in enumerate(_require(wdoc, "edges", wwhere, list)):
            ewhere = f"{wwhere}.edges[{ei}]"
            src = _require(edoc, "src", ewhere, str)
            dst = _require(edoc, "dst", ewhere, str)
            for endpoint, key in ((src, "src"), (dst, "dst")):
                if endpoint not in task_ids:
                    raise FormatError(
                        f"{ewhere}.{key}: task {endpoint!r} is not defined in workflow {wid!r} "
                        "(cross-workflow or unknown endpoint)"
                    )
            edges.append(Edge(src, dst, _number(edoc, "data_size", ewhere, minimum=0.0)))
        workflows.append(Workflow(wid, tasks, edges))
    ws = WorkflowSet(workflows)
    from .model import validate

    violations = validate(ws)
    if violations:
        raise FormatError(f"{where}: " + "; ".join(violations))
    return ws


def save_native(ws: WorkflowSet, path) -> None:
    Path(path).write_text(json.dumps(workflow_set_to_dict(ws), indent=2) + "\n")


def load_native(path) -> WorkflowSet:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return workflow_set_from_dict(doc, where=str(path))


# ---------------------------------------------------------------------------
# resource catalogs


def resources_to_dict(catalog: ResourceCatalog) -> dict:
    return {
        "resources": [
            {
                "id": r.id,
                "cpu": r.cpu_capacity,
                "bandwidth": r.bandwidth,
                "cost_per_interval": r.cost_per_interval,
                "billing_interval": r.billing_interval,
            }
            for r in catalog
        ]
    }


def resources_from_dict(doc: dict, where: str = "document") -> ResourceCatalog:
    entries = _require(doc, "resources", where, list)
    resources = []
    for ri, rdoc in enumerate(entries):
        rwhere = f"{where}.resources[{ri}]"
        resources.append(
            Resource(
                id=_require(rdoc, "id", rwhere, str),
                cpu_capacity=_number(rdoc, "cpu", rwhere, minimum=0.0, strict=True),
                bandwidth=_number(rdoc, "bandwidth", rwhere, minimum=0.0, strict=True),
                cost_per_interval=_number(rdoc, "cost_per_interval", rwhere, minimum=0.0, strict=True),
                billing_interval=_number(rdoc, "billing_interval", rwhere, minimum=0.0, strict=True),
            )
        )
    try:
        return ResourceCatalog(tuple(resources))
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def save_resources(catalog: ResourceCatalog, path) -> None:
    Path(path).write_text(json.dumps(resources_to_dict(catalog), indent=2) + "\n")


def load_resources(path) -> ResourceCatalog:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return resources_from_dict(doc, where=str(path))


def default_catalog() -> ResourceCatalog:
    """Six machine types doubling in capacity, price growing slightly
    superlinearly (capacity^1.2), uniform bandwidth, unit billing interval."""
    resources = tuple(
        Resource(
            id=f"r{i}",
            cpu_capacity=cu,
            bandwidth=DEFAULT_BANDWIDTH,
            cost_per_interval=cu**PRICE_EXPONENT,
            billing_interval=1.0,
        )
        for i, cu in enumerate(DEFAULT_CPU_CAPACITIES)
    )
    return ResourceCatalog(resources)


# ---------------------------------------------------------------------------
# DAX


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def load_dax(path, id_prefix: str = "") -> Workflow:
    """Read one workflow from a Pegasus DAX file.

    Task workload comes from the job's runtime attribute (required). Edge
    data size is the summed size of files the parent declares as output and
    the child declares as input; a child/parent pair without shared files
    still yields an edge with data size 0. id_prefix is prepended to every
    job id, which keeps ids unique when several DAX files are combined into
    one workflow set.
    """
    path = Path(path)
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise FormatError(f"{path}: malformed XML: {exc}") from exc
    root = tree.getroot()
    wid = root.attrib.get("name") or path.stem

    runtimes: dict[str, float] = {}
    outputs: dict[str, dict[str, float]] = {}
    inputs: dict[str, dict[str, float]] = {}
    order: list[str] = []
    for job in root:
        if _local(job.tag) != "job":
            continue
        jid = job.attrib.get("id")
        if not jid:
            raise FormatError(f"{path}: job element without id")
        jid = id_prefix + jid
        if jid in runtimes:
            raise FormatError(f"{path}: duplicate job id {jid!r}")
        runtime = job.attrib.get("runtime")
        if runtime is None:
            raise FormatError(f"{path}: job {jid!r} has no runtime attribute")
        try:
            runtimes[jid] = float(runtime)
        except ValueError:
            raise FormatError(f"{path}: job {jid!r} has non-numeric runtime {runtime!r}") from None
        order.append(jid)
        outputs[jid] = {}
        inputs[jid] = {}
        for uses in job:
            if _local(uses.tag) != "uses":
                continue
            fname = uses.attrib.get("file") or uses.attrib.get("name")
            if not fname:
                continue
            size = float(uses.attrib.get("size", 0.0))
            link = uses.attrib.get("link")
            if link == "output":
                outputs[jid][fname] = outputs[jid].get(fname, 0.0) + size
            elif link == "input":
                inputs[jid][fname] = inputs[jid].get(fname, 0.0) + size

    edges: list[Edge] = []
    for child in root:
        if _local(child.tag) != "child":
            continue
        cref = id_prefix + child.attrib.get("ref", "")
        if cref not in runtimes:
            raise FormatError(f"{path}: child element references unknown job {child.attrib.get('ref')!r}")
        for parent in child:
            if _local(parent.tag) != "parent":
                continue
            pref = id_prefix + parent.attrib.get("ref", "")
            if pref not in runtimes:
                raise FormatError(f"{path}: parent element references unknown job {parent.attrib.get('ref')!r}")
            size = sum(s for f, s in outputs[pref].items() if f in inputs[cref])
            edges.append(Edge(pref, cref, size))

    tasks = [Task(jid, wid, runtimes[jid]) for jid in order]
    w = Workflow(wid, tasks, edges)
    from .model import validate

    violations = validate(WorkflowSet([w]))
    if violations:
        raise FormatError(f"{path}: " + "; ".join(violations))
    return w
