"""Experiment harness: configs, seeded runs, result trees, replay.

A config names datasets (synthetic generator specs or native-format files),
the clusterers to compare, the optimizer settings, and a repetition count.
Each (dataset, clusterer, repetition) run gets its own seed derived from
the master seed by a stable digest, runs the optimizer, and persists a
self-contained run record (dataset definition, catalog, optimizer config,
seed, final front) plus a front CSV. Metrics are then scored per dataset
against the union reference of all its fronts and written as CSV reports.

Determinism: two invocations with the same config produce bit-identical
result trees. For that reason wall-clock durations are logged but never
written into result files, and nothing iterates over unordered sets when
producing output.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io as wio
from .clustering import CLUSTERERS, make_plan, order_interleave
from .evaluation import compute_baselines
from .generator import GeneratorSpec, generate, stable_seed, table2_specs
from .metrics import aggregate_scores, score_fronts, write_aggregate_csv, write_rdi_csv, write_run_scores_csv
from .model import ResourceCatalog, WorkflowSet, ensure_valid
from .nsga3 import Front, Individual, OptimizerConfig, run_with_evaluator
from .evaluation import Evaluator

log = logging.getLogger(__name__)


class ConfigError(Exception):
    """The experiment configuration is unusable."""


@dataclass(frozen=True)
class DatasetSpec:
    """Either a generator spec or a path to a native-format file."""

    name: str
    generator: GeneratorSpec | None = None
    path: str | None = None

    def validate(self) -> None:
        if not self.name:
            raise ConfigError("dataset entry without a name")
        if (self.generator is None) == (self.path is None):
            raise ConfigError(f"dataset {self.name!r}: exactly one of generator fields or path is required")
        if self.generator is not None:
            try:
                self.generator.validate()
            except ValueError as exc:
                raise ConfigError(f"dataset {self.name!r}: {exc}") from exc

    def to_dict(self) -> dict:
        if self.generator is not None:
            doc = asdict(self.generator)
            doc["task_count_range"] = list(self.generator.task_count_range)
            return {"name": self.name, **doc}
        return {"name": self.name, "path": self.path}

    @classmethod
    def from_dict(cls, doc: dict, master_seed: int = 0) -> "DatasetSpec":
        name = doc.get("name")
        if not name:
            raise ConfigError("dataset entry without a name")
        if "path" in doc:
            return cls(name=name, path=doc["path"])
        try:
            lo, hi = doc["task_count_range"]
            spec = GeneratorSpec(
                n_workflows=int(doc["n_workflows"]),
                task_count_range=(int(lo), int(hi)),
                ccr=float(doc["ccr"]),
                parallelism_degree=float(doc["parallelism_degree"]),
                seed=int(doc.get("seed", stable_seed(master_seed, "dataset", name))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"dataset {name!r}: bad generator fields ({exc})") from exc
        return cls(name=name, generator=spec)


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...]
    clusterers: tuple[str, ...] = ("dfs-cst", "p2p", "mdnc")
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    repetitions: int = 10
    seed: int = 0
    output_dir: str = "results"
    resources_path: str | None = None
    normalize_igd: bool = True

    def validate(self) -> None:
        if not self.datasets:
            raise ConfigError("no datasets configured")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        for d in self.datasets:
            d.validate()
        if not self.clusterers:
            raise ConfigError("no clusterers configured")
        for c in self.clusterers:
            if c not in CLUSTERERS:
                raise ConfigError(f"unknown clusterer {c!r}; choose from {sorted(CLUSTERERS)}")
        if len(set(self.clusterers)) != len(self.clusterers):
            raise ConfigError("clusterers must be unique")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        try:
            self.optimizer.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "repetitions": self.repetitions,
            "output_dir": self.output_dir,
            "clusterers": list(self.clusterers),
            "optimizer": asdict(self.optimizer),
            "resources": self.resources_path,
            "normalize_igd": self.normalize_igd,
            "datasets": [d.to_dict() for d in self.datasets],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        seed = int(doc.get("seed", 0))
        opt_doc = doc.get("optimizer", {})
        try:
            optimizer = OptimizerConfig(
                population=int(opt_doc.get("population", 50)),
                generations=int(opt_doc.get("generations", 200)),
                crossover_rate=float(opt_doc.get("crossover_rate", 0.8)),
                mutation_rate=float(opt_doc.get("mutation_rate", 0.01)),
                divisions=int(opt_doc.get("divisions", 12)),
                seed=int(opt_doc.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad optimizer fields: {exc}") from exc
        raw_datasets = doc.get("datasets")
        if raw_datasets == "table2":
            datasets = tuple(
                DatasetSpec(name=name, generator=spec) for name, spec in table2_specs(seed)
            )
        elif isinstance(raw_datasets, list):
            datasets = tuple(DatasetSpec.from_dict(d, master_seed=seed) for d in raw_datasets)
        else:
            raise ConfigError("config needs a 'datasets' list (or the string \"table2\")")
        return cls(
            datasets=datasets,
            clusterers=tuple(doc.get("clusterers", ("dfs-cst", "p2p", "mdnc"))),
            optimizer=optimizer,
            repetitions=int(doc.get("repetitions", 10)),
            seed=seed,
            output_dir=str(doc.get("output_dir", "results")),
            resources_path=doc.get("resources"),
            normalize_igd=bool(doc.get("normalize_igd", True)),
        )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(doc)


@dataclass
class RunRecord:
    """Everything needed to reproduce and audit a single optimizer run.

    wall_time is measured and logged but deliberately excluded from the
    persisted form so result trees are bit-identical across invocations.
    """

    dataset: DatasetSpec
    clusterer: str
    repetition: int
    seed: int
    optimizer: OptimizerConfig
    catalog: ResourceCatalog
    front: Front
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict(),
            "clusterer": self.clusterer,
            "repetition": self.repetition,
            "seed": self.seed,
            "optimizer": asdict(self.optimizer),
            "resources": wio.resources_to_dict(self.catalog),
            "front": {
                "objectives": [[float(v) for v in ind.objectives] for ind in self.front],
                "genes": [list(ind.genes_tuple()) for ind in self.front],
            },
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _front_from_dict(doc: dict) -> Front:
    individuals = tuple(
        Individual(np.array(genes, dtype=int), np.array(objs, dtype=float))
        for objs, genes in zip(doc["objectives"], doc["genes"])
    )
    return Front(individuals)


def load_record(path) -> RunRecord:
    doc = json.loads(Path(path).read_text())
    return RunRecord(
        dataset=DatasetSpec.from_dict(doc["dataset"]),
        clusterer=doc["clusterer"],
        repetition=int(doc["repetition"]),
        seed=int(doc["seed"]),
        optimizer=OptimizerConfig(**doc["optimizer"]),
        catalog=wio.resources_from_dict(doc["resources"], where=str(path)),
        front=_front_from_dict(doc["front"]),
    )


def _load_dataset(spec: DatasetSpec, base_dir: Path | None = None) -> WorkflowSet:
    if spec.generator is not None:
        return generate(spec.generator)
    path = Path(spec.path)
    if base_dir is not None and not path.is_absolute() and not path.exists():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"dataset {spec.name!r}: file {spec.path} does not exist")
    return wio.load_native(path)


def _resolve_catalog(cfg: ExperimentConfig) -> ResourceCatalog:
    if cfg.resources_path is None:
        return wio.default_catalog()
    path = Path(cfg.resources_path)
    if not path.exists():
        raise ConfigError(f"resources file {path} does not exist")
    return wio.load_resources(path)


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run every (dataset, clusterer, repetition), scoring as we go.

    Returns the output directory. Layout:

        config.json                      resolved config echo
        resources.json                   catalog used
        datasets/<name>.json             generated datasets, native format
        runs/<ds>/<clusterer>/repNN.json       run records
        runs/<ds>/<clusterer>/repNN_front.csv  front exports
        metrics/<ds>_runs.csv            per-run IGD / hypervolume
        metrics/aggregate.csv            means, stds, RDIs
        metrics/rdi.csv                  wide RDI table
    """
    cfg.validate()
    catalog = _resolve_catalog(cfg)
    out = Path(cfg.output_dir)
    (out / "datasets").mkdir(parents=True, exist_ok=True)
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    wio.save_resources(catalog, out / "resources.json")

    all_scores = []
    for ds in cfg.datasets:
        ws = ensure_valid(_load_dataset(ds))
        if ds.generator is not None:
            wio.save_native(ws, out / "datasets" / f"{ds.name}.json")
        baselines = compute_baselines(ws, catalog)
        fronts_by_algorithm: dict[str, list[np.ndarray]] = {}
        for clusterer in cfg.clusterers:
            plan = make_plan(ws, catalog, clusterer)
            order = order_interleave(plan, ws)
            evaluator = Evaluator(ws, catalog, plan, order, baselines)
            run_dir = out / "runs" / ds.name / clusterer
            run_dir.mkdir(parents=True, exist_ok=True)
            fronts: list[np.ndarray] = []
            for rep in range(cfg.repetitions):
                seed = stable_seed(cfg.seed, ds.name, clusterer, rep)
                opt = replace(cfg.optimizer, seed=seed)
                started = time.perf_counter()
                front = run_with_evaluator(evaluator, opt)
                elapsed = time.perf_counter() - started
                record = RunRecord(ds, clusterer, rep, seed, opt, catalog, front, wall_time=elapsed)
                record.save(run_dir / f"rep{rep:02d}.json")
                front.to_csv(run_dir / f"rep{rep:02d}_front.csv")
                fronts.append(front.objectives_array())
                log.info(
                    "%s / %s / rep %d: %d front points, %.2fs",
                    ds.name, clusterer, rep, len(front), elapsed,
                )
            fronts_by_algorithm[clusterer] = fronts
        scores, _ = score_fronts(ds.name, fronts_by_algorithm, normalize_igd=cfg.normalize_igd)
        write_run_scores_csv(scores, out / "metrics" / f"{ds.name}_runs.csv")
        all_scores.extend(scores)
    aggregates = aggregate_scores(all_scores)
    write_aggregate_csv(aggregates, out / "metrics" / "aggregate.csv")
    write_rdi_csv(aggregates, out / "metrics" / "rdi.csv")
    return out


def score_stored_runs(runs_dir, out_dir, normalize_igd: bool = True) -> Path:
    """Recompute every metric CSV from stored run records (the `eval` verb)."""
    runs_dir = Path(runs_dir)
    if not runs_dir.is_dir():
        raise ConfigError(f"runs directory {runs_dir} does not exist")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_scores = []
    dataset_dirs = sorted(p for p in runs_dir.iterdir() if p.is_dir())
    if not dataset_dirs:
        raise ConfigError(f"no run records under {runs_dir}")
    for ds_dir in dataset_dirs:
        fronts_by_algorithm: dict[str, list[np.ndarray]] = {}
        for cl_dir in sorted(p for p in ds_dir.iterdir() if p.is_dir()):
            fronts = []
            for record_path in sorted(cl_dir.glob("rep*.json")):
                record = load_record(record_path)
                fronts.append(record.front.objectives_array())
            if fronts:
                fronts_by_algorithm[cl_dir.name] = fronts
        if not fronts_by_algorithm:
            continue
        scores, _ = score_fronts(ds_dir.name, fronts_by_algorithm, normalize_igd=normalize_igd)
        write_run_scores_csv(scores, out_dir / f"{ds_dir.name}_runs.csv")
        all_scores.extend(scores)
    if not all_scores:
        raise ConfigError(f"no run records under {runs_dir}")
    aggregates = aggregate_scores(all_scores)
    write_aggregate_csv(aggregates, out_dir / "aggregate.csv")
    write_rdi_csv(aggregates, out_dir / "rdi.csv")
    return out_dir


def replay(record_path) -> tuple[Front, bool]:
    """Re-run a stored record and report whether the front matches exactly."""
    record_path = Path(record_path)
    record = load_record(record_path)
    ws = ensure_valid(_load_dataset(record.dataset, base_dir=record_path.parent))
    plan = make_plan(ws, record.catalog, record.clusterer)
    order = order_interleave(plan, ws)
    front = run_with_evaluator(Evaluator(ws, record.catalog, plan, order), record.optimizer)
    stored = record.front
    matches = len(front) == len(stored) and all(
        a.genes_tuple() == b.genes_tuple() and tuple(a.objectives) == tuple(b.objectives)
        for a, b in zip(front, stored)
    )
    return front, matches
