"""Configuration and job-record I/O.

The system configuration is a JSON file describing partitions: node
counts, processor specs with explicit units (tdp_watts, peak_flops,
memory_total_gib) and the charge model each partition bills under. Job
accounting logs are CSVs with one uniform-usage row per job, optionally
joined with a per-node detail file for heterogeneous jobs. Ingestion
never drops a row silently: every input row ends up either as a record
or as a row error.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import tables
from .core import (
    ChargeReport,
    JobRequest,
    NodeType,
    NodeUsage,
    Partition,
    ProcessorSpec,
    job_cost,
    validate_usage,
)
from .errors import AccountingError, CapacityError, ConfigError, ValidationError
from .models import ChargeModel, MODEL_IDS, PuhtiRates, get_model

JOBS_CSV_COLUMNS = (
    "job_id",
    "project",
    "partition",
    "nodes",
    "cores_per_node",
    "gpus_per_node",
    "mem_gib_per_node",
    "elapsed_hours",
)

DETAIL_CSV_COLUMNS = ("job_id", "node_index", "cores", "gpus", "mem_gib")


@dataclass(frozen=True)
class SystemConfig:
    """Validated partitions plus the charge model each one bills under."""

    partitions: tuple[Partition, ...]
    models: Mapping[str, ChargeModel]

    def partition(self, name: str) -> Partition:
        for partition in self.partitions:
            if partition.name == name:
                return partition
        raise ValidationError(f"unknown partition {name!r}")

    def model_for(self, partition_name: str) -> ChargeModel:
        self.partition(partition_name)
        return self.models[partition_name]

    def first_partition(self, with_gpus: bool) -> Partition | None:
        for partition in self.partitions:
            if (partition.node_type.gpu_count > 0) == with_gpus:
                return partition
        return None


@dataclass(frozen=True)
class JobRecord:
    """One accounted job: who ran it, where, with what, for how long."""

    job_id: str
    project: str
    partition: str
    node_usages: tuple[NodeUsage, ...]
    elapsed_hours: Fraction


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass(frozen=True)
class IngestResult:
    records: tuple[JobRecord, ...]
    errors: tuple[RowError, ...]
    total_rows: int


@dataclass(frozen=True)
class ProjectUsage:
    total_su: Fraction
    by_partition: dict[str, Fraction] = field(default_factory=dict)


def _decimal(raw, path: str, errors: list[str]) -> Fraction:
    """Parse a JSON number decimally (0.1 becomes exactly 1/10)."""
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        errors.append(f"{path}: expected a number, got {raw!r}")
        return Fraction(1)
    return Fraction(str(raw))


def _integer(raw, path: str, errors: list[str]) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        errors.append(f"{path}: expected an integer, got {raw!r}")
        return 1
    return raw


def _text(raw, path: str, errors: list[str]) -> str:
    if not isinstance(raw, str) or not raw:
        errors.append(f"{path}: expected a non-empty string, got {raw!r}")
        return "?"
    return raw


def _processor(entry, kind: str, path: str, errors: list[str]) -> tuple[ProcessorSpec | None, int]:
    if not isinstance(entry, dict):
        errors.append(f"{path}: expected an object")
        return None, 0
    before = len(errors)
    name = _text(entry.get("name"), f"{path}.name", errors)
    tdp = _decimal(entry.get("tdp_watts"), f"{path}.tdp_watts", errors)
    flops = _decimal(entry.get("peak_flops"), f"{path}.peak_flops", errors)
    count = _integer(entry.get("count", 1), f"{path}.count", errors)
    try:
        if kind == "cpu":
            cores = _integer(entry.get("cores"), f"{path}.cores", errors)
            if len(errors) > before:
                return None, 0
            return ProcessorSpec.cpu(name, cores, tdp, flops), count
        sms = _integer(entry.get("streaming_multiprocessors"), f"{path}.streaming_multiprocessors", errors)
        if len(errors) > before:
            return None, 0
        return ProcessorSpec.gpu(name, sms, tdp, flops), count
    except ValidationError as err:
        errors.append(f"{path}: {err}")
        return None, 0


def _node_type(entry, path: str, errors: list[str]) -> NodeType | None:
    if not isinstance(entry, dict):
        errors.append(f"{path}: expected an object")
        return None
    before = len(errors)
    name = _text(entry.get("name"), f"{path}.name", errors)
    memory = _decimal(entry.get("memory_total_gib"), f"{path}.memory_total_gib", errors)
    cpus: list[ProcessorSpec] = []
    for i, cpu_entry in enumerate(entry.get("cpus") or []):
        spec, count = _processor(cpu_entry, "cpu", f"{path}.cpus[{i}]", errors)
        if spec is not None:
            cpus.extend([spec] * count)
    gpus: list[ProcessorSpec] = []
    for i, gpu_entry in enumerate(entry.get("gpus") or []):
        spec, count = _processor(gpu_entry, "gpu", f"{path}.gpus[{i}]", errors)
        if spec is not None:
            gpus.extend([spec] * count)
    extras = {}
    raw_extras = entry.get("extra_resources") or {}
    if not isinstance(raw_extras, dict):
        errors.append(f"{path}.extra_resources: expected an object of name -> capacity")
        raw_extras = {}
    for resource, capacity in raw_extras.items():
        extras[resource] = _decimal(capacity, f"{path}.extra_resources.{resource}", errors)
    if len(errors) > before:
        return None
    try:
        return NodeType(name, cpus=tuple(cpus), memory_total_gib=memory, gpus=tuple(gpus), extra_resources=extras)
    except ValidationError as err:
        errors.append(f"{path}: {err}")
        return None


def _model_from_entry(model_id: str, parameters, path: str, errors: list[str]) -> ChargeModel | None:
    if model_id not in MODEL_IDS:
        errors.append(f"{path}.model: unknown model {model_id!r} (known: {', '.join(MODEL_IDS)})")
        return None
    parameters = parameters or {}
    if not isinstance(parameters, dict):
        errors.append(f"{path}.model_parameters: expected an object")
        return None
    try:
        if model_id == "puhti":
            rates_entry = parameters.get("rates") or {}
            rates = PuhtiRates(**{key: Fraction(str(value)) for key, value in rates_entry.items()})
            return get_model("puhti", rates=rates, nvme_resource=parameters.get("nvme_resource", "nvme_gib"))
        if parameters:
            errors.append(f"{path}.model_parameters: model {model_id!r} takes no parameters")
            return None
        if model_id == "peak-perf":
            return get_model("peak-perf")  # reference defaults to the node's own CPUs
        return get_model(model_id)
    except (ValidationError, TypeError, ValueError) as err:
        errors.append(f"{path}.model_parameters: {err}")
        return None


def parse_config(data: dict, source: str = "<config>") -> SystemConfig:
    """Build a SystemConfig from a parsed JSON object, collecting all violations."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: top level must be an object")
    raw_partitions = data.get("partitions")
    if not isinstance(raw_partitions, list) or not raw_partitions:
        raise ValidationError(f"{source}: 'partitions' must be a non-empty list")
    partitions: list[Partition] = []
    models: dict[str, ChargeModel] = {}
    seen_names: set[str] = set()
    for i, entry in enumerate(raw_partitions):
        path = f"partitions[{i}]"
        local: list[str] = []
        if not isinstance(entry, dict):
            errors.append(f"{path}: expected an object")
            continue
        name = _text(entry.get("name"), f"{path}.name", local)
        if name in seen_names:
            local.append(f"{path}.name: duplicate partition {name!r}")
        model_id = _text(entry.get("model", "energy"), f"{path}.model", local)
        node_count = _integer(entry.get("node_count", 1), f"{path}.node_count", local)
        node = _node_type(entry.get("node"), f"{path}.node", local)
        model = None
        if node is not None:
            model = _model_from_entry(model_id, entry.get("model_parameters"), path, local)
        if local or node is None or model is None:
            errors.extend(local)
            continue
        try:
            weight = model.node_weight(node)
            partitions.append(Partition(name, node, node_count, model_id=model_id, weight=weight))
        except AccountingError as err:
            errors.append(f"{path}: {err}")
            continue
        seen_names.add(name)
        models[name] = model
    if errors:
        raise ValidationError(f"{source}: invalid configuration:\n- " + "\n- ".join(errors))
    return SystemConfig(partitions=tuple(partitions), models=models)


def load_config(path: str | Path) -> SystemConfig:
    """Load and validate a partition configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
    return parse_config(data, source=str(path))


def _number_out(value: Fraction):
    return int(value) if value.denominator == 1 else float(value)


def config_to_dict(config: SystemConfig) -> dict:
    """Serialisable form of a config; load_config(parse) round-trips weights."""
    out_partitions = []
    for partition in config.partitions:
        node = partition.node_type
        cpus = _grouped_processors(node.cpus, "cpu")
        gpus = _grouped_processors(node.gpus, "gpu")
        entry = {
            "name": partition.name,
            "model": partition.model_id,
            "node_count": partition.node_count,
            "node": {
                "name": node.name,
                "memory_total_gib": _number_out(node.memory_total_gib),
                "cpus": cpus,
                "gpus": gpus,
            },
        }
        if node.extra_resources:
            entry["node"]["extra_resources"] = {
                resource: _number_out(capacity) for resource, capacity in node.extra_resources
            }
        parameters = config.models[partition.name].parameters()
        if parameters:
            entry["model_parameters"] = _serialise_parameters(parameters)
        out_partitions.append(entry)
    return {"partitions": out_partitions}


def _serialise_parameters(parameters: dict) -> dict:
    out = {}
    for key, value in parameters.items():
        if isinstance(value, dict):
            out[key] = _serialise_parameters(value)
        elif isinstance(value, Fraction):
            out[key] = _number_out(value)
        else:
            out[key] = value
    return out


def _grouped_processors(specs: Sequence[ProcessorSpec], kind: str) -> list[dict]:
    groups: list[dict] = []
    for spec in specs:
        entry = {
            "name": spec.name,
            "tdp_watts": _number_out(spec.tdp_watts),
            "peak_flops": _number_out(spec.peak_flops),
            "count": 1,
        }
        if kind == "cpu":
            entry["cores"] = spec.cores
        else:
            entry["streaming_multiprocessors"] = spec.streaming_multiprocessors
        if groups and {**groups[-1], "count": 1} == entry:
            groups[-1]["count"] += 1
        else:
            groups.append(entry)
    return groups


def save_config(config: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def builtin_config() -> SystemConfig:
    """The reference test system: one CPU and one GPU partition, energy model."""
    cpu_partition = Partition("cpu", tables.reference_cpu_node(), node_count=1000)
    gpu_partition = Partition("gpu", tables.reference_gpu_node(), node_count=250)
    return SystemConfig(
        partitions=(cpu_partition, gpu_partition),
        models={"cpu": get_model("energy"), "gpu": get_model("energy")},
    )


def _row_int(row: dict, column: str, minimum: int) -> int:
    raw = (row.get(column) or "").strip()
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{column}: not an integer: {raw!r}") from None
    if value < minimum:
        raise ValidationError(f"{column}: must be >= {minimum}, got {value}")
    return value


def _row_real(row: dict, column: str) -> Fraction:
    raw = (row.get(column) or "").strip()
    try:
        value = Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{column}: not a number: {raw!r}") from None
    if value < 0:
        raise ValidationError(f"{column}: must be nonnegative, got {raw}")
    return value


def _load_details(path: str | Path) -> tuple[dict[str, dict[int, NodeUsage]], dict[str, str]]:
    """Per-node usage keyed by job id, plus per-job parse failures."""
    details: dict[str, dict[int, NodeUsage]] = {}
    poisoned: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = set(DETAIL_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: detail file missing columns: {', '.join(sorted(missing))}")
        for line, row in enumerate(reader, start=2):
            job_id = (row.get("job_id") or "").strip()
            if not job_id:
                continue
            try:
                index = _row_int(row, "node_index", 0)
                usage = NodeUsage(
                    cores_used=_row_int(row, "cores", 0),
                    gpus_used=_row_int(row, "gpus", 0),
                    memory_used_gib=_row_real(row, "mem_gib"),
                )
            except ValidationError as err:
                poisoned.setdefault(job_id, f"detail line {line}: {err}")
                continue
            per_job = details.setdefault(job_id, {})
            if index in per_job:
                poisoned.setdefault(job_id, f"detail line {line}: duplicate node_index {index}")
            per_job[index] = usage
    return details, poisoned


def _parse_job_row(
    row: dict,
    config: SystemConfig,
    details: dict[str, dict[int, NodeUsage]],
    poisoned: dict[str, str],
) -> JobRecord:
    job_id = (row.get("job_id") or "").strip()
    if not job_id:
        raise ValidationError("job_id: must be non-empty")
    if job_id in poisoned:
        raise ValidationError(poisoned[job_id])
    project = (row.get("project") or "").strip()
    if not project:
        raise ValidationError("project: must be non-empty")
    partition = config.partition((row.get("partition") or "").strip())
    nodes = _row_int(row, "nodes", 1)
    elapsed = _row_real(row, "elapsed_hours")
    if job_id in details:
        per_node = details[job_id]
        if set(per_node) != set(range(nodes)):
            raise ValidationError(
                f"detail rows for job {job_id!r} must cover node_index 0..{nodes - 1} exactly"
            )
        usages = tuple(per_node[i] for i in range(nodes))
    else:
        usage = NodeUsage(
            cores_used=_row_int(row, "cores_per_node", 0),
            gpus_used=_row_int(row, "gpus_per_node", 0),
            memory_used_gib=_row_real(row, "mem_gib_per_node"),
        )
        usages = (usage,) * nodes
    # Surface capacity violations now rather than at charge time.
    for usage in dict.fromkeys(usages):
        validate_usage(usage, partition.node_type)
    JobRequest(partition, usages, elapsed)
    return JobRecord(job_id=job_id, project=project, partition=partition.name, node_usages=usages, elapsed_hours=elapsed)


def ingest_jobs(
    path: str | Path, config: SystemConfig, details_path: str | Path | None = None
) -> IngestResult:
    """Read a jobs CSV; malformed rows become row errors, never silent drops."""
    details: dict[str, dict[int, NodeUsage]] = {}
    poisoned: dict[str, str] = {}
    if details_path is not None:
        details, poisoned = _load_details(details_path)
    records: list[JobRecord] = []
    errors: list[RowError] = []
    seen_ids: set[str] = set()
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read jobs file {path}: {err}") from err
    with handle:
        reader = csv.DictReader(handle)
        missing = set(JOBS_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: jobs file missing columns: {', '.join(sorted(missing))}")
        total = 0
        for line, row in enumerate(reader, start=2):
            total += 1
            try:
                record = _parse_job_row(row, config, details, poisoned)
                if record.job_id in seen_ids:
                    raise ValidationError(f"duplicate job_id {record.job_id!r}")
            except (ValidationError, CapacityError) as err:
                errors.append(RowError(line=line, message=str(err)))
            else:
                seen_ids.add(record.job_id)
                records.append(record)
    return IngestResult(records=tuple(records), errors=tuple(errors), total_rows=total)


def charge_record(record: JobRecord, config: SystemConfig) -> ChargeReport:
    """Charge one job record under its partition's configured model."""
    partition = config.partition(record.partition)
    job = JobRequest(partition, record.node_usages, record.elapsed_hours)
    model = config.models.get(partition.name)
    if model is None:
        return job_cost(job)
    return model.charge(job)


def aggregate(records: Iterable[JobRecord], config: SystemConfig) -> dict[str, ProjectUsage]:
    """Per-project totals with per-partition subtotals, summed exactly."""
    subtotals: dict[str, dict[str, Fraction]] = {}
    for record in records:
        su = charge_record(record, config).total_su
        per_partition = subtotals.setdefault(record.project, {})
        per_partition[record.partition] = per_partition.get(record.partition, Fraction(0)) + su
    return {
        project: ProjectUsage(
            total_su=sum(parts.values(), start=Fraction(0)),
            by_partition=dict(sorted(parts.items())),
        )
        for project, parts in sorted(subtotals.items())
    }
