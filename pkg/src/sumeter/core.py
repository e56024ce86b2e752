"""Service-unit accounting for shared heterogeneous compute nodes.

A job is charged, on every node it occupies, for the largest fraction of
any single resource it requested there (CPU cores, GPUs, memory, plus
optional extras such as node-local scratch). Those per-node fractions are
summed, scaled by the partition's node-hour weight and by the hours run:

    cost = weight * hours * sum_i max(cores_i, gpus_i, memory_i, ...)

CPU-only partitions weigh their core count, so one fully-used core-hour
costs exactly one service unit. GPU partitions weigh the ratio of the
node's cumulative GPU TDP to its cumulative CPU TDP, scaled by the core
count: the price of a GPU node-hour tracks its power envelope rather than
its peak throughput, which steers cost-minimising users toward the more
energy-efficient hardware for their job.

All arithmetic is exact. Inputs are converted to `fractions.Fraction` on
entry (floats keep their binary value; strings such as "0.1" are read as
decimals) and values are rounded only for display.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import CapacityError, ModelError, ValidationError

RealLike = Union[int, float, Fraction, str]


def exact(value: RealLike) -> Fraction:
    """Convert a quantity to an exact Fraction.

    Accepts anything `fractions.Fraction` accepts: ints, floats (kept at
    their exact binary value), Fractions, Decimals, and decimal strings.
    """
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise ValidationError(f"not a number: {value!r}") from err


class ProcessorKind(enum.Enum):
    CPU = "cpu"
    GPU = "gpu"


@dataclass(frozen=True)
class ProcessorSpec:
    """One CPU or GPU model: compute units, TDP and peak 64-bit FMA FLOP/s.

    CPUs carry a core count, GPUs a streaming-multiprocessor count; the
    other field must stay zero. TDP and peak FLOPs must be positive.
    """

    name: str
    kind: ProcessorKind
    tdp_watts: Fraction
    peak_flops: Fraction
    cores: int = 0
    streaming_multiprocessors: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tdp_watts", exact(self.tdp_watts))
        object.__setattr__(self, "peak_flops", exact(self.peak_flops))
        if self.tdp_watts <= 0:
            raise ValidationError(f"processor {self.name!r}: tdp_watts must be positive")
        if self.peak_flops <= 0:
            raise ValidationError(f"processor {self.name!r}: peak_flops must be positive")
        if self.kind is ProcessorKind.CPU:
            if self.cores < 1:
                raise ValidationError(f"CPU {self.name!r} needs at least one core")
            if self.streaming_multiprocessors != 0:
                raise ValidationError(f"CPU {self.name!r} must not declare streaming multiprocessors")
        else:
            if self.streaming_multiprocessors < 1:
                raise ValidationError(f"GPU {self.name!r} needs at least one streaming multiprocessor")
            if self.cores != 0:
                raise ValidationError(f"GPU {self.name!r} must not declare CPU cores")

    @classmethod
    def cpu(cls, name: str, cores: int, tdp_watts: RealLike, peak_flops: RealLike) -> "ProcessorSpec":
        return cls(name, ProcessorKind.CPU, exact(tdp_watts), exact(peak_flops), cores=cores)

    @classmethod
    def gpu(
        cls, name: str, streaming_multiprocessors: int, tdp_watts: RealLike, peak_flops: RealLike
    ) -> "ProcessorSpec":
        return cls(
            name,
            ProcessorKind.GPU,
            exact(tdp_watts),
            exact(peak_flops),
            streaming_multiprocessors=streaming_multiprocessors,
        )


def _normalize_pairs(pairs, what: str) -> tuple[tuple[str, Fraction], ...]:
    """Normalize a mapping or (name, amount) sequence to sorted unique pairs."""
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    out = []
    seen = set()
    for name, amount in items:
        if not name:
            raise ValidationError(f"{what}: resource name must be non-empty")
        if name in seen:
            raise ValidationError(f"{what}: duplicate resource {name!r}")
        seen.add(name)
        out.append((str(name), exact(amount)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class NodeType:
    """Inventory of one compute-node flavour.

    `extra_resources` lists additional per-node consumables (for example
    node-local scratch in GiB) as (name, capacity) pairs; each one adds an
    argument to the per-node max when a job requests it.
    """

    name: str
    cpus: tuple[ProcessorSpec, ...]
    memory_total_gib: Fraction
    gpus: tuple[ProcessorSpec, ...] = ()
    extra_resources: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "cpus", tuple(self.cpus))
        object.__setattr__(self, "gpus", tuple(self.gpus))
        object.__setattr__(self, "memory_total_gib", exact(self.memory_total_gib))
        object.__setattr__(
            self, "extra_resources", _normalize_pairs(self.extra_resources, f"node type {self.name!r}")
        )
        if not self.cpus:
            raise ValidationError(f"node type {self.name!r} needs at least one CPU")
        for spec in self.cpus:
            if spec.kind is not ProcessorKind.CPU:
                raise ValidationError(f"node type {self.name!r}: {spec.name!r} listed under cpus is not a CPU")
        for spec in self.gpus:
            if spec.kind is not ProcessorKind.GPU:
                raise ValidationError(f"node type {self.name!r}: {spec.name!r} listed under gpus is not a GPU")
        if self.memory_total_gib <= 0:
            raise ValidationError(f"node type {self.name!r}: memory_total_gib must be positive")
        for resource, capacity in self.extra_resources:
            if capacity <= 0:
                raise ValidationError(f"node type {self.name!r}: capacity of {resource!r} must be positive")

    @property
    def total_cores(self) -> int:
        return sum(spec.cores for spec in self.cpus)

    @property
    def gpu_count(self) -> int:
        return len(self.gpus)

    @property
    def total_streaming_multiprocessors(self) -> int:
        return sum(spec.streaming_multiprocessors for spec in self.gpus)

    @property
    def cpu_tdp_watts(self) -> Fraction:
        """Cumulative TDP over all CPUs."""
        return sum((spec.tdp_watts for spec in self.cpus), start=Fraction(0))

    @property
    def gpu_tdp_watts(self) -> Fraction:
        """Cumulative TDP over all GPUs (zero on CPU-only nodes)."""
        return sum((spec.tdp_watts for spec in self.gpus), start=Fraction(0))

    @property
    def cpu_peak_flops(self) -> Fraction:
        return sum((spec.peak_flops for spec in self.cpus), start=Fraction(0))

    @property
    def gpu_peak_flops(self) -> Fraction:
        return sum((spec.peak_flops for spec in self.gpus), start=Fraction(0))

    @property
    def memory_per_core_gib(self) -> Fraction:
        """The even split of node memory across cores; one charging step."""
        return self.memory_total_gib / self.total_cores

    @property
    def extra_capacities(self) -> dict[str, Fraction]:
        return dict(self.extra_resources)


@dataclass(frozen=True)
class NodeUsage:
    """Resources requested on a single node. At least one quantity > 0."""

    cores_used: int = 0
    gpus_used: int = 0
    memory_used_gib: Fraction = Fraction(0)
    extra_used: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "memory_used_gib", exact(self.memory_used_gib))
        object.__setattr__(self, "extra_used", _normalize_pairs(self.extra_used, "usage"))
        if self.cores_used < 0 or self.gpus_used < 0:
            raise ValidationError("core and GPU counts must be nonnegative")
        if self.memory_used_gib < 0:
            raise ValidationError("memory_used_gib must be nonnegative")
        if any(amount < 0 for _, amount in self.extra_used):
            raise ValidationError("extra resource amounts must be nonnegative")
        if not self._any_positive():
            raise ValidationError("a node usage must request at least one resource")

    def _any_positive(self) -> bool:
        return (
            self.cores_used > 0
            or self.gpus_used > 0
            or self.memory_used_gib > 0
            or any(amount > 0 for _, amount in self.extra_used)
        )


def core_fraction(usage: NodeUsage, node: NodeType) -> Fraction:
    """Fraction of the node's CPU cores requested."""
    if usage.cores_used > node.total_cores:
        raise CapacityError(
            f"{usage.cores_used} cores requested but node type {node.name!r} has {node.total_cores}"
        )
    return Fraction(usage.cores_used, node.total_cores)


def gpu_fraction(usage: NodeUsage, node: NodeType) -> Fraction:
    """Fraction of the node's GPUs requested; zero on GPU-less nodes."""
    if usage.gpus_used == 0:
        return Fraction(0)
    if usage.gpus_used > node.gpu_count:
        raise CapacityError(
            f"{usage.gpus_used} GPUs requested but node type {node.name!r} has {node.gpu_count}"
        )
    return Fraction(usage.gpus_used, node.gpu_count)


def memory_fraction(usage: NodeUsage, node: NodeType) -> Fraction:
    """Charged memory fraction, stepped up to whole per-core shares.

    Node memory is split evenly over the cores and the request is rounded
    up to a whole number of those shares, so the result is a step function
    with co-domain {1/C, 2/C, ..., 1}. A request for all the memory on a
    node charges the whole node: it leaves nothing for anyone else even if
    a single core was asked for. Zero requested memory charges zero.
    """
    used = usage.memory_used_gib
    if used <= 0:
        return Fraction(0)
    if used > node.memory_total_gib:
        raise CapacityError(
            f"{float(used):g} GiB requested but node type {node.name!r} has "
            f"{float(node.memory_total_gib):g} GiB"
        )
    shares = math.ceil(used / node.memory_per_core_gib)
    return Fraction(shares, node.total_cores)


def core_equivalent(usage: NodeUsage, node: NodeType) -> int:
    """Number of cores the memory request is charged as (0 when no memory)."""
    return int(memory_fraction(usage, node) * node.total_cores)


def node_fraction(usage: NodeUsage, node: NodeType) -> Fraction:
    """Largest fraction of any single resource the request occupies.

    Extra resources named in the usage must exist on the node type and add
    amount/capacity terms to the max. Raises CapacityError whenever any
    quantity exceeds what the node provides.
    """
    best = max(core_fraction(usage, node), gpu_fraction(usage, node), memory_fraction(usage, node))
    if usage.extra_used:
        capacities = node.extra_capacities
        for resource, amount in usage.extra_used:
            if resource not in capacities:
                raise CapacityError(f"node type {node.name!r} has no resource {resource!r}")
            if amount > capacities[resource]:
                raise CapacityError(
                    f"{float(amount):g} of {resource!r} requested but node type {node.name!r} "
                    f"has {float(capacities[resource]):g}"
                )
            if amount > 0:
                best = max(best, amount / capacities[resource])
    return best


def validate_usage(usage: NodeUsage, node: NodeType) -> None:
    """Raise CapacityError if the usage does not fit on the node type."""
    node_fraction(usage, node)


def watt_to_su_rate(cpu: ProcessorSpec) -> Fraction:
    """Service units bought by one watt-hour on the reference CPU: cores / TDP."""
    if cpu.kind is not ProcessorKind.CPU:
        raise ValidationError("the watt-to-SU rate is defined against a CPU spec")
    return Fraction(cpu.cores) / cpu.tdp_watts


def gpu_partition_weight(node: NodeType) -> Fraction:
    """Node-hour weight of a GPU node: (GPU TDP / CPU TDP) * core count.

    Kept as an exact rational (for example 192 on a 4x400 W GPU, 2x150 W
    CPU, 36-core node); round only when displaying.
    """
    if node.gpu_count == 0:
        raise ModelError(
            f"node type {node.name!r} has no GPUs; a CPU partition weighs its core count"
        )
    return node.gpu_tdp_watts / node.cpu_tdp_watts * node.total_cores


def default_partition_weight(node: NodeType) -> Fraction:
    """Energy-based node-hour weight: core count, or the GPU TDP ratio form."""
    if node.gpu_count == 0:
        return Fraction(node.total_cores)
    return gpu_partition_weight(node)


@dataclass(frozen=True)
class Partition:
    """A named set of identical nodes with a cached node-hour weight.

    When `weight` is omitted it is derived under the energy-based model
    (and `model_id` must then be "energy"); configuration loading passes
    an explicit weight for the other models.
    """

    name: str
    node_type: NodeType
    node_count: int = 1
    model_id: str = "energy"
    weight: Fraction | None = None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValidationError(f"partition {self.name!r}: node_count must be at least 1")
        if self.weight is None:
            if self.model_id != "energy":
                raise ValidationError(
                    f"partition {self.name!r}: an explicit weight is required for model {self.model_id!r}"
                )
            object.__setattr__(self, "weight", default_partition_weight(self.node_type))
        else:
            object.__setattr__(self, "weight", exact(self.weight))
            if self.weight <= 0:
                raise ValidationError(f"partition {self.name!r}: weight must be positive")


@dataclass(frozen=True)
class JobRequest:
    """A charging request: one partition, one usage entry per node, hours.

    Jobs may be heterogeneous (different usage on different nodes) but
    bind to a single partition.
    """

    partition: Partition
    per_node_usage: tuple[NodeUsage, ...]
    walltime_hours: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_node_usage", tuple(self.per_node_usage))
        object.__setattr__(self, "walltime_hours", exact(self.walltime_hours))
        if not self.per_node_usage:
            raise ValidationError("a job must span at least one node")
        if self.walltime_hours < 0:
            raise ValidationError("walltime_hours must be nonnegative")
        if len(self.per_node_usage) > self.partition.node_count:
            raise CapacityError(
                f"job spans {len(self.per_node_usage)} nodes but partition "
                f"{self.partition.name!r} has {self.partition.node_count}"
            )

    @classmethod
    def uniform(
        cls, partition: Partition, nodes: int, usage: NodeUsage, walltime_hours: RealLike
    ) -> "JobRequest":
        """Identical usage replicated across `nodes` nodes."""
        if nodes < 1:
            raise ValidationError("a job must span at least one node")
        return cls(partition, (usage,) * nodes, exact(walltime_hours))


@dataclass(frozen=True)
class ChargeReport:
    """Outcome of charging one job: total SU plus the per-node breakdown."""

    model_id: str
    total_su: Fraction
    per_node_fraction: tuple[Fraction, ...]
    weight_used: Fraction
    walltime_hours: Fraction
    energy_wh: Fraction


def energy_estimate_wh(usages: Sequence[NodeUsage], node: NodeType, hours: Fraction) -> Fraction:
    """TDP-based energy estimate of the requested cores and GPUs, in Wh."""
    draw = Fraction(0)
    for usage in usages:
        draw += core_fraction(usage, node) * node.cpu_tdp_watts
        draw += gpu_fraction(usage, node) * node.gpu_tdp_watts
    return draw * hours


def cost_report(
    usages: Iterable[NodeUsage],
    node: NodeType,
    weight: Fraction,
    walltime_hours: Fraction,
    model_id: str,
) -> ChargeReport:
    """Charge usages against a node type at the given node-hour weight."""
    usages = tuple(usages)
    fractions = tuple(node_fraction(usage, node) for usage in usages)
    total = weight * walltime_hours * sum(fractions, start=Fraction(0))
    return ChargeReport(
        model_id=model_id,
        total_su=total,
        per_node_fraction=fractions,
        weight_used=weight,
        walltime_hours=walltime_hours,
        energy_wh=energy_estimate_wh(usages, node, walltime_hours),
    )


def job_cost(job: JobRequest) -> ChargeReport:
    """Charge a job under its partition's cached weight and model."""
    return cost_report(
        job.per_node_usage,
        job.partition.node_type,
        job.partition.weight,
        job.walltime_hours,
        job.partition.model_id,
    )
