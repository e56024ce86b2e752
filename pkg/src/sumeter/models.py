"""Pluggable charge models behind one interface.

Every model turns a node type into a node-hour weight and a job request
into a charge, deterministically. `energy` prices a GPU node by the TDP
ratio of its GPUs to its CPUs; `sm` by the streaming-multiprocessor
count; `peak-perf` by the ratio of peak FLOPs against a reference CPU
node; `titan` charges cores plus SMs for whole nodes (exclusive access);
`puhti` bills each resource linearly at per-hour rates.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    ChargeReport,
    JobRequest,
    NodeType,
    RealLike,
    cost_report,
    default_partition_weight,
    energy_estimate_wh,
    exact,
    node_fraction,
)
from .errors import ModelError, ValidationError


def sm_based_weight(node: NodeType) -> Fraction:
    """GPU node-hour weight as the total streaming-multiprocessor count."""
    if node.gpu_count == 0:
        raise ModelError(f"node type {node.name!r} has no GPUs to count SMs on")
    return Fraction(node.total_streaming_multiprocessors)


def peak_perf_weight(node: NodeType, reference_cpu_node: NodeType) -> Fraction:
    """GPU node-hour weight from the peak-FLOPs ratio against a CPU node.

    weight = (GPU peak FLOPs of `node`) / (CPU peak FLOPs of the
    reference node) * reference core count. Exact value retained
    (465.6 stays 465.6); display rounding is the caller's business.
    """
    if node.gpu_count == 0:
        raise ModelError(f"node type {node.name!r} has no GPUs")
    reference_flops = reference_cpu_node.cpu_peak_flops
    if reference_flops <= 0:
        raise ValidationError("reference node has no CPU peak performance")
    return node.gpu_peak_flops / reference_flops * reference_cpu_node.total_cores


def titan_node_charge(cpu_cores: int, gpu_sms: int) -> int:
    """Whole-node hourly charge: one unit per CPU core plus one per GPU SM."""
    if cpu_cores < 0 or gpu_sms < 0:
        raise ValidationError("counts must be nonnegative")
    return cpu_cores + gpu_sms


@dataclass(frozen=True)
class PuhtiRates:
    """Per-hour billing-unit rates, one per consumable resource."""

    core: Fraction = Fraction(1)
    memory_gib: Fraction = Fraction(1, 10)
    nvme_gib: Fraction = Fraction(6, 1000)
    gpu: Fraction = Fraction(60)

    def __post_init__(self) -> None:
        for name in ("core", "memory_gib", "nvme_gib", "gpu"):
            value = exact(getattr(self, name))
            if value < 0:
                raise ValidationError(f"rate {name!r} must be nonnegative")
            object.__setattr__(self, name, value)


DEFAULT_PUHTI_RATES = PuhtiRates()


def puhti_bu(
    cores: RealLike,
    mem_gib: RealLike,
    nvme_gib: RealLike,
    gpus: RealLike,
    walltime_hours: RealLike,
    rates: PuhtiRates = DEFAULT_PUHTI_RATES,
) -> Fraction:
    """Billing units for reserved resources, linear in every quantity.

    (core_rate*cores + mem_rate*mem + nvme_rate*nvme + gpu_rate*gpus) * hours,
    with default rates 1 / 0.1 / 0.006 / 60 per hour.
    """
    quantities = [exact(q) for q in (cores, mem_gib, nvme_gib, gpus, walltime_hours)]
    if any(q < 0 for q in quantities):
        raise ValidationError("billing quantities must be nonnegative")
    cores_f, mem_f, nvme_f, gpus_f, hours = quantities
    hourly = rates.core * cores_f + rates.memory_gib * mem_f + rates.nvme_gib * nvme_f + rates.gpu * gpus_f
    return hourly * hours


def puhti_tdp_equivalence(
    gpu_tdp_watts: RealLike,
    cpu_tdp_watts_per_socket: RealLike,
    sockets: int = 2,
    node_share: RealLike = Fraction(1, 4),
) -> Fraction:
    """Hourly TDP envelope, in Wh, of one GPU plus a share of the host CPUs.

    One V100 plus a quarter of a dual 125 W socket node comes to 362.5 Wh.
    """
    gpu_tdp = exact(gpu_tdp_watts)
    cpu_tdp = exact(cpu_tdp_watts_per_socket)
    if gpu_tdp <= 0 or cpu_tdp <= 0:
        raise ValidationError("TDP values must be positive")
    return gpu_tdp + exact(node_share) * (sockets * cpu_tdp)


def puhti_tdp_core_ratio(
    gpu_tdp_watts: RealLike,
    cpu_tdp_watts_per_socket: RealLike,
    cores_per_socket: int,
    sockets: int = 2,
    node_share: RealLike = Fraction(1, 4),
) -> Fraction:
    """How many single-core TDP envelopes the GPU-hour envelope is worth."""
    if cores_per_socket < 1:
        raise ValidationError("cores_per_socket must be at least 1")
    per_core = exact(cpu_tdp_watts_per_socket) / cores_per_socket
    return puhti_tdp_equivalence(gpu_tdp_watts, cpu_tdp_watts_per_socket, sockets, node_share) / per_core


class ChargeModel(abc.ABC):
    """A deterministic pricing scheme: node-hour weight plus job charging."""

    id: str

    @abc.abstractmethod
    def node_weight(self, node: NodeType) -> Fraction:
        """SU charged for one hour's use of one full node of this type."""

    def charge(self, job: JobRequest) -> ChargeReport:
        """Charge a job; the default shares nodes via the max-fraction rule."""
        node = job.partition.node_type
        return cost_report(job.per_node_usage, node, self.node_weight(node), job.walltime_hours, self.id)

    def parameters(self) -> dict:
        """Model-specific parameters, serialisable for config round-trips."""
        return {}


@dataclass(frozen=True)
class EnergyModel(ChargeModel):
    """TDP-ratio GPU weighting; CPU nodes weigh their core count."""

    id = "energy"

    def node_weight(self, node: NodeType) -> Fraction:
        return default_partition_weight(node)


@dataclass(frozen=True)
class SmModel(ChargeModel):
    """Streaming-multiprocessor GPU weighting; CPU nodes weigh their core count."""

    id = "sm"

    def node_weight(self, node: NodeType) -> Fraction:
        if node.gpu_count == 0:
            return Fraction(node.total_cores)
        return sm_based_weight(node)


@dataclass(frozen=True)
class PeakPerfModel(ChargeModel):
    """Peak-FLOPs-ratio GPU weighting against a reference CPU node.

    Without an explicit reference the node's own CPU complement is used,
    which matches systems whose CPU and GPU nodes share a CPU layout.
    """

    reference: NodeType | None = None

    id = "peak-perf"

    def node_weight(self, node: NodeType) -> Fraction:
        if node.gpu_count == 0:
            return Fraction(node.total_cores)
        return peak_perf_weight(node, self.reference if self.reference is not None else node)


@dataclass(frozen=True)
class TitanModel(ChargeModel):
    """Cores-plus-SMs weighting with exclusive-node semantics.

    Jobs are charged for whole nodes regardless of the fraction used, GPU
    or not; a classic 16-core, 14-SM node costs 30 per hour.
    """

    id = "titan"

    def node_weight(self, node: NodeType) -> Fraction:
        return Fraction(titan_node_charge(node.total_cores, node.total_streaming_multiprocessors))

    def charge(self, job: JobRequest) -> ChargeReport:
        node = job.partition.node_type
        for usage in job.per_node_usage:
            node_fraction(usage, node)  # capacity validation only
        weight = self.node_weight(node)
        fractions = (Fraction(1),) * len(job.per_node_usage)
        return ChargeReport(
            model_id=self.id,
            total_su=weight * job.walltime_hours * len(fractions),
            per_node_fraction=fractions,
            weight_used=weight,
            walltime_hours=job.walltime_hours,
            energy_wh=energy_estimate_wh(job.per_node_usage, node, job.walltime_hours),
        )


@dataclass(frozen=True)
class PuhtiModel(ChargeModel):
    """Linear billing units per reserved core, GiB, NVMe GiB and GPU.

    NVMe usage and capacity are read from the extra resource named by
    `nvme_resource`. The node-hour weight is the hourly cost of a whole
    node, and per-node fractions are each node's hourly bill over that,
    so reports keep the total = weight * hours * sum(fractions) identity.
    """

    rates: PuhtiRates = field(default_factory=PuhtiRates)
    nvme_resource: str = "nvme_gib"

    id = "puhti"

    def node_weight(self, node: NodeType) -> Fraction:
        nvme_capacity = node.extra_capacities.get(self.nvme_resource, Fraction(0))
        return puhti_bu(node.total_cores, node.memory_total_gib, nvme_capacity, node.gpu_count, 1, self.rates)

    def charge(self, job: JobRequest) -> ChargeReport:
        node = job.partition.node_type
        full_node = self.node_weight(node)
        if full_node <= 0:
            raise ModelError("the configured rates price a whole node at zero")
        fractions = []
        for usage in job.per_node_usage:
            node_fraction(usage, node)  # capacity validation
            nvme_used = dict(usage.extra_used).get(self.nvme_resource, Fraction(0))
            hourly = puhti_bu(usage.cores_used, usage.memory_used_gib, nvme_used, usage.gpus_used, 1, self.rates)
            fractions.append(hourly / full_node)
        fractions = tuple(fractions)
        return ChargeReport(
            model_id=self.id,
            total_su=full_node * job.walltime_hours * sum(fractions, start=Fraction(0)),
            per_node_fraction=fractions,
            weight_used=full_node,
            walltime_hours=job.walltime_hours,
            energy_wh=energy_estimate_wh(job.per_node_usage, node, job.walltime_hours),
        )

    def parameters(self) -> dict:
        return {
            "rates": {
                "core": self.rates.core,
                "memory_gib": self.rates.memory_gib,
                "nvme_gib": self.rates.nvme_gib,
                "gpu": self.rates.gpu,
            },
            "nvme_resource": self.nvme_resource,
        }


_MODEL_CLASSES = {
    EnergyModel.id: EnergyModel,
    SmModel.id: SmModel,
    PeakPerfModel.id: PeakPerfModel,
    TitanModel.id: TitanModel,
    PuhtiModel.id: PuhtiModel,
}

MODEL_IDS = tuple(_MODEL_CLASSES)


def get_model(model_id: str, **params) -> ChargeModel:
    """Instantiate a charge model by its id string."""
    try:
        model_class = _MODEL_CLASSES[model_id]
    except KeyError:
        known = ", ".join(sorted(_MODEL_CLASSES))
        raise ValidationError(f"unknown charge model {model_id!r} (known: {known})") from None
    try:
        return model_class(**params)
    except TypeError as err:
        raise ValidationError(f"bad parameters for model {model_id!r}: {err}") from None
