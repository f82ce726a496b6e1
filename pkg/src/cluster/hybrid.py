"""Моделирование трёхуровневой схемы: ствол по узлам и устройствам, гибридный all-to-all, отчёт."""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from cluster.costmodel import model_all2all_time, model_energy
from cluster.distributed import (INTER, INTRA, DistTensor, MessageRouter, PartitionExhaustedError,
                                 gather_to_devices, swap_partition)
from cluster.executor import DeviceExecutor
from cluster.memory import BufferPool, CapacityError
from cluster.topology import ClusterSpec
from config.sim_config import FLOPS_PER_CMAC, GB
from planner.plan import ContractionPlan
from planner.slicing import SlicePlan
from planner.stem import ShardOverflowError, StepType
from quantizer import QuantScheme
from sparse_state.chunked import ChunkBudgetError, chunked_contract
from tensors import DenseTensor, EinsumSpec, Precision, contract, permute
from utils.utils import hash_tensor

Value = Union[DenseTensor, DistTensor]


@dataclass
class RunReport:
    """Трасса шагов и итоги моделирования.

    Времена в строках и итогах измеряются в устройство-секундах (сумма по участвующим
    устройствам), поэтому energy = α·(t_inter + t_intra) + β·t_calc.
    """
    rows: List[Dict[str, Any]]
    n_inter: int
    n_intra: int
    n_subtasks: int
    alpha: float
    beta: float
    n_inter_effective: Optional[int] = None
    stem_buffers: int = 0
    stem_outputs: List[int] = field(default_factory=list)
    memory_trace: List[Dict[str, Any]] = field(default_factory=list)
    peak_bytes: int = 0
    stem_peak_bytes: int = 0
    compression_rate: Optional[float] = None
    intra_compression_rate: Optional[float] = None
    fidelity: Optional[float] = None
    config: Dict[str, Any] = field(default_factory=dict)
    result_hash: str = ""

    def __post_init__(self):
        if self.n_inter_effective is None:
            self.n_inter_effective = self.n_inter

    def _total(self, key: str) -> float:
        return float(sum(r[key] for r in self.rows))

    @property
    def t_calc(self) -> float:
        return self._total("t_calc")

    @property
    def t_inter(self) -> float:
        return self._total("t_inter")

    @property
    def t_intra(self) -> float:
        return self._total("t_intra")

    @property
    def t_comm(self) -> float:
        return self.t_inter + self.t_intra

    @property
    def bytes_inter(self) -> float:
        return self._total("bytes_inter")

    @property
    def bytes_intra(self) -> float:
        return self._total("bytes_intra")

    @property
    def seconds(self) -> float:
        return self._total("seconds")

    @property
    def energy(self) -> float:
        return model_energy(self.t_comm, self.t_calc, self.alpha, self.beta)

    def to_json(self) -> Dict[str, Any]:
        return {
            "totals": {
                "t_calc": self.t_calc,
                "t_inter": self.t_inter,
                "t_intra": self.t_intra,
                "seconds": self.seconds,
                "energy": self.energy,
                "bytes_inter": self.bytes_inter,
                "bytes_intra": self.bytes_intra,
            },
            "n_inter": self.n_inter,
            "n_intra": self.n_intra,
            "n_inter_effective": self.n_inter_effective,
            "n_subtasks": self.n_subtasks,
            "alpha": self.alpha,
            "beta": self.beta,
            "stem_buffers": self.stem_buffers,
            "stem_outputs": list(self.stem_outputs),
            "peak_bytes": self.peak_bytes,
            "stem_peak_bytes": self.stem_peak_bytes,
            "compression_rate": self.compression_rate,
            "intra_compression_rate": self.intra_compression_rate,
            "fidelity": self.fidelity,
            "result_hash": self.result_hash,
            "config": self.config,
            "rows": self.rows,
            "memory_trace": self.memory_trace,
        }


class _Simulation:
    """Один прогон плана: пулы памяти устройств, маршрутизатор и строки трассы."""

    def __init__(self, plan: ContractionPlan, cluster: ClusterSpec, router: MessageRouter, device_mem: float,
                 node_mem: Mapping[int, float], executor: DeviceExecutor):
        self.plan = plan
        self.cluster = cluster
        self.router = router
        self.device_mem = device_mem
        self.node_mem = node_mem
        self.executor = executor
        self.devices = [(p, d) for p in range(2 ** plan.n_inter) for d in range(2 ** plan.n_intra)]
        self.n_part = len(self.devices)
        self.pools = {dev: BufferPool(cluster.buffer_capacity) for dev in self.devices}
        self.rows: List[Dict[str, Any]] = []
        self._handles: Dict[int, list] = {}

    def _mem(self, nid: int) -> float:
        return self.node_mem.get(nid, self.device_mem)

    def run_subtask(self, subtask: int, network) -> DenseTensor:
        tree = self.plan.tree
        values: Dict[int, Value] = {i: t for i, t in enumerate(network.tensors)}
        dtype_bytes = network.precision.complex_bytes
        for nid, left, right in tree.steps:
            a, b = values.pop(left), values.pop(right)
            self._free_common(left)
            self._free_common(right)
            kind = self.plan.step_type(nid)
            if kind is StepType.STEM:
                values[nid] = self._stem_step(subtask, nid, left, a, b, dtype_bytes)
            else:
                values[nid] = self._replicated_step(subtask, nid, kind, a, b)
        for pool in self.pools.values():
            pool.release_stem()
        for nid in list(self._handles):
            self._free_common(nid)
        result = values[tree.root]
        if isinstance(result, DistTensor):
            result = result.gather()
        return permute(result, network.open_legs)

    def _free_common(self, nid: int) -> None:
        for pool, handle in self._handles.pop(nid, []):
            pool.free(handle)

    def _step_flops(self, spec: EinsumSpec, dims: Dict[str, int]) -> float:
        labels = set(spec.in_a) | set(spec.in_b)
        return float(FLOPS_PER_CMAC * math.prod(dims[l] for l in labels))

    def _scatter(self, t: DenseTensor, contracted) -> DistTensor:
        n_inter, n_intra = self.plan.n_inter, self.plan.n_intra
        free = [m.label for m in t.modes if m.dim == 2 and m.label not in contracted]
        if len(free) < n_inter + n_intra:
            raise PartitionExhaustedError(
                f"Tensor {t!r} has {len(free)} free dim-2 modes, {n_inter + n_intra} needed for sharding")
        return DistTensor.scatter(t, free[:n_inter], free[n_inter:n_inter + n_intra])

    def _stem_step(self, subtask: int, nid: int, left: int, a: Value, b: Value, dtype_bytes: int) -> Value:
        spec = EinsumSpec.for_inputs(a.labels, b.labels)
        dims = {**a.size_dict(), **b.size_dict()}
        out_elements = math.prod(dims[l] for l in spec.out)
        out_bytes = out_elements * dtype_bytes
        flops = self._step_flops(spec, dims)
        mem = self._mem(nid)
        stem_left = left in self.plan.stem.stem_nodes
        stem_val, other = (a, b) if stem_left else (b, a)
        if isinstance(other, DistTensor):
            other = gather_to_devices(other, self.router)

        if isinstance(stem_val, DenseTensor) and self.n_part > 1 and out_bytes > mem:
            stem_val = self._scatter(stem_val, spec.reduce)
        swaps: List[str] = []
        if isinstance(stem_val, DistTensor):
            if set(stem_val.inter_labels) & spec.reduce:
                stem_val = swap_partition(stem_val, INTER, spec.reduce, self.router)
                swaps.append(INTER)
            if set(stem_val.intra_labels) & spec.reduce:
                stem_val = swap_partition(stem_val, INTRA, spec.reduce, self.router)
                swaps.append(INTRA)
            if out_bytes / self.n_part > mem:
                raise ShardOverflowError(
                    f"Stem shard of {out_bytes // self.n_part} B at node {nid} exceeds device memory {mem:g} B")
            local_spec = spec.without(stem_val.partition_labels)

            def step(dev):
                shard = stem_val.shards[dev]
                return contract(local_spec, shard, other) if stem_left else contract(local_spec, other, shard)

            results = self.executor.map(step, self.devices)
            out: Value = DistTensor(stem_val.inter_labels, stem_val.intra_labels, results[0].modes,
                                    dict(zip(self.devices, results)), results[0].precision)
            t_calc = flops / self.cluster.compute_rate
            if out_bytes <= mem:
                out = gather_to_devices(out, self.router)
        else:
            if out_bytes > mem:
                raise ShardOverflowError(
                    f"Stem tensor of {out_bytes} B at node {nid} exceeds device memory {mem:g} B")
            lhs, rhs = (stem_val, other) if stem_left else (other, stem_val)
            out = contract(spec, lhs, rhs)
            t_calc = self.n_part * flops / self.cluster.compute_rate

        size = out.shard_nbytes if isinstance(out, DistTensor) else out.nbytes
        for pool in self.pools.values():
            try:
                pool.alloc(StepType.STEM, size)
            except CapacityError as exc:
                raise ShardOverflowError(str(exc)) from exc
            pool.swap_stem_buffers()
        self._row(subtask, nid, StepType.STEM, flops, out_elements, swaps, t_calc)
        return out

    def _replicated_step(self, subtask: int, nid: int, kind: StepType, a: Value, b: Value) -> DenseTensor:
        if isinstance(a, DistTensor):
            a = gather_to_devices(a, self.router)
        if isinstance(b, DistTensor):
            b = gather_to_devices(b, self.router)
        spec = EinsumSpec.for_inputs(a.labels, b.labels)
        dims = {**a.size_dict(), **b.size_dict()}
        flops = self._step_flops(spec, dims)
        pool = self.pools[self.devices[0]]
        out = None
        if kind is StepType.SPLIT and pool.largest_free_fragment() > 0:
            try:
                out = chunked_contract(spec, a, b, pool=pool)
            except ChunkBudgetError as exc:
                logging.warning("Split step %d falls back to a direct contraction: %s", nid, exc)
        if out is None:
            out = contract(spec, a, b)
        self._handles[nid] = [(p, p.alloc(StepType.COMMON, out.nbytes)) for p in self.pools.values()]
        self._row(subtask, nid, kind, flops, out.size, [], self.n_part * flops / self.cluster.compute_rate)
        return out

    def _row(self, subtask: int, nid: int, kind: StepType, flops: float, out_elements: int, swaps: List[str],
             t_calc: float) -> None:
        traffic = self.router.drain()
        cluster = self.cluster
        wall_inter = wall_intra = 0.0
        if traffic["bytes_inter"] > 0:
            wall_inter = model_all2all_time(traffic["max_inter"], cluster.inter_bw, 2 ** self.plan.n_inter, cluster.r)
        if traffic["bytes_intra"] > 0:
            wall_intra = model_all2all_time(traffic["max_intra"], cluster.intra_bw, 2 ** self.plan.n_intra, cluster.r)
        t_calc += cluster.quant_kernel_s_per_gb * traffic["kernel_bytes"] / GB
        t_inter = wall_inter * self.n_part
        t_intra = wall_intra * self.n_part
        self.rows.append({
            "subtask": subtask,
            "node": nid,
            "type": kind.value,
            "flops": flops,
            "out_elements": int(out_elements),
            "swaps": list(swaps),
            "bytes_inter": traffic["bytes_inter"],
            "bytes_intra": traffic["bytes_intra"],
            "t_calc": t_calc,
            "t_inter": t_inter,
            "t_intra": t_intra,
            "seconds": (t_calc + t_inter + t_intra) / self.n_part,
            "joules": model_energy(t_inter + t_intra, t_calc, cluster.alpha, cluster.beta),
        })


def hybrid_execute(plan: ContractionPlan, network, cluster: ClusterSpec, inter_quant: Optional[QuantScheme] = None,
                   intra_quant: Optional[QuantScheme] = None, *, precision: Optional[Precision] = None,
                   device_mem: Optional[float] = None, node_mem: Optional[Mapping[int, float]] = None,
                   executor: Optional[DeviceExecutor] = None) -> Tuple[DenseTensor, RunReport]:
    """Выполнить план на смоделированном кластере; результат суммируется по срезам.

    `node_mem` переопределяет порог памяти устройства для отдельных узлов дерева.
    """
    if precision is not None:
        network = network.astype(precision)
    if 2 ** plan.n_inter > cluster.nodes or 2 ** plan.n_intra > cluster.devices_per_node:
        raise ValueError(f"Plan needs 2^{plan.n_inter} nodes x 2^{plan.n_intra} devices, cluster has "
                         f"{cluster.nodes} x {cluster.devices_per_node}")
    device_mem = cluster.device_mem if device_mem is None else float(device_mem)
    router = MessageRouter(inter_quant, intra_quant)
    sim = _Simulation(plan, cluster, router, device_mem, node_mem or {}, executor or DeviceExecutor())

    slices = SlicePlan(network, plan.sliced_edges)
    acc = None
    result = None
    for subtask, sub in enumerate(slices.subnetworks()):
        result = sim.run_subtask(subtask, sub)
        part = result.data.astype(np.float64 if result.is_real else np.complex128)
        acc = part if acc is None else acc + part
    result = DenseTensor(result.modes, acc, result.precision)

    first = sim.pools[sim.devices[0]]
    report = RunReport(
        rows=sim.rows,
        n_inter=plan.n_inter,
        n_intra=plan.n_intra,
        n_subtasks=slices.n_subtasks,
        alpha=cluster.alpha,
        beta=cluster.beta,
        stem_buffers=max(p.stem_buffer_count for p in sim.pools.values()),
        stem_outputs=list(first.stem_outputs),
        memory_trace=list(first.trace),
        peak_bytes=max(p.peak_bytes for p in sim.pools.values()),
        stem_peak_bytes=max(p.stem_peak_bytes for p in sim.pools.values()),
        compression_rate=router.compression_rate(INTER),
        intra_compression_rate=router.compression_rate(INTRA),
        config={
            "cluster": cluster.to_json(),
            "device_mem": device_mem,
            "inter_quant": inter_quant.name if inter_quant is not None else None,
            "intra_quant": intra_quant.name if intra_quant is not None else None,
            "precision": network.precision.value,
            "n_inter": plan.n_inter,
            "n_intra": plan.n_intra,
            "sliced_edges": list(plan.sliced_edges),
        },
        result_hash=hash_tensor(result),
    )
    logging.debug("Hybrid run: %d step(s), T_calc=%.3e, T_comm=%.3e, E=%.3e J",
                  len(report.rows), report.t_calc, report.t_comm, report.energy)
    return result, report
