"""Пересчёт: хвост плана выполняется дважды, по половине моды деления, с вдвое меньшей памятью."""
import logging
from typing import List, Optional, Tuple

import numpy as np

from cluster.hybrid import RunReport, hybrid_execute
from cluster.topology import ClusterSpec
from config.sim_config import RECOMPUTE_LARGE_FRACTION
from planner.plan import ContractionPlan
from planner.stem import StepType
from quantizer import QuantScheme
from tensors import DenseTensor, Precision, fidelity
from tensors.tensor import Label, stack_along
from utils.utils import hash_tensor


class RecomputeError(RuntimeError):
    pass


def check_recompute_precondition(report: RunReport) -> None:
    """После первого большого шага ствола не должно быть обменов all-to-all."""
    rows = [r for r in report.rows if r["subtask"] == 0]
    stem_rows = [r for r in rows if r["type"] == StepType.STEM.value]
    if not stem_rows:
        raise RecomputeError("Plan has no stem steps to recompute")
    largest = max(r["out_elements"] for r in stem_rows)
    first = next(i for i, r in enumerate(rows)
                 if r["type"] == StepType.STEM.value and r["out_elements"] >= RECOMPUTE_LARGE_FRACTION * largest)
    for r in rows[first:]:
        if r["swaps"]:
            raise RecomputeError(f"Communication ({', '.join(r['swaps'])}) at node {r['node']} "
                                 f"inside the recomputed region")


def choose_halving_label(plan: ContractionPlan, network) -> Label:
    """Открытая нога наибольшего тензора ствола, иначе его закрытое ребро (не срезанное)."""
    node = max(plan.stem.stem_path, key=lambda n: plan.stem.node_elements.get(n, 1))
    labels = plan.tree.node_labels(network.leaf_labels())[node]
    dims = network.size_dict()
    opened = [l for l in network.open_legs if l in labels and dims[l] == 2]
    closed = [l for l in labels if l not in network.open_legs and dims[l] == 2 and l not in plan.sliced_edges]
    candidates = opened + closed
    if not candidates:
        raise RecomputeError(f"Largest stem tensor at node {node} has no dim-2 mode to halve")
    return candidates[0]


def recompute_execute(plan: ContractionPlan, network, cluster: ClusterSpec, half_mode: Optional[Label] = None,
                      inter_quant: Optional[QuantScheme] = None, intra_quant: Optional[QuantScheme] = None, *,
                      precision: Optional[Precision] = None,
                      device_mem: Optional[float] = None) -> Tuple[DenseTensor, RunReport]:
    if precision is not None:
        network = network.astype(precision)
    device_mem = cluster.device_mem if device_mem is None else float(device_mem)
    baseline, base_report = hybrid_execute(plan, network, cluster, inter_quant, intra_quant, device_mem=device_mem)
    check_recompute_precondition(base_report)

    label = choose_halving_label(plan, network) if half_mode is None else half_mode
    if network.size_dict().get(label) != 2 or label in plan.sliced_edges:
        raise RecomputeError(f"Halving mode {label!r} must be an unsliced dim-2 edge of the network")

    leaf_labels = network.leaf_labels()
    halved = frozenset(nid for nid, leaves in plan.tree.leaves_under().items()
                       if any(label in leaf_labels[i] for i in leaves) and not plan.tree.is_leaf(nid))
    node_mem = {nid: device_mem / 2 for nid in halved}
    halves = [hybrid_execute(plan, network.fix({label: v}), cluster, inter_quant, intra_quant,
                             device_mem=device_mem, node_mem=node_mem) for v in (0, 1)]

    if label in network.open_legs:
        result = stack_along([r for r, _ in halves], label, network.open_legs.index(label))
    else:
        first = halves[0][0]
        acc = first.data.astype(np.complex128) + halves[1][0].data.astype(np.complex128)
        result = DenseTensor(first.modes, acc, first.precision)

    rows: List[dict] = []
    for half, (_, rep) in enumerate(halves):
        for row in rep.rows:
            if half == 0 or row["node"] in halved:
                rows.append({**row, "half": half})
    reports = [rep for _, rep in halves]
    report = RunReport(
        rows=rows,
        n_inter=plan.n_inter,
        n_intra=plan.n_intra,
        n_subtasks=base_report.n_subtasks,
        alpha=cluster.alpha,
        beta=cluster.beta,
        n_inter_effective=max(0, plan.n_inter - 1),
        stem_buffers=max(r.stem_buffers for r in reports),
        stem_outputs=reports[0].stem_outputs,
        memory_trace=reports[0].memory_trace,
        peak_bytes=max(r.peak_bytes for r in reports),
        stem_peak_bytes=max(r.stem_peak_bytes for r in reports),
        compression_rate=reports[0].compression_rate,
        intra_compression_rate=reports[0].intra_compression_rate,
        fidelity=fidelity(baseline, result),
        config={**reports[0].config, "device_mem": device_mem,
                "recompute": {"half_mode": label, "baseline_stem_peak_bytes": base_report.stem_peak_bytes,
                              "baseline_bytes_inter": base_report.bytes_inter}},
        result_hash=hash_tensor(result),
    )
    logging.debug("Recomputed over %r: stem peak %d B (baseline %d B)", label, report.stem_peak_bytes,
                  base_report.stem_peak_bytes)
    return result, report
