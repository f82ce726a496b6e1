"""Команды конвейера: поиск плана, моделируемый прогон, проверка оракулом, развёртка квантования."""
import logging
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from circuit import circuit_to_network, load_circuit
from circuit.network import validate_bitstring
from circuit.statevector import oracle_amplitude, statevector_oracle
from cluster import (CapacityError, PartitionExhaustedError, RecomputeError, hybrid_execute, load_cluster,
                     recompute_execute)
from config.sim_config import ANNEAL_ITERATIONS, FIDELITY_THRESHOLD, SAMPLER_MEM_LIMIT
from planner import ContractionPlan, InfeasiblePlanError, ShardOverflowError, build_plan, contract_tree
from quantizer import dequantize, parse_scheme, quantize
from quantizer.codec import compression_rate
from sparse_state import ChunkBudgetError, register_sparse_stage
from tensors import DenseTensor, Precision, fidelity
from utils.utils import load_json, save_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3
EXIT_OVERFLOW = 4

DEFAULT_SWEEP = ("half", "int8", "int4:128")


def exit_code_for(exc: BaseException) -> int:
    """Код выхода для исключения команды."""
    if isinstance(exc, (InfeasiblePlanError, RecomputeError)):
        return EXIT_INFEASIBLE
    if isinstance(exc, (ShardOverflowError, CapacityError, ChunkBudgetError, PartitionExhaustedError, MemoryError)):
        return EXIT_OVERFLOW
    return EXIT_USAGE


@dataclass
class RunConfig:
    circuit: str
    cluster: str = "desk"
    plan: Optional[str] = None
    mem_limit: float = SAMPLER_MEM_LIMIT
    seed: int = 0
    iterations: int = ANNEAL_ITERATIONS
    quant: str = "none"
    intra_quant: str = "none"
    precision: str = Precision.C64.value
    recompute: bool = False
    verify: bool = False
    threshold: float = FIDELITY_THRESHOLD
    out: Optional[str] = None

    def __post_init__(self):
        if not os.path.exists(self.circuit):
            raise ValueError(f"Circuit file not found: {self.circuit}")
        if self.plan is not None and not os.path.exists(self.plan):
            raise ValueError(f"Plan file not found: {self.plan}")
        parse_scheme(self.quant)
        parse_scheme(self.intra_quant)
        Precision(self.precision)
        if self.mem_limit <= 0:
            raise ValueError(f"Memory limit must be positive, got {self.mem_limit}")

    def to_json(self) -> Dict[str, Any]:
        return asdict(self)


def _load_plan(path: str, network) -> ContractionPlan:
    return ContractionPlan.from_json(load_json(path), network)


def cmd_plan(circuit_path: str, mem_limit: float, seed: int = 0, iterations: int = ANNEAL_ITERATIONS,
             cluster: Optional[str] = None, out: Optional[str] = None) -> Dict[str, Any]:
    """Поиск дерева отжигом, срезы, ствол и параллельные моды; возвращает JSON плана."""
    circuit = load_circuit(circuit_path)
    network = circuit_to_network(circuit)
    spec = load_cluster(cluster) if cluster is not None else None
    plan = build_plan(network, mem_limit, spec, seed=seed, iterations=iterations)
    logging.info("Plan: flops=%.3e, max_elements=%d, subtasks=%d", plan.cost.flops, plan.cost.max_elements,
                 plan.cost.n_subtasks)
    obj = plan.to_json()
    if out is not None:
        save_json(obj, out)
    return obj


def cmd_run(config: RunConfig) -> Tuple[Dict[str, Any], DenseTensor, int]:
    """Моделируемый прогон; при verify считается точность относительно одноустройственного C64-эталона."""
    circuit = load_circuit(config.circuit)
    cluster = load_cluster(config.cluster)
    network = circuit_to_network(circuit)
    if config.plan is not None:
        plan = _load_plan(config.plan, network)
    else:
        plan = build_plan(network, config.mem_limit, cluster, seed=config.seed, iterations=config.iterations)
    plan = plan.with_split_nodes(register_sparse_stage(plan.tree), network)
    inter_quant = parse_scheme(config.quant)
    intra_quant = parse_scheme(config.intra_quant)
    precision = Precision(config.precision)

    if config.recompute:
        result, report = recompute_execute(plan, network, cluster, None, inter_quant, intra_quant,
                                           precision=precision)
    else:
        result, report = hybrid_execute(plan, network, cluster, inter_quant, intra_quant, precision=precision)

    code = EXIT_OK
    if config.verify:
        benchmark = contract_tree(network, plan.tree)
        report.fidelity = fidelity(benchmark, result)
        if report.fidelity < config.threshold:
            logging.warning("Fidelity %.6f is below the threshold %.3f", report.fidelity, config.threshold)
            code = EXIT_VERIFY
    report.config = {**report.config, "run": config.to_json()}
    obj = report.to_json()
    if config.out is not None:
        save_json(obj, config.out)
    return obj, result, code


def _sweep_source(source: str, seed: int) -> DenseTensor:
    """'gaussian:<n>', 'constant:<n>' или путь к JSON-литералу тензора."""
    kind, _, size = source.partition(":")
    if kind in ("gaussian", "constant"):
        try:
            n = int(size)
        except ValueError:
            raise ValueError(f"Tensor source {source!r} needs an integer size") from None
        if n < 1:
            raise ValueError(f"Tensor size must be positive, got {n}")
        if kind == "gaussian":
            data = np.random.default_rng(seed).standard_normal(n)
        else:
            data = np.full(n, 0.5)
        return DenseTensor.from_array(data, ["x"])
    return DenseTensor.from_json(load_json(source))


def cmd_quant_sweep(source: str, schemes: Sequence[str] = DEFAULT_SWEEP, seed: int = 0,
                    out: Optional[str] = None) -> pd.DataFrame:
    """Таблица CR и точности восстановления по схемам и размерам групп."""
    t = _sweep_source(source, seed)
    base = fidelity(t, t)
    rows: List[Dict[str, Any]] = []
    for text in schemes:
        scheme = parse_scheme(text)
        if scheme is None:
            continue
        q = quantize(t, scheme)
        f = fidelity(t, dequantize(q))
        rows.append({
            "scheme": scheme.name,
            "group": scheme.group if scheme.group is not None else "entire",
            "cr": compression_rate(q),
            "fidelity": f,
            "relative_fidelity": f / base,
        })
    table = pd.DataFrame(rows, columns=["scheme", "group", "cr", "fidelity", "relative_fidelity"])
    if out is not None:
        if out.lower().endswith(".csv"):
            table.to_csv(out, index=False)
        else:
            save_json(table.to_dict(orient="records"), out)
    return table


def cmd_oracle(circuit_path: str, bitstrings: Optional[Sequence[str]] = None,
               out: Optional[str] = None) -> Dict[str, Any]:
    """Амплитуды вектора состояния; без списка строк берутся все 2^n."""
    circuit = load_circuit(circuit_path)
    state = statevector_oracle(circuit)
    if bitstrings is None:
        n = circuit.n_qubits
        bitstrings = [format(i, f"0{n}b") if n else "" for i in range(2 ** n)]
    bitstrings = [validate_bitstring(s, circuit.n_qubits) for s in bitstrings]
    amps = [oracle_amplitude(state, s) for s in bitstrings]
    obj = {
        "n_qubits": circuit.n_qubits,
        "bitstrings": list(bitstrings),
        "amplitudes": [[a.real, a.imag] for a in amps],
    }
    if out is not None:
        save_json(obj, out)
    return obj
