"""Амплитуды многих битовых строк за одну свёртку: две половины корня и пакетная финальная стадия."""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from circuit import Circuit, circuit_to_network
from circuit.network import validate_bitstring
from config.sim_config import SAMPLER_ITERATIONS, SAMPLER_MEM_LIMIT
from planner import ContractionPlan, SlicePlan, build_plan, contract_subtree
from sparse_state import SparseBatchSpec, build_padded_index, gather_contract, padded_contract
from tensors import DenseTensor, Mode, Precision, permute
from tensors.tensor import Label


def _pattern_rows(t: DenseTensor, open_labels: Sequence[Label], patterns: Sequence[str], row_label: Label) -> DenseTensor:
    """Строки тензора для различных значений его открытых ног; остальные моды сохраняются."""
    shared = tuple(l for l in t.labels if l not in open_labels)
    t = permute(t, tuple(open_labels) + shared)
    flat = t.data.reshape((2 ** len(open_labels), -1))
    rows = flat[[int(p, 2) if p else 0 for p in patterns]]
    modes = (Mode(row_label, len(patterns)),) + t.modes[len(open_labels):]
    return DenseTensor(modes, rows.reshape([m.dim for m in modes]), t.precision)


def _slice_amplitudes(network, plan: ContractionPlan, bitstrings: Sequence[str], qubit_of: Dict[Label, int]) -> np.ndarray:
    tree = plan.tree
    if tree.is_leaf(tree.root):
        t = permute(network.tensors[tree.root], network.open_legs)
        flat = t.data.reshape(-1)
        return np.array([flat[int(s, 2) if s else 0] for s in bitstrings], dtype=np.complex128)

    left, right = tree.children()[tree.root]
    t_a = contract_subtree(network, tree, left)
    t_b = contract_subtree(network, tree, right)
    open_a = [l for l in network.open_legs if l in t_a.labels]
    open_b = [l for l in network.open_legs if l in t_b.labels]
    pat_a = ["".join(s[qubit_of[l]] for l in open_a) for s in bitstrings]
    pat_b = ["".join(s[qubit_of[l]] for l in open_b) for s in bitstrings]
    rows_a = sorted(set(pat_a))
    rows_b = sorted(set(pat_b))
    pos_a = {p: i for i, p in enumerate(rows_a)}
    pos_b = {p: i for i, p in enumerate(rows_b)}
    index_a = [pos_a[p] for p in pat_a]
    index_b = [pos_b[p] for p in pat_b]

    a = _pattern_rows(t_a, open_a, rows_a, "ra")
    b = _pattern_rows(t_b, open_b, rows_b, "rb")
    spec = SparseBatchSpec(index_a, index_b, len(rows_a), len(rows_b))
    m_r = build_padded_index(index_a, index_b, len(rows_a), len(rows_b)).m_r
    kernel = padded_contract if m_r > 1 else gather_contract
    logging.debug("Sparse stage: m_a=%d, m_b=%d, m_n=%d, m_r=%d", spec.m_a, spec.m_b, spec.m_n, m_r)
    return kernel(a, b, spec).data.reshape(-1).astype(np.complex128)


def amplitudes(circuit: Circuit, bitstrings: Sequence[str], plan: Optional[ContractionPlan] = None,
               precision: Precision = Precision.C64, *, mem_limit: float = SAMPLER_MEM_LIMIT, seed: int = 0,
               iterations: int = SAMPLER_ITERATIONS) -> List[complex]:
    """Амплитуды <s|U|0…0> для набора строк; план строится для сети с открытыми ногами."""
    bitstrings = [validate_bitstring(s, circuit.n_qubits) for s in bitstrings]
    if not bitstrings:
        return []
    network = circuit_to_network(circuit, precision=precision)
    if plan is None:
        plan = build_plan(network, mem_limit, seed=seed, iterations=iterations)
    qubit_of = {l: q for q, l in enumerate(network.open_legs)}
    acc = np.zeros(len(bitstrings), dtype=np.complex128)
    for sub in SlicePlan(network, plan.sliced_edges).subnetworks():
        acc += _slice_amplitudes(sub, plan, bitstrings, qubit_of)
    return [complex(v) for v in acc]


def probabilities(circuit: Circuit, bitstrings: Sequence[str], plan: Optional[ContractionPlan] = None,
                  **kwargs) -> np.ndarray:
    amps = np.asarray(amplitudes(circuit, bitstrings, plan, **kwargs), dtype=np.complex128)
    return np.abs(amps) ** 2
