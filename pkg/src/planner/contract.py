"""Исполнение дерева свёртки на одном устройстве с суммированием по срезам."""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from planner.slicing import SlicePlan
from planner.tree import ContractionTree
from tensors import DenseTensor, EinsumSpec, contract, permute

Kernel = Callable[[EinsumSpec, DenseTensor, DenseTensor], DenseTensor]


def contract_subtree(network, tree: ContractionTree, node: Optional[int] = None,
                     kernel: Kernel = contract) -> DenseTensor:
    """Свернуть поддерево узла `node` (по умолчанию корень) сети с уже зафиксированными срезами."""
    node = tree.root if node is None else node
    if tree.is_leaf(node):
        return network.tensors[node]
    needed = tree.leaves_under()[node]
    values: Dict[int, DenseTensor] = {i: network.tensors[i] for i in needed}
    for nid, left, right in tree.steps:
        if left not in values or right not in values:
            continue
        a, b = values.pop(left), values.pop(right)
        values[nid] = kernel(EinsumSpec.for_inputs(a.labels, b.labels), a, b)
        if nid == node:
            return values[nid]
    raise ValueError(f"Node {node} is not part of the tree")


def contract_tree(network, tree: ContractionTree, kernel: Kernel = contract) -> DenseTensor:
    """Полная свёртка: сумма по всем срезам дерева, моды результата в порядке открытых ног."""
    plan = SlicePlan(network, tree.sliced_edges)
    acc = None
    result = None
    for sub in plan.subnetworks():
        result = permute(contract_subtree(sub, tree, kernel=kernel), sub.open_legs)
        part = result.data.astype(np.complex128 if not result.is_real else np.float64)
        acc = part if acc is None else acc + part
    logging.debug("Contracted %d subtask(s)", plan.n_subtasks)
    return DenseTensor(result.modes, acc, result.precision)
