"""Срезы (разрыв рёбер): выбор рёбер и разбиение сети на 2^k независимых подзадач."""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

from planner.cost import node_costs
from planner.tree import ContractionTree
from tensors.tensor import Label
from utils.utils import is_power_of_two


class InfeasiblePlanError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SlicePlan:
    network: object
    sliced_edges: Tuple[Label, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sliced_edges", tuple(self.sliced_edges))
        closed = set(self.network.closed_labels)
        for label in self.sliced_edges:
            if label not in closed:
                raise ValueError(f"Cannot slice {label!r}: not a closed edge")

    @property
    def dims(self) -> Tuple[int, ...]:
        sizes = self.network.size_dict()
        return tuple(sizes[l] for l in self.sliced_edges)

    @property
    def n_subtasks(self) -> int:
        return math.prod(self.dims)

    def assignments(self) -> List[Tuple[int, ...]]:
        """Все наборы значений срезанных рёбер в фиксированном (лексикографическом) порядке."""
        return list(itertools.product(*[range(d) for d in self.dims]))

    def subnetwork(self, assignment: Sequence[int]):
        return self.network.fix(dict(zip(self.sliced_edges, assignment)))

    def subnetworks(self) -> Iterator:
        for assignment in self.assignments():
            yield self.subnetwork(assignment)


def _max_elements(tree: ContractionTree, leaf_labels, dims) -> int:
    _, elements = node_costs(tree, leaf_labels, dims)
    return max(elements.values()) if elements else 1


def _pick_edge(network, tree: ContractionTree, chosen: List[Label]) -> Label:
    dims = network.size_dict()
    leaf_labels = network.leaf_labels()
    current = _max_elements(tree.with_slices(chosen), leaf_labels, dims)
    best_key, best_label = None, None
    for label in network.closed_labels:
        if label in chosen or dims[label] != 2:
            continue
        reduced = _max_elements(tree.with_slices(chosen + [label]), leaf_labels, dims)
        key = (-(current - reduced), label)
        if best_key is None or key < best_key:
            best_key, best_label = key, label
    return best_label


def choose_slices(network, tree: ContractionTree, mem_limit_bytes: float, dtype_bytes: int = 8) -> Tuple[Label, ...]:
    """Жадно срезать рёбра, пока наибольший тензор не поместится в mem_limit_bytes."""
    dims = network.size_dict()
    leaf_labels = network.leaf_labels()
    chosen: List[Label] = []
    while _max_elements(tree.with_slices(chosen), leaf_labels, dims) * dtype_bytes > mem_limit_bytes:
        label = _pick_edge(network, tree, chosen)
        if label is None:
            raise InfeasiblePlanError(
                f"Memory limit {mem_limit_bytes:g} B unreachable after slicing {len(chosen)} edges")
        chosen.append(label)
        logging.debug("Sliced edge %s (%d total)", label, len(chosen))
    return tuple(chosen)


def slice_network(network, tree: ContractionTree, budget_subtasks: int) -> SlicePlan:
    """Выбрать log2(budget) рёбер так, чтобы каждое максимально уменьшало пиковый тензор."""
    budget = int(budget_subtasks)
    if not is_power_of_two(budget):
        raise ValueError(f"Slice budget must be a power of two, got {budget_subtasks}")
    k = budget.bit_length() - 1
    binary = [l for l in network.closed_labels if network.size_dict()[l] == 2]
    if k > len(binary):
        raise ValueError(f"Budget {budget} needs {k} sliced edges but only {len(binary)} closed edges exist")
    chosen: List[Label] = []
    for _ in range(k):
        chosen.append(_pick_edge(network, tree, chosen))
    return SlicePlan(network, tuple(chosen))
