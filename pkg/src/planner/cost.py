"""Стоимость дерева свёртки: FLOP (8 на комплексное умножение-сложение) и пиковый размер тензора."""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from config.sim_config import FLOPS_PER_CMAC
from planner.tree import ContractionTree
from tensors.tensor import Label


@dataclass(frozen=True)
class CostModel:
    flops: float
    max_elements: int
    dtype_bytes: int = 8
    treewidth: int = 0
    n_subtasks: int = 1

    @property
    def max_bytes(self) -> int:
        return self.max_elements * self.dtype_bytes

    @property
    def space_law_bytes(self) -> int:
        """s·2^M для наибольшего промежуточного тензора."""
        return self.dtype_bytes * 2 ** self.treewidth

    @property
    def total_flops(self) -> float:
        return self.flops * self.n_subtasks

    def to_json(self) -> Dict[str, float]:
        return {
            "flops": self.flops,
            "total_flops": self.total_flops,
            "max_elements": self.max_elements,
            "dtype_bytes": self.dtype_bytes,
            "treewidth": self.treewidth,
            "space_law_bytes": self.space_law_bytes,
            "n_subtasks": self.n_subtasks,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "CostModel":
        return cls(float(obj["flops"]), int(obj["max_elements"]), int(obj.get("dtype_bytes", 8)),
                   int(obj.get("treewidth", 0)), int(obj.get("n_subtasks", 1)))


def _size(labels: Iterable[Label], dims: Mapping[Label, int]) -> int:
    return math.prod(dims[l] for l in labels)


def node_costs(tree: ContractionTree, leaf_labels: Sequence[Sequence[Label]],
               dims: Mapping[Label, int]) -> Tuple[Dict[int, float], Dict[int, int]]:
    """FLOP каждого внутреннего узла и число элементов выхода каждого узла (включая листья)."""
    labels = tree.node_labels(leaf_labels)
    flops: Dict[int, float] = {}
    elements: Dict[int, int] = {nid: _size(ls, dims) for nid, ls in labels.items()}
    for nid, left, right in tree.steps:
        union = set(labels[left]) | set(labels[right])
        flops[nid] = float(FLOPS_PER_CMAC * _size(union, dims))
    return flops, elements


def _check_consistent(tree: ContractionTree, network) -> None:
    if tree.n_leaves != network.n_tensors:
        raise ValueError(f"Tree has {tree.n_leaves} leaves but network has {network.n_tensors} tensors")
    unknown = set(tree.sliced_edges) - set(network.closed_labels)
    if unknown:
        raise ValueError(f"Sliced edges {sorted(unknown)} are not closed edges of the network")


def cost(tree: ContractionTree, network, dtype_bytes: int = None) -> CostModel:
    """Посчитать стоимость одной подзадачи (срезанные рёбра дерева удалены)."""
    _check_consistent(tree, network)
    if dtype_bytes is None:
        dtype_bytes = network.precision.complex_bytes
    dims = network.size_dict()
    flops, elements = node_costs(tree, network.leaf_labels(), dims)
    max_elements = max(elements.values()) if elements else 1
    n_subtasks = _size(tree.sliced_edges, dims)
    return CostModel(
        flops=float(sum(flops.values())),
        max_elements=int(max_elements),
        dtype_bytes=int(dtype_bytes),
        treewidth=int(math.ceil(math.log2(max_elements))) if max_elements > 1 else 0,
        n_subtasks=int(n_subtasks),
    )
