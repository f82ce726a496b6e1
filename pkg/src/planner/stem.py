"""Путь ствола (stem), типы шагов и выбор параллельных мод N_inter/N_intra."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from planner.cost import node_costs
from planner.tree import ContractionTree


class StepType(str, Enum):
    STEM = "stem"
    SPLIT = "split"
    COMMON = "common"


class ShardOverflowError(MemoryError):
    pass


@dataclass(frozen=True)
class StemAnnotation:
    stem_path: Tuple[int, ...]
    step_types: Mapping[int, StepType]
    node_flops: Mapping[int, float] = field(default_factory=dict, compare=False)
    node_elements: Mapping[int, int] = field(default_factory=dict, compare=False)
    n_inter: int = 0
    n_intra: int = 0

    @property
    def stem_nodes(self) -> FrozenSet[int]:
        return frozenset(self.stem_path)

    @property
    def largest_stem_elements(self) -> int:
        return max((self.node_elements.get(n, 1) for n in self.stem_path), default=1)

    @property
    def path_flops(self) -> float:
        return sum(self.node_flops.get(n, 0.0) for n in self.stem_path)

    def with_modes(self, n_inter: int, n_intra: int) -> "StemAnnotation":
        return StemAnnotation(self.stem_path, self.step_types, self.node_flops, self.node_elements,
                              int(n_inter), int(n_intra))


def find_stem(tree: ContractionTree, network, split_nodes: Iterable[int] = ()) -> StemAnnotation:
    """Самый тяжёлый по FLOP путь корень→лист (ничьи уходят левому ребёнку) и классификация шагов."""
    flops, elements = node_costs(tree, network.leaf_labels(), network.size_dict())
    children = tree.children()
    heaviest: Dict[int, float] = {i: 0.0 for i in range(tree.n_leaves)}
    for nid, left, right in tree.steps:
        heaviest[nid] = flops[nid] + max(heaviest[left], heaviest[right])

    path = [tree.root]
    while path[-1] in children:
        left, right = children[path[-1]]
        path.append(left if heaviest[left] >= heaviest[right] else right)
    path.reverse()

    split = set(split_nodes)
    # шаг пути является Stem, только если предыдущий выход ствола не меньше второго входа
    stem_steps = set()
    for prev, nid in zip(path, path[1:]):
        left, right = children[nid]
        other = right if prev == left else left
        if elements[prev] >= elements[other]:
            stem_steps.add(nid)
    types: Dict[int, StepType] = {}
    for nid in tree.internal_nodes:
        if nid in split:
            types[nid] = StepType.SPLIT
        elif nid in stem_steps:
            types[nid] = StepType.STEM
        else:
            types[nid] = StepType.COMMON
    return StemAnnotation(tuple(path), types, flops, elements)


def assign_parallel_modes(stem: StemAnnotation, cluster, device_mem: Optional[float] = None,
                          dtype_bytes: int = 8) -> Tuple[int, int]:
    """Наименьшее число разбиений, при котором осколок ствола помещается в устройство; сперва intra."""
    device_mem = cluster.device_mem if device_mem is None else device_mem
    largest = stem.largest_stem_elements * dtype_bytes
    rank = int(math.floor(math.log2(stem.largest_stem_elements))) if stem.largest_stem_elements > 1 else 0
    need = 0
    while largest / 2 ** need > device_mem:
        need += 1
        if need > rank:
            raise ShardOverflowError(
                f"Largest stem tensor ({largest} B) cannot fit {device_mem:g} B even with all {rank} modes sharded")
    max_intra = int(math.floor(math.log2(cluster.devices_per_node)))
    max_inter = int(math.floor(math.log2(cluster.nodes)))
    n_intra = min(need, max_intra)
    n_inter = need - n_intra
    if n_inter > max_inter:
        raise ShardOverflowError(
            f"Stem needs {need} sharded modes but the cluster offers {max_inter} inter + {max_intra} intra")
    logging.debug("Parallel modes: N_inter=%d, N_intra=%d (largest stem %d B)", n_inter, n_intra, largest)
    return n_inter, n_intra
