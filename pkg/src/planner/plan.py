"""План свёртки: дерево, срезы, ствол, параллельные моды и стоимость; JSON-формат."""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional

from config.sim_config import ANNEAL_ITERATIONS
from planner.cost import CostModel, cost
from planner.search import anneal_search
from planner.stem import StemAnnotation, StepType, assign_parallel_modes, find_stem
from planner.tree import ContractionTree


@dataclass(frozen=True)
class ContractionPlan:
    tree: ContractionTree
    stem: StemAnnotation
    cost: CostModel
    split_nodes: FrozenSet[int] = field(default_factory=frozenset)

    @property
    def n_inter(self) -> int:
        return self.stem.n_inter

    @property
    def n_intra(self) -> int:
        return self.stem.n_intra

    @property
    def sliced_edges(self):
        return self.tree.sliced_edges

    def step_type(self, node: int) -> StepType:
        return self.stem.step_types.get(node, StepType.COMMON)

    def to_json(self) -> Dict[str, Any]:
        return {
            "tree": self.tree.to_nested(),
            "n_leaves": self.tree.n_leaves,
            "sliced_edges": list(self.tree.sliced_edges),
            "stem_path": list(self.stem.stem_path),
            "step_types": {str(k): v.value for k, v in sorted(self.stem.step_types.items())},
            "split_nodes": sorted(self.split_nodes),
            "n_inter": self.n_inter,
            "n_intra": self.n_intra,
            "cost": self.cost.to_json(),
        }

    def with_split_nodes(self, nodes, network) -> "ContractionPlan":
        """Пометить узлы как Split (стадия sparse-state), сохранив N_inter/N_intra."""
        split = frozenset(self.split_nodes) | frozenset(nodes)
        stem = find_stem(self.tree, network, split).with_modes(self.n_inter, self.n_intra)
        return ContractionPlan(self.tree, stem, self.cost, split)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=4)

    @classmethod
    def from_json(cls, obj: Dict[str, Any], network) -> "ContractionPlan":
        """Восстановить план; FLOP и размеры узлов пересчитываются по сети."""
        tree = ContractionTree.from_nested(obj["tree"], int(obj["n_leaves"]), obj.get("sliced_edges", []))
        split = frozenset(int(n) for n in obj.get("split_nodes", []))
        stem = find_stem(tree, network, split)
        saved_path = tuple(int(n) for n in obj.get("stem_path", stem.stem_path))
        if saved_path != stem.stem_path:
            raise ValueError(f"Stored stem path {list(saved_path)} does not match the tree")
        stem = stem.with_modes(int(obj.get("n_inter", 0)), int(obj.get("n_intra", 0)))
        return cls(tree, stem, cost(tree, network), split)


def build_plan(network, mem_limit_bytes: float, cluster=None, *, seed: int = 0,
               iterations: int = ANNEAL_ITERATIONS, split_nodes=()) -> ContractionPlan:
    """Поиск дерева, срезы, ствол и (при наличии кластера) N_inter/N_intra."""
    tree = anneal_search(network, mem_limit_bytes, seed, iterations)
    split = frozenset(split_nodes)
    stem = find_stem(tree, network, split)
    if cluster is not None:
        stem = stem.with_modes(*assign_parallel_modes(stem, cluster, dtype_bytes=network.precision.complex_bytes))
    return ContractionPlan(tree, stem, cost(tree, network), split)
