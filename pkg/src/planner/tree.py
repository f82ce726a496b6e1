"""Бинарное дерево свёртки: листья суть индексы тензоров сети, узлы нумеруются в post-order."""
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

from tensors import EinsumSpec
from tensors.tensor import Label

Nested = Union[int, Tuple["Nested", "Nested"]]


def _normalize(obj: Any) -> Nested:
    if isinstance(obj, bool):
        raise ValueError("Tree leaves must be integers")
    if isinstance(obj, int):
        return obj
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return (_normalize(obj[0]), _normalize(obj[1]))
    raise ValueError(f"Tree node must be a leaf id or a pair, got {obj!r}")


def _leaves(structure: Nested) -> List[int]:
    if isinstance(structure, int):
        return [structure]
    return _leaves(structure[0]) + _leaves(structure[1])


@dataclass(frozen=True)
class ContractionTree:
    structure: Nested
    n_leaves: int
    sliced_edges: Tuple[Label, ...] = ()

    def __post_init__(self):
        structure = _normalize(self.structure)
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "sliced_edges", tuple(self.sliced_edges))
        leaves = _leaves(structure)
        if sorted(leaves) != list(range(self.n_leaves)):
            raise ValueError(f"Tree leaves {sorted(leaves)} are not exactly 0..{self.n_leaves - 1}")
        steps: List[Tuple[int, int, int]] = []
        counter = [self.n_leaves]

        def walk(node: Nested) -> int:
            if isinstance(node, int):
                return node
            left = walk(node[0])
            right = walk(node[1])
            nid = counter[0]
            counter[0] += 1
            steps.append((nid, left, right))
            return nid

        root = walk(structure)
        object.__setattr__(self, "_steps", tuple(steps))
        object.__setattr__(self, "_root", root)

    @classmethod
    def from_nested(cls, obj: Any, n_leaves: int = None, sliced_edges: Iterable[Label] = ()) -> "ContractionTree":
        structure = _normalize(obj)
        if n_leaves is None:
            n_leaves = len(_leaves(structure))
        return cls(structure, n_leaves, tuple(sliced_edges))

    def to_nested(self) -> Any:
        def conv(node: Nested):
            return node if isinstance(node, int) else [conv(node[0]), conv(node[1])]
        return conv(self.structure)

    def with_slices(self, sliced_edges: Iterable[Label]) -> "ContractionTree":
        return ContractionTree(self.structure, self.n_leaves, tuple(sliced_edges))

    @property
    def root(self) -> int:
        return self._root

    @property
    def steps(self) -> Tuple[Tuple[int, int, int], ...]:
        """Внутренние узлы в порядке вычисления: (node, left, right)."""
        return self._steps

    @property
    def internal_nodes(self) -> Tuple[int, ...]:
        return tuple(s[0] for s in self._steps)

    def is_leaf(self, node: int) -> bool:
        return 0 <= node < self.n_leaves

    def children(self) -> Dict[int, Tuple[int, int]]:
        return {nid: (left, right) for nid, left, right in self._steps}

    def parents(self) -> Dict[int, int]:
        out = {}
        for nid, left, right in self._steps:
            out[left] = nid
            out[right] = nid
        return out

    def leaves_under(self) -> Dict[int, FrozenSet[int]]:
        out: Dict[int, FrozenSet[int]] = {i: frozenset([i]) for i in range(self.n_leaves)}
        for nid, left, right in self._steps:
            out[nid] = out[left] | out[right]
        return out

    def node_labels(self, leaf_labels: Sequence[Sequence[Label]]) -> Dict[int, Tuple[Label, ...]]:
        """Выходные моды каждого узла: объединение минус пересечение детей (срезанные рёбра удалены)."""
        sliced = set(self.sliced_edges)
        out: Dict[int, Tuple[Label, ...]] = {
            i: tuple(l for l in leaf_labels[i] if l not in sliced) for i in range(self.n_leaves)
        }
        for nid, left, right in self._steps:
            out[nid] = EinsumSpec.for_inputs(out[left], out[right]).out
        return out

    def depth(self) -> int:
        def d(node: Nested) -> int:
            return 0 if isinstance(node, int) else 1 + max(d(node[0]), d(node[1]))
        return d(self.structure)


def left_deep_tree(n_leaves: int) -> ContractionTree:
    """Дерево-цепочка ((0,1),2),…"""
    if n_leaves < 1:
        raise ValueError("Tree needs at least one leaf")
    structure: Nested = 0
    for i in range(1, n_leaves):
        structure = (structure, i)
    return ContractionTree(structure, n_leaves)
