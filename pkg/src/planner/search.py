"""Поиск порядка свёртки: жадная база и имитация отжига с ограничением памяти."""
import logging
import math
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from config.sim_config import (ANNEAL_DECAY, ANNEAL_ITERATIONS, ANNEAL_MEMORY_PENALTY, ANNEAL_T_START,
                               FLOPS_PER_CMAC)
from planner.cost import cost
from planner.slicing import InfeasiblePlanError, choose_slices
from planner.tree import ContractionTree, Nested
from tensors.tensor import Label

Path = Tuple[int, ...]


def _size(labels: FrozenSet[Label], dims: Dict[Label, int]) -> int:
    return math.prod(dims[l] for l in labels)


def greedy_tree(network) -> ContractionTree:
    """Жадно сворачивать соседние пары с наименьшим приростом размера (ничьи по меньшим id)."""
    dims = network.size_dict()
    active: Dict[int, Tuple[Nested, FrozenSet[Label]]] = {
        i: (i, frozenset(t.labels)) for i, t in enumerate(network.tensors)
    }
    owners: Dict[Label, set] = {}
    for i, (_, labels) in active.items():
        for l in labels:
            owners.setdefault(l, set()).add(i)
    next_id = len(active)
    while len(active) > 1:
        best = None
        pairs = set()
        for ids in owners.values():
            if len(ids) == 2:
                pairs.add(tuple(sorted(ids)))
        if not pairs:
            by_size = sorted(active, key=lambda i: (_size(active[i][1], dims), i))
            pairs = {tuple(sorted(by_size[:2]))}
        for a, b in pairs:
            la, lb = active[a][1], active[b][1]
            score = _size(la ^ lb, dims) - _size(la, dims) - _size(lb, dims)
            key = (score, a, b)
            if best is None or key < best:
                best = key
        _, a, b = best
        (sa, la), (sb, lb) = active.pop(a), active.pop(b)
        merged = la ^ lb
        for l in la | lb:
            owners[l].discard(a)
            owners[l].discard(b)
            if l in merged:
                owners[l].add(next_id)
            elif not owners[l]:
                del owners[l]
        active[next_id] = ((sa, sb), merged)
        next_id += 1
    (structure, _), = active.values()
    return ContractionTree(structure, network.n_tensors)


def _evaluate(structure: Nested, leaf_sets: Sequence[FrozenSet[Label]],
              dims: Dict[Label, int]) -> Tuple[FrozenSet[Label], float, int]:
    if isinstance(structure, int):
        labels = leaf_sets[structure]
        return labels, 0.0, _size(labels, dims)
    la, fa, ma = _evaluate(structure[0], leaf_sets, dims)
    lb, fb, mb = _evaluate(structure[1], leaf_sets, dims)
    out = la ^ lb
    size = _size(out, dims)
    flops = fa + fb + FLOPS_PER_CMAC * _size(la | lb, dims)
    return out, flops, max(ma, mb, size)


def _paths(structure: Nested, path: Path = ()) -> List[Tuple[Path, Nested]]:
    out = [(path, structure)]
    if not isinstance(structure, int):
        out += _paths(structure[0], path + (0,))
        out += _paths(structure[1], path + (1,))
    return out


def _get(structure: Nested, path: Path) -> Nested:
    for step in path:
        structure = structure[step]
    return structure


def _replace(structure: Nested, path: Path, new: Nested) -> Nested:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if head == 0:
        return (_replace(structure[0], rest, new), structure[1])
    return (structure[0], _replace(structure[1], rest, new))


def _rotate(structure: Nested, rng: np.random.Generator) -> Optional[Nested]:
    candidates = [(p, n) for p, n in _paths(structure)
                  if not isinstance(n, int) and (not isinstance(n[0], int) or not isinstance(n[1], int))]
    if not candidates:
        return None
    path, (left, right) = candidates[int(rng.integers(len(candidates)))]
    flip = bool(rng.integers(2))
    if not isinstance(left, int) and (isinstance(right, int) or rng.integers(2)):
        a, b = left
        new = (b, (a, right)) if flip else (a, (b, right))
    else:
        a, b = right
        new = ((left, b), a) if flip else ((left, a), b)
    return _replace(structure, path, new)


def _reattach_leaf(structure: Nested, rng: np.random.Generator) -> Optional[Nested]:
    leaves = [p for p, n in _paths(structure) if isinstance(n, int) and p]
    if len(leaves) < 3:
        return None
    path = leaves[int(rng.integers(len(leaves)))]
    leaf = _get(structure, path)
    sibling = _get(structure, path[:-1] + (1 - path[-1],))
    pruned = _replace(structure, path[:-1], sibling)
    targets = _paths(pruned)
    target_path, target = targets[int(rng.integers(len(targets)))]
    new = (target, leaf) if rng.integers(2) else (leaf, target)
    return _replace(pruned, target_path, new)


def _objective(flops: float, max_elements: int, dtype_bytes: int, mem_limit: float, penalty: float) -> float:
    over = max(0.0, math.log2(max_elements * dtype_bytes / mem_limit))
    return math.log2(max(flops, 1.0)) + penalty * over


def anneal_search(network, mem_limit_bytes: float, seed: int = 0, iterations: int = ANNEAL_ITERATIONS, *,
                  t_start: float = ANNEAL_T_START, decay: float = ANNEAL_DECAY,
                  memory_penalty: float = ANNEAL_MEMORY_PENALTY, dtype_bytes: int = None) -> ContractionTree:
    """Имитация отжига от жадного дерева; результат срезается под mem_limit и не хуже жадного по FLOP."""
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if dtype_bytes is None:
        dtype_bytes = network.precision.complex_bytes
    largest_leaf = max(t.size for t in network.tensors) * dtype_bytes
    if largest_leaf > mem_limit_bytes:
        raise InfeasiblePlanError(f"Memory limit {mem_limit_bytes:g} B is below the largest leaf ({largest_leaf} B)")

    rng = np.random.default_rng(seed)
    dims = network.size_dict()
    leaf_sets = [frozenset(t.labels) for t in network.tensors]
    greedy = greedy_tree(network)

    current = greedy.structure
    _, flops, max_el = _evaluate(current, leaf_sets, dims)
    cur_obj = _objective(flops, max_el, dtype_bytes, mem_limit_bytes, memory_penalty)
    best, best_obj = current, cur_obj
    temperature = t_start
    if network.n_tensors >= 3:
        for it in range(iterations):
            move = _rotate if rng.integers(2) else _reattach_leaf
            candidate = move(current, rng)
            if candidate is not None:
                _, flops, max_el = _evaluate(candidate, leaf_sets, dims)
                obj = _objective(flops, max_el, dtype_bytes, mem_limit_bytes, memory_penalty)
                delta = obj - cur_obj
                if delta <= 0 or rng.random() < math.exp(-delta / max(temperature, 1e-12)):
                    current, cur_obj = candidate, obj
                    if obj < best_obj:
                        best, best_obj = candidate, obj
            temperature *= decay
        logging.debug("Annealing finished: best objective %.3f (greedy %.3f)", best_obj,
                      _objective(*_evaluate(greedy.structure, leaf_sets, dims)[1:], dtype_bytes,
                                 mem_limit_bytes, memory_penalty))

    results = []
    for structure in (best, greedy.structure):
        tree = ContractionTree(structure, network.n_tensors)
        try:
            sliced = choose_slices(network, tree, mem_limit_bytes, dtype_bytes)
        except InfeasiblePlanError:
            continue
        tree = tree.with_slices(sliced)
        results.append((cost(tree, network, dtype_bytes).total_flops, len(results), tree))
    if not results:
        raise InfeasiblePlanError(f"No contraction tree fits {mem_limit_bytes:g} B even after slicing")
    results.sort(key=lambda r: (r[0], r[1]))
    return results[0][2]
