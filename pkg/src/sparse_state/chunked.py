"""Разбиение свёртки на чанки по свободной памяти; чанки берутся из split-фрагментов пула."""
import itertools
import logging
import math
from typing import FrozenSet, List, Optional

import numpy as np

from planner.stem import StepType
from sparse_state.batch import SparseBatchSpec, gather_contract
from tensors import DenseTensor, EinsumSpec, Mode, contract, permute


class ChunkBudgetError(MemoryError):
    pass


def _budget(mem_budget: Optional[float], pool) -> float:
    if mem_budget is not None:
        return float(mem_budget)
    if pool is None:
        return math.inf
    return float(pool.largest_free_fragment())


def _run_chunks(count: int, working: int, pool, compute) -> Optional[list]:
    """Выполнить `count` чанков; None, если пул не выдал фрагмент нужного размера."""
    outputs = []
    for j in range(count):
        handle = None
        if pool is not None:
            try:
                handle = pool.alloc(StepType.SPLIT, working)
            except MemoryError:
                return None
        try:
            outputs.append(compute(j))
        finally:
            if handle is not None:
                pool.free(handle)
    return outputs


def chunked_execute(a: DenseTensor, b: DenseTensor, spec: SparseBatchSpec, mem_budget: Optional[float] = None,
                    pool=None, kernel=gather_contract) -> DenseTensor:
    """Разбить пакет по n на наименьшую степень двойки чанков, чей рабочий набор помещается в бюджет."""
    budget = _budget(mem_budget, pool)
    per = a.precision.complex_bytes // (2 if a.is_real else 1)
    rest_b = set(b.labels[1:])
    shared = [l for l in a.labels[1:] if l in rest_b]
    out_row = math.prod(d for l, d in a.size_dict().items() if l != a.labels[0] and l not in shared) \
        * math.prod(d for l, d in b.size_dict().items() if l != b.labels[0] and l not in shared) * per
    row_a = a.nbytes // spec.m_a

    def working(c: int) -> int:
        return int(math.ceil(spec.m_n / c)) * (row_a + out_row) + b.nbytes

    max_count = 1 << max(0, (spec.m_n - 1).bit_length())
    count = 1
    while True:
        while count <= max_count and working(count) > budget:
            count *= 2
        if count > max_count:
            raise ChunkBudgetError(f"Budget {budget:g} B is too small for any chunking of {spec.m_n} rows")
        step = int(math.ceil(spec.m_n / count))
        outputs = _run_chunks(int(math.ceil(spec.m_n / step)), working(count), pool,
                              lambda j: kernel(a, b, spec.select(j * step, min((j + 1) * step, spec.m_n))))
        if outputs is not None:
            break
        count *= 2
    logging.debug("Sparse batch of %d rows in %d chunk(s)", spec.m_n, count)
    data = np.concatenate([o.data for o in outputs], axis=0)
    first = outputs[0]
    return DenseTensor((Mode(first.labels[0], data.shape[0]),) + first.modes[1:], data, first.precision)


def chunked_contract(spec: EinsumSpec, a: DenseTensor, b: DenseTensor, mem_budget: Optional[float] = None,
                     pool=None) -> DenseTensor:
    """Парная свёртка по чанкам большего входа вдоль его свободных двоичных мод."""
    budget = _budget(mem_budget, pool)
    a_larger = a.size >= b.size
    larger, smaller = (a, b) if a_larger else (b, a)
    dims = {**a.size_dict(), **b.size_dict()}
    free = [l for l in larger.labels if l in spec.out and dims[l] == 2]
    out_bytes = math.prod(dims[l] for l in spec.out) * larger.precision.complex_bytes

    def working(c: int) -> int:
        return int(math.ceil(larger.nbytes / c + smaller.nbytes + out_bytes / c))

    j = 0
    while True:
        while j <= len(free) and working(2 ** j) > budget:
            j += 1
        if j > len(free):
            raise ChunkBudgetError(f"Budget {budget:g} B is too small for any chunking of {spec.equation()}")
        fixed = free[:j]
        combos = list(itertools.product((0, 1), repeat=j))
        sub_spec = spec.without(fixed)

        def compute(k: int) -> DenseTensor:
            part = larger
            for label, value in zip(fixed, combos[k]):
                part = part.fix(label, value)
            return contract(sub_spec, part, smaller) if a_larger else contract(sub_spec, smaller, part)

        outputs = _run_chunks(len(combos), working(2 ** j), pool, compute)
        if outputs is not None:
            break
        j += 1
    logging.debug("Contraction %s in %d chunk(s)", spec.equation(), len(outputs))
    if not fixed:
        return permute(outputs[0], spec.out)
    first = outputs[0]
    data = np.stack([o.data for o in outputs], axis=0).reshape((2,) * j + first.shape)
    modes = tuple(Mode(l, 2) for l in fixed) + first.modes
    return permute(DenseTensor(modes, data, first.precision), spec.out)


def register_sparse_stage(tree) -> FrozenSet[int]:
    """Пометить корневую свёртку как стадию sparse-state (тип Split)."""
    return frozenset() if tree.is_leaf(tree.root) else frozenset([tree.root])
