"""Пакетная свёртка финальной стадии: сбор по индексам и схема с дополненным 2d-индексом."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from tensors import DenseTensor, Mode
from tensors.tensor import Label

BATCH_LABEL = "n"


@dataclass(frozen=True, eq=False)
class SparseBatchSpec:
    index_a: np.ndarray
    index_b: np.ndarray
    m_a: int
    m_b: int
    batch_label: Label = BATCH_LABEL

    def __post_init__(self):
        ia = np.asarray(self.index_a, dtype=np.int64).reshape(-1)
        ib = np.asarray(self.index_b, dtype=np.int64).reshape(-1)
        if ia.size != ib.size:
            raise ValueError(f"Index_A has {ia.size} entries but Index_B has {ib.size}")
        if ia.size and (ia.min() < 0 or ia.max() >= self.m_a):
            raise ValueError(f"Index_A values must lie in [0, {self.m_a})")
        if ib.size and (ib.min() < 0 or ib.max() >= self.m_b):
            raise ValueError(f"Index_B values must lie in [0, {self.m_b})")
        if ia.size == 0:
            raise ValueError("Sparse batch needs at least one index pair")
        object.__setattr__(self, "index_a", ia)
        object.__setattr__(self, "index_b", ib)

    @property
    def m_n(self) -> int:
        return int(self.index_a.size)

    def select(self, start: int, stop: int) -> "SparseBatchSpec":
        return SparseBatchSpec(self.index_a[start:stop], self.index_b[start:stop], self.m_a, self.m_b,
                               self.batch_label)


@dataclass(frozen=True, eq=False)
class PaddedIndex:
    """Таблица m_a × m_r: в строке i значения Index_B для вхождений i в Index_A, остаток -1."""
    table: np.ndarray
    m_r: int
    rank: np.ndarray

    @property
    def m_a(self) -> int:
        return int(self.table.shape[0])


def _check_operands(a: DenseTensor, b: DenseTensor, spec: SparseBatchSpec) -> Tuple[list, list, list]:
    if a.rank < 1 or a.shape[0] != spec.m_a:
        raise ValueError(f"A must lead with a mode of extent m_a={spec.m_a}, got shape {a.shape}")
    if b.rank < 1 or b.shape[0] != spec.m_b:
        raise ValueError(f"B must lead with a mode of extent m_b={spec.m_b}, got shape {b.shape}")
    if a.precision is not b.precision or a.is_real != b.is_real:
        raise ValueError("A and B must share precision and domain")
    rest_a = list(a.labels[1:])
    rest_b = list(b.labels[1:])
    shared = [l for l in rest_a if l in rest_b]
    for l in shared:
        if a.size_dict()[l] != b.size_dict()[l]:
            raise ValueError(f"Dim mismatch on shared label {l!r}")
    return rest_a, rest_b, shared


def _rows(t: DenseTensor, free, shared) -> np.ndarray:
    """Переставить в (ведущая, free, shared) и свернуть в (m, F, K) в двойной точности."""
    order = [0] + [t.labels.index(l) for l in free] + [t.labels.index(l) for l in shared]
    data = np.transpose(t.data, order)
    wide = np.float64 if t.is_real else np.complex128
    sizes = t.size_dict()
    f = int(np.prod([sizes[l] for l in free], dtype=np.int64))
    k = int(np.prod([sizes[l] for l in shared], dtype=np.int64))
    return data.reshape(t.shape[0], f, k).astype(wide)


def _batched_kernel(a_rows: np.ndarray, b_rows: np.ndarray) -> np.ndarray:
    """C[..., Fa, Fb] = A[..., Fa, K] @ B[..., K, Fb]."""
    return np.matmul(a_rows, np.swapaxes(b_rows, -1, -2))


def _output(a: DenseTensor, b: DenseTensor, free_a, free_b, batch: Label, values: np.ndarray) -> DenseTensor:
    sa, sb = a.size_dict(), b.size_dict()
    modes = (Mode(batch, values.shape[0]),) + tuple(Mode(l, sa[l]) for l in free_a) \
        + tuple(Mode(l, sb[l]) for l in free_b)
    return DenseTensor(modes, values.reshape([m.dim for m in modes]), a.precision)


def gather_contract(a: DenseTensor, b: DenseTensor, spec: SparseBatchSpec) -> DenseTensor:
    """C[n, …] = A[index_a[n], …] × B[index_b[n], …] по общим модам."""
    rest_a, rest_b, shared = _check_operands(a, b, spec)
    free_a = [l for l in rest_a if l not in shared]
    free_b = [l for l in rest_b if l not in shared]
    a_rows = _rows(a, free_a, shared)[spec.index_a]
    b_rows = _rows(b, free_b, shared)[spec.index_b]
    return _output(a, b, free_a, free_b, spec.batch_label, _batched_kernel(a_rows, b_rows))


def build_padded_index(index_a, index_b, m_a: int, m_b: int) -> PaddedIndex:
    """m_r: максимальная кратность значения в Index_A; порядок вхождений устойчивый."""
    spec = SparseBatchSpec(index_a, index_b, m_a, m_b)
    counts = np.bincount(spec.index_a, minlength=m_a) if spec.m_n else np.zeros(m_a, dtype=np.int64)
    m_r = int(counts.max()) if counts.size else 0
    table = np.full((m_a, m_r), -1, dtype=np.int64)
    rank = np.zeros(spec.m_n, dtype=np.int64)
    filled = np.zeros(m_a, dtype=np.int64)
    for n, (i, j) in enumerate(zip(spec.index_a, spec.index_b)):
        rank[n] = filled[i]
        table[i, filled[i]] = j
        filled[i] += 1
    return PaddedIndex(table, m_r, rank)


def padded_operand(b: DenseTensor, padded: PaddedIndex, labels: Tuple[Label, Label] = ("pa", "pr")) -> DenseTensor:
    """B_P: строки B по таблице, позиции -1 становятся нулевыми блоками."""
    rest = b.data.shape[1:]
    safe = np.where(padded.table < 0, 0, padded.table)
    data = b.data[safe.reshape(-1)].reshape(padded.table.shape + rest)
    mask = (padded.table >= 0).reshape(padded.table.shape + (1,) * len(rest))
    data = np.where(mask, data, 0)
    modes = (Mode(labels[0], padded.table.shape[0]), Mode(labels[1], padded.m_r)) + b.modes[1:]
    return DenseTensor(modes, data, b.precision)


def padded_contract(a: DenseTensor, b: DenseTensor, spec: SparseBatchSpec) -> DenseTensor:
    """C_P = A × B_P с A без перестановок, затем плоские внешние моды и выбор валидных строк."""
    rest_a, rest_b, shared = _check_operands(a, b, spec)
    free_a = [l for l in rest_a if l not in shared]
    free_b = [l for l in rest_b if l not in shared]
    padded = build_padded_index(spec.index_a, spec.index_b, spec.m_a, spec.m_b)
    b_p = padded_operand(b, padded)
    a_rows = _rows(a, free_a, shared)
    sb = b.size_dict()
    order = [0, 1] + [b_p.labels.index(l) for l in free_b] + [b_p.labels.index(l) for l in shared]
    fb = int(np.prod([sb[l] for l in free_b], dtype=np.int64))
    k = int(np.prod([sb[l] for l in shared], dtype=np.int64))
    bp_rows = np.transpose(b_p.data, order).reshape(spec.m_a, padded.m_r, fb, k).astype(a_rows.dtype)
    c_p = _batched_kernel(a_rows[:, None], bp_rows)
    flat = c_p.reshape((spec.m_a * padded.m_r,) + c_p.shape[2:])
    values = flat[spec.index_a * padded.m_r + padded.rank]
    return _output(a, b, free_a, free_b, spec.batch_label, values)
