from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from tensors.halfprec import round_complex_to_half, round_to_half

Label = str


class Precision(str, Enum):
    C64 = "c64"
    CHALF = "chalf"

    @property
    def complex_bytes(self) -> int:
        return 8 if self is Precision.C64 else 4


@dataclass(frozen=True)
class Mode:
    label: Label
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"Mode {self.label!r} must have dim >= 1, got {self.dim}")


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Плотный тензор: упорядоченные моды, данные row-major, метка точности.

    Комплексные данные хранятся как complex64, действительные представления
    (после переписывания complex-as-real) как float32. Для CHalf значения
    всегда округлены до binary16.
    """
    modes: Tuple[Mode, ...]
    data: np.ndarray
    precision: Precision = Precision.C64

    def __post_init__(self):
        modes = tuple(m if isinstance(m, Mode) else Mode(*m) for m in self.modes)
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Duplicate mode labels: {labels}")
        shape = tuple(int(m.dim) for m in modes)
        raw = np.asarray(self.data)
        if raw.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(f"Data length {raw.size} does not match modes {shape}")
        precision = Precision(self.precision)
        if np.iscomplexobj(raw):
            data = raw.astype(np.complex64).reshape(shape)
            if precision is Precision.CHALF:
                data = round_complex_to_half(data)
        else:
            data = raw.astype(np.float32).reshape(shape)
            if precision is Precision.CHALF:
                data = np.asarray(round_to_half(data), dtype=np.float32).reshape(shape)
        data = np.array(data, copy=True)
        data.flags.writeable = False
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "precision", precision)

    @classmethod
    def from_array(cls, array: Any, labels: Sequence[Label],
                   precision: Precision = Precision.C64) -> "DenseTensor":
        """Создать тензор из массива numpy с заданными метками мод."""
        array = np.asarray(array)
        if array.ndim != len(labels):
            raise ValueError(f"Array rank {array.ndim} does not match labels {list(labels)}")
        modes = tuple(Mode(lbl, dim) for lbl, dim in zip(labels, array.shape))
        return cls(modes, array, precision)

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def rank(self) -> int:
        return len(self.modes)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.data)

    @property
    def nbytes(self) -> int:
        """Размер в байтах с учётом точности (CHalf: 4 байта на комплексный элемент)."""
        per = self.precision.complex_bytes
        if self.is_real:
            per //= 2
        return self.size * per

    def size_dict(self) -> Dict[Label, int]:
        return {m.label: m.dim for m in self.modes}

    def axis(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"Unknown mode label {label!r}; tensor has {list(self.labels)}") from None

    def fix(self, label: Label, value: int) -> "DenseTensor":
        """Зафиксировать значение моды (срез по ребру), мода удаляется."""
        ax = self.axis(label)
        data = np.take(self.data, value, axis=ax)
        modes = self.modes[:ax] + self.modes[ax + 1:]
        return DenseTensor(modes, data, self.precision)

    def astype(self, precision: Precision) -> "DenseTensor":
        return DenseTensor(self.modes, self.data, Precision(precision))

    def scalar(self) -> complex:
        if self.size != 1:
            raise ValueError(f"Tensor with shape {self.shape} is not a scalar")
        return complex(self.data.reshape(-1)[0])

    def to_json(self) -> Dict[str, Any]:
        """Литерал тензора: моды и row-major пары [re, im]."""
        flat = self.data.reshape(-1)
        pairs = [[float(np.real(v)), float(np.imag(v))] for v in flat]
        return {
            "modes": [[m.label, m.dim] for m in self.modes],
            "precision": self.precision.value,
            "data": pairs,
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "DenseTensor":
        modes = tuple(Mode(str(lbl), int(dim)) for lbl, dim in obj["modes"])
        pairs = np.asarray(obj.get("data", []), dtype=np.float64).reshape(-1, 2)
        data = pairs[:, 0] + 1j * pairs[:, 1]
        return cls(modes, data, Precision(obj.get("precision", "c64")))

    def __repr__(self) -> str:
        modes = ", ".join(f"{m.label}:{m.dim}" for m in self.modes)
        return f"DenseTensor([{modes}], {self.precision.value})"


def permute(t: DenseTensor, order: Iterable[Label]) -> DenseTensor:
    """Переставить моды тензора в порядке `order`."""
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ValueError(f"Duplicate labels in permutation {list(order)}")
    if set(order) != set(t.labels) or len(order) != t.rank:
        raise ValueError(f"Order {list(order)} is not a permutation of {list(t.labels)}")
    if order == t.labels:
        return t
    axes = [t.axis(lbl) for lbl in order]
    modes = tuple(t.modes[ax] for ax in axes)
    return DenseTensor(modes, np.transpose(t.data, axes), t.precision)


def stack_along(parts: List[DenseTensor], label: Label, position: int) -> DenseTensor:
    """Склеить части по новой моде `label`, вставленной в позицию `position`."""
    if not parts:
        raise ValueError("Nothing to stack")
    first = parts[0]
    for p in parts[1:]:
        if p.labels != first.labels:
            raise ValueError(f"Cannot stack tensors with modes {p.labels} and {first.labels}")
    data = np.stack([p.data for p in parts], axis=position)
    modes = first.modes[:position] + (Mode(label, len(parts)),) + first.modes[position:]
    return DenseTensor(modes, data, first.precision)
