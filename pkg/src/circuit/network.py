"""Тензорная сеть схемы: тензоры гейтов, рёбра (метки) и открытые ноги."""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from circuit.circuit import Circuit
from circuit.gates import gate_matrix
from config.sim_config import _BITSTRING_RE
from tensors import DenseTensor, Mode, Precision
from tensors.tensor import Label

_KET0 = np.array([1, 0], dtype=np.complex128)
_KET1 = np.array([0, 1], dtype=np.complex128)


def wire_label(qubit: int, step: int) -> Label:
    return f"q{qubit}_{step}"


@dataclass(frozen=True, eq=False)
class TensorNetworkGraph:
    """Сеть: каждая закрытая метка встречается ровно в двух тензорах, открытая в одном."""
    tensors: Tuple[DenseTensor, ...]
    open_legs: Tuple[Label, ...] = ()

    def __post_init__(self):
        tensors = tuple(self.tensors)
        open_legs = tuple(self.open_legs)
        object.__setattr__(self, "tensors", tensors)
        object.__setattr__(self, "open_legs", open_legs)
        counts = Counter(l for t in tensors for l in t.labels)
        dims: Dict[Label, int] = {}
        for t in tensors:
            for m in t.modes:
                if dims.setdefault(m.label, m.dim) != m.dim:
                    raise ValueError(f"Edge {m.label!r} has inconsistent dims {dims[m.label]} and {m.dim}")
        for label in open_legs:
            if counts.get(label) != 1:
                raise ValueError(f"Open leg {label!r} must touch exactly one tensor, touches {counts.get(label, 0)}")
        for label, n in counts.items():
            if label not in open_legs and n != 2:
                raise ValueError(f"Closed edge {label!r} must touch exactly two tensors, touches {n}")
        object.__setattr__(self, "_dims", dims)

    @property
    def n_tensors(self) -> int:
        return len(self.tensors)

    @property
    def precision(self) -> Precision:
        return self.tensors[0].precision if self.tensors else Precision.C64

    def size_dict(self) -> Dict[Label, int]:
        return dict(self._dims)

    @property
    def hyperedges(self) -> Dict[Label, Tuple[int, ...]]:
        """Закрытые рёбра: метка -> индексы тензоров, которые она соединяет."""
        edges: Dict[Label, List[int]] = {}
        for i, t in enumerate(self.tensors):
            for label in t.labels:
                if label not in self.open_legs:
                    edges.setdefault(label, []).append(i)
        return {k: tuple(v) for k, v in edges.items()}

    @property
    def closed_labels(self) -> Tuple[Label, ...]:
        return tuple(sorted(self.hyperedges))

    def leaf_labels(self) -> List[Tuple[Label, ...]]:
        return [t.labels for t in self.tensors]

    def fix(self, assignment: Mapping[Label, int]) -> "TensorNetworkGraph":
        """Зафиксировать значения рёбер: метки удаляются из всех тензоров и открытых ног."""
        if not assignment:
            return self
        for label, value in assignment.items():
            if label not in self._dims:
                raise ValueError(f"Unknown edge {label!r}")
            if not 0 <= int(value) < self._dims[label]:
                raise ValueError(f"Value {value} out of range for edge {label!r}")
        tensors = []
        for t in self.tensors:
            for label in t.labels:
                if label in assignment:
                    t = t.fix(label, int(assignment[label]))
            tensors.append(t)
        open_legs = tuple(l for l in self.open_legs if l not in assignment)
        return TensorNetworkGraph(tuple(tensors), open_legs)

    def astype(self, precision: Precision) -> "TensorNetworkGraph":
        return TensorNetworkGraph(tuple(t.astype(precision) for t in self.tensors), self.open_legs)


def _relabel(t: DenseTensor, labels: Iterable[Label]) -> DenseTensor:
    modes = tuple(Mode(l, m.dim) for l, m in zip(labels, t.modes))
    return DenseTensor(modes, t.data, t.precision)


def validate_bitstring(bitstring: str, n_qubits: int) -> str:
    if not isinstance(bitstring, str) or not _BITSTRING_RE.match(bitstring):
        raise ValueError(f"Bitstring must contain only 0/1 characters, got {bitstring!r}")
    if len(bitstring) != n_qubits:
        raise ValueError(f"Bitstring length {len(bitstring)} does not match {n_qubits} qubits")
    return bitstring


def circuit_to_network(c: Circuit, bitstring: Optional[str] = None,
                       precision: Precision = Precision.C64) -> TensorNetworkGraph:
    """Построить сеть <bitstring|U|0…0> (замкнутую) или сеть вектора состояния (открытые ноги)."""
    if bitstring is not None:
        validate_bitstring(bitstring, c.n_qubits)
    steps = [0] * c.n_qubits
    tensors: List[DenseTensor] = []
    for q in range(c.n_qubits):
        tensors.append(DenseTensor.from_array(_KET0, [wire_label(q, 0)], precision))
    for g in c.gates:
        inputs = [wire_label(q, steps[q]) for q in g.qubits]
        for q in g.qubits:
            steps[q] += 1
        outputs = [wire_label(q, steps[q]) for q in g.qubits]
        tensors.append(_relabel(gate_matrix(g, precision), outputs + inputs))
    final = [wire_label(q, steps[q]) for q in range(c.n_qubits)]
    if bitstring is None:
        network = TensorNetworkGraph(tuple(tensors), tuple(final))
    else:
        for q, bit in enumerate(bitstring):
            tensors.append(DenseTensor.from_array(_KET1 if bit == "1" else _KET0, [final[q]], precision))
        network = TensorNetworkGraph(tuple(tensors), ())
    logging.debug("Network for %d qubits: %d tensors, %d open legs",
                  c.n_qubits, network.n_tensors, len(network.open_legs))
    return network
