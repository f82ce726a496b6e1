"""Описание случайной схемы, JSON-формат и генератор в стиле Sycamore."""
import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from circuit.gates import SINGLE_QUBIT_KINDS, Gate, GateKind

DEFAULT_FSIM_THETA = math.pi / 2
DEFAULT_FSIM_PHI = math.pi / 6
_PATTERN_ORDER = "ABCDCDAB"


class CircuitFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Circuit:
    """Схема: n кубитов, m полных циклов и полуцикл, упорядоченный список гейтов."""
    n_qubits: int
    cycles: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise CircuitFormatError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.cycles < 0:
            raise CircuitFormatError(f"cycles must be >= 0, got {self.cycles}")
        pairs_by_cycle: Dict[int, set] = {}
        for i, g in enumerate(self.gates):
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise CircuitFormatError(f"Gate {i}: qubit {q} out of range for {self.n_qubits} qubits")
            if not 0 <= g.cycle <= self.cycles:
                raise CircuitFormatError(f"Gate {i}: cycle {g.cycle} outside 0..{self.cycles}")
            if g.n_qubits == 2:
                if g.cycle == self.cycles:
                    raise CircuitFormatError(f"Gate {i}: the closing half cycle has single-qubit gates only")
                busy = pairs_by_cycle.setdefault(g.cycle, set())
                if busy & set(g.qubits):
                    raise CircuitFormatError(f"Gate {i}: overlapping two-qubit pairs in cycle {g.cycle}")
                busy.update(g.qubits)


def _gate_to_dict(g: Gate) -> Dict[str, Any]:
    obj: Dict[str, Any] = {"kind": g.kind.value, "qubits": list(g.qubits), "cycle": g.cycle}
    if g.kind is GateKind.FSIM:
        obj["theta"] = float(g.theta)
        obj["phi"] = float(g.phi)
    if g.kind is GateKind.UNITARY:
        flat = np.asarray(g.matrix).reshape(-1)
        obj["matrix"] = [[float(v.real), float(v.imag)] for v in flat]
    return obj


def _gate_from_dict(obj: Dict[str, Any], index: int) -> Gate:
    try:
        kind = GateKind(obj["kind"])
    except (KeyError, ValueError):
        raise CircuitFormatError(f"Gate {index}: unknown gate kind {obj.get('kind')!r}") from None
    try:
        qubits = tuple(int(q) for q in obj["qubits"])
        matrix = None
        if kind is GateKind.UNITARY:
            pairs = np.asarray(obj["matrix"], dtype=np.float64).reshape(-1, 2)
            dim = int(round(math.sqrt(len(pairs))))
            matrix = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
        return Gate(kind, qubits, int(obj.get("cycle", 0)),
                    theta=obj.get("theta"), phi=obj.get("phi"), matrix=matrix)
    except CircuitFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"Gate {index}: {exc}") from None


def circuit_to_dict(c: Circuit) -> Dict[str, Any]:
    return {"n_qubits": c.n_qubits, "cycles": c.cycles, "gates": [_gate_to_dict(g) for g in c.gates]}


def circuit_from_dict(obj: Dict[str, Any]) -> Circuit:
    if not isinstance(obj, dict):
        raise CircuitFormatError("Circuit JSON must be an object")
    try:
        n_qubits = int(obj["n_qubits"])
        cycles = int(obj.get("cycles", 0))
        raw_gates = obj.get("gates", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"Missing or invalid circuit field: {exc}") from None
    gates = [_gate_from_dict(g, i) for i, g in enumerate(raw_gates)]
    return Circuit(n_qubits, cycles, tuple(gates))


def parse_circuit(text: str) -> Circuit:
    """Разобрать схему из JSON-текста."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"Malformed circuit JSON: {exc}") from None
    return circuit_from_dict(obj)


def serialize_circuit(c: Circuit) -> str:
    """Каноническое JSON-представление схемы."""
    return json.dumps(circuit_to_dict(c), ensure_ascii=False, indent=4)


def load_circuit(path: str) -> Circuit:
    with open(path, "r", encoding="utf-8") as f:
        return parse_circuit(f.read())


def _grid_shape(n_qubits: int) -> Tuple[int, int]:
    cols = max(1, int(math.ceil(math.sqrt(n_qubits))))
    rows = int(math.ceil(n_qubits / cols))
    return rows, cols


def coupler_pattern(n_qubits: int, pattern: str) -> List[Tuple[int, int]]:
    """Пары кубитов прямоугольной решётки для шаблона A/B (горизонтальные) или C/D (вертикальные)."""
    rows, cols = _grid_shape(n_qubits)
    pairs = []
    for r in range(rows):
        for col in range(cols):
            q = r * cols + col
            if q >= n_qubits:
                continue
            if pattern in "AB" and col % 2 == "AB".index(pattern) and col + 1 < cols:
                other = q + 1
            elif pattern in "CD" and r % 2 == "CD".index(pattern) and r + 1 < rows:
                other = q + cols
            else:
                continue
            if other < n_qubits:
                pairs.append((q, other))
    return pairs


def random_circuit(n_qubits: int, cycles: int, seed: int = 0, *,
                   theta: float = DEFAULT_FSIM_THETA, phi: float = DEFAULT_FSIM_PHI,
                   patterns: Optional[Sequence[str]] = None) -> Circuit:
    """Случайная схема: m полных циклов (однокубитные гейты, затем fSim на непересекающихся парах) и полуцикл."""
    rng = np.random.default_rng(seed)
    order = list(patterns) if patterns else list(_PATTERN_ORDER)
    previous: List[Optional[GateKind]] = [None] * n_qubits
    gates: List[Gate] = []
    for cycle in range(cycles + 1):
        for q in range(n_qubits):
            choices = [k for k in SINGLE_QUBIT_KINDS if k is not previous[q]]
            kind = choices[int(rng.integers(len(choices)))]
            previous[q] = kind
            gates.append(Gate(kind, (q,), cycle))
        if cycle == cycles:
            break
        for a, b in coupler_pattern(n_qubits, order[cycle % len(order)]):
            gates.append(Gate(GateKind.FSIM, (a, b), cycle, theta=theta, phi=phi))
    logging.debug("Generated circuit: %d qubits, %d cycles, %d gates", n_qubits, cycles, len(gates))
    return Circuit(n_qubits, cycles, tuple(gates))
