"""Матрицы гейтов случайных схем: √X, √Y, √W, fSim и произвольный unitary."""
import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from tensors import DenseTensor, Precision

UNITARY_TOL = 1e-6


class GateKind(str, Enum):
    SQRT_X = "sqrt_x"
    SQRT_Y = "sqrt_y"
    SQRT_W = "sqrt_w"
    FSIM = "fsim"
    UNITARY = "unitary"


SINGLE_QUBIT_KINDS = (GateKind.SQRT_X, GateKind.SQRT_Y, GateKind.SQRT_W)

_S = 1.0 / math.sqrt(2.0)
_FIXED = {
    GateKind.SQRT_X: _S * np.array([[1, -1j], [-1j, 1]], dtype=np.complex128),
    GateKind.SQRT_Y: _S * np.array([[1, -1], [1, 1]], dtype=np.complex128),
    GateKind.SQRT_W: _S * np.array([[1, -cmath.exp(1j * math.pi / 4)],
                                    [cmath.exp(-1j * math.pi / 4), 1]], dtype=np.complex128),
}


def fsim_matrix(theta: float, phi: float) -> np.ndarray:
    """Матрица fSim(θ, φ) в базисе |q0 q1>, q0 является старшим битом."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [1, 0, 0, 0],
        [0, c, -1j * s, 0],
        [0, -1j * s, c, 0],
        [0, 0, 0, cmath.exp(-1j * phi)],
    ], dtype=np.complex128)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: Tuple[int, ...]
    cycle: int = 0
    theta: Optional[float] = None
    phi: Optional[float] = None
    matrix: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        kind = GateKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"Gate {kind.value} acts on repeated qubits {qubits}")
        if kind in SINGLE_QUBIT_KINDS and len(qubits) != 1:
            raise ValueError(f"Gate {kind.value} needs exactly 1 qubit, got {qubits}")
        if kind is GateKind.FSIM:
            if len(qubits) != 2:
                raise ValueError(f"fsim needs exactly 2 distinct qubits, got {qubits}")
            if self.theta is None or self.phi is None:
                raise ValueError("fsim needs theta and phi")
        if kind is GateKind.UNITARY:
            if len(qubits) not in (1, 2):
                raise ValueError(f"unitary acts on 1 or 2 qubits, got {qubits}")
            if self.matrix is None:
                raise ValueError("unitary gate needs a matrix")
            m = np.asarray(self.matrix, dtype=np.complex128)
            dim = 2 ** len(qubits)
            if m.shape != (dim, dim):
                raise ValueError(f"unitary on {len(qubits)} qubit(s) must be {dim}x{dim}, got {m.shape}")
            if not np.allclose(m @ m.conj().T, np.eye(dim), atol=UNITARY_TOL):
                raise ValueError("matrix is not unitary within 1e-6")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def unitary(self) -> np.ndarray:
        """Матрица гейта в complex128 (2×2 или 4×4)."""
        if self.kind in _FIXED:
            return _FIXED[self.kind].copy()
        if self.kind is GateKind.FSIM:
            return fsim_matrix(self.theta, self.phi)
        return np.array(self.matrix, dtype=np.complex128)


def gate_matrix(g: Gate, precision: Precision = Precision.C64) -> DenseTensor:
    """Тензор гейта: ранг 2 (out, in) или ранг 4 (out0, out1, in0, in1)."""
    m = g.unitary()
    if g.n_qubits == 1:
        return DenseTensor.from_array(m, ["o0", "i0"], precision)
    return DenseTensor.from_array(m.reshape(2, 2, 2, 2), ["o0", "o1", "i0", "i1"], precision)
