"""Эталонная симуляция вектора состояния для проверки свёрток."""
import logging

import numpy as np

from circuit.circuit import Circuit
from config.sim_config import ORACLE_MAX_QUBITS


class OracleSizeError(ValueError):
    pass


def _apply_single(state: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    state = np.tensordot(matrix, state, axes=([1], [qubit]))
    return np.moveaxis(state, 0, qubit)


def _apply_two(state: np.ndarray, matrix: np.ndarray, q0: int, q1: int) -> np.ndarray:
    m = matrix.reshape(2, 2, 2, 2)
    state = np.tensordot(m, state, axes=([2, 3], [q0, q1]))
    return np.moveaxis(state, [0, 1], [q0, q1])


def statevector_oracle(c: Circuit) -> np.ndarray:
    """Вектор амплитуд длины 2^n, кубит 0 соответствует старшему биту индекса."""
    if c.n_qubits > ORACLE_MAX_QUBITS:
        raise OracleSizeError(f"State-vector oracle is limited to {ORACLE_MAX_QUBITS} qubits, got {c.n_qubits}")
    state = np.zeros((2,) * c.n_qubits, dtype=np.complex128)
    state[(0,) * c.n_qubits] = 1.0
    for g in c.gates:
        m = g.unitary()
        if g.n_qubits == 1:
            state = _apply_single(state, m, g.qubits[0])
        else:
            state = _apply_two(state, m, g.qubits[0], g.qubits[1])
    logging.debug("Oracle applied %d gates on %d qubits", len(c.gates), c.n_qubits)
    return np.ascontiguousarray(state).reshape(-1)


def oracle_amplitude(state: np.ndarray, bitstring: str) -> complex:
    return complex(state[int(bitstring, 2)]) if bitstring else complex(state[0])
