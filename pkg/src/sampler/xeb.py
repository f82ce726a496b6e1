import numpy as np

from sampler.amplitudes import probabilities


def linear_xeb(probs, n_qubits: int) -> float:
    """Линейный XEB: 2^n · <p> − 1."""
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if probs.size == 0:
        raise ValueError("Linear XEB needs at least one sampled bitstring")
    return float(2.0 ** n_qubits * probs.mean() - 1.0)


def sampled_xeb(circuit, bitstrings, plan=None, **kwargs) -> float:
    return linear_xeb(probabilities(circuit, bitstrings, plan, **kwargs), circuit.n_qubits)
