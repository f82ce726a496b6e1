from .gates import Gate, GateKind, gate_matrix, fsim_matrix
from .circuit import (Circuit, CircuitFormatError, parse_circuit, serialize_circuit, load_circuit,
                      random_circuit)
from .network import TensorNetworkGraph, circuit_to_network
from .statevector import OracleSizeError, statevector_oracle

__all__ = ['Gate', 'GateKind', 'gate_matrix', 'fsim_matrix', 'Circuit', 'CircuitFormatError',
           'parse_circuit', 'serialize_circuit', 'load_circuit', 'random_circuit',
           'TensorNetworkGraph', 'circuit_to_network', 'OracleSizeError', 'statevector_oracle']
