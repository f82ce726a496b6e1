from .topology import ClusterSpec, load_cluster
from .costmodel import model_all2all_time, model_energy
from .memory import BufferPool, BufferHandle, CapacityError
from .distributed import (DistTensor, MessageRouter, PartitionExhaustedError, swap_partition, gather_to_devices,
                          INTER, INTRA)
from .executor import DeviceExecutor
from .hybrid import RunReport, hybrid_execute
from .recompute import RecomputeError, check_recompute_precondition, choose_halving_label, recompute_execute

__all__ = ['ClusterSpec', 'load_cluster', 'model_all2all_time', 'model_energy', 'BufferPool', 'BufferHandle',
           'CapacityError', 'DistTensor', 'MessageRouter', 'PartitionExhaustedError', 'swap_partition',
           'gather_to_devices', 'INTER', 'INTRA', 'DeviceExecutor', 'RunReport', 'hybrid_execute',
           'RecomputeError', 'check_recompute_precondition', 'choose_halving_label', 'recompute_execute']
