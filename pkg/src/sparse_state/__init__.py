from .batch import SparseBatchSpec, PaddedIndex, gather_contract, build_padded_index, padded_operand, padded_contract
from .chunked import ChunkBudgetError, chunked_execute, chunked_contract, register_sparse_stage

__all__ = ['SparseBatchSpec', 'PaddedIndex', 'gather_contract', 'build_padded_index', 'padded_operand',
           'padded_contract', 'ChunkBudgetError', 'chunked_execute', 'chunked_contract', 'register_sparse_stage']
