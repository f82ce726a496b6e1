from .tree import ContractionTree, left_deep_tree
from .cost import CostModel, cost
from .slicing import SlicePlan, InfeasiblePlanError, slice_network, choose_slices
from .search import greedy_tree, anneal_search
from .contract import contract_tree, contract_subtree
from .stem import StepType, StemAnnotation, ShardOverflowError, find_stem, assign_parallel_modes
from .plan import ContractionPlan, build_plan

__all__ = ['ContractionTree', 'left_deep_tree', 'CostModel', 'cost', 'SlicePlan', 'InfeasiblePlanError',
           'slice_network', 'choose_slices', 'greedy_tree', 'anneal_search', 'contract_tree',
           'contract_subtree', 'StepType', 'StemAnnotation', 'ShardOverflowError', 'find_stem',
           'assign_parallel_modes', 'ContractionPlan', 'build_plan']
