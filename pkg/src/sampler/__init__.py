from .amplitudes import amplitudes, probabilities
from .xeb import linear_xeb, sampled_xeb
from .postselect import (CorrelatedSubspace, PostSelectSpec, subspace_members, make_subspace, post_select,
                         expected_uplift, simulate_post_selection)

__all__ = ['amplitudes', 'probabilities', 'linear_xeb', 'sampled_xeb', 'CorrelatedSubspace', 'PostSelectSpec',
           'subspace_members', 'make_subspace', 'post_select', 'expected_uplift', 'simulate_post_selection']
