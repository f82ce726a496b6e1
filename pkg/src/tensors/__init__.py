from .tensor import DenseTensor, Mode, Precision, permute
from .halfprec import round_to_half
from .einsum import (EinsumSpec, einsum_pair, pad_b_real_imag, einsum_complex_as_real,
                     contract, fidelity)

__all__ = ['DenseTensor', 'Mode', 'Precision', 'permute', 'round_to_half', 'EinsumSpec',
           'einsum_pair', 'pad_b_real_imag', 'einsum_complex_as_real', 'contract', 'fidelity']
