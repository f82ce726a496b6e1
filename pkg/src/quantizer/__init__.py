from .scheme import QuantKind, QuantScheme, half_scheme, int8_scheme, int4_scheme, parse_scheme
from .codec import (QuantizedTensor, quantize, dequantize, compression_rate, roundtrip_fidelity,
                    to_bytes, from_bytes)

__all__ = ['QuantKind', 'QuantScheme', 'half_scheme', 'int8_scheme', 'int4_scheme', 'parse_scheme',
           'QuantizedTensor', 'quantize', 'dequantize', 'compression_rate', 'roundtrip_fidelity',
           'to_bytes', 'from_bytes']
