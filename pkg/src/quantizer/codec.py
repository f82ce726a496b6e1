"""Групповое квантование тензоров для передачи: кодирование, декодирование, CR и формат провода."""
import math
import struct
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from quantizer.scheme import QuantKind, QuantScheme
from tensors import DenseTensor, Mode, Precision, fidelity, round_to_half
from tensors.tensor import Label

_KIND_CODES = {QuantKind.HALF: 0, QuantKind.INT8: 1, QuantKind.INT4: 2}
_HEADER = struct.Struct("<BBfffIB")
_FLAG_COMPLEX = 1
_FLAG_ROUND = 2
_FLAG_CHALF = 4


@dataclass(frozen=True, eq=False)
class QuantizedTensor:
    scheme: QuantScheme
    shape: Tuple[int, ...]
    is_complex: bool
    scales: np.ndarray
    zeros: np.ndarray
    payload: bytes
    labels: Tuple[Label, ...] = ()
    precision: Precision = Precision.C64

    @property
    def n_real(self) -> int:
        return math.prod(self.shape) * (2 if self.is_complex else 1)

    @property
    def group_size(self) -> int:
        return self.scheme.group or max(self.n_real, 1)

    @property
    def n_groups(self) -> int:
        return int(math.ceil(self.n_real / self.group_size)) if self.n_real else 0

    @property
    def nbytes(self) -> int:
        """Байты на проводе по формуле CR: scales и zeros по 4 байта."""
        return 4 * len(self.scales) + 4 * len(self.zeros) + len(self.payload)


def _expected_payload(kind: QuantKind, n_real: int) -> int:
    if kind is QuantKind.HALF:
        return 2 * n_real
    if kind is QuantKind.INT8:
        return n_real
    return (n_real + 1) // 2


def _flatten(t: DenseTensor) -> np.ndarray:
    data = t.data.reshape(-1)
    if t.is_real:
        return data.astype(np.float64)
    return np.stack([np.real(data), np.imag(data)], axis=-1).reshape(-1).astype(np.float64)


def _signed_power(x: np.ndarray, exp: float) -> np.ndarray:
    return np.sign(x) * np.abs(x) ** exp


def _pack_int4(codes: np.ndarray, pad: float) -> bytes:
    codes = codes.astype(np.uint8)
    if codes.size % 2:
        codes = np.append(codes, np.uint8(pad))
    return (codes[0::2] | (codes[1::2] << 4)).astype(np.uint8).tobytes()


def _unpack_int4(payload: bytes, n: int) -> np.ndarray:
    raw = np.frombuffer(payload, dtype=np.uint8)
    codes = np.empty(raw.size * 2, dtype=np.uint8)
    codes[0::2] = raw & 0x0F
    codes[1::2] = raw >> 4
    return codes[:n]


def quantize(t: DenseTensor, s: QuantScheme) -> QuantizedTensor:
    """Уравнение квантования по группам: x' = sign(x)|x|^exp, code = x'·scale + zero."""
    x = _flatten(t)
    if not np.all(np.isfinite(x)):
        raise ValueError("Cannot quantize a tensor with NaN or Inf values")
    common = dict(scheme=s, shape=t.shape, is_complex=not t.is_real, labels=t.labels, precision=t.precision)
    if s.kind is QuantKind.HALF:
        codes = np.asarray(round_to_half(x), dtype=np.float64).astype("<f2")
        return QuantizedTensor(scales=np.ones(1, dtype=np.float32), zeros=np.zeros(1, dtype=np.float32),
                               payload=codes.tobytes(), **common)

    n = x.size
    g = s.group or max(n, 1)
    starts = np.arange(0, n, g)
    xp = _signed_power(x, s.exp)
    mx = np.maximum.reduceat(xp, starts)
    mn = np.minimum.reduceat(xp, starts)
    span = mx - mn
    safe = np.where(span == 0, 1.0, span)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        scale = ((s.q_max - s.q_min) / safe).astype(np.float32)
        zero = ((s.q_min * mx - s.q_max * mn) / safe).astype(np.float32)
    # размах вне диапазона float32 хранится как константная группа
    degenerate = (span == 0) | ~np.isfinite(scale) | ~np.isfinite(zero)
    constant = np.minimum.reduceat(x, starts)
    scale = np.where(degenerate, 0.0, scale).astype(np.float32)
    zero = np.where(degenerate, constant, zero).astype(np.float32)

    group_of = np.arange(n) // g
    sc = scale.astype(np.float64)[group_of]
    zr = zero.astype(np.float64)[group_of]
    codes = xp * sc + zr
    if s.round:
        codes = np.rint(codes)
    codes = np.clip(codes, s.q_min, s.q_max)
    codes = np.where(degenerate[group_of], s.q_min, codes)

    if s.kind is QuantKind.INT8:
        payload = codes.astype(np.int8).tobytes()
    else:
        payload = _pack_int4(codes, s.q_min)
    return QuantizedTensor(scales=scale, zeros=zero, payload=payload, **common)


def _codes(q: QuantizedTensor) -> np.ndarray:
    n = q.n_real
    if len(q.payload) != _expected_payload(q.scheme.kind, n):
        raise ValueError(f"Corrupt payload: {len(q.payload)} bytes for {n} values of {q.scheme.kind.value}")
    if q.scheme.kind is QuantKind.HALF:
        return np.frombuffer(q.payload, dtype="<f2").astype(np.float64)
    if q.scheme.kind is QuantKind.INT8:
        return np.frombuffer(q.payload, dtype=np.int8).astype(np.float64)
    return _unpack_int4(q.payload, n).astype(np.float64)


def dequantize(q: QuantizedTensor) -> DenseTensor:
    """Обратное отображение: y' = (code - zero)/scale, y = sign(y')|y'|^(1/exp)."""
    codes = _codes(q)
    if q.scheme.kind is QuantKind.HALF:
        values = codes
    else:
        if len(q.scales) != q.n_groups or len(q.zeros) != q.n_groups:
            raise ValueError(f"Corrupt payload: expected {q.n_groups} scales/zeros")
        group_of = np.arange(codes.size) // q.group_size
        scale = q.scales.astype(np.float64)[group_of]
        zero = q.zeros.astype(np.float64)[group_of]
        degenerate = scale == 0
        yp = (codes - zero) / np.where(degenerate, 1.0, scale)
        values = np.where(degenerate, zero, _signed_power(yp, 1.0 / q.scheme.exp))
    if q.is_complex:
        pairs = values.reshape(-1, 2)
        values = pairs[:, 0] + 1j * pairs[:, 1]
    labels = q.labels or tuple(f"m{i}" for i in range(len(q.shape)))
    modes = tuple(Mode(l, d) for l, d in zip(labels, q.shape))
    return DenseTensor(modes, values.reshape(q.shape), q.precision)


def compression_rate(q: QuantizedTensor) -> float:
    """CR(%) = (bytes(scales) + bytes(zeros) + bytes(payload)) / bytes(float32 оригинала) × 100."""
    return 100.0 * q.nbytes / (4.0 * q.n_real)


def roundtrip_fidelity(t: DenseTensor, s: QuantScheme) -> float:
    return fidelity(t, dequantize(quantize(t, s)))


def to_bytes(q: QuantizedTensor) -> bytes:
    """Формат провода (little-endian): заголовок, scales, zeros, payload."""
    flags = (_FLAG_COMPLEX if q.is_complex else 0) | (_FLAG_ROUND if q.scheme.round else 0) \
        | (_FLAG_CHALF if q.precision is Precision.CHALF else 0)
    header = _HEADER.pack(_KIND_CODES[q.scheme.kind], flags, q.scheme.exp, q.scheme.q_min, q.scheme.q_max,
                          q.scheme.group or 0, len(q.shape))
    dims = struct.pack(f"<{len(q.shape)}I", *q.shape)
    return header + dims + q.scales.astype("<f4").tobytes() + q.zeros.astype("<f4").tobytes() + q.payload


def from_bytes(buf: bytes, labels: Optional[Sequence[Label]] = None) -> QuantizedTensor:
    if len(buf) < _HEADER.size:
        raise ValueError("Corrupt payload: truncated header")
    kind_code, flags, exp, q_min, q_max, group, ndim = _HEADER.unpack_from(buf, 0)
    kinds = {v: k for k, v in _KIND_CODES.items()}
    if kind_code not in kinds:
        raise ValueError(f"Corrupt payload: unknown kind code {kind_code}")
    offset = _HEADER.size
    shape = struct.unpack_from(f"<{ndim}I", buf, offset)
    offset += 4 * ndim
    scheme = QuantScheme(kinds[kind_code], q_min, q_max, exp, group or None, bool(flags & _FLAG_ROUND))
    n_real = math.prod(shape) * (2 if flags & _FLAG_COMPLEX else 1)
    g = group or max(n_real, 1)
    n_groups = int(math.ceil(n_real / g)) if n_real else 0
    n_groups = 1 if scheme.kind is QuantKind.HALF else n_groups
    scales = np.frombuffer(buf, dtype="<f4", count=n_groups, offset=offset).astype(np.float32)
    offset += 4 * n_groups
    zeros = np.frombuffer(buf, dtype="<f4", count=n_groups, offset=offset).astype(np.float32)
    offset += 4 * n_groups
    return QuantizedTensor(scheme, tuple(shape), bool(flags & _FLAG_COMPLEX), scales, zeros, bytes(buf[offset:]),
                           tuple(labels) if labels else (), Precision.CHALF if flags & _FLAG_CHALF else Precision.C64)
