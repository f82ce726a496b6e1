"""Распределённый тензор ствола и обмены all-to-all между узлами и устройствами."""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from quantizer import QuantScheme, dequantize, from_bytes, quantize, to_bytes
from tensors import DenseTensor, Mode, Precision, permute
from tensors.tensor import Label
from utils.utils import int_to_bits

Device = Tuple[int, int]
INTER = "inter"
INTRA = "intra"


class PartitionExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DistTensor:
    """Тензор ствола, разрезанный по узлам (первые N_inter мод) и устройствам (следующие N_intra)."""
    inter_labels: Tuple[Label, ...]
    intra_labels: Tuple[Label, ...]
    local_modes: Tuple[Mode, ...]
    shards: Mapping[Device, DenseTensor]
    precision: Precision = Precision.C64

    @property
    def n_inter(self) -> int:
        return len(self.inter_labels)

    @property
    def n_intra(self) -> int:
        return len(self.intra_labels)

    @property
    def devices(self) -> List[Device]:
        return [(p, d) for p in range(2 ** self.n_inter) for d in range(2 ** self.n_intra)]

    @property
    def local_labels(self) -> Tuple[Label, ...]:
        return tuple(m.label for m in self.local_modes)

    @property
    def partition_labels(self) -> Tuple[Label, ...]:
        return self.inter_labels + self.intra_labels

    @property
    def labels(self) -> Tuple[Label, ...]:
        return self.partition_labels + self.local_labels

    def size_dict(self) -> Dict[Label, int]:
        return {**{l: 2 for l in self.partition_labels}, **{m.label: m.dim for m in self.local_modes}}

    @property
    def shard_nbytes(self) -> int:
        return self.shards[(0, 0)].nbytes

    @property
    def nbytes(self) -> int:
        return sum(s.nbytes for s in self.shards.values())

    @classmethod
    def scatter(cls, t: DenseTensor, inter_labels: Iterable[Label], intra_labels: Iterable[Label]) -> "DistTensor":
        """Каждое устройство оставляет свою часть реплицированного тензора."""
        inter_labels, intra_labels = tuple(inter_labels), tuple(intra_labels)
        partition = inter_labels + intra_labels
        dims = t.size_dict()
        for label in partition:
            if dims.get(label) != 2:
                raise ValueError(f"Partition mode {label!r} must be a dim-2 mode of the tensor")
        rest = tuple(l for l in t.labels if l not in partition)
        t = permute(t, partition + rest)
        local_modes = t.modes[len(partition):]
        n_nodes, n_devices = 2 ** len(inter_labels), 2 ** len(intra_labels)
        blocks = t.data.reshape((n_nodes, n_devices) + tuple(m.dim for m in local_modes))
        shards = {(p, d): DenseTensor(local_modes, blocks[p, d], t.precision)
                  for p in range(n_nodes) for d in range(n_devices)}
        return cls(inter_labels, intra_labels, local_modes, shards, t.precision)

    def gather(self) -> DenseTensor:
        """Собрать глобальный тензор в порядке разбиения: узел, устройство, локальные моды."""
        local_shape = tuple(m.dim for m in self.local_modes)
        data = np.stack([self.shards[dev].data for dev in self.devices], axis=0)
        data = data.reshape((2,) * (self.n_inter + self.n_intra) + local_shape)
        modes = tuple(Mode(l, 2) for l in self.partition_labels) + self.local_modes
        return DenseTensor(modes, data, self.precision)


class MessageRouter:
    """Доставка сообщений между устройствами в фиксированном порядке (src, dst) с учётом байт.

    Межузловые сообщения квантуются схемой `inter_quant`, внутриузловые
    схемой `intra_quant`; сообщение внутри одного устройства ничего не стоит.
    """

    def __init__(self, inter_quant: Optional[QuantScheme] = None, intra_quant: Optional[QuantScheme] = None):
        self.schemes = {INTER: inter_quant, INTRA: intra_quant}
        self.quant_wire = {INTER: 0, INTRA: 0}
        self.quant_raw = {INTER: 0, INTRA: 0}
        self._reset_step()

    def _reset_step(self) -> None:
        self._sent: Dict[str, Dict] = {INTER: defaultdict(int), INTRA: defaultdict(int)}
        self._kernel_bytes = 0

    def deliver(self, src: Device, dst: Device, t: DenseTensor, lossless: bool = False) -> DenseTensor:
        if src == dst:
            return t
        level = INTER if src[0] != dst[0] else INTRA
        participant = src[0] if level == INTER else src
        scheme = None if lossless else self.schemes[level]
        if scheme is None:
            self._sent[level][participant] += t.nbytes
            return t
        q = quantize(t, scheme)
        received = dequantize(from_bytes(to_bytes(q), t.labels))
        raw = 4 * q.n_real
        self._sent[level][participant] += q.nbytes
        self.quant_wire[level] += q.nbytes
        self.quant_raw[level] += raw
        self._kernel_bytes += raw
        return received.astype(t.precision) if received.precision is not t.precision else received

    def drain(self) -> Dict[str, float]:
        """Итог шага: байты на проводе по уровням, максимум на участника и объём квантования."""
        out = {}
        for level in (INTER, INTRA):
            sent = self._sent[level]
            out[f"bytes_{level}"] = float(sum(sent.values()))
            out[f"max_{level}"] = float(max(sent.values(), default=0))
        out["kernel_bytes"] = float(self._kernel_bytes)
        self._reset_step()
        return out

    def compression_rate(self, level: str = INTER) -> Optional[float]:
        if not self.quant_raw[level]:
            return None
        return 100.0 * self.quant_wire[level] / self.quant_raw[level]


def swap_partition(dt: DistTensor, level: str, contracted: Iterable[Label], router: MessageRouter) -> DistTensor:
    """All-to-all: первые моды раздела уровня меняются местами со следующими свободными локальными модами."""
    old = dt.inter_labels if level == INTER else dt.intra_labels
    k = len(old)
    contracted = set(contracted)
    candidates = [m.label for m in dt.local_modes if m.dim == 2 and m.label not in contracted]
    if len(candidates) < k:
        raise PartitionExhaustedError(
            f"No free modes left to swap in at the {level} level: need {k}, have {len(candidates)}")
    new = tuple(candidates[:k])
    rest = tuple(l for l in dt.local_labels if l not in new)
    received: Dict[Device, List[Optional[DenseTensor]]] = {dev: [None] * 2 ** k for dev in dt.devices}
    for src in dt.devices:
        shard = permute(dt.shards[src], new + rest)
        for q in range(2 ** k):
            dst = (q, src[1]) if level == INTER else (src[0], q)
            piece = DenseTensor(shard.modes[k:], shard.data[int_to_bits(q, k)], shard.precision)
            received[dst][src[0] if level == INTER else src[1]] = router.deliver(src, dst, piece)

    rest_modes = tuple(m for m in dt.local_modes if m.label not in new)
    local_modes = tuple(Mode(l, 2) for l in old) + rest_modes
    shards = {}
    for dev, pieces in received.items():
        data = np.stack([permute(p, rest).data for p in pieces], axis=0)
        shards[dev] = DenseTensor(local_modes, data.reshape(tuple(m.dim for m in local_modes)), dt.precision)
    logging.debug("All-to-all (%s): %s <-> %s", level, list(old), list(new))
    if level == INTER:
        return DistTensor(new, dt.intra_labels, local_modes, shards, dt.precision)
    return DistTensor(dt.inter_labels, new, local_modes, shards, dt.precision)


def gather_to_devices(dt: DistTensor, router: MessageRouter) -> DenseTensor:
    """Каждое устройство получает все осколки (без квантования), тензор снова реплицирован."""
    for src in dt.devices:
        for dst in dt.devices:
            router.deliver(src, dst, dt.shards[src], lossless=True)
    return dt.gather()
