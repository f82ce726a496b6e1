"""Статическое управление памятью устройства: два буфера ствола, чанки split и арена для common."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from planner.stem import StepType


class CapacityError(MemoryError):
    pass


@dataclass
class BufferHandle:
    kind: StepType
    size: int
    buffer: Optional[int] = None
    offset: int = 0
    chunk: Optional["_Chunk"] = None


@dataclass
class _Chunk:
    buffer: int
    offset: int
    size: int
    in_use: bool = False

    @property
    def end(self) -> int:
        return self.offset + self.size


class BufferPool:
    """Пул одного устройства.

    Буферы ствола создаются лениво, не больше двух; выход шага ствола пишется
    в буфер `stem_out`, после шага буферы меняются ролями. Split-чанки
    вырезаются из свободных хвостов буферов и не освобождаются между
    подзадачами, а только помечаются свободными.
    """

    def __init__(self, capacity: float, arena_capacity: Optional[float] = None):
        if capacity <= 0:
            raise ValueError(f"Buffer capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.arena_capacity = None if arena_capacity is None else int(arena_capacity)
        self._used: List[int] = []
        self._chunks: List[_Chunk] = []
        self._arena_live = 0
        self.stem_out = 0
        self.trace: List[Dict[str, Any]] = []
        self.peak_bytes = 0
        self.stem_peak_bytes = 0
        self.stem_outputs: List[int] = []

    @property
    def stem_buffer_count(self) -> int:
        return len(self._used)

    @property
    def live_bytes(self) -> int:
        return sum(self._used) + self._arena_live + sum(c.size for c in self._chunks if c.in_use)

    @property
    def arena_live(self) -> int:
        return self._arena_live

    @property
    def chunk_table(self) -> List[Dict[str, int]]:
        return [{"buffer": c.buffer, "offset": c.offset, "size": c.size, "in_use": c.in_use} for c in self._chunks]

    def _record(self, op: str, kind: Optional[StepType], size: int, buffer: Optional[int] = None,
                offset: int = 0) -> None:
        self.peak_bytes = max(self.peak_bytes, self.live_bytes)
        self.stem_peak_bytes = max(self.stem_peak_bytes, sum(self._used))
        self.trace.append({
            "op": op,
            "type": kind.value if kind is not None else None,
            "buffer": buffer,
            "offset": offset,
            "size": size,
            "live": self.live_bytes,
        })

    def _free_start(self, buffer: int) -> int:
        ends = [c.end for c in self._chunks if c.buffer == buffer]
        return max([self._used[buffer]] + ends)

    def largest_free_fragment(self) -> int:
        """Наибольший непрерывный участок, доступный split-аллокации."""
        best = max([c.size for c in self._chunks if not c.in_use], default=0)
        for b in range(len(self._used)):
            best = max(best, self.capacity - self._free_start(b))
        return best

    def alloc(self, step_type: StepType, size: int) -> BufferHandle:
        kind = StepType(step_type)
        size = int(size)
        if kind is StepType.STEM:
            return self._alloc_stem(size)
        if kind is StepType.SPLIT:
            return self._alloc_split(size)
        if self.arena_capacity is not None and self._arena_live + size > self.arena_capacity:
            raise CapacityError(f"Arena overflow: {self._arena_live + size} B > {self.arena_capacity} B")
        self._arena_live += size
        self._record("alloc", kind, size)
        return BufferHandle(kind, size)

    def _alloc_stem(self, size: int) -> BufferHandle:
        if size > self.capacity:
            raise CapacityError(f"Stem tensor of {size} B exceeds buffer capacity {self.capacity} B")
        out = self.stem_out
        while len(self._used) <= out:
            self._used.append(0)
            logging.debug("Created stem buffer %d (%d B)", len(self._used) - 1, self.capacity)
        if any(c.in_use and c.buffer == out and c.offset < size for c in self._chunks):
            raise CapacityError(f"Stem output of {size} B would overwrite a live split chunk")
        self._chunks = [c for c in self._chunks if not (c.buffer == out and c.offset < size)]
        self._used[out] = size
        self.stem_outputs.append(out)
        self._record("alloc", StepType.STEM, size, out)
        return BufferHandle(StepType.STEM, size, out)

    def _alloc_split(self, size: int) -> BufferHandle:
        for c in self._chunks:
            if not c.in_use and c.size >= size:
                c.in_use = True
                self._record("alloc", StepType.SPLIT, size, c.buffer, c.offset)
                return BufferHandle(StepType.SPLIT, size, c.buffer, c.offset, c)
        for b in range(len(self._used)):
            start = self._free_start(b)
            if self.capacity - start >= size:
                chunk = _Chunk(b, start, size, True)
                self._chunks.append(chunk)
                self._record("alloc", StepType.SPLIT, size, b, start)
                return BufferHandle(StepType.SPLIT, size, b, start, chunk)
        raise CapacityError(f"No buffer fragment holds {size} B (largest {self.largest_free_fragment()} B)")

    def free(self, handle: BufferHandle) -> None:
        if handle.kind is StepType.SPLIT:
            handle.chunk.in_use = False
        elif handle.kind is StepType.COMMON:
            self._arena_live -= handle.size
        else:
            self._used[handle.buffer] = 0
        self._record("free", handle.kind, handle.size, handle.buffer, handle.offset)

    def swap_stem_buffers(self) -> int:
        """Выход шага становится входом следующего; прежний вход освобождается под новый выход."""
        self.stem_out = 1 - self.stem_out
        if self.stem_out < len(self._used):
            self._used[self.stem_out] = 0
        self._record("swap", None, 0, self.stem_out)
        return self.stem_out

    def release_stem(self) -> None:
        """Конец подзадачи: данные ствола мертвы, буферы и фрагменты остаются."""
        for b in range(len(self._used)):
            self._used[b] = 0
        self.stem_out = 0
        self._record("release", StepType.STEM, 0)

    def split_chunks_inside_buffers(self) -> bool:
        return all(0 <= c.offset and c.end <= self.capacity and c.buffer < len(self._used) for c in self._chunks)
