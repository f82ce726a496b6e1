"""Схемы квантования и разбор строк вида none|half|int8|int4:<g>."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from config.sim_config import QUANT_TABLE, _QUANT_RE


class QuantKind(str, Enum):
    HALF = "half"
    INT8 = "int8"
    INT4 = "int4"

    @property
    def code_range(self):
        return {QuantKind.INT8: (-128, 127), QuantKind.INT4: (0, 15)}.get(self)


@dataclass(frozen=True)
class QuantScheme:
    kind: QuantKind
    q_min: float
    q_max: float
    exp: float = 1.0
    group: Optional[int] = None
    round: bool = True

    def __post_init__(self):
        kind = QuantKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.q_min >= self.q_max:
            raise ValueError(f"q_min {self.q_min} must be below q_max {self.q_max}")
        if self.exp <= 0:
            raise ValueError(f"exp must be positive, got {self.exp}")
        if self.group is not None and int(self.group) < 1:
            raise ValueError(f"group size must be positive, got {self.group}")
        limits = kind.code_range
        if limits is not None and (self.q_min < limits[0] or self.q_max > limits[1]):
            raise ValueError(f"{kind.value} codes must lie in {limits}, got [{self.q_min}, {self.q_max}]")

    @property
    def name(self) -> str:
        if self.kind is QuantKind.INT4 or self.group is not None:
            return f"{self.kind.value}:{self.group or 'entire'}"
        return self.kind.value


def _preset(kind: QuantKind, group: Optional[int] = None) -> QuantScheme:
    q_min, q_max, exp, default_group, rounding = QUANT_TABLE[kind.value]
    return QuantScheme(kind, q_min, q_max, exp, group if group is not None else default_group, rounding)


def half_scheme() -> QuantScheme:
    return _preset(QuantKind.HALF)


def int8_scheme() -> QuantScheme:
    return _preset(QuantKind.INT8)


def int4_scheme(group: int = 128) -> QuantScheme:
    return _preset(QuantKind.INT4, group)


def parse_scheme(text: Optional[str]) -> Optional[QuantScheme]:
    """'none' -> None; 'half', 'int8', 'int4' (группа 128) или 'int4:<g>'."""
    if text is None:
        return None
    value = text.strip().lower()
    if value in ("", "none"):
        return None
    if value == QuantKind.HALF.value:
        return half_scheme()
    if value == QuantKind.INT8.value:
        return int8_scheme()
    if value == QuantKind.INT4.value:
        return int4_scheme()
    match = _QUANT_RE.match(value)
    if match:
        return int4_scheme(int(match.group(1)))
    raise ValueError(f"Unknown quantization scheme {text!r}; expected none|half|int8|int4:<g>")
