"""Утилиты: JSON-файлы, хеш тензора, двоичные индексы."""
import hashlib
import json
import os
from typing import Any, Tuple

import numpy as np


def save_json(obj: Any, path: str) -> str:
    """
    Сохранить объект в JSON (UTF-8, отступ 4).

    Args:
        obj: Сериализуемый объект.
        path: Путь к файлу; недостающие директории создаются.

    Returns:
        Путь к сохранённому файлу.
    """
    out_dir = os.path.dirname(path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=4)
    return path


def load_json(path: str) -> Any:
    if not os.path.exists(path):
        raise ValueError(f"File not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"Invalid JSON in {path}: {exc}") from None


def hash_tensor(t) -> str:
    """SHA-256 по модам, точности и байтам данных тензора."""
    h = hashlib.sha256()
    h.update(repr([(m.label, m.dim) for m in t.modes]).encode("utf-8"))
    h.update(t.precision.value.encode("utf-8"))
    h.update(np.ascontiguousarray(t.data).tobytes())
    return h.hexdigest()


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def int_to_bits(value: int, width: int) -> Tuple[int, ...]:
    """Биты числа, старший первым."""
    if not 0 <= value < 2 ** width:
        raise ValueError(f"Value {value} does not fit {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))
