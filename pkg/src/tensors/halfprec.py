"""Эмуляция complex-half: округление до binary16 с насыщением."""
from typing import Union

import numpy as np

from config.sim_config import HALF_MAX

ArrayLike = Union[float, np.ndarray]


def round_to_half(x: ArrayLike) -> ArrayLike:
    """Округлить до ближайшего binary16 (ties to even), переполнение насыщается до ±65504."""
    arr = np.clip(np.asarray(x, dtype=np.float64), -HALF_MAX, HALF_MAX)
    out = arr.astype(np.float16).astype(np.float64)
    if np.ndim(x) == 0:
        return float(out)
    return out


def round_complex_to_half(z: np.ndarray) -> np.ndarray:
    """Округлить действительную и мнимую части комплексного массива независимо."""
    z = np.asarray(z)
    re = round_to_half(np.real(z))
    im = round_to_half(np.imag(z))
    return (np.asarray(re) + 1j * np.asarray(im)).astype(np.complex64)
