"""Постселекция: из каждого коррелированного подпространства берутся k самых вероятных строк."""
import itertools
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from config.sim_config import POST_SELECT_BATCH
from sampler.amplitudes import probabilities


@dataclass(frozen=True, eq=False)
class CorrelatedSubspace:
    """Строки с общими битами в заданных позициях и их вероятности."""
    shared_bits: Mapping[int, int]
    members: Tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        members = tuple(self.members)
        probs = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)
        if probs.size != len(members):
            raise ValueError(f"{len(members)} members but {probs.size} probabilities")
        if np.any(probs < 0):
            raise ValueError("Probabilities must be non-negative")
        for s in members:
            for pos, bit in self.shared_bits.items():
                if not 0 <= pos < len(s) or s[pos] != str(bit):
                    raise ValueError(f"Member {s!r} disagrees with shared bit {pos}={bit}")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "probabilities", probs)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class PostSelectSpec:
    k: int = 1
    n_candidates: int = 1024

    def __post_init__(self):
        if not 1 <= self.k <= self.n_candidates:
            raise ValueError(f"Need 1 <= k <= N, got k={self.k}, N={self.n_candidates}")


def subspace_members(n_qubits: int, shared_bits: Mapping[int, int]) -> List[str]:
    """Все строки длины n с заданными битами, в лексикографическом порядке."""
    free = [q for q in range(n_qubits) if q not in shared_bits]
    members = []
    for values in itertools.product("01", repeat=len(free)):
        bits = dict(zip(free, values))
        members.append("".join(str(shared_bits[q]) if q in shared_bits else bits[q] for q in range(n_qubits)))
    return members


def make_subspace(circuit, shared_bits: Mapping[int, int], plan=None, **kwargs) -> CorrelatedSubspace:
    """Подпространство со всеми строками, разделяющими биты; вероятности считаются одной свёрткой."""
    members = subspace_members(circuit.n_qubits, shared_bits)
    return CorrelatedSubspace(dict(shared_bits), tuple(members), probabilities(circuit, members, plan, **kwargs))


def post_select(subspaces: Iterable[CorrelatedSubspace], spec: PostSelectSpec) -> List[str]:
    """Top-k по вероятности в каждом подпространстве; при равенстве выигрывает меньшая строка."""
    selected: List[str] = []
    for i, sub in enumerate(subspaces):
        if len(sub) < spec.k:
            raise ValueError(f"Subspace {i} has {len(sub)} members, fewer than k={spec.k}")
        order = sorted(range(len(sub)), key=lambda j: (-sub.probabilities[j], sub.members[j]))
        selected.extend(sub.members[j] for j in order[:spec.k])
    return selected


def expected_uplift(n_candidates: int, k: int = 1) -> float:
    """Среднее top-k из N экспоненциальных величин минус 1: (1/k)·Σ_j (H_N − H_{j−1}) − 1."""
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n_candidates + 1))])
    return float(np.mean([harmonic[n_candidates] - harmonic[j - 1] for j in range(1, k + 1)]) - 1.0)


def simulate_post_selection(n_subspaces: int = 10000, n_candidates: int = 1024, k: int = 1,
                            fidelity: float = 0.5, seed: int = 0,
                            batch: int = POST_SELECT_BATCH) -> Dict[str, Any]:
    """Монте-Карло: приближённая амплитуда ψ_a = √f·ψ_t + √(1−f)·ψ_n, распределение Портера–Томаса.

    Величины x = 2^n·p имеют среднее 1, поэтому XEB выборки равен mean(x_t) − 1.
    Базовая линия: выборка из приближённого распределения (XEB ≈ f).
    """
    spec = PostSelectSpec(k, n_candidates)
    if not 0 < fidelity <= 1:
        raise ValueError(f"Fidelity must be in (0, 1], got {fidelity}")
    if n_subspaces < 1:
        raise ValueError(f"n_subspaces must be >= 1, got {n_subspaces}")
    rng = np.random.default_rng(seed)
    selected_sum = 0.0
    baseline_sum = 0.0
    for start in range(0, n_subspaces, batch):
        m = min(batch, n_subspaces - start)
        shape = (m, spec.n_candidates)
        z_t = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
        z_n = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
        x_t = np.abs(z_t) ** 2
        x_a = np.abs(math.sqrt(fidelity) * z_t + math.sqrt(1.0 - fidelity) * z_n) ** 2
        top = np.argsort(-x_a, axis=1, kind="stable")[:, :spec.k]
        selected_sum += float(np.take_along_axis(x_t, top, axis=1).mean(axis=1).sum())
        baseline_sum += float(((x_a * x_t).sum(axis=1) / x_a.sum(axis=1)).sum())
    xeb_selected = selected_sum / n_subspaces - 1.0
    xeb_random = baseline_sum / n_subspaces - 1.0
    return {
        "n_subspaces": n_subspaces,
        "n_candidates": spec.n_candidates,
        "k": spec.k,
        "fidelity": fidelity,
        "xeb_selected": xeb_selected,
        "xeb_random": xeb_random,
        "uplift": xeb_selected / xeb_random,
        "expected_uplift": expected_uplift(spec.n_candidates, spec.k),
        "log_uplift": math.log(spec.n_candidates / spec.k),
    }
