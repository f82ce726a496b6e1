"""Парная свёртка einsum и её переписывание complex-as-real для complex-half."""
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Sequence, Tuple

import numpy as np

from config.sim_config import _EINSUM_LABEL_RE
from tensors.tensor import DenseTensor, Label, Mode, Precision, permute

RI_IN = "_ri_in"
RI_OUT = "_ri_out"


def _split_labels(term: str) -> Tuple[Label, ...]:
    term = term.strip()
    tokens = tuple(_EINSUM_LABEL_RE.findall(term))
    if "".join(tokens) != term.replace(" ", ""):
        raise ValueError(f"Cannot parse einsum term {term!r}")
    return tokens


@dataclass(frozen=True)
class EinsumSpec:
    """Уравнение парной свёртки: in_a, in_b -> out; reduce = in_a ∩ in_b."""
    in_a: Tuple[Label, ...]
    in_b: Tuple[Label, ...]
    out: Tuple[Label, ...]

    def __post_init__(self):
        for name in ("in_a", "in_b", "out"):
            seq = tuple(getattr(self, name))
            if len(set(seq)) != len(seq):
                raise ValueError(f"Duplicate labels in {name}: {list(seq)}")
            object.__setattr__(self, name, seq)
        shared = set(self.in_a) & set(self.in_b)
        traced = shared & set(self.out)
        if traced:
            raise ValueError(f"Batched einsum is not a pure GEMM: {sorted(traced)} kept in output")
        unknown = set(self.out) - set(self.in_a) - set(self.in_b)
        if unknown:
            raise ValueError(f"Output labels {sorted(unknown)} absent from both inputs")

    @classmethod
    def parse(cls, equation: str) -> "EinsumSpec":
        """Разобрать уравнение вида 'a1a2,b1->a2b1' (метка = буква + цифры)."""
        try:
            lhs, rhs = equation.split("->")
            term_a, term_b = lhs.split(",")
        except ValueError:
            raise ValueError(f"Malformed einsum equation {equation!r}") from None
        return cls(_split_labels(term_a), _split_labels(term_b), _split_labels(rhs))

    @classmethod
    def for_inputs(cls, in_a: Sequence[Label], in_b: Sequence[Label]) -> "EinsumSpec":
        """Спецификация по правилу объединение минус пересечение (порядок: свободные A, затем B)."""
        shared = set(in_a) & set(in_b)
        out = tuple(l for l in in_a if l not in shared) + tuple(l for l in in_b if l not in shared)
        return cls(tuple(in_a), tuple(in_b), out)

    @property
    def reduce(self) -> FrozenSet[Label]:
        return frozenset(self.in_a) & frozenset(self.in_b)

    @property
    def n_a(self) -> int:
        return len(self.in_a)

    @property
    def n_b(self) -> int:
        return len(self.in_b)

    @property
    def n_c(self) -> int:
        return len(self.out)

    @property
    def n_reduce(self) -> int:
        return len(self.reduce)

    def without(self, labels: Iterable[Label]) -> "EinsumSpec":
        """Та же свёртка с удалёнными (зафиксированными) метками."""
        drop = set(labels)
        return EinsumSpec(
            tuple(l for l in self.in_a if l not in drop),
            tuple(l for l in self.in_b if l not in drop),
            tuple(l for l in self.out if l not in drop),
        )

    def swapped(self) -> "EinsumSpec":
        return EinsumSpec(self.in_b, self.in_a, self.out)

    def equation(self) -> str:
        return f"{''.join(self.in_a)},{''.join(self.in_b)}->{''.join(self.out)}"


def _merged_dims(spec: EinsumSpec, a: DenseTensor, b: DenseTensor) -> Dict[Label, int]:
    dims = a.size_dict()
    for label, dim in b.size_dict().items():
        if label in dims and dims[label] != dim:
            raise ValueError(f"Dim mismatch on shared label {label!r}: {dims[label]} vs {dim}")
        dims[label] = dim
    return dims


def _align(t: DenseTensor, labels: Tuple[Label, ...], side: str) -> DenseTensor:
    if set(t.labels) != set(labels) or t.rank != len(labels):
        raise ValueError(f"Operand {side} modes {list(t.labels)} do not match spec {list(labels)}")
    return permute(t, labels)


def einsum_pair(spec: EinsumSpec, a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Свернуть два тензора по спецификации; накопление в double, одно округление в конце."""
    if a.precision is not b.precision:
        raise ValueError(f"Precision mismatch: {a.precision.value} vs {b.precision.value}")
    if a.is_real != b.is_real:
        raise ValueError("Cannot mix real and complex operands")
    a = _align(a, spec.in_a, "A")
    b = _align(b, spec.in_b, "B")
    dims = _merged_dims(spec, a, b)
    reduce = [l for l in spec.in_a if l in spec.reduce]
    keep = set(spec.out)
    # свободные моды размерности 1, отсутствующие в выходе, просто схлопываются
    for label in list(spec.in_a) + list(spec.in_b):
        if label not in keep and label not in spec.reduce and dims[label] != 1:
            raise ValueError(f"Label {label!r} (dim {dims[label]}) is neither reduced nor kept")

    wide = np.float64 if a.is_real else np.complex128
    a_data = a.data.astype(wide)
    b_data = b.data.astype(wide)
    drop_a = tuple(i for i, l in enumerate(spec.in_a) if l not in keep and l not in spec.reduce)
    drop_b = tuple(i for i, l in enumerate(spec.in_b) if l not in keep and l not in spec.reduce)
    if drop_a:
        a_data = a_data.sum(axis=drop_a)
    if drop_b:
        b_data = b_data.sum(axis=drop_b)
    labels_a = [l for l in spec.in_a if l in keep or l in spec.reduce]
    labels_b = [l for l in spec.in_b if l in keep or l in spec.reduce]

    axes_a = [labels_a.index(l) for l in reduce]
    axes_b = [labels_b.index(l) for l in reduce]
    res = np.tensordot(a_data, b_data, axes=(axes_a, axes_b))
    res_labels = [l for l in labels_a if l not in spec.reduce] + [l for l in labels_b if l not in spec.reduce]
    res = np.transpose(res, [res_labels.index(l) for l in spec.out]) if spec.out else res
    modes = tuple(Mode(l, dims[l]) for l in spec.out)
    return DenseTensor(modes, res, a.precision)


def real_view(t: DenseTensor, label: Label = RI_IN) -> DenseTensor:
    """Представить комплексный тензор как действительный с последней модой (re, im)."""
    if t.is_real:
        raise ValueError("Tensor is already real")
    data = np.stack([np.real(t.data), np.imag(t.data)], axis=-1)
    return DenseTensor(t.modes + (Mode(label, 2),), data, t.precision)


def complex_view(t: DenseTensor, label: Label = RI_OUT) -> DenseTensor:
    """Обратное преобразование: мода `label` (re, im) становится комплексным значением."""
    t = permute(t, tuple(l for l in t.labels if l != label) + (label,))
    if t.modes[-1].dim != 2:
        raise ValueError(f"Real/imag mode {label!r} must have dim 2")
    data = t.data[..., 0].astype(np.float64) + 1j * t.data[..., 1].astype(np.float64)
    return DenseTensor(t.modes[:-1], data, t.precision)


def pad_b_real_imag(b: DenseTensor, lead: Label = RI_OUT, trail: Label = RI_IN) -> DenseTensor:
    """Дополнить B до [B_(real,-imag), B_(imag,real)]: ведущая мода γ и замыкающая α."""
    if b.is_real:
        raise ValueError("pad_b_real_imag expects a complex tensor")
    re = np.real(b.data)
    im = np.imag(b.data)
    data = np.stack([np.stack([re, -im], axis=-1), np.stack([im, re], axis=-1)], axis=0)
    modes = (Mode(lead, 2),) + b.modes + (Mode(trail, 2),)
    return DenseTensor(modes, data, b.precision)


def complex_as_real_spec(spec: EinsumSpec, lead: Label = RI_OUT, trail: Label = RI_IN) -> EinsumSpec:
    """α…α_{N_A+1}, γ_{N_C+1}β…α_{N_A+1} -> γ…γ_{N_C+1}."""
    return EinsumSpec(spec.in_a + (trail,), (lead,) + spec.in_b + (trail,), spec.out + (lead,))


def einsum_complex_as_real(spec: EinsumSpec, a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Комплексная свёртка как действительная: A получает моду re/im, B получает блоки поворота."""
    if a.is_real or b.is_real:
        raise ValueError("einsum_complex_as_real expects complex operands")
    if a.size < b.size:
        a, b, spec = b, a, spec.swapped()
    a_real = real_view(permute(a, spec.in_a), RI_IN)
    b_pad = pad_b_real_imag(permute(b, spec.in_b), RI_OUT, RI_IN)
    c_real = einsum_pair(complex_as_real_spec(spec), a_real, b_pad)
    return complex_view(c_real, RI_OUT)


def contract(spec: EinsumSpec, a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Выбрать ядро по точности: CHalf идёт через complex-as-real."""
    if a.precision is Precision.CHALF and not a.is_real:
        return einsum_complex_as_real(spec, a, b)
    return einsum_pair(spec, a, b)


def fidelity(benchmark: DenseTensor, result: DenseTensor) -> float:
    """Квадрат нормированного скалярного произведения |<b,r>|² / (‖b‖²‖r‖²)."""
    if set(benchmark.labels) != set(result.labels) or benchmark.rank != result.rank:
        raise ValueError(f"Shape mismatch: {list(benchmark.labels)} vs {list(result.labels)}")
    result = permute(result, benchmark.labels)
    if benchmark.shape != result.shape:
        raise ValueError(f"Shape mismatch: {benchmark.shape} vs {result.shape}")
    x = benchmark.data.reshape(-1).astype(np.complex128)
    y = result.data.reshape(-1).astype(np.complex128)
    nx = np.vdot(x, x).real
    ny = np.vdot(y, y).real
    if nx == 0.0 or ny == 0.0:
        raise ValueError("Fidelity is undefined for a zero-norm tensor")
    inner = np.vdot(x, y)
    value = (abs(inner) ** 2) / (nx * ny)
    return float(min(1.0, value))
