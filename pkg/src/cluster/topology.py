"""Описание моделируемого кластера и его JSON-формат."""
import json
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict

from config.sim_config import (CLUSTER_PRESETS, DEFAULT_BUFFER_CAPACITY, DEFAULT_COMPUTE_RATE, DEFAULT_INTER_BW,
                               DEFAULT_INTRA_BW, DEFAULT_UTILIZATION, POWER_COMPUTE_W, ALPHA_BETA_RATIO,
                               QUANT_KERNEL_S_PER_GB)


@dataclass(frozen=True)
class ClusterSpec:
    nodes: int = 1
    devices_per_node: int = 1
    intra_bw: float = DEFAULT_INTRA_BW
    inter_bw: float = DEFAULT_INTER_BW
    r: float = DEFAULT_UTILIZATION
    alpha: float = POWER_COMPUTE_W[0] * ALPHA_BETA_RATIO
    beta: float = POWER_COMPUTE_W[0]
    compute_rate: float = DEFAULT_COMPUTE_RATE
    device_mem: float = 64 * 2 ** 20
    buffer_capacity: float = DEFAULT_BUFFER_CAPACITY
    quant_kernel_s_per_gb: float = QUANT_KERNEL_S_PER_GB

    def __post_init__(self):
        for name in ("nodes", "devices_per_node", "intra_bw", "inter_bw", "r", "compute_rate",
                     "device_mem", "buffer_capacity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"Cluster field {name} must be positive, got {getattr(self, name)}")
        if self.alpha < 0 or self.beta < 0 or self.quant_kernel_s_per_gb < 0:
            raise ValueError("Energy coefficients and kernel cost must be non-negative")
        if self.r > 1:
            raise ValueError(f"Utilization r must be in (0, 1], got {self.r}")

    @property
    def total_devices(self) -> int:
        return self.nodes * self.devices_per_node

    def to_json(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "ClusterSpec":
        known = {k: obj[k] for k in cls.__dataclass_fields__ if k in obj}
        unknown = set(obj) - set(known)
        if unknown:
            raise ValueError(f"Unknown cluster fields: {sorted(unknown)}")
        for k in ("nodes", "devices_per_node"):
            if k in known:
                known[k] = int(known[k])
        return cls(**known)

    @classmethod
    def preset(cls, name: str) -> "ClusterSpec":
        if name not in CLUSTER_PRESETS:
            raise ValueError(f"Unknown cluster preset {name!r}; known: {sorted(CLUSTER_PRESETS)}")
        return cls.from_json(CLUSTER_PRESETS[name])


def load_cluster(source: str) -> ClusterSpec:
    """Путь к JSON-файлу или имя предустановки."""
    if source in CLUSTER_PRESETS and not os.path.exists(source):
        return ClusterSpec.preset(source)
    with open(source, "r", encoding="utf-8") as f:
        return ClusterSpec.from_json(json.load(f))
