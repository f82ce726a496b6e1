import re

_QUANT_RE = re.compile(r"^int4:(\d+)$", re.IGNORECASE)
_BITSTRING_RE = re.compile(r"^[01]*$")
_EINSUM_LABEL_RE = re.compile(r"[A-Za-z][0-9]*")

GB = 1e9
MiB = 1 << 20

HALF_MAX = 65504.0
FLOPS_PER_CMAC = 8
ORACLE_MAX_QUBITS = 24

DEFAULT_INTRA_BW = 300 * GB
DEFAULT_INTER_BW = 100 * GB
DEFAULT_UTILIZATION = 0.5
DEFAULT_COMPUTE_RATE = 312e12
ALPHA_BETA_RATIO = 1.0 / 3.0
DEFAULT_BUFFER_CAPACITY = 32 * MiB

# Измеренные затраты ядра квантования, с/ГБ
QUANT_KERNEL_S_PER_GB = 4.25e-3

POWER_COMPUTE_W = (220.0, 450.0)

ANNEAL_ITERATIONS = 2000
ANNEAL_T_START = 2.0
ANNEAL_DECAY = 0.999
ANNEAL_MEMORY_PENALTY = 4.0

# kind: (q_min, q_max, exp, group, round)
QUANT_TABLE = {
    "half": (-6.65e4, 6.65e4, 1.0, None, False),
    "int8": (-128.0, 127.0, 0.2, None, True),
    "int4": (0.0, 15.0, 1.0, 128, True),
}

RECOMPUTE_LARGE_FRACTION = 0.5
FIDELITY_THRESHOLD = 0.95


def get_cluster_presets(beta: float = POWER_COMPUTE_W[0]) -> dict:
    """Получить типовые конфигурации кластера (α = β/3 по умолчанию)."""
    alpha = beta * ALPHA_BETA_RATIO
    common = {
        "intra_bw": DEFAULT_INTRA_BW,
        "inter_bw": DEFAULT_INTER_BW,
        "r": DEFAULT_UTILIZATION,
        "alpha": alpha,
        "beta": beta,
    }
    return {
        "desk": {
            **common,
            "nodes": 1,
            "devices_per_node": 1,
            "compute_rate": 1e9,
            "device_mem": 64 * MiB,
            "buffer_capacity": DEFAULT_BUFFER_CAPACITY,
        },
        "quad": {
            **common,
            "nodes": 2,
            "devices_per_node": 2,
            "compute_rate": 1e9,
            "device_mem": 8 * 1024,
            "buffer_capacity": 16 * 1024,
        },
        "a100_node": {
            **common,
            "nodes": 1,
            "devices_per_node": 8,
            "compute_rate": DEFAULT_COMPUTE_RATE,
            "device_mem": 80 * 1024 * MiB,
            "buffer_capacity": 32 * 1024 * MiB,
        },
    }


CLUSTER_PRESETS = get_cluster_presets()

SAMPLER_MEM_LIMIT = 64 * MiB
SAMPLER_ITERATIONS = 200
POST_SELECT_BATCH = 256
