"""Аналитические модели времени all-to-all и энергии."""


def model_all2all_time(data_bytes: float, bandwidth: float, n: int, r: float) -> float:
    """(data / bandwidth) · (N / (N - 1)) · (1 / r)."""
    if n < 2:
        raise ValueError(f"All-to-all needs at least 2 participants, got {n}")
    if bandwidth <= 0:
        raise ValueError(f"Bandwidth must be positive, got {bandwidth}")
    if not 0 < r <= 1:
        raise ValueError(f"Utilization r must be in (0, 1], got {r}")
    if data_bytes < 0:
        raise ValueError(f"Data size must be non-negative, got {data_bytes}")
    return (data_bytes / bandwidth) * (n / (n - 1)) * (1.0 / r)


def model_energy(t_comm: float, t_calc: float, alpha: float, beta: float) -> float:
    """α·T_comm + β·T_calc."""
    if t_comm < 0 or t_calc < 0:
        raise ValueError("Times must be non-negative")
    return alpha * t_comm + beta * t_calc
