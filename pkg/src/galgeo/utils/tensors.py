# src/galgeo/utils/tensors.py
import itertools
from typing import Dict

import numpy as np


def tensor_label(name: str, index) -> str:
    """P, (0, 1) -> "P[1][2]" (1-based, row-major)."""
    return name + "".join(f"[{i + 1}]" for i in index)


def tensor_entries(name: str, values: np.ndarray) -> Dict[str, float]:
    """Row-major labelled entries of a small tensor."""
    values = np.asarray(values, dtype=float)
    return {
        tensor_label(name, index): float(values[index])
        for index in itertools.product(*(range(size) for size in values.shape))
    }


def tensor_labels(name: str, n: int, rank: int):
    return [tensor_label(name, index) for index in itertools.product(range(n), repeat=rank)]


def transform_tensor(values: np.ndarray, A: np.ndarray, A_inv: np.ndarray) -> np.ndarray:
    """Apply A^-1 on the upper index and A on every lower index."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        return A_inv @ values @ A
    if values.ndim == 3:
        return np.einsum("il,ljk,ja,kb->iab", A_inv, values, A, A)
    raise ValueError(f"unsupported tensor rank {values.ndim}")
