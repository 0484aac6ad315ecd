"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from sumrank.fftensor import PrimeField, Tensor3


def diagonal_tensor(n: int, p: int, values=None) -> Tensor3:
    """n x n x n tensor supported on (i, i, i) with the given nonzero values."""
    arr = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        arr[i, i, i] = 1 if values is None else values[i]
    labels = tuple(range(n))
    return Tensor3(PrimeField(p), labels, labels, labels, arr)


def random_tensor(rng, dims, p) -> Tensor3:
    arr = np.array(
        [rng.randrange(p) for _ in range(dims[0] * dims[1] * dims[2])], dtype=np.int64
    ).reshape(dims)
    return Tensor3(
        PrimeField(p),
        tuple(range(dims[0])),
        tuple(range(dims[1])),
        tuple(range(dims[2])),
        arr,
    )
