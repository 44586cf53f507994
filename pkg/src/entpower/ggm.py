from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import List, Tuple

import numpy as np

from src.entpower.exceptions import DimensionError
from src.entpower.schemas import GgmResult
from src.entpower.tensor_core import PureState, reduced_matrix

# Kept sites (1-based, strictly increasing) of one side of a cut.
Bipartition = Tuple[int, ...]

TIE_ATOL = 1e-12


@lru_cache(maxsize=None)
def _bipartitions(n: int) -> Tuple[Bipartition, ...]:
    cuts: List[Bipartition] = []
    for size in range(1, n // 2 + 1):
        for keep in combinations(range(1, n + 1), size):
            # half-size cuts appear twice (keep and complement); keep the one holding site 1
            if 2 * size == n and keep[0] != 1:
                continue
            cuts.append(keep)
    return tuple(cuts)


def enumerate_bipartitions(n: int) -> List[Bipartition]:
    """
    Every kept subset of size 1..floor(n/2), half-size subsets canonicalized to
    contain site 1. Ordered by size, then lexicographically.
    """
    if n < 2:
        raise DimensionError(f"GGM needs at least 2 qubits, got {n}")
    return list(_bipartitions(n))


def max_eigenvalues(amps: np.ndarray, n: int) -> np.ndarray:
    """Largest reduced-density-matrix eigenvalue for each cut of enumerate_bipartitions(n)."""
    cuts = _bipartitions(n)
    out = np.empty(len(cuts))
    for idx, keep in enumerate(cuts):
        rho = reduced_matrix(amps, n, [k - 1 for k in keep])
        out[idx] = np.linalg.eigvalsh(rho)[-1]
    return out


def ggm_value(amps: np.ndarray, n: int) -> float:
    """Unchecked GGM of a normalized amplitude vector; the optimizer's objective."""
    top = float(np.max(max_eigenvalues(amps, n)))
    return min(max(1.0 - top, 0.0), 0.5)


def ggm(s: PureState) -> GgmResult:
    """
    1 - max over cuts of the largest eigenvalue of the smaller-side reduction.
    Ties in the maximizing cut go to the lexicographically smallest kept set.
    """
    n = s.num_qubits
    cuts = enumerate_bipartitions(n)
    eigs = max_eigenvalues(s.amps, n)

    top = float(np.max(eigs))
    tied = [cuts[idx] for idx in np.flatnonzero(eigs >= top - TIE_ATOL)]
    argmax_cut = min(tied)

    top = min(max(top, 0.5), 1.0)
    return GgmResult(value=1.0 - top, argmax_cut=argmax_cut, max_eigenvalue=top)


def ggm_values_batch(amps_batch: np.ndarray, n: int) -> np.ndarray:
    """GGM of each row of a (B, 2^n) amplitude array."""
    amps_batch = np.asarray(amps_batch, dtype=complex)
    batch = amps_batch.shape[0]
    tensor = amps_batch.reshape([batch] + [2] * n)
    top = np.zeros(batch)
    for keep in _bipartitions(n):
        keep0 = [k - 1 for k in keep]
        rest = [k for k in range(n) if k not in keep0]
        m = tensor.transpose([0] + [k + 1 for k in keep0] + [k + 1 for k in rest])
        m = m.reshape(batch, 2 ** len(keep0), -1)
        rho = m @ np.conj(np.swapaxes(m, 1, 2))
        np.maximum(top, np.linalg.eigvalsh(rho)[:, -1], out=top)
    return np.clip(1.0 - top, 0.0, 0.5)
