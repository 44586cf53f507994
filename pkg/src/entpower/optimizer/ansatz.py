from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from src.entpower.exceptions import InvalidSpecError
from src.entpower.schemas import FSPoint

TWO_PI = 2 * math.pi

# Reduced ansaetze fix every xi to 0 and tie polar angles together.
REDUCED_ANSATZE = ("symmetric", "odd-even", "edge-bulk")
FULL_ANSATZE = ("no-phases", "full")

# Stable indices for PRNG stream derivation; never reorder.
ANSATZ_INDEX = {"full": 0, "no-phases": 1, "symmetric": 2, "odd-even": 3, "edge-bulk": 4}


class Ansatz:
    """
    Helper class for the symmetry-reduced parameterizations of the fully
    separable manifold. Every ansatz expands to a full (thetas, xis) pair.
    """

    @staticmethod
    def is_valid(name: str) -> bool:
        return name in ANSATZ_INDEX

    @staticmethod
    def num_params(name: str, n: int) -> int:
        if name == "full":
            return 2 * n
        if name == "no-phases":
            return n
        if name == "symmetric":
            return 1
        if name == "odd-even":
            return 2 if n >= 2 else 1
        if name == "edge-bulk":
            # sites 1 and n share one angle, the bulk 2..n-1 is free
            return max(n - 1, 1)
        raise InvalidSpecError(f"Unknown ansatz: {name!r}")

    @staticmethod
    def expand(name: str, x: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        zeros = np.zeros(n)
        if name == "full":
            return x[:n], x[n:]
        if name == "no-phases":
            return x, zeros
        if name == "symmetric":
            return np.full(n, x[0]), zeros
        if name == "odd-even":
            thetas = np.where(np.arange(n) % 2 == 0, x[0], x[-1])
            return thetas, zeros
        if name == "edge-bulk":
            thetas = np.empty(n)
            thetas[0] = thetas[-1] = x[0]
            thetas[1:-1] = x[1:]
            return thetas, zeros
        raise InvalidSpecError(f"Unknown ansatz: {name!r}")

    @staticmethod
    def contract(name: str, thetas: np.ndarray, xis: np.ndarray) -> np.ndarray:
        """Parameter vector of a full-type ansatz reproducing (thetas, xis)."""
        if name == "full":
            return np.concatenate([thetas, xis])
        if name == "no-phases":
            return np.asarray(thetas, dtype=float).copy()
        raise InvalidSpecError(f"Cannot contract onto reduced ansatz {name!r}")

    @staticmethod
    def random_start(name: str, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform draw on the parameter box: thetas in [0, pi], xis in [0, 2pi)."""
        k = Ansatz.num_params(name, n)
        if name == "full":
            return np.concatenate([rng.uniform(0.0, math.pi, n), rng.uniform(0.0, TWO_PI, n)])
        return rng.uniform(0.0, math.pi, k)

    @staticmethod
    def bounds(name: str, n: int) -> List[Tuple[float, float]]:
        if name == "full":
            return [(0.0, math.pi)] * n + [(0.0, TWO_PI)] * n
        return [(0.0, math.pi)] * Ansatz.num_params(name, n)


def applicable_ansatze(diagonal: bool) -> List[str]:
    """
    Reduced ansaetze first, then the full search: without phases for diagonal
    unitaries (where local phases do not change the GGM), with them otherwise.
    """
    return list(REDUCED_ANSATZE) + (["no-phases"] if diagonal else ["full"])


def fold_point(thetas: np.ndarray, xis: np.ndarray) -> FSPoint:
    """
    Canonical FSPoint for arbitrary real angles. theta -> 2pi - theta with
    xi -> xi + pi only changes the global phase of the single-qubit state.
    """
    thetas = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
    xis = np.asarray(xis, dtype=float).copy()
    flip = thetas > math.pi
    thetas[flip] = TWO_PI - thetas[flip]
    xis[flip] += math.pi
    xis = np.mod(xis, TWO_PI)
    xis[xis >= TWO_PI] = 0.0
    thetas = np.clip(thetas, 0.0, math.pi)
    return FSPoint(thetas=thetas.tolist(), xis=xis.tolist())
