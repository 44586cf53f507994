from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.optimize

from src.entpower.exceptions import ClosedFormError, InvalidSiteError

A_NEGATIVE_ATOL = 1e-10
STATIONARITY_ATOL = 1e-8
GRID_POINTS = 10_000


@dataclass(frozen=True)
class Rho3Entries:
    """
    Single-site reduction [[a, b], [b*, c]] of U_{d,phi} applied to a real
    product state (all xi = 0).
    """

    site: int
    a: float
    b: complex
    c: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [np.conj(self.b), self.c]], dtype=complex)

    def eigenvalues(self) -> Tuple[float, float]:
        """(lambda_+, lambda_-) = 1/2 +- sqrt(1 - 4(ac - |b|^2))/2."""
        det = self.a * self.c - abs(self.b) ** 2
        root = np.sqrt(max(1.0 - 4.0 * det, 0.0))
        return 0.5 + 0.5 * root, 0.5 - 0.5 * root


def rho_entries_n(i: int, thetas: Sequence[float], phi: float) -> Rho3Entries:
    """
    Entries of rho_i for U_{d,phi} = diag(1, ..., 1, e^{i phi}) on N qubits.

    b_i = cos(t_i/2) sin(t_i/2) (c_j1^2 + s_j1^2 (c_j2^2 + s_j2^2 (... (c_jm^2 + e^{-i phi} s_jm^2))))
    with j1 < ... < jm the sites other than i and c, s the half-angle cosines and sines.
    """
    thetas = np.asarray(thetas, dtype=float)
    n = thetas.size
    if not 1 <= i <= n:
        raise InvalidSiteError(f"Site {i} out of range for {n} qubits")

    cos_sq = np.cos(thetas / 2) ** 2
    sin_sq = np.sin(thetas / 2) ** 2
    others = [j for j in range(n) if j != i - 1]

    # unrolling the nested sum from the innermost site outwards
    nested: complex = np.exp(-1j * phi)
    for j in reversed(others):
        nested = cos_sq[j] + sin_sq[j] * nested

    half = thetas[i - 1] / 2
    b = np.cos(half) * np.sin(half) * nested
    return Rho3Entries(site=i, a=float(cos_sq[i - 1]), b=complex(b), c=float(sin_sq[i - 1]))


def rho3_entries(i: int, thetas: Sequence[float], phi: float) -> Rho3Entries:
    if len(thetas) != 3:
        raise InvalidSiteError(f"rho3_entries needs 3 angles, got {len(thetas)}")
    return rho_entries_n(i, thetas, phi)


def a_expr3(theta: float, phi: float) -> float:
    """
    The trigonometric polynomial A(theta, phi) with lambda_+ = 1/2 + sqrt(A)/32
    for three equal polar angles.
    """
    return (
        218
        + 16 * np.cos(theta)
        + 49 * np.cos(2 * theta)
        - 24 * np.cos(3 * theta)
        - 10 * np.cos(4 * theta)
        + 8 * np.cos(5 * theta)
        - np.cos(6 * theta)
        - 1024 * np.cos(theta / 2) ** 4 * (-3 + np.cos(theta)) * np.cos(phi) * np.sin(theta / 2) ** 6
    )


def eigvals3(theta: float, phi: float) -> Tuple[float, float]:
    """(lambda_+, lambda_-) of every single-site reduction at theta_1 = theta_2 = theta_3 = theta."""
    a = a_expr3(theta, phi)
    if np.ndim(a) == 0:
        a = float(a)
    if np.any(np.asarray(a) < -A_NEGATIVE_ATOL):
        raise ClosedFormError(f"A(theta={theta}, phi={phi}) = {a} is negative")
    lam_plus = 0.5 + np.sqrt(np.maximum(a, 0.0)) / 32
    if np.any(np.asarray(lam_plus) > 1.0 + A_NEGATIVE_ATOL):
        raise ClosedFormError(f"lambda_+ = {lam_plus} exceeds 1 at theta={theta}, phi={phi}")
    return lam_plus, 1.0 - lam_plus


def _closed_form_ggm(theta: float, phi: float) -> float:
    return float(1.0 - eigvals3(theta, phi)[0])


def max_closed_form(phi: float) -> Tuple[float, float]:
    """
    max over theta in [0, pi] of 1/2 - sqrt(A(theta, phi))/32: a dense grid,
    then golden-section refinement around the best grid point.
    """
    grid = np.linspace(0.0, np.pi, GRID_POINTS)
    values = 1.0 - eigvals3(grid, phi)[0]
    k = int(np.argmax(values))
    best_theta, best_value = float(grid[k]), float(values[k])

    objective = lambda t: -_closed_form_ggm(float(np.clip(t, 0.0, np.pi)), phi)
    if 0 < k < GRID_POINTS - 1 and values[k] > max(values[k - 1], values[k + 1]):
        res = scipy.optimize.minimize_scalar(
            objective, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-12
        )
    else:
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, GRID_POINTS - 1)]
        res = scipy.optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded")

    theta = float(np.clip(res.x, 0.0, np.pi))
    value = _closed_form_ggm(theta, phi)
    if value > best_value:
        best_theta, best_value = theta, value
    return best_theta, best_value


def stationarity_check(thetas: Sequence[float]) -> bool:
    """1 + cos t_{i+1} + cos t_{i+2} - cos t_{i+1} cos t_{i+2} = 0 for every i, indices mod 3."""
    c = np.cos(np.asarray(thetas, dtype=float))
    if c.size != 3:
        raise InvalidSiteError(f"stationarity_check needs 3 angles, got {c.size}")
    for i in range(3):
        x, y = c[(i + 1) % 3], c[(i + 2) % 3]
        if abs(1 + x + y - x * y) > STATIONARITY_ATOL:
            return False
    return True


def curvature_check(thetas: Sequence[float], phi: float) -> bool:
    """
    -1/2 sin^2 t_i sin^2 t_{i+1} sin^4(t_{i+2}/2) sin^2(phi/2) < 0 for every i.
    False whenever one of the sines vanishes.
    """
    t = np.asarray(thetas, dtype=float)
    if t.size != 3:
        raise InvalidSiteError(f"curvature_check needs 3 angles, got {t.size}")
    for i in range(3):
        term = (
            -0.5
            * np.sin(t[i]) ** 2
            * np.sin(t[(i + 1) % 3]) ** 2
            * np.sin(t[(i + 2) % 3] / 2) ** 4
            * np.sin(phi / 2) ** 2
        )
        if not term < 0:
            return False
    return True
