from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from src.entpower.exceptions import (
    DimensionError,
    InvalidSiteError,
    InvalidSpecError,
    NotHermitianError,
    NotNormalizedError,
    NotUnitaryError,
)

# Tolerances. Norm and trace checks share the unitarity tolerance because every
# state in the pipeline is produced by applying a checked UnitaryMatrix.
NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-10
HERMITIAN_ATOL = 1e-12
SYMMETRIZE_ATOL = 1e-10
PSD_ATOL = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

ComplexArray = NDArray[np.complex128]


def _frozen(arr: np.ndarray) -> ComplexArray:
    out = np.array(arr, dtype=complex, copy=True)
    out.flags.writeable = False
    return out


def num_qubits_for(dim: int) -> int:
    """Returns N for a dimension 2^N, raising DimensionError otherwise."""
    if dim < 2 or dim & (dim - 1):
        raise DimensionError(f"Dimension {dim} is not a power of two >= 2")
    return dim.bit_length() - 1


def _frobenius_distance_to_identity(m: np.ndarray) -> float:
    gram = m @ m.conj().T
    return float(np.linalg.norm(gram - np.eye(m.shape[0]), ord="fro"))


@dataclass(frozen=True)
class PureState:
    """
    Normalized amplitude vector over N qubits.

    Index k encodes the bitstring i1 i2 ... iN big-endian, so qubit 1 is the
    most significant bit.
    """

    num_qubits: int
    amps: ComplexArray

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise DimensionError(f"num_qubits must be positive, got {self.num_qubits}")
        amps = _frozen(np.ravel(self.amps))
        if amps.shape[0] != 2 ** self.num_qubits:
            raise DimensionError(
                f"Expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, got {amps.shape[0]}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise NotNormalizedError(f"State norm^2 is {norm_sq}, expected 1")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amps(cls, amps: Sequence[complex] | np.ndarray, normalize: bool = False) -> "PureState":
        arr = np.asarray(amps, dtype=complex).ravel()
        n = num_qubits_for(arr.shape[0])
        if normalize:
            arr = arr / np.linalg.norm(arr)
        return cls(num_qubits=n, amps=arr)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]


@dataclass(frozen=True)
class UnitaryMatrix:
    """Dense 2^N x 2^N operator with U U^dagger = I within UNITARY_ATOL."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"Unitary must be square, got shape {m.shape}")
        num_qubits_for(m.shape[0])
        err = _frobenius_distance_to_identity(m)
        if err > UNITARY_ATOL:
            raise NotUnitaryError(f"||U U^dagger - I||_F = {err:.3e} exceeds {UNITARY_ATOL}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def _trusted(cls, entries: np.ndarray) -> "UnitaryMatrix":
        # skips the O(d^3) check; only for exact transforms of an already checked matrix
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", _frozen(entries))
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return num_qubits_for(self.dim)

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix._trusted(self.entries.conj().T)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        if self.dim != other.dim:
            raise DimensionError(f"Cannot multiply unitaries of dims {self.dim} and {other.dim}")
        return UnitaryMatrix(self.entries @ other.entries)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls._trusted(np.eye(dim, dtype=complex))


def _symmetrized(entries: np.ndarray, what: str) -> ComplexArray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {m.shape}")
    asym = float(np.linalg.norm(m - m.conj().T, ord="fro"))
    if asym > SYMMETRIZE_ATOL:
        raise NotHermitianError(f"{what} asymmetry {asym:.3e} exceeds {SYMMETRIZE_ATOL}")
    if asym > 0.0:
        m = 0.5 * (m + m.conj().T)
    return _frozen(m)


@dataclass(frozen=True)
class HermitianMatrix:
    """
    Hermitian operator. Inputs with asymmetry up to SYMMETRIZE_ATOL are
    replaced by (H + H^dagger)/2; anything larger is rejected.
    """

    entries: ComplexArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _symmetrized(self.entries, "HermitianMatrix"))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.entries + other.entries)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        m = _symmetrized(self.entries, "DensityMatrix")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > NORM_ATOL:
            raise NotNormalizedError(f"Density matrix trace is {trace}, expected 1")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -PSD_ATOL:
            raise NotHermitianError(f"Density matrix has negative eigenvalue {smallest:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


MatrixLike = Union[np.ndarray, UnitaryMatrix, HermitianMatrix, DensityMatrix]


def as_array(m: MatrixLike) -> np.ndarray:
    if isinstance(m, (UnitaryMatrix, HermitianMatrix, DensityMatrix)):
        return m.entries
    return np.asarray(m, dtype=complex)


def kron(a: MatrixLike, b: MatrixLike) -> ComplexArray:
    """Kronecker product; the first factor is the more significant qubit block."""
    return np.kron(as_array(a), as_array(b))


def _check_pair(i: int, j: int, n: int) -> None:
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidSiteError(f"Sites ({i}, {j}) out of range for {n} qubits")
    if i >= j:
        raise InvalidSiteError(f"Sites must satisfy i < j, got ({i}, {j})")


def apply_two_site_operator(g: np.ndarray, i: int, j: int, n: int, m: np.ndarray) -> ComplexArray:
    """
    Left-multiplies m (shape (2^n, k)) by the 4x4 operator g acting on qubits
    (i, j), 1-based with i < j, without forming the 2^n x 2^n embedding.
    """
    _check_pair(i, j, n)
    g = np.asarray(g, dtype=complex)
    if g.shape != (4, 4):
        raise DimensionError(f"Two-site operator must be 4x4, got {g.shape}")
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != 2 ** n:
        raise DimensionError(f"Operand has {m.shape[0]} rows, expected {2 ** n}")

    cols = m.reshape(2 ** n, -1).shape[1]
    tensor = m.reshape([2] * n + [cols])
    g4 = g.reshape(2, 2, 2, 2)
    out = np.tensordot(g4, tensor, axes=([2, 3], [i - 1, j - 1]))
    out = np.moveaxis(out, [0, 1], [i - 1, j - 1])
    return out.reshape(m.shape)


def embed_two_site_operator(g: np.ndarray, i: int, j: int, n: int) -> ComplexArray:
    """
    Embeds a 4x4 operator acting on qubits (i, j) into the 2^n space. Works for
    any 4x4 array (gates and bond Hamiltonians alike).
    """
    return apply_two_site_operator(g, i, j, n, np.eye(2 ** n, dtype=complex))


def embed_two_qubit_gate(g: MatrixLike, i: int, j: int, n: int) -> UnitaryMatrix:
    """Returns the operator acting as g on qubits (i, j) and identity elsewhere."""
    g_arr = as_array(g)
    if not isinstance(g, UnitaryMatrix):
        UnitaryMatrix(g_arr)
    return UnitaryMatrix(embed_two_site_operator(g_arr, i, j, n))


def apply_unitary(u: UnitaryMatrix, s: PureState) -> PureState:
    if u.dim != s.dim:
        raise DimensionError(f"Unitary of dim {u.dim} cannot act on a {s.num_qubits}-qubit state")
    return PureState(num_qubits=s.num_qubits, amps=u.entries @ s.amps)


def _validate_keep(keep: Iterable[int], n: int) -> tuple[int, ...]:
    sites = tuple(sorted(set(int(k) for k in keep)))
    if not sites:
        raise InvalidSiteError("keep set must be nonempty")
    if len(sites) >= n:
        raise InvalidSiteError(f"keep set {sites} must be a strict subset of 1..{n}")
    if sites[0] < 1 or sites[-1] > n:
        raise InvalidSiteError(f"keep set {sites} out of range for {n} qubits")
    return sites


def reduced_matrix(amps: np.ndarray, n: int, keep0: Sequence[int]) -> ComplexArray:
    """
    Unchecked partial trace of |amps><amps| onto the 0-based sites in keep0
    (sorted). Hot path for the GGM objective.
    """
    rest = [k for k in range(n) if k not in keep0]
    m = amps.reshape([2] * n).transpose(list(keep0) + rest).reshape(2 ** len(keep0), -1)
    return m @ m.conj().T


def partial_trace(s: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Tr over the complement of keep (1-based sites) of |s><s|."""
    sites = _validate_keep(keep, s.num_qubits)
    rho = reduced_matrix(s.amps, s.num_qubits, [k - 1 for k in sites])
    return DensityMatrix(rho)


def hermitian_eigenvalues(h: MatrixLike) -> NDArray[np.float64]:
    """Real eigenvalues sorted in descending order."""
    if not isinstance(h, (HermitianMatrix, DensityMatrix)):
        h = HermitianMatrix(as_array(h))
    return np.linalg.eigvalsh(h.entries)[::-1].copy()


def hermitian_expm(h: MatrixLike, t: float, sign: int = 1) -> UnitaryMatrix:
    """exp(-i * sign * H * t) through the spectral decomposition of H."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if not isinstance(h, HermitianMatrix):
        h = HermitianMatrix(as_array(h))
    w, v = np.linalg.eigh(h.entries)
    phases = np.exp(-1j * sign * w * t)
    return UnitaryMatrix((v * phases) @ v.conj().T)


def qubit_amplitudes(thetas: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """Single-qubit vectors cos(theta/2)|0> + e^{i xi} sin(theta/2)|1>, shape (N, 2)."""
    thetas = np.asarray(thetas, dtype=float)
    xis = np.asarray(xis, dtype=float)
    return np.stack([np.cos(thetas / 2) + 0j, np.exp(1j * xis) * np.sin(thetas / 2)], axis=-1)


def product_amplitudes(thetas: np.ndarray, xis: np.ndarray) -> ComplexArray:
    return reduce(np.kron, qubit_amplitudes(thetas, xis))


def product_state(thetas: Sequence[float], xis: Sequence[float] | None = None) -> PureState:
    thetas = np.asarray(thetas, dtype=float)
    xis = np.zeros_like(thetas) if xis is None else np.asarray(xis, dtype=float)
    if thetas.shape != xis.shape or thetas.ndim != 1 or thetas.size == 0:
        raise DimensionError("thetas and xis must be equal-length nonempty vectors")
    return PureState(num_qubits=thetas.size, amps=product_amplitudes(thetas, xis))


def named_state(name: str, n: int) -> PureState:
    """ghz, w, product (|0...0>) or plus (|+...+>) on n qubits."""
    if n < 1:
        raise DimensionError(f"named states need at least one qubit, got {n}")
    dim = 2 ** n
    amps = np.zeros(dim, dtype=complex)
    if name == "ghz":
        amps[0] = amps[-1] = 1 / np.sqrt(2)
    elif name == "w":
        for k in range(n):
            amps[1 << k] = 1 / np.sqrt(n)
    elif name == "product":
        amps[0] = 1.0
    elif name == "plus":
        amps[:] = 1 / np.sqrt(dim)
    else:
        raise InvalidSpecError(f"Unknown named state: {name!r}")
    return PureState(num_qubits=n, amps=amps)


def is_diagonal(u: MatrixLike, atol: float = 1e-12) -> bool:
    m = as_array(u)
    off = m - np.diag(np.diag(m))
    return float(np.linalg.norm(off, ord="fro")) <= atol
