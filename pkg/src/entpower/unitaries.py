from __future__ import annotations

from typing import Callable, List, Sequence, Union

import numpy as np
import scipy.linalg

from src.entpower.config import settings
from src.entpower.exceptions import InvalidSiteError, InvalidSpecError
from src.entpower.logging_setup import logger
from src.entpower.tensor_core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    HermitianMatrix,
    UnitaryMatrix,
    apply_two_site_operator,
    as_array,
    embed_two_site_operator,
    hermitian_expm,
    kron,
)

Seed = Union[int, Sequence[int]]


class LayerParity:
    """
    Helper class for the two bond layers of an open chain.
    Odd layers hold pairs (1,2),(3,4),...; even layers hold (2,3),(4,5),...
    """

    ODD = "odd"
    EVEN = "even"

    @staticmethod
    def is_valid(value: str) -> bool:
        return value in (LayerParity.ODD, LayerParity.EVEN)

    @staticmethod
    def bonds(n: int, parity: str) -> List[int]:
        """Left sites i of the pairs (i, i+1) in the layer; no wraparound."""
        if not LayerParity.is_valid(parity):
            raise InvalidSpecError(f"Invalid parity: {parity}. Must be 'odd' or 'even'.")
        start = 1 if parity == LayerParity.ODD else 2
        return list(range(start, n, 2))


def make_rng(seed: Seed) -> np.random.Generator:
    """Generator on the named bit generator recorded in run manifests."""
    bit_generator = getattr(np.random, settings.PRNG_ALGORITHM)
    return np.random.Generator(bit_generator(seed))


def derive_seed(*keys: int) -> int:
    """Deterministic 32-bit seed for a tuple such as (base_seed, sample_index)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# -----------------------------------------------------------------------------
# Diagonal families
# -----------------------------------------------------------------------------


def diag_single_phase(n: int, phi: float) -> UnitaryMatrix:
    """diag(1, ..., 1, e^{i phi}) on n qubits."""
    if n < 2:
        raise InvalidSpecError(f"diag_single_phase needs n >= 2, got {n}")
    diag = np.ones(2 ** n, dtype=complex)
    diag[-1] = np.exp(1j * phi)
    return UnitaryMatrix._trusted(np.diag(diag))


def diag_random_phases(n: int, seed: Seed) -> np.ndarray:
    """The 2^n Normal(0, 1) phases behind diag_random."""
    if n < 2:
        raise InvalidSpecError(f"diag_random needs n >= 2, got {n}")
    return make_rng(seed).standard_normal(2 ** n)


def diag_random(n: int, seed: Seed) -> UnitaryMatrix:
    return UnitaryMatrix._trusted(np.diag(np.exp(1j * diag_random_phases(n, seed))))


# -----------------------------------------------------------------------------
# Two-qubit building blocks
# -----------------------------------------------------------------------------


def u_lambda(lam: float) -> UnitaryMatrix:
    """
    |00><00| + |11><11| + cos(l)(|01><01| + |10><10|) + sin(l)(|01><10| - |10><01|)
    """
    c, s = np.cos(lam), np.sin(lam)
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, c, s, 0],
            [0, -s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return UnitaryMatrix(m)


def orthogonal_state(v: np.ndarray) -> np.ndarray:
    """For v = a|0> + b|1>, returns -b*|0> + a*|1> (equal to -b|0> + a|1> for real v)."""
    a, b = np.asarray(v, dtype=complex)
    return np.array([-np.conj(b), np.conj(a)])


def u_w(omega_variant: str | None = None) -> UnitaryMatrix:
    """
    U_w = |w01><01| + |w10><10| + |w11><11| - i|w00><00| built on the
    nonorthogonal pair |beta> = (sqrt3/2)|1> - (1/2)|0>, |gamma> = -(sqrt3/2)|1> - (1/2)|0>.
    """
    variant = omega_variant or settings.OMEGA_VARIANT
    # "paper" is the documented CLI name for the same omega = -1 gate
    if variant in ("exact", "paper"):
        omega = np.exp(1j * np.pi)
    elif variant == "cube-root":
        omega = np.exp(2j * np.pi / 3)
    else:
        raise InvalidSpecError(f"Unknown omega variant: {variant!r}")

    zero = np.array([1, 0], dtype=complex)
    one = np.array([0, 1], dtype=complex)
    beta = np.sqrt(3) / 2 * one - 0.5 * zero
    gamma = -np.sqrt(3) / 2 * one - 0.5 * zero
    beta_t = orthogonal_state(beta)
    gamma_t = orthogonal_state(gamma)

    w00 = (kron(gamma, one) + kron(beta, zero)) / np.sqrt(2)
    w01 = (omega ** 2 * kron(gamma, one) + omega * kron(beta, zero)) / np.sqrt(2)
    w10 = (kron(gamma_t, one) + kron(beta_t, zero)) / np.sqrt(2)
    w11 = (omega ** 2 * kron(gamma_t, one) + omega * kron(beta_t, zero)) / np.sqrt(2)

    # column k is the image of computational basis state k
    m = np.column_stack([-1j * w00, w01, w10, w11])

    if variant == "cube-root":
        # this image basis is not orthonormal; use the nearest unitary
        m, _ = scipy.linalg.polar(m)
        logger.warning("u_w_projected_to_unitary", extra={"omega_variant": variant})

    return UnitaryMatrix(m)


def haar_random(dim: int, seed: Seed) -> UnitaryMatrix:
    """
    Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
    diag(R) moved into Q.
    """
    if dim < 2:
        raise InvalidSpecError(f"haar_random needs dim >= 2, got {dim}")
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(q)


def random_hermitian(dim: int, seed: Seed) -> HermitianMatrix:
    """(G + G^dagger)/2 for a complex Ginibre G."""
    rng = make_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianMatrix(0.5 * (g + g.conj().T))


# -----------------------------------------------------------------------------
# Layered constructions
# -----------------------------------------------------------------------------


def layer_product(
    n: int,
    bonds: Sequence[int],
    gate_for_bond: Callable[[int, int], np.ndarray],
    m: np.ndarray | None = None,
) -> np.ndarray:
    """
    Applies gate_for_bond(bond_index, i) on every pair (i, i+1) of a layer to m
    (identity when None). Bonds in one layer have disjoint supports, so the
    order inside a layer does not matter.
    """
    out = np.eye(2 ** n, dtype=complex) if m is None else np.asarray(m, dtype=complex)
    for bond_index, i in enumerate(bonds):
        out = apply_two_site_operator(gate_for_bond(bond_index, i), i, i + 1, n, out)
    return out


def und_even(n: int, lam: float) -> UnitaryMatrix:
    """
    (prod_{i odd} U_{i,i+1}(l)) (prod_{i even} U_{i,i+1}(l)) on an even chain;
    on states the even layer acts first.
    """
    if n < 4 or n % 2:
        raise InvalidSpecError(f"und_even needs an even number of qubits >= 4, got {n}")
    g = u_lambda(lam).entries
    m = layer_product(n, LayerParity.bonds(n, LayerParity.EVEN), lambda _k, _i: g)
    m = layer_product(n, LayerParity.bonds(n, LayerParity.ODD), lambda _k, _i: g, m)
    return UnitaryMatrix(m)


def und_odd(
    n: int,
    lam: float,
    inner: str = "uw",
    seed: Seed | None = None,
    omega_variant: str | None = None,
) -> UnitaryMatrix:
    """
    (prod_{i odd, i<=2m} U_{i,i+1}(l)) (prod_{i even, i<2m} U_{i,i+1}(l)) W for
    n = 2m+1, with W = U_w or a seeded Haar 4x4 on sites (n-1, n). W acts first.
    """
    if n < 3 or n % 2 == 0:
        raise InvalidSpecError(f"und_odd needs an odd number of qubits >= 3, got {n}")

    if inner == "uw":
        w = u_w(omega_variant).entries
    elif inner == "haar":
        if seed is None:
            raise InvalidSpecError("und_odd with a Haar inner gate needs a seed")
        w = haar_random(4, seed).entries
    else:
        raise InvalidSpecError(f"Unknown inner gate: {inner!r}")

    last = n - 1  # 2m
    g = u_lambda(lam).entries
    m = layer_product(n, [last], lambda _k, _i: w)
    even = [i for i in LayerParity.bonds(n, LayerParity.EVEN) if i < last]
    m = layer_product(n, even, lambda _k, _i: g, m)
    odd = [i for i in LayerParity.bonds(n, LayerParity.ODD) if i <= last]
    m = layer_product(n, odd, lambda _k, _i: g, m)
    return UnitaryMatrix(m)


# -----------------------------------------------------------------------------
# Spin-chain Hamiltonians
# -----------------------------------------------------------------------------


def dm_bond() -> HermitianMatrix:
    """(1/2)(sigma^y sigma^x - sigma^x sigma^y) on one bond."""
    return HermitianMatrix(0.5 * (kron(PAULI_Y, PAULI_X) - kron(PAULI_X, PAULI_Y)))


def heisenberg_bond() -> HermitianMatrix:
    """sigma^x sigma^x + sigma^y sigma^y + sigma^z sigma^z on one bond."""
    return HermitianMatrix(kron(PAULI_X, PAULI_X) + kron(PAULI_Y, PAULI_Y) + kron(PAULI_Z, PAULI_Z))


def chain_hamiltonian(n: int, parity: str, bond: HermitianMatrix) -> HermitianMatrix:
    """Sum of the bond term over every pair of the given parity (open chain)."""
    if n < 2:
        raise InvalidSiteError(f"A chain needs at least 2 sites, got {n}")
    pairs = LayerParity.bonds(n, parity)
    if not pairs:
        raise InvalidSiteError(f"No {parity} bonds in an open chain of {n} sites")
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i in pairs:
        h += embed_two_site_operator(as_array(bond), i, i + 1, n)
    return HermitianMatrix(h)


def dm_hamiltonian(n: int, parity: str) -> HermitianMatrix:
    return chain_hamiltonian(n, parity, dm_bond())


def heisenberg_hamiltonian(n: int, parity: str) -> HermitianMatrix:
    return chain_hamiltonian(n, parity, heisenberg_bond())


def u_dm(n: int, t: float) -> UnitaryMatrix:
    """e^{-i H_DM^odd t} e^{-i H_DM^even t}; the even factor acts first."""
    if n < 4 or n % 2:
        raise InvalidSpecError(f"u_dm needs an even number of qubits >= 4, got {n}")
    odd = hermitian_expm(dm_hamiltonian(n, LayerParity.ODD), t)
    even = hermitian_expm(dm_hamiltonian(n, LayerParity.EVEN), t)
    return odd @ even


def u_dm_h(n: int, t: float) -> UnitaryMatrix:
    """e^{-i H_DM^odd t} e^{-i H_H^even t}; the Heisenberg factor acts first."""
    if n < 3 or n % 2 == 0:
        raise InvalidSpecError(f"u_dm_h needs an odd number of qubits >= 3, got {n}")
    odd = hermitian_expm(dm_hamiltonian(n, LayerParity.ODD), t)
    even = hermitian_expm(heisenberg_hamiltonian(n, LayerParity.EVEN), t)
    return odd @ even
