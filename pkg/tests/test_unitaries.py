import logging
from functools import reduce

import numpy as np
import pytest

from src.entpower.exceptions import InvalidSiteError, InvalidSpecError
from src.entpower.tensor_core import PAULI_Z, hermitian_eigenvalues, is_diagonal, kron
from src.entpower.unitaries import (
    LayerParity,
    chain_hamiltonian,
    derive_seed,
    diag_random,
    diag_random_phases,
    diag_single_phase,
    dm_bond,
    dm_hamiltonian,
    haar_random,
    heisenberg_bond,
    heisenberg_hamiltonian,
    layer_product,
    u_dm,
    u_dm_h,
    u_lambda,
    u_w,
    und_even,
    und_odd,
)


def test_layer_parity_bonds_open_chain():
    assert LayerParity.bonds(5, LayerParity.ODD) == [1, 3]
    assert LayerParity.bonds(5, LayerParity.EVEN) == [2, 4]
    assert LayerParity.bonds(4, LayerParity.EVEN) == [2]
    assert LayerParity.bonds(2, LayerParity.EVEN) == []
    assert LayerParity.is_valid("odd") and not LayerParity.is_valid("both")

    with pytest.raises(InvalidSpecError):
        LayerParity.bonds(4, "both")


def test_diag_single_phase():
    u = diag_single_phase(3, np.pi)
    assert np.allclose(np.diag(u.entries), [1, 1, 1, 1, 1, 1, 1, -1])
    assert is_diagonal(u)

    with pytest.raises(InvalidSpecError):
        diag_single_phase(1, 0.3)


def test_diag_random_is_seeded():
    a, b, c = diag_random(3, 7), diag_random(3, 7), diag_random(3, 8)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)
    assert is_diagonal(a)


def test_u_lambda_action_on_01():
    lam = 0.9
    out = u_lambda(lam).entries @ np.array([0, 1, 0, 0])
    assert np.allclose(out, [0, np.cos(lam), -np.sin(lam), 0])
    assert np.allclose(u_lambda(0.0).entries, np.eye(4))


def test_u_w_exact_variant_is_unitary():
    m = u_w("exact").entries
    assert np.allclose(m @ m.conj().T, np.eye(4), atol=1e-12)


def test_u_w_cube_root_variant_is_projected(caplog):
    logger = logging.getLogger("entpower")
    logger.propagate = True
    try:
        with caplog.at_level(logging.WARNING, logger="entpower"):
            m = u_w("cube-root").entries
    finally:
        logger.propagate = False

    assert np.allclose(m @ m.conj().T, np.eye(4), atol=1e-10)
    assert any(r.getMessage() == "u_w_projected_to_unitary" for r in caplog.records)

    with pytest.raises(InvalidSpecError):
        u_w("sixth-root")


def test_haar_random_seeded_and_unitary():
    a, b = haar_random(8, 42), haar_random(8, 42)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, haar_random(8, 43).entries)
    assert np.allclose(a.entries @ a.entries.conj().T, np.eye(8), atol=1e-10)


def test_derive_seed_is_deterministic_and_spreads():
    assert derive_seed(1234, 0) == derive_seed(1234, 0)
    assert len({derive_seed(1234, k) for k in range(100)}) == 100


def test_und_even_examples():
    """
    Scenario:
    - und_even at lambda = 0 and lambda = pi/2 on 4 qubits
    Expect:
    - identity at 0; |0101> -> |0011> at pi/2 (even bond (2,3) acts first)
    """
    assert np.allclose(und_even(4, 0.0).entries, np.eye(16))
    m = und_even(4, np.pi / 2).entries
    assert abs(m[3, 5] - 1.0) <= 1e-12


def test_und_even_and_odd_parity_checks():
    with pytest.raises(InvalidSpecError):
        und_even(5, 0.3)
    with pytest.raises(InvalidSpecError):
        und_even(2, 0.3)
    with pytest.raises(InvalidSpecError):
        und_odd(4, 0.3)
    with pytest.raises(InvalidSpecError):
        und_odd(3, 0.3, inner="haar")


def test_und_odd_inner_gate_acts_on_last_pair():
    """At lambda = 0 only W on (n-1, n) remains."""
    w = u_w().entries
    assert np.allclose(und_odd(3, 0.0).entries, kron(np.eye(2), w))

    h = haar_random(4, 9).entries
    assert np.allclose(und_odd(3, 0.0, inner="haar", seed=9).entries, kron(np.eye(2), h))


def test_bond_spectra():
    assert np.allclose(hermitian_eigenvalues(dm_bond()), [1, 0, 0, -1], atol=1e-12)
    assert np.allclose(hermitian_eigenvalues(heisenberg_bond()), [1, 1, 1, -3], atol=1e-12)


def test_chain_hamiltonian_needs_bonds():
    with pytest.raises(InvalidSiteError):
        chain_hamiltonian(2, LayerParity.EVEN, dm_bond())
    with pytest.raises(InvalidSiteError):
        chain_hamiltonian(1, LayerParity.ODD, dm_bond())

    h = dm_hamiltonian(4, LayerParity.ODD)
    assert np.allclose(h.entries, h.entries.conj().T)


def test_hamiltonian_evolutions():
    assert np.allclose(u_dm(4, 0.0).entries, np.eye(16))
    assert np.allclose(u_dm_h(3, 0.0).entries, np.eye(8))

    with pytest.raises(InvalidSpecError):
        u_dm(3, 0.5)
    with pytest.raises(InvalidSpecError):
        u_dm_h(4, 0.5)


def test_dm_bond_period():
    """Both layer Hamiltonians have integer spectra, so t = 2pi is the identity."""
    u = u_dm(4, 2 * np.pi).entries
    assert np.allclose(u, np.eye(16), atol=1e-10)


def site_operator(op, site, n):
    return reduce(kron, [op if k == site else np.eye(2) for k in range(1, n + 1)])


def commutator_norm(a, b):
    return float(np.linalg.norm(a @ b - b @ a, ord="fro"))


def test_u_lambda_inverse_is_negative_angle():
    for lam in (0.3, 1.178, 2.9):
        u = u_lambda(lam).entries
        assert np.allclose(u.conj().T, u_lambda(-lam).entries, atol=1e-12)


@pytest.mark.parametrize("n", [4, 6])
def test_und_even_adjoint_reverses_layers(n):
    """
    Scenario:
    - und_even(n, lam) = odd layer after even layer of u_lambda(lam)
    Expect:
    - its adjoint is the even layer after the odd layer of u_lambda(-lam)
    """
    lam = 0.8
    g = u_lambda(-lam).entries
    m = layer_product(n, LayerParity.bonds(n, LayerParity.ODD), lambda _k, _i: g)
    m = layer_product(n, LayerParity.bonds(n, LayerParity.EVEN), lambda _k, _i: g, m)
    assert np.allclose(und_even(n, lam).entries.conj().T, m, atol=1e-12)


def test_hamiltonians_act_only_on_their_bonds():
    # odd layer on 5 qubits leaves site 5 alone; even layer on 4 qubits leaves sites 1 and 4 alone
    h = dm_hamiltonian(5, LayerParity.ODD).entries
    z = site_operator(PAULI_Z, 5, 5)
    assert np.allclose(z @ h @ z, h, atol=1e-12)

    h = heisenberg_hamiltonian(4, LayerParity.EVEN).entries
    for site in (1, 4):
        z = site_operator(PAULI_Z, site, 4)
        assert np.allclose(z @ h @ z, h, atol=1e-12)


def test_heisenberg_even_layer_on_three_qubits():
    expected = kron(np.eye(2), heisenberg_bond().entries)
    assert np.allclose(heisenberg_hamiltonian(3, LayerParity.EVEN).entries, expected, atol=1e-12)


def test_layer_hamiltonians_do_not_commute():
    odd = dm_hamiltonian(4, LayerParity.ODD).entries
    even = dm_hamiltonian(4, LayerParity.EVEN).entries
    assert commutator_norm(odd, even) > 0.1

    odd3 = dm_hamiltonian(3, LayerParity.ODD).entries
    even3 = heisenberg_hamiltonian(3, LayerParity.EVEN).entries
    assert commutator_norm(odd3, even3) > 0.1


def test_diagonal_families_commute():
    a = diag_single_phase(4, 1.3).entries
    b = diag_random(4, 11).entries
    assert np.allclose(a @ b, b @ a, atol=1e-14)


def test_diag_random_phases_are_standard_normal():
    samples = np.concatenate([diag_random_phases(5, derive_seed(3, k)) for k in range(200)])
    assert abs(samples.mean()) < 0.05
    assert abs(samples.std() - 1.0) < 0.05


def test_haar_trace_second_moment():
    """For Haar U in U(d), E|tr U|^2 = 1."""
    traces = np.array([abs(np.trace(haar_random(8, derive_seed(21, k)).entries)) ** 2 for k in range(2000)])
    assert abs(traces.mean() - 1.0) < 0.1


def test_paper_omega_name_is_the_exact_gate():
    assert np.array_equal(u_w("paper").entries, u_w("exact").entries)
