import numpy as np
import pytest

from src.entpower.closed_form import max_closed_form
from src.entpower.config import settings
from src.entpower.exceptions import DimensionCapError, DimensionError, GridTooLargeError, InvalidSpecError
from src.entpower.ggm import ggm
from src.entpower.optimizer.ansatz import Ansatz, applicable_ansatze, fold_point
from src.entpower.optimizer.power import (
    brute_force_power,
    disentangling_power,
    entangling_power,
    power_gap,
)
from src.entpower.schemas import OptimizerConfig
from src.entpower.tensor_core import UnitaryMatrix, apply_unitary, product_state
from src.entpower.unitaries import diag_random, diag_single_phase, haar_random, make_rng, und_even, und_odd

FAST = OptimizerConfig(restarts=2, max_evals=800, seed=5)


def test_ansatz_expansions():
    thetas, xis = Ansatz.expand("edge-bulk", np.array([0.1, 0.2, 0.3]), 4)
    assert thetas.tolist() == [0.1, 0.2, 0.3, 0.1]
    assert xis.tolist() == [0.0] * 4

    thetas, _ = Ansatz.expand("odd-even", np.array([0.5, 1.5]), 5)
    assert thetas.tolist() == [0.5, 1.5, 0.5, 1.5, 0.5]

    thetas, xis = Ansatz.expand("full", np.arange(6.0), 3)
    assert thetas.tolist() == [0.0, 1.0, 2.0] and xis.tolist() == [3.0, 4.0, 5.0]

    assert Ansatz.num_params("symmetric", 6) == 1
    assert Ansatz.num_params("edge-bulk", 6) == 5
    assert Ansatz.num_params("full", 6) == 12
    with pytest.raises(InvalidSpecError):
        Ansatz.num_params("random", 3)


def test_applicable_ansatze_depend_on_diagonality():
    assert applicable_ansatze(True)[-1] == "no-phases"
    assert applicable_ansatze(False)[-1] == "full"


def test_fold_point_keeps_the_state():
    """
    Scenario:
    - angles outside the canonical box
    Expect:
    - folded angles inside [0, pi] x [0, 2pi), same state up to global phase
    """
    thetas = np.array([3 * np.pi / 2, -0.4, 7.0])
    xis = np.array([0.3, -1.0, 13.0])
    point = fold_point(thetas, xis)

    assert all(0.0 <= t <= np.pi for t in point.thetas)
    assert all(0.0 <= x < 2 * np.pi for x in point.xis)

    before = product_state(thetas, xis).amps
    after = product_state(point.thetas, point.xis).amps
    assert abs(abs(np.vdot(before, after)) - 1.0) <= 1e-12


def test_identity_has_zero_powers():
    u = UnitaryMatrix.identity(8)
    assert entangling_power(u, FAST).value <= 1e-9
    assert disentangling_power(u, FAST).value <= 1e-9
    assert power_gap(u, FAST) <= 1e-9
    assert entangling_power(und_even(4, 0.0), FAST).value <= 1e-9


def test_reported_value_is_achieved_by_argmax():
    u = haar_random(8, 17)
    result = entangling_power(u, FAST)
    recomputed = ggm(apply_unitary(u, product_state(result.argmax.thetas, result.argmax.xis))).value
    assert abs(recomputed - result.value) <= 1e-9
    assert result.argmax.num_qubits == 3
    assert result.evaluations > 0


def test_disentangling_is_entangling_of_adjoint():
    u = und_odd(3, 1.1)
    d = disentangling_power(u, FAST)
    e_adj = entangling_power(UnitaryMatrix(u.entries.conj().T), FAST)
    assert d.value == e_adj.value
    assert d.argmax == e_adj.argmax


def test_adjoint_involution():
    u = haar_random(4, 3)
    assert entangling_power(u.dagger().dagger(), FAST).value == entangling_power(u, FAST).value


def test_diagonal_matches_closed_form_and_equality():
    """
    Scenario:
    - U_{d,pi} on 3 qubits
    Expect:
    - E matches the maximized closed form, E = D within 2e-4
    """
    u = diag_single_phase(3, np.pi)
    e = entangling_power(u, FAST)
    d = disentangling_power(u, FAST)
    _, expected = max_closed_form(np.pi)

    assert abs(e.value - expected) <= 1e-6
    assert abs(e.value - d.value) <= 2e-4


def test_power_gap_of_random_diagonal_is_small():
    cfg = OptimizerConfig(restarts=6, max_evals=1500, seed=5)
    assert power_gap(diag_random(3, 21), cfg) <= 2e-4


def test_phases_do_not_matter_for_diagonal_unitaries():
    rng = make_rng(2)
    for seed in range(5):
        d = diag_random(4, seed)
        thetas = rng.uniform(0, np.pi, 4)
        xis = rng.uniform(0, 2 * np.pi, 4)
        with_phases = ggm(apply_unitary(d, product_state(thetas, xis))).value
        without = ggm(apply_unitary(d, product_state(thetas))).value
        assert abs(with_phases - without) <= 1e-10


def test_more_restarts_never_lower_the_value():
    u = haar_random(8, 99)
    few = entangling_power(u, OptimizerConfig(restarts=1, max_evals=600, seed=3)).value
    many = entangling_power(u, OptimizerConfig(restarts=3, max_evals=600, seed=3)).value
    assert many >= few - 1e-12


def test_thread_count_does_not_change_results():
    u = haar_random(8, 4)
    serial = entangling_power(u, OptimizerConfig(restarts=3, max_evals=500, seed=8, threads=1))
    threaded = entangling_power(u, OptimizerConfig(restarts=3, max_evals=500, seed=8, threads=3))
    assert serial.value == threaded.value
    assert serial.argmax == threaded.argmax
    assert serial.evaluations == threaded.evaluations


def test_global_search_phase_runs():
    cfg = OptimizerConfig(restarts=1, max_evals=400, seed=1, global_search=True, global_maxiter=5)
    result = entangling_power(haar_random(4, 6), cfg)
    plain = entangling_power(haar_random(4, 6), cfg.model_copy(update={"global_search": False}))
    assert 0.0 <= result.value <= 0.5
    assert result.value >= plain.value - 1e-12


def test_restricted_ansatz_list():
    cfg = OptimizerConfig(restarts=2, max_evals=400, seed=1, ansatze=["symmetric"])
    result = entangling_power(diag_single_phase(3, np.pi), cfg)
    assert result.ansatz_used == "symmetric"
    assert len(set(result.argmax.thetas)) == 1


def test_input_validation():
    with pytest.raises(DimensionError):
        entangling_power(np.eye(3), FAST)
    with pytest.raises(DimensionError):
        entangling_power(np.eye(2), FAST)


def test_qubit_cap(monkeypatch):
    monkeypatch.setattr(settings, "MAX_QUBITS", 2)
    with pytest.raises(DimensionCapError):
        entangling_power(UnitaryMatrix.identity(8), FAST)


def test_brute_force_oracle():
    assert brute_force_power(UnitaryMatrix.identity(8), 7) <= 1e-12

    u = diag_single_phase(3, np.pi)
    grid = brute_force_power(u, 60)
    assert abs(grid - entangling_power(u, FAST).value) <= 2e-3
    assert abs(brute_force_power(u, 61) - brute_force_power(u, 181)) <= 5e-3

    with pytest.raises(GridTooLargeError):
        brute_force_power(u, 1000)


def test_brute_force_lower_bounds_optimizer():
    u = und_odd(3, np.pi / 2)
    assert entangling_power(u, FAST).value >= brute_force_power(u, 25) - 1e-9
