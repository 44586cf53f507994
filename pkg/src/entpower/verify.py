from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from src.entpower import closed_form
from src.entpower.config import settings
from src.entpower.exceptions import EntPowerError
from src.entpower.ggm import ggm
from src.entpower.logging_setup import logger
from src.entpower.optimizer.power import brute_force_power, power_service
from src.entpower.schemas import OptimizerConfig, VerifyReport, VerifySuiteResult
from src.entpower.tensor_core import (
    PureState,
    UnitaryMatrix,
    apply_unitary,
    named_state,
    partial_trace,
    product_state,
)
from src.entpower.unitaries import (
    LayerParity,
    diag_single_phase,
    dm_hamiltonian,
    haar_random,
    heisenberg_hamiltonian,
    make_rng,
    u_dm,
    u_dm_h,
    u_lambda,
    u_w,
    und_even,
    und_odd,
)

ENTRY_ATOL = 1e-12
EIGEN_ATOL = 1e-10
EVEN_PHI_ATOL = 1e-10
ORACLE_SLACK = 5e-3
CLOSED_FORM_ATOL = 1e-6

MAX_DETAILS = 20


@dataclass
class _Checks:
    """Accumulates check outcomes of one suite."""

    name: str
    checks: int = 0
    failures: int = 0
    details: List[str] = field(default_factory=list)

    def check(self, ok: bool, detail: str) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            if len(self.details) < MAX_DETAILS:
                self.details.append(detail)

    def result(self) -> VerifySuiteResult:
        return VerifySuiteResult(
            name=self.name,
            passed=self.failures == 0,
            checks=self.checks,
            failures=self.failures,
            details=self.details,
        )


def _fs_output(u: UnitaryMatrix, thetas: np.ndarray) -> PureState:
    return apply_unitary(u, product_state(thetas))


def suite_ggm_named_states(c: _Checks, cfg: OptimizerConfig) -> None:
    for n in range(2, 7):
        value = ggm(named_state("ghz", n)).value
        c.check(abs(value - 0.5) <= 1e-12, f"ghz n={n}: {value}")
        value = ggm(named_state("product", n)).value
        c.check(abs(value) <= 1e-12, f"product n={n}: {value}")
        value = ggm(named_state("plus", n)).value
        c.check(abs(value) <= 1e-12, f"plus n={n}: {value}")
    value = ggm(named_state("w", 3)).value
    c.check(abs(value - 1 / 3) <= 1e-12, f"w n=3: {value}")


def suite_closed_form_entries(c: _Checks, cfg: OptimizerConfig, samples: int = 1000) -> None:
    rng = make_rng([cfg.seed, 1])
    for _ in range(samples):
        thetas = rng.uniform(0.0, np.pi, 3)
        phi = rng.uniform(0.0, 2 * np.pi)
        state = _fs_output(diag_single_phase(3, phi), thetas)
        for i in (1, 2, 3):
            entries = closed_form.rho3_entries(i, thetas, phi)
            numeric = partial_trace(state, [i]).entries
            err = float(np.max(np.abs(entries.matrix() - numeric)))
            c.check(err <= ENTRY_ATOL, f"rho3 site {i} at {thetas.tolist()}, phi={phi}: err {err:.3e}")

        theta = float(thetas[0])
        lam_plus, lam_minus = closed_form.eigvals3(theta, phi)
        symmetric = _fs_output(diag_single_phase(3, phi), np.full(3, theta))
        numeric_top = float(np.linalg.eigvalsh(partial_trace(symmetric, [1]).entries)[-1])
        c.check(abs(lam_plus - numeric_top) <= EIGEN_ATOL, f"eigvals3({theta}, {phi}) = {lam_plus} vs {numeric_top}")
        c.check(abs(lam_plus + lam_minus - 1.0) <= 1e-12, f"eigvals3({theta}, {phi}) does not sum to 1")

        g = ggm(symmetric).value
        c.check(abs((1.0 - lam_plus) - g) <= EIGEN_ATOL, f"1 - lambda_+ = {1 - lam_plus} vs ggm {g} at theta={theta}, phi={phi}")

    for n in range(2, 7):
        for _ in range(20):
            thetas = rng.uniform(0.0, np.pi, n)
            phi = rng.uniform(0.0, 2 * np.pi)
            state = _fs_output(diag_single_phase(n, phi), thetas)
            for i in range(1, n + 1):
                err = float(np.max(np.abs(closed_form.rho_entries_n(i, thetas, phi).matrix() - partial_trace(state, [i]).entries)))
                c.check(err <= ENTRY_ATOL, f"rho_entries_n n={n} site {i}: err {err:.3e}")


def suite_closed_form_symmetry(c: _Checks, cfg: OptimizerConfig) -> None:
    for phi in np.linspace(0.0, 2 * np.pi, 64, endpoint=False):
        _, plus = closed_form.max_closed_form(phi)
        _, minus = closed_form.max_closed_form(-phi)
        c.check(abs(plus - minus) <= EVEN_PHI_ATOL, f"max_closed_form not even at phi={phi}: {plus} vs {minus}")

    for theta in np.linspace(0.0, np.pi, 17):
        for phi in (0.3, 1.7, np.pi):
            a, b = closed_form.a_expr3(theta, phi), closed_form.a_expr3(theta, 2 * np.pi - phi)
            c.check(abs(a - b) <= 1e-12 * max(1.0, abs(a)), f"a_expr3 asymmetric at theta={theta}, phi={phi}")


def suite_stationarity(c: _Checks, cfg: OptimizerConfig) -> None:
    root = float(np.arccos(1 - np.sqrt(2)))
    c.check(closed_form.stationarity_check([root, root, root]), f"equal-angle root {root} not stationary")
    c.check(not closed_form.stationarity_check([0.0, 0.0, 0.0]), "theta = 0 reported stationary")
    c.check(closed_form.curvature_check([root, root, root], np.pi), "curvature inequality fails at the root")
    c.check(not closed_form.curvature_check([root, root, root], 0.0), "curvature inequality holds at phi = 0")


def suite_zoo_unitarity(c: _Checks, cfg: OptimizerConfig) -> None:
    builders: List[tuple[str, Callable[[], UnitaryMatrix]]] = [
        ("u_lambda", lambda: u_lambda(0.7)),
        ("u_w", lambda: u_w()),
        ("haar4", lambda: haar_random(4, cfg.seed)),
        ("und_even4", lambda: und_even(4, 1.1)),
        ("und_odd3", lambda: und_odd(3, 1.1)),
        ("und_odd5_haar", lambda: und_odd(5, 0.4, inner="haar", seed=cfg.seed)),
        ("u_dm4", lambda: u_dm(4, 0.8)),
        ("u_dm_h3", lambda: u_dm_h(3, 0.8)),
    ]
    for name, build in builders:
        try:
            u = build().entries
            err = float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])))
            c.check(err <= 1e-10, f"{name}: ||UU^dagger - I|| = {err:.3e}")
        except EntPowerError as e:
            c.check(False, f"{name}: {e}")

    for n in (3, 4, 5):
        for parity in (LayerParity.ODD, LayerParity.EVEN):
            for h in (dm_hamiltonian(n, parity), heisenberg_hamiltonian(n, parity)):
                m = h.entries
                c.check(bool(np.allclose(m, m.conj().T, atol=1e-12)), f"{parity} Hamiltonian on {n} sites not Hermitian")


def suite_optimizer_vs_closed_form(c: _Checks, cfg: OptimizerConfig) -> None:
    for phi in (np.pi / 2, np.pi):
        _, expected = closed_form.max_closed_form(phi)
        got = power_service.entangling_power(diag_single_phase(3, phi), cfg).value
        c.check(abs(got - expected) <= CLOSED_FORM_ATOL, f"E(U_d, phi={phi}) = {got} vs closed form {expected}")


def suite_oracle_consistency(c: _Checks, cfg: OptimizerConfig, grid: int = 61) -> None:
    diagonal = [("diag_phase_pi", diag_single_phase(3, np.pi)), ("diag_phase_half_pi", diag_single_phase(3, np.pi / 2))]
    for name, u in diagonal:
        oracle = brute_force_power(u, grid)
        got = power_service.entangling_power(u, cfg).value
        c.check(oracle - 1e-9 <= got <= oracle + ORACLE_SLACK, f"{name}: optimizer {got} vs grid {oracle}")

    # the phase-free grid only lower-bounds non-diagonal unitaries
    for name, u in [("und_odd3", und_odd(3, np.pi / 2)), ("u_dm_h3", u_dm_h(3, np.pi / 3))]:
        oracle = brute_force_power(u, grid)
        got = power_service.entangling_power(u, cfg).value
        c.check(got >= oracle - 1e-9, f"{name}: optimizer {got} below grid {oracle}")


SUITES = [
    ("ggm-named-states", suite_ggm_named_states),
    ("closed-form-entries", suite_closed_form_entries),
    ("closed-form-symmetry", suite_closed_form_symmetry),
    ("stationarity", suite_stationarity),
    ("zoo-unitarity", suite_zoo_unitarity),
    ("optimizer-vs-closed-form", suite_optimizer_vs_closed_form),
    ("oracle-consistency", suite_oracle_consistency),
]


def default_verify_config(seed: Optional[int] = None) -> OptimizerConfig:
    return OptimizerConfig(restarts=4, max_evals=2000, seed=settings.SEED if seed is None else seed)


def run_verify(cfg: Optional[OptimizerConfig] = None, only: Optional[List[str]] = None) -> VerifyReport:
    """Runs every suite (or the named ones); a suite that raises counts as one failure."""
    cfg = cfg or default_verify_config()
    results = []
    for name, suite in SUITES:
        if only is not None and name not in only:
            continue
        checks = _Checks(name=name)
        try:
            suite(checks, cfg)
        except EntPowerError as e:
            checks.check(False, f"{type(e).__name__}: {e}")
        result = checks.result()
        logger.info(
            "verify_suite_done",
            extra={"suite": name, "passed": result.passed, "checks": result.checks, "failures": result.failures},
        )
        results.append(result)

    return VerifyReport(passed=all(r.passed for r in results), suites=results)
