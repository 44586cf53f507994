from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter
from typing import List, Optional

import numpy as np
import scipy.optimize

from src.entpower.config import settings
from src.entpower.exceptions import DimensionCapError, DimensionError, GridTooLargeError
from src.entpower.ggm import ggm_value, ggm_values_batch
from src.entpower.logging_setup import logger
from src.entpower.optimizer.ansatz import (
    ANSATZ_INDEX,
    FULL_ANSATZE,
    REDUCED_ANSATZE,
    Ansatz,
    applicable_ansatze,
    fold_point,
)
from src.entpower.schemas import OptimizerConfig, PowerResult, SweepRecord, UnitarySpec
from src.entpower.tensor_core import UnitaryMatrix, is_diagonal, product_amplitudes, qubit_amplitudes
from src.entpower.unitaries import make_rng

BRUTE_FORCE_LIMIT = 10 ** 8
BRUTE_FORCE_CHUNK = 4096

# Index used for the PRNG stream of the optional global pre-phase.
GLOBAL_STREAM = 99


def check_unitary(u: UnitaryMatrix | np.ndarray) -> UnitaryMatrix:
    """Validates the operand of a power computation and enforces the qubit cap."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(np.asarray(u, dtype=complex))
    n = u.num_qubits
    if n < 2:
        raise DimensionError(f"Powers need at least 2 qubits, got {n}")
    if n > settings.MAX_QUBITS:
        raise DimensionCapError(f"{n} qubits exceeds the cap of {settings.MAX_QUBITS}")
    return u


class _Objective:
    """Negative GGM of U|psi(x)> for one ansatz; tracks the best-so-far trace."""

    def __init__(self, u: np.ndarray, n: int, ansatz: str) -> None:
        self.u = u
        self.n = n
        self.ansatz = ansatz
        self.evaluations = 0
        self.best = -np.inf
        self.trace: List[float] = []

    def value_at(self, x: np.ndarray) -> float:
        thetas, xis = Ansatz.expand(self.ansatz, x, self.n)
        return ggm_value(self.u @ product_amplitudes(thetas, xis), self.n)

    def __call__(self, x: np.ndarray) -> float:
        value = self.value_at(x)
        self.evaluations += 1
        self.best = max(self.best, value)
        self.trace.append(self.best)
        return -value


@dataclass
class _RunOutcome:
    ansatz: str
    x: np.ndarray
    value: float
    evaluations: int
    converged: bool


@dataclass
class MultiStartOptimizer:
    """
    Maximizes GGM(U|psi_FS>) by multi-start Nelder-Mead over the configured
    ansaetze. Restart k runs every reduced ansatz from a random start, one
    random full-type run, and one full-type polish seeded from the best
    reduced point of restart k. All PRNG streams derive from
    (seed, ansatz, k), so results do not depend on thread count.
    """

    u: UnitaryMatrix
    cfg: OptimizerConfig
    n: int = field(init=False)
    reduced: List[str] = field(init=False)
    full_kinds: List[str] = field(init=False)

    def __post_init__(self) -> None:
        self.n = self.u.num_qubits
        names = self.cfg.ansatze or applicable_ansatze(is_diagonal(self.u))
        self.reduced = [a for a in REDUCED_ANSATZE if a in names]
        self.full_kinds = [a for a in FULL_ANSATZE if a in names]

    def _simplex(self, ansatz: str, x0: np.ndarray) -> _RunOutcome:
        objective = _Objective(self.u.entries, self.n, ansatz)
        x0 = np.asarray(x0, dtype=float)
        simplex = np.vstack([x0, x0 + self.cfg.initial_step * np.eye(x0.size)])
        res = scipy.optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": self.cfg.max_evals,
                "xatol": self.cfg.xtol,
                "fatol": self.cfg.ftol,
                "initial_simplex": simplex,
                "adaptive": x0.size > 2,
            },
        )

        vertices = res.final_simplex[0]
        diameter = float(np.max(np.abs(vertices[1:] - vertices[0]))) if len(vertices) > 1 else 0.0
        window = self.cfg.stall_window
        stable = (
            len(objective.trace) >= window
            and objective.trace[-1] - objective.trace[-window] <= self.cfg.ftol
        )

        return _RunOutcome(
            ansatz=ansatz,
            x=np.asarray(res.x, dtype=float),
            value=-float(res.fun),
            evaluations=objective.evaluations,
            converged=diameter <= self.cfg.xtol and stable,
        )

    def _restart(self, k: int) -> List[_RunOutcome]:
        outcomes: List[_RunOutcome] = []
        for ansatz in self.reduced:
            rng = make_rng([self.cfg.seed, ANSATZ_INDEX[ansatz], k])
            outcomes.append(self._simplex(ansatz, Ansatz.random_start(ansatz, self.n, rng)))

        best_reduced = max(outcomes, key=lambda o: o.value) if outcomes else None

        for kind in self.full_kinds:
            rng = make_rng([self.cfg.seed, ANSATZ_INDEX[kind], k])
            outcomes.append(self._simplex(kind, Ansatz.random_start(kind, self.n, rng)))
            if best_reduced is not None:
                thetas, xis = Ansatz.expand(best_reduced.ansatz, best_reduced.x, self.n)
                outcomes.append(self._simplex(kind, Ansatz.contract(kind, thetas, xis)))

        return outcomes

    def _global_phase(self) -> List[_RunOutcome]:
        kind = "full" if "full" in self.full_kinds else (self.full_kinds or ["no-phases"])[0]
        objective = _Objective(self.u.entries, self.n, kind)
        res = scipy.optimize.differential_evolution(
            objective,
            bounds=Ansatz.bounds(kind, self.n),
            maxiter=self.cfg.global_maxiter,
            seed=make_rng([self.cfg.seed, GLOBAL_STREAM]),
            polish=False,
            tol=self.cfg.ftol,
        )
        polished = self._simplex(kind, res.x)
        polished.evaluations += objective.evaluations
        return [polished]

    def run(self) -> PowerResult:
        if self.cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
                per_restart = list(pool.map(self._restart, range(self.cfg.restarts)))
        else:
            per_restart = [self._restart(k) for k in range(self.cfg.restarts)]

        outcomes = [o for batch in per_restart for o in batch]
        if self.cfg.global_search:
            outcomes.extend(self._global_phase())

        # first maximum wins, so ties resolve by restart then ansatz order
        best = max(outcomes, key=lambda o: o.value)
        thetas, xis = Ansatz.expand(best.ansatz, best.x, self.n)
        point = fold_point(thetas, xis)
        value = ggm_value(
            self.u.entries @ product_amplitudes(np.array(point.thetas), np.array(point.xis)),
            self.n,
        )

        return PowerResult(
            value=value,
            argmax=point,
            ansatz_used=best.ansatz,
            evaluations=sum(o.evaluations for o in outcomes),
            restarts=self.cfg.restarts,
            converged=best.converged,
        )


def brute_force_power(u: UnitaryMatrix | np.ndarray, grid_per_angle: int, include_phases: bool = False) -> float:
    """
    Max GGM over the regular grid of thetas on [0, pi] (and xis on [0, 2pi)
    when include_phases). A lower bound on the entangling power.
    """
    u = check_unitary(u)
    n = u.num_qubits
    if grid_per_angle < 1:
        raise GridTooLargeError("grid_per_angle must be positive")
    params = n * (2 if include_phases else 1)
    if grid_per_angle ** params > BRUTE_FORCE_LIMIT:
        raise GridTooLargeError(
            f"{grid_per_angle}^{params} grid points exceed the limit of {BRUTE_FORCE_LIMIT}"
        )

    theta_grid = np.linspace(0.0, np.pi, grid_per_angle)
    xi_grid = np.linspace(0.0, 2 * np.pi, grid_per_angle, endpoint=False)
    shape = (grid_per_angle,) * params
    total = grid_per_angle ** params
    u_t = u.entries.T

    best = 0.0
    for start in range(0, total, BRUTE_FORCE_CHUNK):
        idx = np.stack(np.unravel_index(np.arange(start, min(start + BRUTE_FORCE_CHUNK, total)), shape), axis=1)
        thetas = theta_grid[idx[:, :n]]
        xis = xi_grid[idx[:, n:]] if include_phases else np.zeros_like(thetas)
        qubits = qubit_amplitudes(thetas, xis)  # (B, n, 2)
        amps = qubits[:, 0, :]
        for k in range(1, n):
            amps = (amps[:, :, None] * qubits[:, k, None, :]).reshape(amps.shape[0], -1)
        best = max(best, float(np.max(ggm_values_batch(amps @ u_t, n))))

    return best


@dataclass
class PowerService:
    """
    Service class for entangling/disentangling power computations.
    Holds the default optimizer configuration.
    """

    default_config: Optional[OptimizerConfig] = None

    def _config(self, cfg: Optional[OptimizerConfig]) -> OptimizerConfig:
        if cfg is not None:
            return cfg
        if self.default_config is None:
            self.default_config = OptimizerConfig()
        return self.default_config

    def entangling_power(self, u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> PowerResult:
        """max over fully separable inputs of GGM(U |psi_FS>)."""
        u = check_unitary(u)
        cfg = self._config(cfg)
        started = perf_counter()
        result = MultiStartOptimizer(u=u, cfg=cfg).run()

        logger.info(
            "power_computed",
            extra={
                "num_qubits": u.num_qubits,
                "value": result.value,
                "ansatz_used": result.ansatz_used,
                "evaluations": result.evaluations,
                "converged": result.converged,
                "wall_ms": round(1000 * (perf_counter() - started), 3),
            },
        )
        return result

    def disentangling_power(self, u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> PowerResult:
        """Entangling power of U^dagger."""
        return self.entangling_power(check_unitary(u).dagger(), cfg)

    def power_gap(self, u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> float:
        """|E(U) - D(U)| with both powers under the same configuration."""
        u = check_unitary(u)
        cfg = self._config(cfg)
        return abs(self.entangling_power(u, cfg).value - self.disentangling_power(u, cfg).value)

    def sweep_record(
        self,
        spec: UnitarySpec,
        u: UnitaryMatrix,
        sweep_var: str,
        value: float,
        seed: int,
        cfg: Optional[OptimizerConfig] = None,
    ) -> SweepRecord:
        """E, D and their gap for one sweep point, timed."""
        cfg = self._config(cfg)
        started = perf_counter()
        e = self.entangling_power(u, cfg)
        d = self.disentangling_power(u, cfg)
        return SweepRecord(
            unitary_spec=spec,
            sweep_var=sweep_var,
            value=value,
            E=e.value,
            D=d.value,
            gap=abs(e.value - d.value),
            argmax_E=e.argmax,
            argmax_D=d.argmax,
            converged_E=e.converged,
            converged_D=d.converged,
            evals_E=e.evaluations,
            evals_D=d.evaluations,
            seed=seed,
            wall_ms=1000 * (perf_counter() - started),
        )


# Creating a global power service instance
power_service = PowerService()


def entangling_power(u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> PowerResult:
    return power_service.entangling_power(u, cfg)


def disentangling_power(u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> PowerResult:
    return power_service.disentangling_power(u, cfg)


def power_gap(u: UnitaryMatrix | np.ndarray, cfg: Optional[OptimizerConfig] = None) -> float:
    return power_service.power_gap(u, cfg)
