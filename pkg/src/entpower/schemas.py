from __future__ import annotations

import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from src.entpower.config import settings
from src.entpower.exceptions import InvalidSpecError

AnsatzName = Literal["full", "no-phases", "symmetric", "odd-even", "edge-bulk"]
ParityName = Literal["odd", "even"]

ANGLE_SLACK = 1e-12


class GgmResult(BaseModel):
    """
    Generalized geometric measure of a pure state together with the cut that
    realizes the largest reduced eigenvalue.
    """

    value: float = Field(..., ge=0.0, le=0.5)
    argmax_cut: tuple[int, ...] = Field(..., description="Kept sites (1-based) of the maximizing bipartition")
    max_eigenvalue: float = Field(..., ge=0.5, le=1.0)

    @model_validator(mode="after")
    def check_value_matches_eigenvalue(self) -> "GgmResult":
        if abs(self.value - (1.0 - self.max_eigenvalue)) > 1e-12:
            raise ValueError("value must equal 1 - max_eigenvalue")
        return self


class FSPoint(BaseModel):
    """
    Angles of a fully separable input,
    (x)_i cos(theta_i/2)|0> + e^{i xi_i} sin(theta_i/2)|1>.
    """

    thetas: List[float] = Field(..., description="Polar angles in [0, pi]")
    xis: List[float] = Field(..., description="Azimuthal phases in [0, 2pi)")

    @model_validator(mode="after")
    def check_angles(self) -> "FSPoint":
        if not self.thetas:
            raise ValueError("FSPoint needs at least one site")
        if len(self.thetas) != len(self.xis):
            raise ValueError("thetas and xis must have the same length")
        for theta in self.thetas:
            if not (-ANGLE_SLACK <= theta <= math.pi + ANGLE_SLACK):
                raise ValueError(f"theta {theta} outside [0, pi]")
        for xi in self.xis:
            if not (-ANGLE_SLACK <= xi < 2 * math.pi):
                raise ValueError(f"xi {xi} outside [0, 2pi)")
        return self

    @property
    def num_qubits(self) -> int:
        return len(self.thetas)


class OptimizerConfig(BaseModel):
    """Multi-start simplex settings. Defaults come from the global settings."""

    model_config = ConfigDict(extra="forbid")

    restarts: int = Field(default_factory=lambda: settings.RESTARTS, ge=1)
    max_evals: int = Field(default_factory=lambda: settings.MAX_EVALS, ge=1, description="Per simplex run")
    ftol: float = Field(1e-9, gt=0)
    xtol: float = Field(1e-8, gt=0)
    seed: int = Field(default_factory=lambda: settings.SEED)
    ansatze: Optional[List[AnsatzName]] = Field(
        None, description="Ansatz list to try; None means every applicable ansatz"
    )
    global_search: bool = Field(False, description="Run a differential-evolution pre-phase on the full box")
    global_maxiter: int = Field(100, ge=1)
    initial_step: float = Field(0.4, gt=0, description="Initial simplex edge in radians")
    stall_window: int = Field(50, ge=1)
    threads: int = Field(1, ge=1)

    @field_validator("ansatze")
    @classmethod
    def ensure_nonempty_ansatze(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None and len(value) == 0:
            raise ValueError("ansatze cannot be an empty list")
        return value


class PowerResult(BaseModel):
    value: float = Field(..., ge=0.0, le=0.5)
    argmax: FSPoint
    ansatz_used: AnsatzName
    evaluations: int
    restarts: int
    converged: bool


# -----------------------------------------------------------------------------
# Circuit descriptors
# -----------------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class FixedGate(_Strict):
    source: Literal["fixed"] = "fixed"
    gate: Literal["u_lambda", "u_w", "identity", "swap", "cnot", "matrix"]
    lam: Optional[float] = Field(None, alias="lambda")
    re: Optional[List[List[float]]] = None
    im: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_parameters(self) -> "FixedGate":
        if self.gate == "u_lambda" and self.lam is None:
            raise ValueError("u_lambda gate needs 'lambda'")
        if self.gate == "matrix" and self.re is None:
            raise ValueError("matrix gate needs 're' (and optionally 'im')")
        return self


class HamiltonianGate(_Strict):
    source: Literal["hamiltonian"] = "hamiltonian"
    bond: Literal["dm", "heisenberg"]
    t: float


class RandomHermitianGate(_Strict):
    source: Literal["random-hermitian"] = "random-hermitian"
    seed: int
    t: float


class HaarSharedGate(_Strict):
    source: Literal["haar-shared"] = "haar-shared"
    seed: int


class HaarPerBondGate(_Strict):
    source: Literal["haar-per-bond"] = "haar-per-bond"
    seed: int


GateSource = Annotated[
    Union[FixedGate, HamiltonianGate, RandomHermitianGate, HaarSharedGate, HaarPerBondGate],
    Field(discriminator="source"),
]


class LayerSpec(_Strict):
    parity: ParityName
    gate: GateSource


class CircuitSpec(_Strict):
    """Layers in action order: the first layer in the list acts first on states."""

    num_qubits: int = Field(..., ge=2)
    layers: List[LayerSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_layers_have_bonds(self) -> "CircuitSpec":
        for idx, layer in enumerate(self.layers):
            if layer.parity == "even" and self.num_qubits < 3:
                raise ValueError(f"layer {idx}: an even layer needs at least 3 qubits")
        return self


# -----------------------------------------------------------------------------
# Unitary specs
# -----------------------------------------------------------------------------


class IdentitySpec(_Strict):
    kind: Literal["identity"] = "identity"
    n: int = Field(..., ge=1)


class DiagPhaseSpec(_Strict):
    kind: Literal["diag-phase"] = "diag-phase"
    n: int = Field(..., ge=2)
    phi: float


class DiagRandomSpec(_Strict):
    kind: Literal["diag-random"] = "diag-random"
    n: int = Field(..., ge=2)
    seed: int


class NdEvenSpec(_Strict):
    kind: Literal["nd-even"] = "nd-even"
    n: int
    lam: float = Field(..., alias="lambda")

    @field_validator("n")
    @classmethod
    def ensure_even(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError("nd-even needs an even number of qubits >= 4")
        return value


class NdOddSpec(_Strict):
    kind: Literal["nd-odd"] = "nd-odd"
    n: int
    lam: float = Field(..., alias="lambda")
    inner: Literal["uw", "haar"] = "uw"
    seed: Optional[int] = None
    omega: Literal["exact", "paper", "cube-root"] = Field(default_factory=lambda: settings.OMEGA_VARIANT)

    @field_validator("n")
    @classmethod
    def ensure_odd(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError("nd-odd needs an odd number of qubits >= 3")
        return value

    @model_validator(mode="after")
    def check_seed(self) -> "NdOddSpec":
        if self.inner == "haar" and self.seed is None:
            raise ValueError("inner='haar' needs a seed")
        return self


class DmSpec(_Strict):
    kind: Literal["dm"] = "dm"
    n: int
    t: float

    @field_validator("n")
    @classmethod
    def ensure_even(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError("dm evolution needs an even number of qubits >= 4")
        return value


class DmHeisenbergSpec(_Strict):
    kind: Literal["dm-h"] = "dm-h"
    n: int
    t: float

    @field_validator("n")
    @classmethod
    def ensure_odd(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError("dm-h evolution needs an odd number of qubits >= 3")
        return value


class HaarSpec(_Strict):
    kind: Literal["haar"] = "haar"
    dim: int = Field(..., ge=2)
    seed: int

    @field_validator("dim")
    @classmethod
    def ensure_power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError("haar dim must be a power of two to act on qubits")
        return value


class BrickworkSpec(_Strict):
    kind: Literal["brickwork"] = "brickwork"
    circuit: CircuitSpec


UnitarySpec = Annotated[
    Union[
        IdentitySpec,
        DiagPhaseSpec,
        DiagRandomSpec,
        NdEvenSpec,
        NdOddSpec,
        DmSpec,
        DmHeisenbergSpec,
        HaarSpec,
        BrickworkSpec,
    ],
    Field(discriminator="kind"),
]

_unitary_spec_adapter: TypeAdapter = TypeAdapter(UnitarySpec)


def parse_unitary_spec(data: Any) -> UnitarySpec:
    """Validates a dict or JSON string into a UnitarySpec, raising InvalidSpecError."""
    try:
        if isinstance(data, (str, bytes)):
            return _unitary_spec_adapter.validate_json(data)
        return _unitary_spec_adapter.validate_python(data)
    except ValidationError as e:
        raise InvalidSpecError(str(e)) from e


def parse_circuit_spec(data: Any) -> CircuitSpec:
    try:
        if isinstance(data, (str, bytes)):
            return CircuitSpec.model_validate_json(data)
        return CircuitSpec.model_validate(data)
    except ValidationError as e:
        raise InvalidSpecError(str(e)) from e


def spec_num_qubits(spec: UnitarySpec) -> int:
    if isinstance(spec, HaarSpec):
        return spec.dim.bit_length() - 1
    if isinstance(spec, BrickworkSpec):
        return spec.circuit.num_qubits
    return spec.n


# -----------------------------------------------------------------------------
# Experiment outputs
# -----------------------------------------------------------------------------

CSV_COLUMNS = [
    "sweep_var",
    "value",
    "E",
    "D",
    "gap",
    "converged_E",
    "converged_D",
    "evals_E",
    "evals_D",
    "seed",
    "wall_ms",
]


class SweepRecord(BaseModel):
    """One row of a lambda-, t-, or sample-sweep."""

    unitary_spec: UnitarySpec
    sweep_var: str
    value: float
    E: float = Field(..., ge=0.0, le=0.5)
    D: float = Field(..., ge=0.0, le=0.5)
    gap: float = Field(..., ge=0.0)
    argmax_E: FSPoint
    argmax_D: FSPoint
    converged_E: bool
    converged_D: bool
    evals_E: int
    evals_D: int
    seed: int
    wall_ms: float

    @model_validator(mode="after")
    def check_gap(self) -> "SweepRecord":
        if abs(self.gap - abs(self.E - self.D)) > 1e-12:
            raise ValueError("gap must equal |E - D|")
        return self

    def csv_row(self) -> Dict[str, Any]:
        return {
            "sweep_var": self.sweep_var,
            "value": repr(float(self.value)),
            "E": repr(float(self.E)),
            "D": repr(float(self.D)),
            "gap": repr(float(self.gap)),
            "converged_E": int(self.converged_E),
            "converged_D": int(self.converged_D),
            "evals_E": self.evals_E,
            "evals_D": self.evals_D,
            "seed": self.seed,
            "wall_ms": f"{self.wall_ms:.3f}",
        }


class RunManifest(BaseModel):
    tool_version: str
    config_hash: str
    prng_algorithm: str
    started_at: str
    finished_at: str
    host: str
    command: str
    config: Dict[str, Any]
    output: Optional[str] = None
    rows: int = 0


class VerifySuiteResult(BaseModel):
    name: str
    passed: bool
    checks: int
    failures: int
    details: List[str] = Field(default_factory=list)


class VerifyReport(BaseModel):
    passed: bool
    suites: List[VerifySuiteResult]


class SweepJob(BaseModel):
    """
    Everything needed to regenerate one CSV. Stored in the run manifest so
    replay can rebuild the rows.
    """

    model_config = ConfigDict(extra="forbid")

    command: Literal["scan-lambda", "scan-time", "random-scatter", "circuit"]
    kind: Optional[str] = None
    n: Optional[int] = Field(None, ge=2)
    dim: Optional[int] = Field(None, ge=2)
    grid: Optional[int] = Field(None, ge=2)
    samples: int = Field(1, ge=1)
    seed: int = Field(default_factory=lambda: settings.SEED)
    inner: Literal["uw", "haar"] = "uw"
    omega: Literal["exact", "paper", "cube-root"] = Field(default_factory=lambda: settings.OMEGA_VARIANT)
    mode: Optional[Literal["shared", "distinct", "per-bond"]] = None
    depth: int = Field(2, ge=1)
    circuit: Optional[CircuitSpec] = None
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)


class ReplayReport(BaseModel):
    manifest: str
    output: Optional[str]
    config_hash_ok: bool
    rows: int
    matches: bool
    mismatched_rows: List[int] = Field(default_factory=list)
