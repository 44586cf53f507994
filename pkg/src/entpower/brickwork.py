from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from src.entpower.config import settings
from src.entpower.exceptions import DimensionCapError, InvalidSiteError, InvalidSpecError
from src.entpower.logging_setup import logger
from src.entpower.optimizer.power import power_service
from src.entpower.schemas import (
    BrickworkSpec,
    CircuitSpec,
    FixedGate,
    HaarPerBondGate,
    HaarSharedGate,
    HamiltonianGate,
    LayerSpec,
    OptimizerConfig,
    RandomHermitianGate,
    SweepRecord,
    parse_circuit_spec,
)
from src.entpower.tensor_core import UnitaryMatrix, hermitian_expm
from src.entpower.unitaries import (
    LayerParity,
    derive_seed,
    dm_bond,
    haar_random,
    heisenberg_bond,
    layer_product,
    random_hermitian,
    u_lambda,
    u_w,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

PRESET_MODES = ("shared", "distinct", "per-bond")


def fixed_gate_matrix(gate: FixedGate) -> np.ndarray:
    if gate.gate == "u_lambda":
        return u_lambda(gate.lam).entries
    if gate.gate == "u_w":
        return u_w().entries
    if gate.gate == "identity":
        return np.eye(4, dtype=complex)
    if gate.gate == "swap":
        return SWAP
    if gate.gate == "cnot":
        return CNOT

    re = np.asarray(gate.re, dtype=float)
    im = np.zeros_like(re) if gate.im is None else np.asarray(gate.im, dtype=float)
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise InvalidSpecError(f"matrix gate must be 4x4, got re {re.shape} and im {im.shape}")
    return UnitaryMatrix(re + 1j * im).entries


def layer_bond_gates(layer: LayerSpec, n: int) -> List[Tuple[int, np.ndarray]]:
    """
    (i, gate) for every bond (i, i+1) of the layer. Shared sources are built
    once; haar-per-bond draws bond k from the seed derived from (seed, k).
    """
    bonds = LayerParity.bonds(n, layer.parity)
    if not bonds:
        raise InvalidSiteError(f"{layer.parity} layer has no bonds on {n} qubits")

    source = layer.gate
    if isinstance(source, HaarPerBondGate):
        return [(i, haar_random(4, derive_seed(source.seed, k)).entries) for k, i in enumerate(bonds)]

    if isinstance(source, FixedGate):
        g = fixed_gate_matrix(source)
    elif isinstance(source, HamiltonianGate):
        bond = dm_bond() if source.bond == "dm" else heisenberg_bond()
        g = hermitian_expm(bond, source.t).entries
    elif isinstance(source, RandomHermitianGate):
        g = hermitian_expm(random_hermitian(4, source.seed), source.t).entries
    elif isinstance(source, HaarSharedGate):
        g = haar_random(4, source.seed).entries
    else:
        raise InvalidSpecError(f"Unknown gate source: {source!r}")
    return [(i, g) for i in bonds]


def build_circuit_unitary(c: CircuitSpec) -> UnitaryMatrix:
    """
    Global unitary of the circuit. Layer k of c.layers acts k-th on states, so
    as a matrix product the first layer is the rightmost factor.
    """
    n = c.num_qubits
    if n > settings.MAX_QUBITS:
        raise DimensionCapError(f"{n} qubits exceeds the cap of {settings.MAX_QUBITS}")

    m = np.eye(2 ** n, dtype=complex)
    for layer in c.layers:
        gates = dict(layer_bond_gates(layer, n))
        m = layer_product(n, list(gates), lambda _k, i: gates[i], m)
    return UnitaryMatrix(m)


def _adjoint_source(source):
    if isinstance(source, (HamiltonianGate, RandomHermitianGate)):
        # exp(-iHt)^dagger = exp(-iH(-t))
        return source.model_copy(update={"t": -source.t})
    if isinstance(source, FixedGate):
        g = fixed_gate_matrix(source).conj().T
    elif isinstance(source, HaarSharedGate):
        g = haar_random(4, source.seed).entries.conj().T
    else:
        raise InvalidSpecError("haar-per-bond layers have no single-gate adjoint")
    return FixedGate(gate="matrix", re=g.real.tolist(), im=g.imag.tolist())


def adjoint_circuit(c: CircuitSpec) -> CircuitSpec:
    """Circuit for build_circuit_unitary(c)^dagger: layers reversed, bond gates inverted."""
    layers = [LayerSpec(parity=layer.parity, gate=_adjoint_source(layer.gate)) for layer in reversed(c.layers)]
    return CircuitSpec(num_qubits=c.num_qubits, layers=layers)


def preset_circuit(n: int, mode: str, seed: int, depth: int = 2) -> CircuitSpec:
    """
    Alternating odd/even layers of Haar two-qubit gates, odd layer first.

    shared: one gate on every bond of every layer.
    distinct: one gate per layer, seeded from (seed, layer).
    per-bond: an independent gate on every bond, layer seeds from (seed, layer).
    """
    if mode not in PRESET_MODES:
        raise InvalidSpecError(f"Unknown circuit mode: {mode!r}. Must be one of {PRESET_MODES}")
    if depth < 1:
        raise InvalidSpecError(f"depth must be >= 1, got {depth}")

    layers = []
    for k in range(depth):
        parity = LayerParity.ODD if k % 2 == 0 else LayerParity.EVEN
        if mode == "shared":
            gate = {"source": "haar-shared", "seed": seed}
        elif mode == "distinct":
            gate = {"source": "haar-shared", "seed": derive_seed(seed, k)}
        else:
            gate = {"source": "haar-per-bond", "seed": derive_seed(seed, k)}
        layers.append({"parity": parity, "gate": gate})

    return parse_circuit_spec({"num_qubits": n, "layers": layers})


def circuit_power_gap(
    c: CircuitSpec,
    cfg: Optional[OptimizerConfig] = None,
    seed: Optional[int] = None,
) -> SweepRecord:
    """E, D and the gap of the composed circuit unitary; sweep variable is the depth."""
    u = build_circuit_unitary(c)
    record = power_service.sweep_record(
        spec=BrickworkSpec(circuit=c),
        u=u,
        sweep_var="depth",
        value=float(len(c.layers)),
        seed=seed if seed is not None else (cfg.seed if cfg is not None else settings.SEED),
        cfg=cfg,
    )

    logger.info(
        "circuit_power_computed",
        extra={"num_qubits": c.num_qubits, "depth": len(c.layers), "gap": record.gap},
    )
    return record
