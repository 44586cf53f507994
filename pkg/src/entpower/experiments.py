from __future__ import annotations

import hashlib
import json
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import pydantic
import scipy

from src.entpower import __version__
from src.entpower.brickwork import build_circuit_unitary, preset_circuit
from src.entpower.config import settings
from src.entpower.exceptions import DimensionCapError, InvalidSpecError
from src.entpower.logging_setup import logger
from src.entpower.optimizer.power import power_service
from src.entpower.schemas import (
    CSV_COLUMNS,
    BrickworkSpec,
    DiagPhaseSpec,
    DiagRandomSpec,
    DmHeisenbergSpec,
    DmSpec,
    HaarSpec,
    IdentitySpec,
    NdEvenSpec,
    NdOddSpec,
    OptimizerConfig,
    ReplayReport,
    RunManifest,
    SweepJob,
    SweepRecord,
    UnitarySpec,
    parse_unitary_spec,
    spec_num_qubits,
)
from src.entpower.tensor_core import UnitaryMatrix
from src.entpower.unitaries import (
    derive_seed,
    diag_random,
    diag_single_phase,
    haar_random,
    u_dm,
    u_dm_h,
    und_even,
    und_odd,
)

DEFAULT_LAMBDA_GRID = 97
DEFAULT_TIME_GRID = 65


def build_unitary(spec: UnitarySpec) -> UnitaryMatrix:
    """Dispatches a validated UnitarySpec to its constructor."""
    n = spec_num_qubits(spec)
    if n > settings.MAX_QUBITS:
        raise DimensionCapError(f"{n} qubits exceeds the cap of {settings.MAX_QUBITS}")

    if isinstance(spec, IdentitySpec):
        u = UnitaryMatrix.identity(2 ** spec.n)
    elif isinstance(spec, DiagPhaseSpec):
        u = diag_single_phase(spec.n, spec.phi)
    elif isinstance(spec, DiagRandomSpec):
        u = diag_random(spec.n, spec.seed)
    elif isinstance(spec, NdEvenSpec):
        u = und_even(spec.n, spec.lam)
    elif isinstance(spec, NdOddSpec):
        u = und_odd(spec.n, spec.lam, inner=spec.inner, seed=spec.seed, omega_variant=spec.omega)
    elif isinstance(spec, DmSpec):
        u = u_dm(spec.n, spec.t)
    elif isinstance(spec, DmHeisenbergSpec):
        u = u_dm_h(spec.n, spec.t)
    elif isinstance(spec, HaarSpec):
        u = haar_random(spec.dim, spec.seed)
    elif isinstance(spec, BrickworkSpec):
        u = build_circuit_unitary(spec.circuit)
    else:
        raise InvalidSpecError(f"Unknown unitary spec: {spec!r}")

    logger.debug("unitary_built", extra={"kind": spec.kind, "num_qubits": n})
    return u


@dataclass(frozen=True)
class SweepPoint:
    spec: UnitarySpec
    sweep_var: str
    value: float
    seed: int


def _grid(start: float, stop: float, points: int) -> np.ndarray:
    # endpoints included so every multiple of pi/4 lands on a node
    return np.linspace(start, stop, points)


def lambda_points(job: SweepJob) -> List[SweepPoint]:
    if job.kind not in ("nd-even", "nd-odd"):
        raise InvalidSpecError(f"scan-lambda needs kind nd-even or nd-odd, got {job.kind!r}")
    points = []
    for lam in _grid(0.0, 2 * np.pi, job.grid or DEFAULT_LAMBDA_GRID):
        data: Dict[str, Any] = {"kind": job.kind, "n": job.n, "lambda": float(lam)}
        if job.kind == "nd-odd":
            data.update(inner=job.inner, omega=job.omega)
            if job.inner == "haar":
                data["seed"] = job.seed
        points.append(SweepPoint(parse_unitary_spec(data), "lambda", float(lam), job.seed))
    return points


def time_points(job: SweepJob) -> List[SweepPoint]:
    if job.kind not in ("dm", "dm-h"):
        raise InvalidSpecError(f"scan-time needs kind dm or dm-h, got {job.kind!r}")
    return [
        SweepPoint(parse_unitary_spec({"kind": job.kind, "n": job.n, "t": float(t)}), "t", float(t), job.seed)
        for t in _grid(0.0, np.pi, job.grid or DEFAULT_TIME_GRID)
    ]


def scatter_points(job: SweepJob) -> List[SweepPoint]:
    points = []
    for idx in range(job.samples):
        seed = derive_seed(job.seed, idx)
        if job.kind == "diag":
            spec = parse_unitary_spec({"kind": "diag-random", "n": job.n, "seed": seed})
        elif job.kind == "haar":
            dim = job.dim or (2 ** job.n if job.n else None)
            spec = parse_unitary_spec({"kind": "haar", "dim": dim, "seed": seed})
        else:
            raise InvalidSpecError(f"random-scatter needs kind diag or haar, got {job.kind!r}")
        points.append(SweepPoint(spec, "sample", float(idx), seed))
    return points


def circuit_points(job: SweepJob) -> List[SweepPoint]:
    if job.circuit is not None:
        return [SweepPoint(BrickworkSpec(circuit=job.circuit), "depth", float(len(job.circuit.layers)), job.seed)]
    if job.mode is None or job.n is None:
        raise InvalidSpecError("circuit needs either a circuit spec or a mode with n")
    points = []
    for idx in range(job.samples):
        seed = derive_seed(job.seed, idx)
        circuit = preset_circuit(job.n, job.mode, seed, job.depth)
        points.append(SweepPoint(BrickworkSpec(circuit=circuit), "sample", float(idx), seed))
    return points


POINT_BUILDERS = {
    "scan-lambda": lambda_points,
    "scan-time": time_points,
    "random-scatter": scatter_points,
    "circuit": circuit_points,
}


class ExperimentRunner:
    """
    Runs the sweep points of a job on a thread pool. Rows come back in input
    order, so the output is independent of the thread count.
    """

    def points(self, job: SweepJob) -> List[SweepPoint]:
        return POINT_BUILDERS[job.command](job)

    def _evaluate(self, point: SweepPoint, cfg: OptimizerConfig) -> SweepRecord:
        u = build_unitary(point.spec)
        record = power_service.sweep_record(point.spec, u, point.sweep_var, point.value, point.seed, cfg)
        logger.info(
            "sweep_point_done",
            extra={
                "kind": point.spec.kind,
                "sweep_var": point.sweep_var,
                "sweep_value": point.value,
                "E": record.E,
                "D": record.D,
                "gap": record.gap,
            },
        )
        return record

    def run(self, job: SweepJob) -> List[SweepRecord]:
        points = self.points(job)
        threads = job.optimizer.threads
        logger.info("sweep_started", extra={"command": job.command, "points": len(points), "threads": threads})

        if threads > 1:
            # parallelism lives at the point level; each optimizer runs serially
            inner = job.optimizer.model_copy(update={"threads": 1})
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(lambda p: self._evaluate(p, inner), points))
        return [self._evaluate(p, job.optimizer) for p in points]


experiment_runner = ExperimentRunner()


# -----------------------------------------------------------------------------
# Output files
# -----------------------------------------------------------------------------


def records_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.csv_row() for r in records], columns=CSV_COLUMNS).astype(str)


def config_payload(job: SweepJob) -> Dict[str, Any]:
    return job.model_dump(mode="json", by_alias=True)


def config_hash(config: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON (sorted keys, no whitespace)."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def host_info() -> str:
    return (
        f"{platform.platform()}; python {platform.python_version()}; numpy {np.__version__}; "
        f"scipy {scipy.__version__}; pydantic {pydantic.VERSION}"
    )


def manifest_path_for(out: str) -> str:
    return f"{out}.manifest.json"


def records_path_for(out: str) -> str:
    return f"{out}.records.jsonl"


def write_csv(records: Sequence[SweepRecord], out: str) -> None:
    parent = os.path.dirname(os.path.abspath(out))
    os.makedirs(parent, exist_ok=True)
    records_frame(records).to_csv(out, index=False, lineterminator="\n", encoding="utf-8")


def write_outputs(
    job: SweepJob,
    records: Sequence[SweepRecord],
    out: str,
    started_at: str,
    finished_at: str,
) -> RunManifest:
    """CSV plus the manifest and full-record sidecars next to it."""
    write_csv(records, out)

    with open(records_path_for(out), "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(record.model_dump_json(by_alias=True) + "\n")

    config = config_payload(job)
    manifest = RunManifest(
        tool_version=__version__,
        config_hash=config_hash(config),
        prng_algorithm=settings.PRNG_ALGORITHM,
        started_at=started_at,
        finished_at=finished_at,
        host=host_info(),
        command=job.command,
        config=config,
        output=os.path.basename(out),
        rows=len(records),
    )
    with open(manifest_path_for(out), "w", encoding="utf-8") as f:
        f.write(manifest.model_dump_json(indent=2))

    logger.info("outputs_written", extra={"output": out, "rows": len(records), "config_hash": manifest.config_hash})
    return manifest


def run_job(job: SweepJob, out: Optional[str] = None) -> List[SweepRecord]:
    started_at = _utc_now()
    records = experiment_runner.run(job)
    if out is not None:
        write_outputs(job, records, out, started_at, _utc_now())
    return records


def replay(manifest_file: str) -> ReplayReport:
    """
    Regenerates the rows of a manifest's CSV from its stored config and
    compares every column except wall_ms.
    """
    with open(manifest_file, "r", encoding="utf-8") as f:
        manifest = RunManifest.model_validate_json(f.read())

    hash_ok = config_hash(manifest.config) == manifest.config_hash
    try:
        job = SweepJob.model_validate(manifest.config)
    except pydantic.ValidationError as e:
        raise InvalidSpecError(str(e)) from e

    regenerated = records_frame(experiment_runner.run(job)).drop(columns=["wall_ms"])

    output = None
    original = None
    if manifest.output:
        output = os.path.join(os.path.dirname(os.path.abspath(manifest_file)), manifest.output)
        if os.path.exists(output):
            original = pd.read_csv(output, dtype=str, keep_default_na=False).drop(columns=["wall_ms"])

    mismatched: List[int] = []
    if original is None or original.shape != regenerated.shape or list(original.columns) != list(regenerated.columns):
        matches = False
    else:
        diff = (original.values != regenerated.values).any(axis=1)
        mismatched = [int(i) for i in np.flatnonzero(diff)]
        matches = not mismatched

    report = ReplayReport(
        manifest=manifest_file,
        output=output,
        config_hash_ok=hash_ok,
        rows=len(regenerated),
        matches=matches and hash_ok,
        mismatched_rows=mismatched,
    )
    logger.info("replay_finished", extra={"matches": report.matches, "rows": report.rows})
    return report
