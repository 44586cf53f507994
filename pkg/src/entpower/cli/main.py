from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.entpower.brickwork import circuit_power_gap
from src.entpower.config import settings
from src.entpower.exceptions import (
    DimensionCapError,
    DimensionError,
    EntPowerError,
    InvalidSpecError,
    NotNormalizedError,
)
from src.entpower.experiments import build_unitary, records_frame, replay, run_job
from src.entpower.ggm import ggm
from src.entpower.logging_setup import logger
from src.entpower.optimizer.power import power_service
from src.entpower.schemas import OptimizerConfig, SweepJob, parse_circuit_spec, parse_unitary_spec
from src.entpower.tensor_core import PureState, named_state
from src.entpower.verify import SUITES, run_verify

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_CAP = 3

AMPLITUDE_NORM_ATOL = 1e-6

UNITARY_KINDS = ["identity", "diag-phase", "diag-random", "nd-even", "nd-odd", "dm", "dm-h", "haar"]

# -----------------------------------------------------------------------------
# Input helpers
# -----------------------------------------------------------------------------


def read_amplitude_file(path: str) -> PureState:
    """One complex amplitude per line as 're im'; blank lines are skipped."""
    values: List[complex] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise InvalidSpecError(f"{path}:{lineno}: expected 're im', got {line.strip()!r}")
            try:
                values.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as e:
                raise InvalidSpecError(f"{path}:{lineno}: {e}") from e

    amps = np.array(values, dtype=complex)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > AMPLITUDE_NORM_ATOL:
        raise NotNormalizedError(f"Amplitudes in {path} have norm {norm}")
    return PureState.from_amps(amps, normalize=True)


def read_json_file(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidSpecError(f"{path}: {e}") from e


def optimizer_config(args: argparse.Namespace) -> OptimizerConfig:
    data: Dict[str, Any] = {"seed": args.seed}
    if args.restarts is not None:
        data["restarts"] = args.restarts
    if args.max_evals is not None:
        data["max_evals"] = args.max_evals
    if args.ansatz:
        data["ansatze"] = args.ansatz
    if args.global_search:
        data["global_search"] = True
    data["threads"] = args.threads
    return OptimizerConfig(**data)


def unitary_spec_from_flags(args: argparse.Namespace) -> Dict[str, Any]:
    if args.kind is None:
        raise InvalidSpecError("power needs --spec or --kind")
    data: Dict[str, Any] = {"kind": args.kind}
    optional = {
        "n": args.n,
        "dim": args.dim,
        "phi": args.phi,
        "lambda": args.lam,
        "t": args.t,
    }
    data.update({k: v for k, v in optional.items() if v is not None})
    if args.kind in ("diag-random", "haar") or (args.kind == "nd-odd" and args.inner == "haar"):
        data["seed"] = args.seed
    if args.kind == "nd-odd":
        data["inner"] = args.inner
        data["omega"] = args.omega_variant
    return data


def _print_json(text: str) -> None:
    sys.stdout.write(text + "\n")


# -----------------------------------------------------------------------------
# Subcommands
# -----------------------------------------------------------------------------


def cmd_ggm(args: argparse.Namespace) -> int:
    if args.amps_file:
        state = read_amplitude_file(args.amps_file)
    elif args.named:
        if args.n is None:
            raise InvalidSpecError("--named needs --n")
        state = named_state(args.named, args.n)
    else:
        raise InvalidSpecError("ggm needs --named or --amps-file")

    if state.num_qubits > settings.MAX_QUBITS:
        raise DimensionCapError(f"{state.num_qubits} qubits exceeds the cap of {settings.MAX_QUBITS}")
    _print_json(ggm(state).model_dump_json())
    return EXIT_OK


def cmd_power(args: argparse.Namespace) -> int:
    data = read_json_file(args.spec) if args.spec else unitary_spec_from_flags(args)
    spec = parse_unitary_spec(data)
    u = build_unitary(spec)
    record = power_service.sweep_record(spec, u, "single", 0.0, args.seed, optimizer_config(args))
    _print_json(record.model_dump_json(by_alias=True))
    return EXIT_OK


def resolve_out_path(out: str) -> str:
    """A bare file name lands in settings.RESULTS_DIR; anything with a directory is kept."""
    if os.path.dirname(out):
        return out
    return os.path.join(settings.RESULTS_DIR, out)


def _run_sweep(args: argparse.Namespace, job: SweepJob) -> int:
    out = resolve_out_path(args.out) if args.out is not None else None
    records = run_job(job, out=out)
    if out is None:
        sys.stdout.write(records_frame(records).to_csv(index=False, lineterminator="\n"))
    else:
        _print_json(json.dumps({"output": out, "rows": len(records)}))
    return EXIT_OK


def cmd_scan_lambda(args: argparse.Namespace) -> int:
    job = SweepJob(
        command="scan-lambda",
        kind=args.kind,
        n=args.n,
        grid=args.grid,
        seed=args.seed,
        inner=args.inner,
        omega=args.omega_variant,
        optimizer=optimizer_config(args),
    )
    return _run_sweep(args, job)


def cmd_scan_time(args: argparse.Namespace) -> int:
    job = SweepJob(
        command="scan-time",
        kind=args.kind,
        n=args.n,
        grid=args.grid,
        seed=args.seed,
        optimizer=optimizer_config(args),
    )
    return _run_sweep(args, job)


def cmd_random_scatter(args: argparse.Namespace) -> int:
    job = SweepJob(
        command="random-scatter",
        kind=args.kind,
        n=args.n,
        dim=args.dim,
        samples=args.samples,
        seed=args.seed,
        optimizer=optimizer_config(args),
    )
    return _run_sweep(args, job)


def cmd_circuit(args: argparse.Namespace) -> int:
    if args.spec:
        circuit = parse_circuit_spec(read_json_file(args.spec))
        if args.out is None:
            record = circuit_power_gap(circuit, optimizer_config(args), seed=args.seed)
            _print_json(record.model_dump_json(by_alias=True))
            return EXIT_OK
        job = SweepJob(command="circuit", circuit=circuit, seed=args.seed, optimizer=optimizer_config(args))
    else:
        job = SweepJob(
            command="circuit",
            n=args.n,
            mode=args.mode,
            samples=args.samples,
            depth=args.depth,
            seed=args.seed,
            optimizer=optimizer_config(args),
        )
    return _run_sweep(args, job)


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = OptimizerConfig(restarts=args.restarts or 4, max_evals=args.max_evals or 2000, seed=args.seed)
    report = run_verify(cfg, only=args.suite)
    _print_json(report.model_dump_json(indent=2))
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_replay(args: argparse.Namespace) -> int:
    report = replay(args.manifest)
    _print_json(report.model_dump_json(indent=2))
    return EXIT_OK if report.matches else EXIT_FAILURE


# -----------------------------------------------------------------------------
# Parser
# -----------------------------------------------------------------------------


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="Base seed (default: ENTPOWER_SEED)")
    p.add_argument("--restarts", type=int, default=None, help="Optimizer restarts")
    p.add_argument("--max-evals", dest="max_evals", type=int, default=None, help="Evaluations per simplex run")
    p.add_argument(
        "--ansatz",
        action="append",
        choices=["full", "no-phases", "symmetric", "odd-even", "edge-bulk"],
        help="Restrict the search to these ansaetze (repeatable)",
    )
    p.add_argument("--global-search", dest="global_search", action="store_true", help="Add a differential-evolution pre-phase")
    p.add_argument("--threads", type=int, default=settings.THREADS, help="Worker threads")


def _add_unitary_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="Number of qubits")
    p.add_argument("--dim", type=int, default=None, help="Hilbert-space dimension (haar)")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="Gate angle lambda")
    p.add_argument("--phi", type=float, default=None, help="Diagonal phase")
    p.add_argument("--t", type=float, default=None, help="Evolution time")
    p.add_argument("--inner", choices=["uw", "haar"], default="uw", help="Inner gate of nd-odd")
    p.add_argument("--omega-variant", dest="omega_variant", choices=["exact", "paper", "cube-root"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entpower",
        description="Entangling and disentangling powers of multiqubit unitaries",
    )
    parser.add_argument("--max-qubits", dest="max_qubits", type=int, default=None, help="Raise the qubit cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ggm", help="GGM of a pure state")
    p.add_argument("--named", choices=["ghz", "w", "product", "plus"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--amps-file", dest="amps_file", default=None, help="Text file with one 're im' per line")
    p.set_defaults(func=cmd_ggm)

    p = sub.add_parser("power", help="E, D and their gap for one unitary")
    p.add_argument("--spec", default=None, help="UnitarySpec JSON file")
    p.add_argument("--kind", choices=UNITARY_KINDS, default=None)
    _add_unitary_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("scan-lambda", help="E, D over a lambda grid on [0, 2pi]")
    p.add_argument("--kind", choices=["nd-even", "nd-odd"], required=True)
    p.add_argument("--grid", type=int, default=None, help="Grid points (default 97)")
    p.add_argument("--out", default=None, help="CSV path; manifest and records sidecars are written next to it")
    _add_unitary_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_scan_lambda)

    p = sub.add_parser("scan-time", help="E, D over a time grid on [0, pi]")
    p.add_argument("--kind", choices=["dm", "dm-h"], required=True)
    p.add_argument("--grid", type=int, default=None, help="Grid points (default 65)")
    p.add_argument("--out", default=None)
    _add_unitary_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_scan_time)

    p = sub.add_parser("random-scatter", help="E, D for random diagonal or Haar unitaries")
    p.add_argument("--kind", choices=["diag", "haar"], required=True)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--out", default=None)
    _add_unitary_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_random_scatter)

    p = sub.add_parser("circuit", help="E, D for brickwork circuits")
    p.add_argument("--spec", default=None, help="CircuitSpec JSON file")
    p.add_argument("--mode", choices=["shared", "distinct", "per-bond"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--out", default=None)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("verify", help="Run the self-check suites")
    p.add_argument("--suite", action="append", choices=[name for name, _ in SUITES], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-evals", dest="max_evals", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="Regenerate a CSV from its manifest and compare")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.max_qubits is not None:
        settings.MAX_QUBITS = args.max_qubits
    if getattr(args, "seed", None) is None:
        args.seed = settings.SEED
    if getattr(args, "omega_variant", None) is None and hasattr(args, "omega_variant"):
        args.omega_variant = settings.OMEGA_VARIANT

    try:
        return args.func(args)
    except DimensionCapError as e:
        logger.error("dimension_cap_exceeded", extra={"error": str(e)})
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CAP
    except (InvalidSpecError, NotNormalizedError, DimensionError, ValidationError, OSError) as e:
        logger.error("invalid_input", extra={"error": str(e), "error_type": type(e).__name__})
        sys.stderr.write(f"error: {e}\n")
        return EXIT_BAD_INPUT
    except EntPowerError as e:
        logger.exception("command_failed", extra={"error": str(e)})
        sys.stderr.write(f"error: {e}\n")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
