"""Command-line front end.

Five subcommands over a JSON model file:

    solve     chain-method stationary state        -> steady.json
    oracle    Liouvillian reference results        -> oracle.json, trace.csv
    simulate  Monte Carlo trajectory ensemble      -> ensemble.csv, jumps.csv
    chain     state-transition network             -> chain.json, chain.dot
    verify    cross-validation of all three routes -> verify.json

Model files hold complex numbers as [re, im] pairs and matrices as row-major
arrays of rows.  Exit codes: 0 success, 1 parse error, 2 validation error,
3 method inapplicable (infinite state space / τ-dependent jumps), 4 numerical
failure, 5 verification mismatch.  Files are written atomically (temp +
rename).  LINDBLAD_STEADY_THREADS caps simulation workers.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .chain import analyze_chain, build_chain, to_dot
from .errors import (
    DimensionMismatch,
    InfiniteStateSpace,
    LindbladError,
    ModelFormatError,
    NonPositiveRate,
    NotHermitian,
    TauDependentJump,
    ValidationError,
)
from .linalg import frobenius, require_density
from .model import Channel, LindbladModel, apply_lindbladian, build_model
from .steady import steady_state
from .unraveling import ensemble_with_jumps

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_INAPPLICABLE = 3
EXIT_NUMERICAL = 4
EXIT_VERIFY_FAILED = 5


@dataclass
class RunConfig:
    seed: int = 0
    trajectories: int = 10000
    t_max: float = 10.0
    grid_points: int = 101
    max_states: int = 256
    quantum: float = 1e-9
    out: Path = Path(".")
    workers: int = 1

    def validate(self) -> None:
        if self.t_max <= 0:
            raise ValidationError("t_max must be positive")
        if self.grid_points < 2:
            raise ValidationError("grid must have at least 2 points")
        if self.trajectories < 1:
            raise ValidationError("trajectories must be at least 1")
        if self.max_states < 1:
            raise ValidationError("max-states must be at least 1")
        if self.quantum <= 0:
            raise ValidationError("quantum must be positive")

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.grid_points)


# -- model file parsing -------------------------------------------------------


def _as_complex(value, path: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) for x in value)
    ):
        raise ModelFormatError(f"{path}: expected a [re, im] pair")
    return complex(value[0], value[1])


def _as_matrix(value, n: int, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        raise ModelFormatError(f"{path}: expected {n} rows")
    out = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise ModelFormatError(f"{path}[{i}]: expected {n} entries")
        for j, entry in enumerate(row):
            out[i, j] = _as_complex(entry, f"{path}[{i}][{j}]")
    return out


def parse_model_dict(data) -> tuple[LindbladModel, np.ndarray]:
    """Parse a model-file dictionary into a validated model and initial state."""
    if not isinstance(data, dict):
        raise ModelFormatError("top level: expected an object")
    try:
        n = int(data["dim"])
    except (KeyError, TypeError, ValueError):
        raise ModelFormatError("dim: expected a positive integer") from None
    if n < 1:
        raise ModelFormatError("dim: expected a positive integer")
    if "hamiltonian" not in data:
        raise ModelFormatError("hamiltonian: missing")
    h = _as_matrix(data["hamiltonian"], n, "hamiltonian")
    if not isinstance(data.get("channels"), list) or not data["channels"]:
        raise ModelFormatError("channels: expected a non-empty list")
    channels = []
    for i, entry in enumerate(data["channels"]):
        if not isinstance(entry, dict) or "v" not in entry or "gamma" not in entry:
            raise ModelFormatError(f"channels[{i}]: expected an object with v and gamma")
        v = _as_matrix(entry["v"], n, f"channels[{i}].v")
        gamma = entry["gamma"]
        if not isinstance(gamma, (int, float)):
            raise ModelFormatError(f"channels[{i}].gamma: expected a number")
        channels.append(Channel(v=v, gamma=float(gamma)))
    if "rho0" not in data:
        raise ModelFormatError("rho0: missing")
    rho0 = _as_matrix(data["rho0"], n, "rho0")
    model = build_model(h, channels)
    rho0 = require_density(rho0, what="rho0")
    return model, rho0


def load_model_file(path) -> tuple[LindbladModel, np.ndarray]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed JSON: {exc}") from exc
    return parse_model_dict(data)


def model_to_dict(model: LindbladModel, rho0: np.ndarray) -> dict:
    """Inverse of parse_model_dict, for writing fixture files."""
    return {
        "dim": model.dim,
        "hamiltonian": matrix_to_json(model.hamiltonian),
        "channels": [{"v": matrix_to_json(ch.v), "gamma": ch.gamma} for ch in model.channels],
        "rho0": matrix_to_json(rho0),
    }


# -- emission -----------------------------------------------------------------


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def json_to_matrix(data) -> np.ndarray:
    rows = [[complex(entry[0], entry[1]) for entry in row] for row in data]
    return np.array(rows, dtype=np.complex128)


def _write_atomic(path: Path, writer) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict) -> None:
    _write_atomic(path, lambda fh: json.dump(payload, fh, indent=2))


def write_csv(path: Path, header: list[str], rows) -> None:
    def writer(fh):
        out = csv.writer(fh)
        out.writerow(header)
        for row in rows:
            out.writerow([repr(x) if isinstance(x, float) else x for x in row])

    _write_atomic(path, writer)


def _state_columns(n: int) -> list[str]:
    names = [f"re_{i}{j}" for i in range(n) for j in range(n)]
    names += [f"im_{i}{j}" for i in range(n) for j in range(n)]
    return names


def _state_row(m: np.ndarray) -> list[float]:
    flat = np.asarray(m).ravel()
    return [float(x) for x in flat.real] + [float(x) for x in flat.imag]


def _diagnostic_payload(exc: LindbladError) -> dict:
    return {"diagnostic": type(exc).__name__, "detail": str(exc)}


# -- commands -----------------------------------------------------------------


def cmd_solve(model: LindbladModel, rho0: np.ndarray, cfg: RunConfig) -> int:
    try:
        result = steady_state(model, rho0, max_states=cfg.max_states, quantum=cfg.quantum)
    except (InfiniteStateSpace, TauDependentJump) as exc:
        write_json(cfg.out / "steady.json", _diagnostic_payload(exc))
        print(f"method inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    payload = {
        "rho_infinity": matrix_to_json(result.rho_infinity),
        "sets": [
            {
                "indices": list(s.indices),
                "theta": matrix_to_json(s.theta),
                "capture": s.capture,
            }
            for s in result.sets
        ],
        "residual": result.residual,
        "method_notes": result.method_notes,
    }
    write_json(cfg.out / "steady.json", payload)
    return EXIT_OK


def cmd_oracle(model: LindbladModel, rho0: np.ndarray, cfg: RunConfig) -> int:
    steady = oracle_mod.cesaro_steady(model, rho0)
    basis = oracle_mod.null_space_steady(model)
    payload = {
        "cesaro_steady": matrix_to_json(steady),
        "residual": frobenius(apply_lindbladian(model, steady)),
        "null_space": [matrix_to_json(b) for b in basis],
    }
    write_json(cfg.out / "oracle.json", payload)
    series = oracle_mod.integrate(model, rho0, cfg.t_grid)
    write_csv(
        cfg.out / "trace.csv",
        ["t"] + _state_columns(model.dim),
        ([float(t)] + _state_row(state) for t, state in zip(series.times, series.states)),
    )
    return EXIT_OK


def cmd_simulate(model: LindbladModel, rho0: np.ndarray, cfg: RunConfig) -> int:
    estimate, jumps = ensemble_with_jumps(
        model, rho0, cfg.t_grid, cfg.trajectories, cfg.seed, workers=cfg.workers
    )
    write_csv(
        cfg.out / "ensemble.csv",
        ["t"] + _state_columns(model.dim) + ["stderr"],
        (
            [float(t)] + _state_row(m) + [float(se)]
            for t, m, se in zip(estimate.times, estimate.mean, estimate.stderr)
        ),
    )
    write_csv(
        cfg.out / "jumps.csv",
        ["trajectory", "jump_time", "channel", "post_state_key"],
        ([i, t, k, key] for i, t, k, key in jumps),
    )
    return EXIT_OK


def cmd_chain(model: LindbladModel, rho0: np.ndarray, cfg: RunConfig) -> int:
    try:
        chain = build_chain(model, rho0, cfg.max_states, cfg.quantum)
    except (InfiniteStateSpace, TauDependentJump) as exc:
        write_json(cfg.out / "chain.json", _diagnostic_payload(exc))
        print(f"method inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    analysis = analyze_chain(chain)
    payload = {
        "states": [
            {
                "kind": state.kind.value,
                "matrix": matrix_to_json(state.matrix),
                "origins": list(state.origins),
            }
            for state in chain.states
        ],
        "q": [[float(x) for x in row] for row in chain.q],
        "edge_channels": {f"{src}->{dst}": sorted(ks) for (src, dst), ks in chain.edge_channels.items()},
        "minimal_absorbing_sets": [list(b) for b in analysis.minimal_absorbing_sets],
        "within_set_distributions": [[float(x) for x in d] for d in analysis.within_set_distributions],
        "capture_probabilities": [float(c) for c in analysis.capture_probabilities],
    }
    write_json(cfg.out / "chain.json", payload)
    _write_atomic(cfg.out / "chain.dot", lambda fh: fh.write(to_dot(chain)))
    return EXIT_OK


def cmd_verify(model: LindbladModel, rho0: np.ndarray, cfg: RunConfig) -> int:
    oracle_steady = oracle_mod.cesaro_steady(model, rho0)
    try:
        result = steady_state(model, rho0, max_states=cfg.max_states, quantum=cfg.quantum)
    except (InfiniteStateSpace, TauDependentJump) as exc:
        payload = _diagnostic_payload(exc)
        payload["oracle_steady"] = matrix_to_json(oracle_steady)
        write_json(cfg.out / "verify.json", payload)
        print(f"method inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE

    series = oracle_mod.integrate(model, rho0, cfg.t_grid)
    estimate, _ = ensemble_with_jumps(
        model, rho0, cfg.t_grid, cfg.trajectories, cfg.seed, workers=cfg.workers, log_jumps=False
    )
    chain_vs_oracle = frobenius(result.rho_infinity - oracle_steady)
    endpoint_gap = frobenius(estimate.mean[-1] - series.states[-1])
    endpoint_budget = 4.0 * float(estimate.stderr[-1]) + 1e-12
    checks = {
        "chain_vs_oracle": {"value": chain_vs_oracle, "limit": 1e-7, "ok": chain_vs_oracle <= 1e-7},
        "residual": {"value": result.residual, "limit": 1e-8, "ok": result.residual <= 1e-8},
        "ensemble_endpoint": {
            "value": endpoint_gap,
            "limit": endpoint_budget,
            "ok": endpoint_gap <= endpoint_budget,
        },
    }
    payload = {
        "rho_infinity": matrix_to_json(result.rho_infinity),
        "oracle_steady": matrix_to_json(oracle_steady),
        "checks": checks,
        "passed": all(c["ok"] for c in checks.values()),
    }
    write_json(cfg.out / "verify.json", payload)
    for name, check in checks.items():
        status = "ok" if check["ok"] else "FAIL"
        print(f"{name}: {check['value']:.3e} (limit {check['limit']:.3e}) {status}")
    return EXIT_OK if payload["passed"] else EXIT_VERIFY_FAILED


_COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "chain": cmd_chain,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lindblad-steady",
        description="Stationary states of the Lindblad equation by the jump-chain method.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "chain-method stationary state"),
        ("oracle", "Liouvillian reference results"),
        ("simulate", "Monte Carlo trajectory ensemble"),
        ("chain", "state-transition network"),
        ("verify", "cross-validate solve, oracle and simulate"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model", help="model JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trajectories", type=int, default=10000, metavar="M")
        p.add_argument("--tmax", type=float, default=10.0, metavar="X")
        p.add_argument("--grid", type=int, default=101, metavar="P")
        p.add_argument("--max-states", type=int, default=256, metavar="S")
        p.add_argument("--quantum", type=float, default=1e-9, metavar="Q")
        p.add_argument("--out", type=Path, default=Path("."), metavar="DIR")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    workers = 1
    env = os.environ.get("LINDBLAD_STEADY_THREADS")
    if env:
        try:
            workers = max(1, int(env))
        except ValueError:
            print(f"ignoring invalid LINDBLAD_STEADY_THREADS={env!r}", file=sys.stderr)
    cfg = RunConfig(
        seed=args.seed,
        trajectories=args.trajectories,
        t_max=args.tmax,
        grid_points=args.grid,
        max_states=args.max_states,
        quantum=args.quantum,
        out=args.out,
        workers=workers,
    )
    try:
        cfg.validate()
        model, rho0 = load_model_file(args.model)
        return _COMMANDS[args.command](model, rho0, cfg)
    except ModelFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, NotHermitian, NonPositiveRate, DimensionMismatch) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InfiniteStateSpace, TauDependentJump) as exc:
        print(f"method inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except LindbladError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
