"""Command-line entry point.

Exit codes: 0 ok, 2 configuration error, 3 numerical error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .artifacts import HASH_KEY, csv_text, dumps, matrix_record, operator_record, write_text
from .classical import action_transport, integrate_direct
from .config import COMMANDS, RunConfig, bundled_config_path, load_config, target_matrix
from .errors import ConfigurationError, DivergenceError, InvalidInputError
from .quantization import hamiltonian_spectrum
from .quantum import (
    block_positions,
    dynamic_factor,
    eigenspace_blocks,
    full_evolution,
    holonomy_operator,
    unitarity_residual,
)
from .synthesis import SynthesisProblem, plant_loop, synthesize_loop, unitary_distance
from .torus import LinearOperator
from .verify import run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

log = logging.getLogger("toruscontrol")


class _Run:
    """Shared state of one command invocation."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.digest = cfg.digest
        self.out = cfg.run["out"]
        self.fmt = cfg.run["format"]
        self.written: list[str] = []

    def write(self, name: str, text: str):
        self.written.append(write_text(self.out, name, text))

    def json(self, name: str, obj: dict):
        self.write(name, dumps({HASH_KEY: self.digest, **obj}))

    def operator(self, name: str, op: LinearOperator):
        self.write(name, dumps(operator_record(op, self.digest)))


def cmd_spectrum(run: _Run) -> int:
    cfg = run.cfg
    E = hamiltonian_spectrum(cfg.scheme, cfg.basis, cfg.hamiltonian)
    n = cfg.basis.indices
    if run.fmt == "csv":
        header = ["index"] + [f"n_{k + 1}" for k in range(cfg.m)] + ["eigenvalue"]
        rows = ([j, *n[j].tolist(), float(E[j])] for j in range(E.size))
        run.write("spectrum.csv", csv_text(header, rows, run.digest))
    else:
        rows = [{"index": j, "n": n[j].tolist(), "eigenvalue": float(E[j])} for j in range(E.size)]
        run.json("spectrum.json", {"spectrum": rows})
    return EXIT_OK


def cmd_evolve_classical(run: _Run) -> int:
    cfg = run.cfg
    steps = cfg.run["steps"]
    traj = integrate_direct(cfg.state0, cfg.conn, cfg.path, cfg.hamiltonian, steps=steps)
    U = action_transport(cfg.conn, cfg.path, traj, steps, method=cfg.run["method"])
    if run.fmt == "csv":
        run.write("trajectory.csv", traj.to_csv(header_comment=f"{HASH_KEY}={run.digest}"))
    else:
        run.json(
            "trajectory.json",
            {"t": traj.times, "I": traj.I, "phi": traj.phi},
        )
    residual = float(np.max(np.abs(U @ cfg.state0.I - traj.final.I)))
    run.json(
        "transport.json",
        {
            "matrix": matrix_record(U),
            "final_state": {"I": traj.final.I, "phi": traj.final.phi},
            "transport_residual": residual,
            "steps": steps,
        },
    )
    print(f"final I = {traj.final.I.tolist()}, phi = {traj.final.phi.tolist()}; transport residual {residual:.3e}")
    return EXIT_OK


def cmd_evolve_quantum(run: _Run) -> int:
    cfg = run.cfg
    steps, t, method = cfg.run["steps"], cfg.run["t"], cfg.run["method"]
    U1 = dynamic_factor(cfg.scheme, cfg.basis, t)
    hol = holonomy_operator(cfg.conn, cfg.scheme, cfg.path, cfg.basis, steps, method=method)
    Uf = full_evolution(cfg.conn, cfg.scheme, cfg.path, cfg.basis, steps, t, method=method)
    idx = cfg.basis.interior()
    fact = float(np.linalg.norm((Uf.matrix - U1.matrix @ hol.U.matrix)[np.ix_(idx, idx)], 2))
    run.operator("U1.json", U1)
    run.operator("U2.json", hol.U)
    run.operator("U_full.json", Uf)
    run.json(
        "evolve_quantum_summary.json",
        {
            "t": t,
            "steps": steps,
            "method": method,
            "factorization_residual": fact,
            "unitarity_residual_U2": hol.unitarity_residual,
            "unitarity_residual_U_full": unitarity_residual(Uf),
        },
    )
    print(f"factorization residual {fact:.3e}")
    return EXIT_OK


def cmd_holonomy(run: _Run) -> int:
    cfg = run.cfg
    hol = holonomy_operator(cfg.conn, cfg.scheme, cfg.path, cfg.basis, cfg.run["steps"], method=cfg.run["method"])
    blocks = eigenspace_blocks(cfg.scheme, cfg.basis, hol.U)
    run.operator("holonomy.json", hol.U)
    summary = hol.summary()
    summary["block_leakage"] = blocks.leakage
    run.json("holonomy_summary.json", summary)
    print(
        f"loop={summary['loop']} identity deviation {summary['identity_deviation']:.3e}, "
        f"unitarity {summary['unitarity_residual']:.3e}, leakage {blocks.leakage:.3e}"
    )
    return EXIT_OK


def synthesis_problem(cfg: RunConfig) -> tuple[SynthesisProblem, dict]:
    """Build the configured problem; planted targets are realized here."""
    syn = cfg.synthesis
    kind = syn["kind"]
    if kind == "quantum":
        dim = block_positions(cfg.scheme, cfg.basis, syn["n1"]).size
    else:
        dim = cfg.m
    center = syn.get("center")
    common = dict(
        conn=cfg.conn,
        scheme=cfg.scheme if kind == "quantum" else None,
        basis=cfg.basis if kind == "quantum" else None,
        K=syn["K"],
        budget=syn["budget"],
        seed=cfg.run["seed"],
        steps=syn["steps"],
        kind=kind,
        n1=syn["n1"],
        center=center,
        phi0=cfg.state0.phi,
        restarts=syn["restarts"],
        tol=syn["tol"],
        init_scale=syn["init_scale"],
        method=syn["method"],
    )
    tgt = syn["target"]
    info: dict = {"kind": tgt["kind"]}
    if tgt["kind"] == "planted":
        planted = plant_loop(syn["K"], cfg.p, tgt.get("seed", 1000), tgt.get("scale", 0.5), center)
        probe = SynthesisProblem(np.eye(dim), **common)
        target = probe.realize(planted)
        info["planted_path"] = planted.to_record()
    else:
        target = target_matrix(cfg, dim)
    if kind == "quantum":
        info["unitary_distance"] = unitary_distance(target)
    return SynthesisProblem(target, **common), info


def cmd_synthesize(run: _Run) -> int:
    problem, info = synthesis_problem(run.cfg)
    res = synthesize_loop(problem)
    run.json(
        "synthesis.json",
        {
            "problem": {
                "kind": problem.kind,
                "K": problem.K,
                "budget": problem.budget,
                "seed": problem.seed,
                "restarts": problem.restarts,
                "steps": problem.steps,
                "n1": problem.n1,
                "tol": problem.tol,
                "method": problem.method,
            },
            "target": {**info, "matrix": matrix_record(problem.target)},
            "result": res.summary(),
            "path": res.path.to_record(),
        },
    )
    hist = ([j + 1, float(v)] for j, v in enumerate(res.history))
    run.write("synthesis_history.csv", csv_text(["evaluation", "best_residual"], hist, run.digest))
    print(f"residual {res.residual:.3e} after {res.evaluations} evaluations; converged={res.converged}")
    return EXIT_OK


def cmd_verify(run: _Run) -> int:
    results = run_suite(run.cfg)
    for r in results:
        print(r.line())
    if run.fmt == "csv":
        rows = ([r.name, r.value, r.tol, "pass" if r.passed else "fail", r.detail] for r in results)
        run.write("verify.csv", csv_text(["check", "value", "tol", "status", "detail"], rows, run.digest))
    else:
        run.json(
            "verify.json",
            {"checks": [{"check": r.name, "value": r.value, "tol": r.tol, "passed": r.passed, "detail": r.detail} for r in results]},
        )
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


HANDLERS = {
    "spectrum": cmd_spectrum,
    "evolve-classical": cmd_evolve_classical,
    "evolve-quantum": cmd_evolve_quantum,
    "holonomy": cmd_holonomy,
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toruscontrol",
        description="Classical and quantum holonomy control on action-angle tori (dimensionless units, hbar = 1).",
    )
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="defaults to run.command of the config")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON config file")
    src.add_argument("--bundled", metavar="NAME", help="bundled config: default, flat-loop, spectrum")
    ap.add_argument("--out", help="output directory (overrides run.out)")
    ap.add_argument("--steps", type=int, help="ordered-exponential / integrator steps (overrides run.steps)")
    ap.add_argument("--seed", type=int, help="random seed (overrides run.seed)")
    ap.add_argument("--format", choices=("csv", "json"), help="tabular artifact format")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        source = args.config or bundled_config_path(args.bundled or "default")
        overrides = {"out": args.out, "steps": args.steps, "seed": args.seed, "format": args.format}
        cfg = load_config(source, overrides)
        command = args.command or cfg.run.get("command")
        if command is None:
            raise ConfigurationError("no command given on the command line or in the config", field="run.command")
        run = _Run(cfg)
        code = HANDLERS[command](run)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in run.written:
        print(f"wrote {os.path.normpath(path)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
