"""Command-line entry point ``piston-forge``.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness, mesh, oracle
from .bosons import display_label, fock_basis, state_energy
from .dilation import closest_unitary, dilate_single_ancilla
from .errors import ConfigError, CutoffWarning, PistonForgeError
from .piston import PistonProtocol, truncated_matrix

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

DEFAULT_CYCLE = {"kind": "cycle-sweep", "lambda0": 1.0, "lambdaTau": 3.0, "T": 5.0,
                 "vGrid": [0.1, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0]}
DEFAULT_MAPPING = {"kind": "epsilon-mapping", "lambda0": 1.0, "v": 11.0, "T": 5.0,
                   "lambdaTauGrid": [1.05, 1.1, 1.2, 1.35, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]}


def _threads(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get("PISTON_FORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"thread count must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def _config(args, default=None) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.ExperimentConfig.load(args.config)
    elif default is not None:
        cfg = harness.ExperimentConfig.from_dict(default)
    else:
        raise ConfigError("--config is required")
    return cfg.with_overrides(
        snap_unitary=True if getattr(args, "snap_unitary", False) else None,
        epsilon_threshold_pct=getattr(args, "epsilon_threshold", None),
    )


def _finish(report, out, stem=None) -> int:
    if out:
        csv_path, json_path = harness.write_report(report, out, stem)
        print(f"wrote {csv_path} and {json_path}")
    for r in report.failures:
        print(f"point {r.index} (value {r.value:g}) failed: {r.error}", file=sys.stderr)
    print(f"content hash {report.content_hash()}")
    return EXIT_NUMERIC if report.failures else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if cfg.kind == "cycle-sweep":
        return cmd_cycle(args)
    if cfg.kind == "epsilon-mapping":
        return cmd_epsilon_map(args)
    report = harness.run_sweep(cfg, _threads(args))
    for r in report.rows:
        if r.ok:
            s = r.scalars
            flag = "  [epsilon above threshold]" if s["epsilon_flag"] else ""
            print(f"{r.value:8.4g}  <W>={s['mean_work']:+.5f}  dF_th={s['df_th']:+.5f}  "
                  f"dF_exp={s['df_exp']:+.5f}  eps={s['epsilon_pct']:.3f}%  B={s['bhattacharyya']:.5f}{flag}")
    return _finish(report, args.out)


def cmd_cycle(args) -> int:
    cfg = _config(args, DEFAULT_CYCLE)
    if cfg.kind != "cycle-sweep":
        raise ConfigError("cycle needs kind 'cycle-sweep'")
    report = harness.run_cycle_sweep(cfg, _threads(args))
    for r in report.rows:
        if r.ok:
            print(f"|v|={r.value:6.3g}  W_diss,cyc={r.scalars['w_diss_cycle']:.5f}  B_cycle={r.scalars['b_cycle']:.6f}")
    speeds, overlaps = report.column("speed"), report.column("b_cycle")
    for level in (0.95, 0.90):
        x = harness.crossing(speeds, overlaps, level)
        print(f"B_cycle falls below {level:.2f} at |v| = " + (f"{x:.3f}" if x is not None else "(not reached)"))
    return _finish(report, args.out)


def cmd_epsilon_map(args) -> int:
    cfg = _config(args, DEFAULT_MAPPING)
    if cfg.kind != "epsilon-mapping":
        raise ConfigError("epsilon-map needs kind 'epsilon-mapping'")
    result = harness.run_epsilon_mapping(cfg, _threads(args))
    for lam, eps, b in result.table:
        print(f"lambda_tau={lam:6.3f}  eps={eps:8.4f}%  B={b:.6f}")
    for level, (ours, published) in result.thresholds.items():
        got = f"{ours:.2f}%" if ours is not None else "not reached"
        print(f"overlap {level:.2f}: epsilon {got} (published {published}%)")
    return _finish(result.report, args.out)


def cmd_verify(args) -> int:
    protocols = None
    cfg = oracle.OracleConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
            protocols = [PistonProtocol(p["lambda0"], p["lambdaTau"], p["v"], p.get("nLevels", 4), p.get("jMax", 50))
                         for p in data.get("protocols", [])] or None
            cfg = oracle.OracleConfig(data.get("basisCutoff", cfg.basis_cutoff), data.get("stepCount", cfg.step_count))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad verification config: {exc}") from exc
    if args.j_max is not None:
        protocols = [PistonProtocol(p.lambda0, p.lambda_tau, p.v, min(p.n_levels, args.j_max), args.j_max)
                     for p in (protocols or harness.default_verification_grid())]
    report = harness.verify_propagator(protocols, cfg)
    print("\n".join(report.lines()))
    print("verification " + ("passed" if report.passed else "FAILED"))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_compile(args) -> int:
    if args.config:
        cfg = harness.ExperimentConfig.load(args.config)
        if cfg.kind != "single-protocol":
            raise ConfigError("compile needs kind 'single-protocol'")
        protocol = cfg.protocol_at(cfg.v)
    else:
        if None in (args.lambda0, args.lambda_tau, args.v):
            raise ConfigError("compile needs --config or all of --lambda0, --lambda-tau, --v")
        try:
            protocol = PistonProtocol(args.lambda0, args.lambda_tau, args.v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CutoffWarning)
        dil = dilate_single_ancilla(truncated_matrix(protocol))
    program = mesh.decompose(closest_unitary(dil.entries))
    if args.chip_modes:
        program = mesh.embed_submesh(program, args.chip_modes)
    print(f"epsilon_unitary = {dil.unitary_error_pct:.4f} %; {len(program.settings)} MZIs in {program.n_layers} layers",
          file=sys.stderr)
    if args.out:
        path = Path(args.out)
        if path.is_dir():
            path = path / "phase_table.csv"
        mesh.write_phase_table(program, path)
        print(f"wrote {path}", file=sys.stderr)
    else:
        mesh.write_phase_table(program, sys.stdout)
    return EXIT_OK


def cmd_show_basis(args) -> int:
    for i, s in enumerate(fock_basis(args.modes, args.photons)):
        print(f"{i:3d}  {display_label(s)}  occupations={s}  E={state_energy(s, args.lam):.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--out", help="output directory (file for compile)")
    common.add_argument("--threads", type=int, help="worker threads; falls back to $PISTON_FORGE_THREADS")
    common.add_argument("--snap-unitary", action="store_true", help="sample from the snapped mesh unitary")
    common.add_argument("--epsilon-threshold", type=float, help="flag points above this unitary error (%%)")

    p = argparse.ArgumentParser(prog="piston-forge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="velocity or final-length sweep").set_defaults(func=cmd_sweep)
    sub.add_parser("cycle", parents=[common], help="expansion-compression cycle sweep").set_defaults(func=cmd_cycle)
    sub.add_parser("epsilon-map", parents=[common], help="overlap vs unitary error").set_defaults(func=cmd_epsilon_map)
    v = sub.add_parser("verify-propagator", parents=[common], help="cross-check against the ODE oracle")
    v.add_argument("--j-max", type=int, help="override the spectral cutoff (negative control)")
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("compile", parents=[common], help="emit the MZI phase table for one protocol")
    c.add_argument("--lambda0", type=float)
    c.add_argument("--lambda-tau", type=float)
    c.add_argument("--v", type=float)
    c.add_argument("--chip-modes", type=int, default=0, help="embed into a rectangular mesh of this size")
    c.set_defaults(func=cmd_compile)
    b = sub.add_parser("show-basis", help="list the canonical Fock basis")
    b.add_argument("--modes", type=int, default=5)
    b.add_argument("--photons", type=int, default=2)
    b.add_argument("--lam", type=float, default=1.0)
    b.set_defaults(func=cmd_show_basis)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PistonForgeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
