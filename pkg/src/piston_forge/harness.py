"""Experiment harness: JSON-configured sweeps, cycles, error mapping and self-checks.

Every sweep point runs the full stroke pipeline and is reduced to a row of
scalars plus the thermal output distribution. A failing point yields a
failure row instead of aborting the sweep. Report bodies are deterministic;
only the provenance timestamp varies between runs and it is excluded from
the content hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from . import oracle, thermo
from .bosons import FockDistribution, display_label
from .errors import ConfigError, CutoffWarning, PistonForgeError
from .piston import PistonProtocol, adiabaticity_parameter, propagator_block
from .pipeline import resolved_part, simulate_stroke, thermal_output

KINDS = (
    "velocity-sweep-expansion",
    "velocity-sweep-compression",
    "lambda-sweep-expansion",
    "lambda-sweep-compression",
    "cycle-sweep",
    "epsilon-mapping",
    "single-protocol",
)
DEFAULT_EPSILON_THRESHOLD_PCT = 5.0
DEFAULT_MAPPING_SPEED = 11.0
PROPAGATOR_TOL = 1e-4
#: Overlap levels at which the error mapping interpolates epsilon, with published values.
MAPPING_LEVELS = {0.95: 14.8, 0.90: 31.6}

CSV_COLUMNS = (
    "index", "value", "lambda0", "lambda_tau", "v", "temperature",
    "mean_work", "df_th", "df_exp", "w_diss", "entropy_production", "work_variance",
    "p_positive_work", "leakage", "epsilon_pct", "xi12", "bhattacharyya",
    "epsilon_flag", "status", "error",
)
CYCLE_COLUMNS = (
    "index", "speed", "w_diss_cycle", "b_cycle", "expansion_mean_work",
    "compression_mean_work", "expansion_leakage", "compression_leakage", "status", "error",
)
MAPPING_COLUMNS = ("index", "lambda_tau", "v", "epsilon_pct", "bhattacharyya", "status", "error")


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _grid(raw, name):
    if raw is None:
        return None
    if isinstance(raw, (int, float)):
        raw = [raw]
    try:
        grid = tuple(float(x) for x in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of numbers") from exc
    if not grid:
        raise ConfigError(f"{name} is empty")
    if not all(math.isfinite(x) for x in grid):
        raise ConfigError(f"{name} has non-finite entries")
    steps = np.diff(grid)
    if len(grid) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError(f"{name} is not strictly monotone")
    return grid


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see :meth:`from_dict` for the JSON keys."""

    kind: str
    lambda0: float
    lambda_tau: float | None = None
    lambda_tau_grid: tuple | None = None
    v: float | None = None
    v_grid: tuple | None = None
    temperature: float = 5.0
    n_levels: int = 4
    j_max: int = 50
    epsilon_threshold_pct: float = DEFAULT_EPSILON_THRESHOLD_PCT
    snap_unitary: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "lambda_tau_grid", _grid(self.lambda_tau_grid, "lambdaTau grid"))
        object.__setattr__(self, "v_grid", _grid(self.v_grid, "v grid"))
        for name in ("lambda0", "temperature", "epsilon_threshold_pct"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive number, got {val!r}")
        if self.lambda_tau is not None and not self.lambda_tau > 0:
            raise ConfigError("lambdaTau must be positive")
        if self.lambda_tau_grid and min(self.lambda_tau_grid) <= 0:
            raise ConfigError("lambdaTau grid must be positive")
        if self.n_levels != 4:
            raise ConfigError("only nLevels = 4 is supported (five-mode submesh)")
        if self.j_max < self.n_levels:
            raise ConfigError("jMax must be >= nLevels")
        needs = {
            "velocity-sweep-expansion": ("lambda_tau", "v_grid"),
            "velocity-sweep-compression": ("lambda_tau", "v_grid"),
            "lambda-sweep-expansion": ("v", "lambda_tau_grid"),
            "lambda-sweep-compression": ("v", "lambda_tau_grid"),
            "cycle-sweep": ("lambda_tau", "v_grid"),
            "epsilon-mapping": ("lambda_tau_grid",),
            "single-protocol": ("lambda_tau", "v"),
        }[self.kind]
        missing = [n for n in needs if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"{self.kind} needs {', '.join(missing)}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        keys = {
            "kind": "kind", "lambda0": "lambda0", "lambdaTau": "lambda_tau",
            "lambdaTauGrid": "lambda_tau_grid", "v": "v", "vGrid": "v_grid",
            "T": "temperature", "nLevels": "n_levels", "jMax": "j_max",
            "epsilonThresholdPct": "epsilon_threshold_pct", "snapUnitary": "snap_unitary", "seed": "seed",
        }
        unknown = set(d) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in d or "lambda0" not in d:
            raise ConfigError("config needs 'kind' and 'lambda0'")
        try:
            return cls(**{keys[k]: v for k, v in d.items()})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind, "lambda0": self.lambda0, "lambdaTau": self.lambda_tau,
            "lambdaTauGrid": list(self.lambda_tau_grid) if self.lambda_tau_grid else None,
            "v": self.v, "vGrid": list(self.v_grid) if self.v_grid else None,
            "T": self.temperature, "nLevels": self.n_levels, "jMax": self.j_max,
            "epsilonThresholdPct": self.epsilon_threshold_pct, "snapUnitary": self.snap_unitary,
            "seed": self.seed,
        }
        return {k: v for k, v in d.items() if v is not None}

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self), **{k: v for k, v in kw.items() if v is not None}})

    @property
    def grid(self) -> tuple:
        """The swept values (velocities or final lengths)."""
        if self.kind in ("lambda-sweep-expansion", "lambda-sweep-compression", "epsilon-mapping"):
            return self.lambda_tau_grid
        if self.kind == "single-protocol":
            return (self.v,)
        return self.v_grid

    def protocol_at(self, value) -> PistonProtocol:
        """Protocol for one grid value; the velocity sign follows the stroke direction."""
        if self.kind in ("lambda-sweep-expansion", "lambda-sweep-compression", "epsilon-mapping"):
            lam_tau = value
            speed = abs(self.v if self.v is not None else DEFAULT_MAPPING_SPEED)
        else:
            lam_tau, speed = self.lambda_tau, abs(value)
        direction = np.sign(lam_tau - self.lambda0)
        if self.kind == "single-protocol":
            return PistonProtocol(self.lambda0, lam_tau, self.v, self.n_levels, self.j_max)
        return PistonProtocol(self.lambda0, lam_tau, float(direction * speed) if direction else speed,
                              self.n_levels, self.j_max)


@dataclass(frozen=True)
class SweepRow:
    index: int
    value: float
    protocol: PistonProtocol | None
    output: FockDistribution | None = None
    scalars: dict = field(default_factory=dict)
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class SweepReport:
    config: ExperimentConfig
    rows: tuple
    version: str
    timestamp: str

    def body(self) -> dict:
        """Everything but the timestamp, as plain JSON types."""
        return {
            "config": self.config.to_dict(),
            "version": self.version,
            "rows": [_row_json(r) for r in self.rows],
        }

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.body(), sort_keys=True).encode()).hexdigest()

    def column(self, name) -> np.ndarray:
        return np.array([r.scalars.get(name, np.nan) for r in self.rows], dtype=float)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.ok]


def _row_json(row: SweepRow) -> dict:
    out = {"index": row.index, "value": row.value, "status": row.status, "error": row.error}
    if row.protocol is not None:
        out["protocol"] = {"lambda0": row.protocol.lambda0, "lambdaTau": row.protocol.lambda_tau, "v": row.protocol.v}
    if row.output is not None:
        out["distribution"] = {display_label(s): float(p) for s, p in zip(row.output.states, row.output.probabilities)}
    out["scalars"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.scalars.items()}
    return out


def _xi12(protocol):
    return adiabaticity_parameter(1, 2, protocol.v, protocol.lambda_tau)


def sweep_point(config: ExperimentConfig, index: int, value: float) -> SweepRow:
    """One grid point through the pipeline; module errors become a failure row."""
    protocol = None
    try:
        protocol = config.protocol_at(value)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffWarning)
            stroke = simulate_stroke(protocol, config.snap_unitary)
        gibbs = thermo.gibbs_weights(config.temperature, protocol.lambda0, config.n_levels)
        weights = gibbs.as_dict()
        work = thermo.work_distribution(protocol, config.temperature, stroke.conditionals, config.n_levels)
        output = thermal_output(weights, stroke.conditionals)
        ideal = thermal_output(weights, stroke.reference)
        eps = stroke.unitary_error_pct
        scalars = {
            "lambda0": protocol.lambda0,
            "lambda_tau": protocol.lambda_tau,
            "v": protocol.v,
            "temperature": config.temperature,
            "mean_work": work.mean_work,
            "df_th": work.df_th,
            "df_exp": work.df_exp,
            "w_diss": work.w_diss,
            "entropy_production": work.entropy_production,
            "work_variance": work.variance,
            "p_positive_work": work.positive_work_probability(),
            "leakage": work.leakage_weight,
            "epsilon_pct": eps,
            "xi12": _xi12(protocol) if not protocol.is_identity else 0.0,
            "bhattacharyya": thermo.bhattacharyya(resolved_part(output, config.n_levels), ideal),
            "epsilon_flag": bool(eps > config.epsilon_threshold_pct),
        }
        return SweepRow(index, float(value), protocol, output, scalars)
    except (PistonForgeError, ValueError, ArithmeticError) as exc:
        return SweepRow(index, float(value), protocol, status="failed", error=f"{type(exc).__name__}: {exc}")


def _map_points(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def _timestamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_sweep(config: ExperimentConfig, threads=1) -> SweepReport:
    """Run every grid point; rows come back in grid order regardless of ``threads``."""
    if config.kind in ("cycle-sweep", "epsilon-mapping"):
        raise ConfigError(f"run_sweep does not handle {config.kind}")
    items = [(config, i, v) for i, v in enumerate(config.grid)]
    rows = _map_points(sweep_point, items, threads)
    return SweepReport(config, tuple(rows), package_version(), _timestamp())


def run_cycle_sweep(config: ExperimentConfig, threads=1) -> SweepReport:
    """Expansion ``lambda0 -> lambdaTau`` and its reverse at each ``|v|`` of the grid."""

    def point(i, speed):
        speed = abs(speed)
        try:
            exp = PistonProtocol(config.lambda0, config.lambda_tau, speed * np.sign(config.lambda_tau - config.lambda0) or speed,
                                 config.n_levels, config.j_max)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", CutoffWarning)
                cyc = thermo.run_cycle(exp, exp.reversed(), config.temperature, levels=config.n_levels,
                                       snap_unitary=config.snap_unitary)
            scalars = {
                "speed": speed,
                "w_diss_cycle": cyc.w_diss,
                "b_cycle": cyc.overlap,
                "expansion_mean_work": cyc.expansion.mean_work,
                "compression_mean_work": cyc.compression.mean_work,
                "expansion_leakage": cyc.expansion.leakage_weight,
                "compression_leakage": cyc.compression.leakage_weight,
            }
            return SweepRow(i, speed, exp, cyc.final, scalars)
        except (PistonForgeError, ValueError, ArithmeticError) as exc:
            return SweepRow(i, speed, None, status="failed", error=f"{type(exc).__name__}: {exc}")

    rows = _map_points(point, list(enumerate(config.v_grid)), threads)
    return SweepReport(config, tuple(rows), package_version(), _timestamp())


def crossing(xs, ys, level):
    """First ``x`` at which ``ys`` falls through ``level``, by linear interpolation; None if never."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    for k in range(len(xs) - 1):
        if ys[k] >= level > ys[k + 1]:
            return float(xs[k] + (level - ys[k]) * (xs[k + 1] - xs[k]) / (ys[k + 1] - ys[k]))
    return None


@dataclass(frozen=True)
class EpsilonMapping:
    report: SweepReport
    thresholds: dict

    @property
    def table(self) -> np.ndarray:
        """Columns ``(lambda_tau, epsilon_pct, bhattacharyya)``."""
        r = self.report
        return np.column_stack([r.column("lambda_tau"), r.column("epsilon_pct"), r.column("bhattacharyya")])


def run_epsilon_mapping(config: ExperimentConfig, threads=1) -> EpsilonMapping:
    """Overlap of snapped-mesh statistics with the ideal four-level theory against epsilon.

    Always uses the snapped pipeline (the mesh can only realize a unitary).
    ``thresholds`` maps each overlap level to ``(interpolated epsilon or None, published epsilon)``.
    """
    if config.kind != "epsilon-mapping":
        raise ConfigError("run_epsilon_mapping needs kind 'epsilon-mapping'")
    cfg = config.with_overrides(snap_unitary=True)

    def point(i, lam_tau):
        row = sweep_point(cfg, i, lam_tau)
        keep = ("lambda_tau", "v", "epsilon_pct", "bhattacharyya")
        return SweepRow(row.index, row.value, row.protocol, row.output,
                        {k: row.scalars[k] for k in keep if k in row.scalars}, row.status, row.error)

    rows = _map_points(point, list(enumerate(cfg.lambda_tau_grid)), threads)
    report = SweepReport(cfg, tuple(rows), package_version(), _timestamp())
    ok = [r for r in rows if r.ok]
    eps = np.array([r.scalars["epsilon_pct"] for r in ok])
    overlap = np.array([r.scalars["bhattacharyya"] for r in ok])
    order = np.argsort(eps, kind="stable")
    thresholds = {lvl: (crossing(eps[order], overlap[order], lvl), pub) for lvl, pub in MAPPING_LEVELS.items()}
    return EpsilonMapping(report, thresholds)


def default_verification_grid(j_max=50) -> list:
    """Twelve protocols: v in {0.1, 1.1, 6.0}, expansion and compression, strokes 1<->3 and 1<->2."""
    grid = []
    for speed in (0.1, 1.1, 6.0):
        for a, b in ((1.0, 3.0), (1.0, 2.0)):
            grid.append(PistonProtocol(a, b, speed, j_max=j_max))
            grid.append(PistonProtocol(b, a, -speed, j_max=j_max))
    return grid


@dataclass(frozen=True)
class VerificationReport:
    protocols: tuple
    deviations: tuple
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for d in self.deviations)

    def lines(self) -> list:
        out = []
        for p, d in zip(self.protocols, self.deviations):
            tag = "PASS" if d <= self.tolerance else "FAIL"
            out.append(f"{tag} lambda {p.lambda0:g}->{p.lambda_tau:g} v={p.v:+g} jMax={p.j_max} max|dT|={d:.3e}")
        return out


def verify_propagator(protocols=None, oracle_config=None, tolerance=PROPAGATOR_TOL) -> VerificationReport:
    """Elementwise comparison of the spectral propagator with the eigenbasis ODE oracle."""
    protocols = default_verification_grid() if protocols is None else list(protocols)
    cfg = oracle_config or oracle.OracleConfig()
    devs = []
    for p in protocols:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffWarning)
            T = propagator_block(p)
        devs.append(oracle.max_deviation(oracle.oracle_transition_matrix(p, cfg).entries, T))
    return VerificationReport(tuple(protocols), tuple(devs), tolerance)


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def write_report(report: SweepReport, out_dir, stem=None, columns=None) -> tuple:
    """Write ``<stem>.csv`` (scalars) and ``<stem>.json`` (provenance and distributions)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or report.config.kind
    if columns is None:
        columns = {"cycle-sweep": CYCLE_COLUMNS, "epsilon-mapping": MAPPING_COLUMNS}.get(report.config.kind, CSV_COLUMNS)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in report.rows:
            base = {"index": r.index, "value": r.value, "status": r.status, "error": r.error}
            w.writerow([_fmt(base[c] if c in base else r.scalars.get(c)) for c in columns])
    doc = {**report.body(), "timestamp": report.timestamp, "contentHash": report.content_hash()}
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
    return csv_path, json_path
