"""Run configuration, deterministic serialization and the command pipeline."""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, eigen_bounds, flow
from .eigen_bounds import Convention
from .errors import BianchiLabError, ConfigError
from .flow import IntegratorControls
from .geometry import ACCEPTED_NAMES, BianchiClass, MetricState

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "CSV_COLUMNS",
    "COMMANDS",
    "RunConfig",
    "RunSummary",
    "config_from_mapping",
    "load_config",
    "dump_config",
    "trajectory_bundle",
    "write_csv",
    "run",
]

CSV_COLUMNS = ("t", "A", "B", "C", "R11", "R22", "R33", "R",
               "c_lo", "c_hi", "L", "U", "lambda_synth")
COMMANDS = ("simulate", "envelope", "verify", "report")
OUTPUT_FORMATS = ("csv", "json")
SWITCH_SPACING = 1.0
BOUND_SLACK = 1e-8

_TOP_KEYS = {"class", "initial", "normalize", "t_end", "controls", "convention",
             "lambda_tau", "seed", "outputs"}
_CONTROL_KEYS = {"rel_tol", "abs_tol", "max_step", "sample_spacing", "volume_ceiling"}


@dataclass(frozen=True)
class RunConfig:
    """A validated run description.

    ``initial`` is the state actually integrated (unit volume when ``normalize``);
    ``initial_raw`` keeps the coefficients as entered.
    """

    cls: BianchiClass
    initial: tuple[float, float, float]
    t_end: float
    normalize: bool = True
    controls: IntegratorControls = field(default_factory=IntegratorControls)
    convention: Convention = Convention.ComponentLiteral
    lambda_tau: float = 1.0
    seed: int = 0
    outputs: tuple[str, ...] = OUTPUT_FORMATS
    initial_raw: tuple[float, float, float] | None = None

    @property
    def initial_state(self) -> MetricState:
        return MetricState(*self.initial)

    def echo(self) -> dict:
        return {
            "class": self.cls.slug,
            "initial": list(self.initial_raw or self.initial),
            "initial_used": list(self.initial),
            "normalize": self.normalize,
            "t_end": self.t_end,
            "controls": asdict(self.controls),
            "convention": self.convention.value,
            "lambda_tau": self.lambda_tau,
            "seed": self.seed,
            "outputs": list(self.outputs),
        }


def _positive(name, value, allow_inf=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf) or value <= 0:
        raise ConfigError(f"{name}: expected a finite positive number, got {value!r}")
    return value


def config_from_mapping(data: dict) -> RunConfig:
    """Validate a parsed key/value document into a :class:`RunConfig`."""
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    for required in ("class", "initial", "t_end"):
        if required not in data:
            raise ConfigError(f"{required}: missing required key")

    try:
        cls = BianchiClass.parse(data["class"])
    except ValueError:
        raise ConfigError(
            f"class: unknown Bianchi class {data['class']!r}; accepted names: "
            f"{', '.join(ACCEPTED_NAMES)}"
        ) from None

    raw = data["initial"]
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ConfigError(f"initial: expected three positive numbers, got {raw!r}")
    raw = tuple(_positive(f"initial[{i}]", v) for i, v in enumerate(raw))

    normalize = data.get("normalize", True)
    if not isinstance(normalize, bool):
        raise ConfigError(f"normalize: expected true/false, got {normalize!r}")
    t_end = _positive("t_end", data["t_end"])

    controls_in = data.get("controls", {})
    if not isinstance(controls_in, dict):
        raise ConfigError("controls: expected a table")
    unknown = set(controls_in) - _CONTROL_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join('controls.' + k for k in sorted(unknown))}")
    ctrl = {k: _positive(f"controls.{k}", v, allow_inf=(k == "max_step"))
            for k, v in controls_in.items()}
    try:
        controls = IntegratorControls(**ctrl)
    except ValueError as exc:
        raise ConfigError(f"controls: {exc}") from None

    try:
        convention = Convention.parse(data.get("convention", "component"))
    except ValueError as exc:
        raise ConfigError(f"convention: {exc}") from None
    lambda_tau = _positive("lambda_tau", data.get("lambda_tau", 1.0))

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: expected a nonnegative integer, got {seed!r}")

    outputs = data.get("outputs", list(OUTPUT_FORMATS))
    if isinstance(outputs, str):
        outputs = [outputs]
    if not isinstance(outputs, (list, tuple)) or any(o not in OUTPUT_FORMATS for o in outputs):
        raise ConfigError(f"outputs: expected a subset of {list(OUTPUT_FORMATS)}, got {outputs!r}")

    initial = MetricState(*raw)
    if normalize:
        initial = initial.normalized()
    return RunConfig(
        cls=cls,
        initial=(initial.a, initial.b, initial.c),
        t_end=t_end,
        normalize=normalize,
        controls=controls,
        convention=convention,
        lambda_tau=lambda_tau,
        seed=seed,
        outputs=tuple(dict.fromkeys(outputs)),
        initial_raw=raw,
    )


def load_config(source) -> RunConfig:
    """Parse a TOML run description from a path or a readable text stream."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from None
    if isinstance(text, bytes):
        text = text.decode()
    return config_from_mapping(parse_toml(text))


def parse_toml(text: str) -> dict:
    """Parse TOML text; errors always carry a line and column."""
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        line, col = getattr(exc, "lineno", None), getattr(exc, "colno", None)
        if "line" not in msg:
            if line is None:
                line, col = text.count("\n") + 1, len(text.rsplit("\n", 1)[-1]) + 1
            msg = f"{msg} (line {line}, column {col})"
        raise ConfigError(f"config parse error: {msg}") from None


def _toml_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialise {value!r}")


def dump_config(config: RunConfig) -> str:
    lines = [
        f"class = {_toml_value(config.cls.slug)}",
        f"initial = {_toml_value(list(config.initial_raw or config.initial))}",
        f"normalize = {_toml_value(config.normalize)}",
        f"t_end = {_toml_value(config.t_end)}",
        f"convention = {_toml_value(config.convention.value)}",
        f"lambda_tau = {_toml_value(config.lambda_tau)}",
        f"seed = {_toml_value(config.seed)}",
        f"outputs = {_toml_value(list(config.outputs))}",
        "",
        "[controls]",
    ]
    lines += [f"{k} = {_toml_value(v)}" for k, v in asdict(config.controls).items()]
    return "\n".join(lines) + "\n"


# -- serialization ------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def trajectory_bundle(traj, convention=Convention.ComponentLiteral, envelope=None,
                      synthetic=None) -> dict:
    """Columns for :func:`write_csv`, aligned on the trajectory grid.

    Envelope and synthetic columns are NaN (written empty) before their anchor.
    """
    r, _, scalar = traj.curvature()
    c_lo, c_hi, _, _ = eigen_bounds.coefficients_along(traj, convention)
    cols = {"t": traj.t, "A": traj.y[0], "B": traj.y[1], "C": traj.y[2],
            "R11": r[0], "R22": r[1], "R33": r[2], "R": scalar,
            "c_lo": c_lo, "c_hi": c_hi}

    def aligned(series_t, values):
        out = np.full(traj.t.shape, np.nan)
        idx = np.searchsorted(traj.t, series_t - 1e-12)
        keep = (idx < traj.t.size)
        keep[keep] &= np.abs(traj.t[idx[keep]] - series_t[keep]) <= 1e-9
        out[idx[keep]] = values[keep]
        return out

    if envelope is not None:
        cols["L"] = aligned(envelope.t, envelope.lower)
        cols["U"] = aligned(envelope.t, envelope.upper)
    if synthetic is not None:
        cols["lambda_synth"] = aligned(synthetic.t, synthetic.values)
    return cols


def write_csv(bundle: dict, path) -> Path:
    """Write ``bundle`` under the fixed header; absent columns stay empty."""
    n = len(bundle["t"])
    for name, col in bundle.items():
        if name not in CSV_COLUMNS:
            raise ValueError(f"unexpected column {name!r}")
        if len(col) != n:
            raise ValueError(f"column {name!r} is not aligned with t")
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    cols = [bundle.get(name) for name in CSV_COLUMNS]
    for i in range(n):
        buf.write(",".join("" if col is None else _fmt(col[i]) for col in cols) + "\n")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return path


# -- pipeline -----------------------------------------------------------------------


@dataclass
class RunSummary:
    command: str
    config: dict
    tau: float | None = None
    tau_certificate: list | None = None
    volume_drift: float | None = None
    lemma_reports: list = field(default_factory=list)
    envelope_end: dict | None = None
    theorem_bounds_end: dict | None = None
    checks: dict = field(default_factory=dict)
    error: dict | None = None
    exit_status: int = 0

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.checks.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _lemma_dict(report):
    return {
        "lemma_id": report.lemma_id.name,
        "pass": report.passed,
        "clauses": [c._asdict() for c in report.clauses],
    }


def _run_pipeline(config, command, summary, artifacts):
    traj = flow.integrate(config.cls, config.initial_state, config.t_end, config.controls,
                          require_normalized=config.normalize)
    summary.volume_drift = traj.volume_drift
    summary.checks["volume_conservation"] = traj.volume_drift <= config.controls.volume_ceiling
    artifacts["traj"] = traj
    if command == "simulate":
        return

    flat = config.cls is BianchiClass.Euclidean3
    if flat:
        tau = traj.t_start
        summary.tau, summary.tau_certificate = tau, []
    else:
        cert = analysis.detect_tau(config.cls, traj, config.convention, with_relaxations=True)
        tau = cert.tau
        summary.tau = tau
        summary.tau_certificate = [p._asdict() for p in cert.predicates]

    if command in ("verify", "report"):
        lemma = analysis.LemmaId.for_class(config.cls)
        if lemma is not None:
            report = analysis.verify_lemma(lemma, traj)
            summary.lemma_reports.append(_lemma_dict(report))
            summary.checks[f"lemma_{lemma.name}"] = report.passed
        if config.cls in (BianchiClass.Heisenberg, BianchiClass.Euclidean3):
            exact = flow.closed_form_trajectory(config.cls, traj.initial, config.t_end,
                                                config.controls)
            err = float(np.max(np.abs(traj.y / exact.y - 1.0)))
            summary.checks["closed_form_oracle"] = err <= 1e-7
            summary.lemma_reports.append({"lemma_id": "closed_form", "pass": err <= 1e-7,
                                          "clauses": [{"claim": "max relative error <= 1e-7",
                                                       "worst_slack": 1e-7 - err,
                                                       "worst_time": None,
                                                       "passed": err <= 1e-7}]})
        if command == "verify":
            return

    env = eigen_bounds.envelope_integrate(traj, tau, config.lambda_tau, config.convention)
    synth = eigen_bounds.synth_lambda(
        traj, eigen_bounds.PiecewiseRandom(config.seed, SWITCH_SPACING), tau,
        config.lambda_tau, config.convention)
    artifacts["envelope"], artifacts["synthetic"] = env, synth
    slack = BOUND_SLACK * env.upper
    summary.checks["envelope_containment"] = bool(
        np.all(synth.values >= env.lower - slack) and np.all(synth.values <= env.upper + slack))
    summary.envelope_end = {"t": traj.t_end, "L": env.lower[-1], "U": env.upper[-1],
                            "lambda_synth": synth.values[-1]}
    if command == "envelope":
        return

    for which, direction in ((eigen_bounds.Factor.MinFactor, analysis.Direction.NonDecreasing),
                             (eigen_bounds.Factor.MaxFactor, analysis.Direction.NonIncreasing)):
        m = eigen_bounds.monotone_quantity(traj, synth, tau, which, config.convention)
        summary.checks[f"monotone_{which.name}"] = analysis.check_monotone(m, direction).passed

    if not flat:
        params = eigen_bounds.TheoremBoundParams.from_trajectory(traj, tau, config.lambda_tau)
        lo, hi = eigen_bounds.theorem_bounds(params, traj.t_end)
        summary.theorem_bounds_end = {"t": traj.t_end, "lo": lo, "hi": hi}
        if config.convention is Convention.ComponentLiteral:
            summary.checks["theorem_bounds"] = bool(
                lo <= env.lower[-1] * (1 + BOUND_SLACK) and env.upper[-1] <= hi * (1 + BOUND_SLACK))


def run(config: RunConfig, command: str, out_dir=None) -> RunSummary:
    """Execute ``command`` and write the requested artifact files into ``out_dir``.

    Library errors are recorded in the summary (and its exit status) rather than
    raised, so the JSON summary is written on failure as well.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    summary = RunSummary(command=command, config=config.echo())
    artifacts = {}
    try:
        _run_pipeline(config, command, summary, artifacts)
    except BianchiLabError as exc:
        summary.error = {"type": type(exc).__name__, "message": str(exc)}
        summary.exit_status = exc.exit_status
    if summary.error is None and not summary.passed:
        summary.exit_status = 1

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in config.outputs and "traj" in artifacts:
            bundle = trajectory_bundle(artifacts["traj"], config.convention,
                                       artifacts.get("envelope"), artifacts.get("synthetic"))
            write_csv(bundle, out_dir / f"{command}.csv")
        if "json" in config.outputs:
            (out_dir / f"{command}.json").write_text(summary.to_json())
    return summary


def override(config_data: dict, **flags) -> dict:
    """Return a copy of ``config_data`` with non-``None`` flag values applied."""
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in config_data.items()}
    for key, value in flags.items():
        if value is None:
            continue
        if key in _CONTROL_KEYS:
            data.setdefault("controls", {})[key] = value
        else:
            data[key] = value
    return data

