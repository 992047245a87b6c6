"""Flat ``key = value`` configuration format and its parser.

One assignment per line, ``#`` starts a comment, no nesting. Unknown keys
are rejected with the offending line number; missing keys take the
defaults listed in KEY_TABLE. Multi-valued keys (sweep value lists,
gaussian centers, tracked norms) are space-separated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import ConfigurationError, Grid, InitialData, ModelParams, make_grid
from .integrator import StepControl


class ConfigError(ConfigurationError):
    """Malformed or invalid configuration text."""


@dataclass(frozen=True)
class EstimatorSettings:
    """Controls for the constant estimators (CLI ``estimate`` subcommand)."""

    p: float = 2.0
    theta: float = 1.0
    gamma: float = 2.0
    trials: int = 4
    seed: int = 1234
    horizon: float = 1.0
    noise_fields: int = 24
    bumps: int = 8
    spikes: int = 8


@dataclass(frozen=True)
class SweepAxes:
    """Sweep lattice: axis parameter names and strictly increasing values."""

    axis1_name: str
    axis1_values: tuple[float, ...]
    axis2_name: str
    axis2_values: tuple[float, ...]
    workers: int = 1


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams
    grid: Grid
    u0: InitialData
    v0: InitialData
    control: StepControl
    record_every: float
    lp_track: tuple[float, ...]
    plateau_window: float
    sweep: SweepAxes | None
    est: EstimatorSettings
    u0_l1_override: float | None


SWEEPABLE = ("m_exp", "mu", "chi", "c_d")

_FLOAT, _INT, _STR, _FLOATS = "float", "int", "str", "floats"

# key -> (type, default); None default means "absent unless given".
KEY_TABLE: dict[str, tuple[str, object]] = {
    # model
    "N": (_INT, 2),
    "chi": (_FLOAT, 1.0),
    "mu": (_FLOAT, 0.0),
    "m": (_FLOAT, 2.0),
    "c_d": (_FLOAT, 1.0),
    "lambda0": (_FLOAT, 1.0),
    "c_gn": (_FLOAT, 1.0),
    "u0_l1": (_FLOAT, None),
    # grid
    "nx": (_INT, 64),
    "ny": (_INT, None),
    "lx": (_FLOAT, 1.0),
    "ly": (_FLOAT, 1.0),
    # initial data (u0_*/v0_*)
    "u0_kind": (_STR, "constant"),
    "u0_value": (_FLOAT, 1.0),
    "u0_amplitude": (_FLOAT, 1.0),
    "u0_center": (_FLOATS, None),
    "u0_width": (_FLOAT, 0.1),
    "u0_seed": (_INT, 1),
    "u0_cutoff": (_INT, 4),
    "v0_kind": (_STR, "constant"),
    "v0_value": (_FLOAT, 0.0),
    "v0_amplitude": (_FLOAT, 1.0),
    "v0_center": (_FLOATS, None),
    "v0_width": (_FLOAT, 0.1),
    "v0_seed": (_INT, 2),
    "v0_cutoff": (_INT, 4),
    # stepping / detection
    "t_end": (_FLOAT, 1.0),
    "safety": (_FLOAT, 0.25),
    "dt_min": (_FLOAT, 1e-12),
    "dt_max": (_FLOAT, 0.1),
    "blowup_factor": (_FLOAT, 1e6),
    # recording / classification
    "record_every": (_FLOAT, None),
    "lp_track": (_FLOATS, (2.0,)),
    "plateau_window": (_FLOAT, 0.25),
    # sweep
    "sweep_axis1": (_STR, None),
    "sweep_values1": (_FLOATS, None),
    "sweep_axis2": (_STR, None),
    "sweep_values2": (_FLOATS, None),
    "workers": (_INT, 1),
    # estimators
    "est_p": (_FLOAT, 2.0),
    "est_theta": (_FLOAT, 1.0),
    "est_gamma": (_FLOAT, 2.0),
    "est_trials": (_INT, 4),
    "est_seed": (_INT, 1234),
    "est_horizon": (_FLOAT, 1.0),
    "est_noise_fields": (_INT, 24),
    "est_bumps": (_INT, 8),
    "est_spikes": (_INT, 8),
}


def _convert(kind: str, raw: str, key: str, line_no: int):
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        if kind == _FLOATS:
            parts = raw.split()
            if not parts:
                raise ValueError
            return tuple(float(x) for x in parts)
        return raw
    except ValueError:
        raise ConfigError(
            f"line {line_no}: cannot parse value {raw!r} for key {key!r} as {kind}"
        ) from None


def parse_config(text: str) -> SimulationConfig:
    """Parse configuration text; raises ConfigError naming the offending line."""
    values: dict[str, object] = {k: d for k, (_, d) in KEY_TABLE.items()}
    lines_seen: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in KEY_TABLE:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in lines_seen:
            raise ConfigError(
                f"line {line_no}: key {key!r} already set on line {lines_seen[key]}")
        lines_seen[key] = line_no
        values[key] = _convert(KEY_TABLE[key][0], raw, key, line_no)

    def where(key: str) -> str:
        return f"line {lines_seen[key]}: " if key in lines_seen else ""

    try:
        params = ModelParams(
            dim=values["N"], chi=values["chi"], mu=values["mu"], c_d=values["c_d"],
            m_exp=values["m"], lambda0=values["lambda0"], c_gn=values["c_gn"])
    except ConfigurationError as exc:
        key = _guess_key(str(exc))
        raise ConfigError(f"{where(key)}{exc}") from None

    ny = values["ny"]
    dim = 1 if ny is None else 2
    try:
        if dim == 1:
            grid = make_grid(1, [values["nx"]], [values["lx"]])
        else:
            grid = make_grid(2, [values["nx"], ny], [values["lx"], values["ly"]])
    except ConfigurationError as exc:
        raise ConfigError(f"{where('nx')}{exc}") from None

    u0 = _initial_from(values, "u0", where)
    v0 = _initial_from(values, "v0", where)

    try:
        control = StepControl(
            t_end=values["t_end"], safety=values["safety"], dt_min=values["dt_min"],
            dt_max=values["dt_max"], blowup_factor=values["blowup_factor"])
    except ConfigurationError as exc:
        key = _guess_key(str(exc))
        raise ConfigError(f"{where(key)}{exc}") from None

    record_every = values["record_every"]
    if record_every is None:
        record_every = control.t_end / 24.0
    if not (record_every > 0.0):
        raise ConfigError(f"{where('record_every')}record_every must be positive")

    plateau = values["plateau_window"]
    if not (0.0 < plateau <= 0.5):
        raise ConfigError(f"{where('plateau_window')}plateau_window must be in (0, 0.5]")

    sweep = None
    if values["sweep_axis1"] is not None or values["sweep_values1"] is not None:
        sweep = _sweep_from(values, where)

    est = EstimatorSettings(
        p=values["est_p"], theta=values["est_theta"], gamma=values["est_gamma"],
        trials=values["est_trials"], seed=values["est_seed"],
        horizon=values["est_horizon"], noise_fields=values["est_noise_fields"],
        bumps=values["est_bumps"], spikes=values["est_spikes"])

    u0_l1 = values["u0_l1"]
    if u0_l1 is not None and u0_l1 < 0.0:
        raise ConfigError(f"{where('u0_l1')}u0_l1 must be nonnegative")

    return SimulationConfig(
        params=params, grid=grid, u0=u0, v0=v0, control=control,
        record_every=record_every, lp_track=values["lp_track"],
        plateau_window=plateau, sweep=sweep, est=est, u0_l1_override=u0_l1)


def _guess_key(msg: str) -> str:
    # invariant messages start with the offending field name
    aliases = {"m_exp": "m", "dim": "N"}
    for name in ("chi", "mu", "c_d", "lambda0", "c_gn", "m_exp", "dim",
                 "t_end", "safety", "blowup_factor"):
        if msg.startswith(name + " "):
            return aliases.get(name, name)
    if "dt_min" in msg:
        return "dt_min"
    if "dt_max" in msg:
        return "dt_max"
    return ""


def _initial_from(values: dict, prefix: str, where) -> InitialData:
    kind = values[f"{prefix}_kind"]
    alias = {"noise": "filtered-noise"}
    kind = alias.get(kind, kind)
    try:
        if kind == "constant":
            return InitialData.constant(values[f"{prefix}_value"])
        if kind == "gaussian":
            return InitialData.gaussian(
                values[f"{prefix}_amplitude"], values[f"{prefix}_width"],
                values[f"{prefix}_center"])
        if kind == "filtered-noise":
            return InitialData.filtered_noise(
                values[f"{prefix}_seed"], values[f"{prefix}_amplitude"],
                values[f"{prefix}_cutoff"])
        raise ConfigurationError(f"unknown initial-data kind {kind!r}")
    except ConfigurationError as exc:
        raise ConfigError(f"{where(f'{prefix}_kind')}{prefix}: {exc}") from None


def _sweep_from(values: dict, where) -> SweepAxes:
    alias = {"m": "m_exp"}
    name1 = alias.get(values["sweep_axis1"], values["sweep_axis1"])
    vals1 = values["sweep_values1"]
    if name1 is None or vals1 is None:
        raise ConfigError(f"{where('sweep_axis1')}sweep needs both "
                          "sweep_axis1 and sweep_values1")
    name2 = alias.get(values["sweep_axis2"], values["sweep_axis2"])
    vals2 = values["sweep_values2"]
    if name2 is None:
        name2, vals2 = "mu", None
    if vals2 is None:
        vals2 = (values["mu"],) if name2 == "mu" else (values[
            {"m_exp": "m"}.get(name2, name2)],)
    for name, key in ((name1, "sweep_axis1"), (name2, "sweep_axis2")):
        if name not in SWEEPABLE:
            raise ConfigError(
                f"{where(key)}sweep axis must be one of {SWEEPABLE}, got {name!r}")
    for vals, key in ((vals1, "sweep_values1"), (vals2, "sweep_values2")):
        if len(vals) == 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(
                f"{where(key)}sweep values must be non-empty and strictly increasing")
    workers = values["workers"]
    if workers < 1:
        raise ConfigError(f"{where('workers')}workers must be >= 1")
    return SweepAxes(axis1_name=name1, axis1_values=vals1,
                     axis2_name=name2, axis2_values=vals2, workers=workers)


def with_param(params: ModelParams, name: str, value: float) -> ModelParams:
    """A copy of params with one sweepable field replaced."""
    if name not in SWEEPABLE:
        raise ConfigError(f"cannot sweep over {name!r}; choose from {SWEEPABLE}")
    return replace(params, **{name: value})
