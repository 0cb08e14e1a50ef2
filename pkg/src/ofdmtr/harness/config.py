"""Experiment configuration: a flat ``key = value`` file under ``[experiment]``.

Lists are comma separated, complex numbers use Python literals (``1+0j``).
:func:`serialize` writes keys in sorted order with canonical value
formatting, so the text (and its hash) identifies a run.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, fields

from ..errors import ConfigError
from ..model import WaveformParams
from ..solvers import SOLVERS

PLAN_KINDS = ("carriers", "indices", "random-carriers")
SYMBOL_SOURCES = ("explicit", "qpsk", "chu", "uniform-phase")
SOLVER_CHOICES = SOLVERS + ("none",)
SECTION = "experiment"


@dataclass(frozen=True)
class ExperimentConfig:
    n_carriers: int = 6
    n_bits: int = 1
    oversampling: int = 10
    freq_step_hz: float = None
    plan: str = "carriers"
    plan_indices: tuple = (2, 3)
    plan_count: int = 2
    symbols: str = "explicit"
    symbol_values: tuple = (1 + 0j, 1 + 0j)
    chu_gammas: tuple = (1, -1)
    solvers: tuple = SOLVERS
    max_iters: int = 800
    rel_cost_tol: float = 1e-10
    seed: int = 0
    n_trials: int = 2000
    workers: int = 1
    ccdf_db_max: float = 10.0
    ccdf_db_step: float = 0.05
    pfa: float = 1e-5
    noise_power: float = 1.0
    snr_db_min: float = -30.0
    snr_db_max: float = -10.0
    snr_db_step: float = 2.0
    detect_trials: int = 100_000
    af_delays: int = 201
    af_dopplers: int = 201

    def __post_init__(self):
        if self.freq_step_hz is None:
            object.__setattr__(self, "freq_step_hz", self.params.freq_step_hz)
        self.validate()

    @property
    def params(self) -> WaveformParams:
        return WaveformParams(self.n_carriers, self.n_bits, self.oversampling, self.freq_step_hz)

    @property
    def snr_grid_db(self) -> tuple:
        n = int(round((self.snr_db_max - self.snr_db_min) / self.snr_db_step)) + 1
        return tuple(self.snr_db_min + i * self.snr_db_step for i in range(n))

    def replace(self, **changes) -> "ExperimentConfig":
        if "n_carriers" in changes and "freq_step_hz" not in changes:
            changes["freq_step_hz"] = None
        return dataclasses.replace(self, **changes)

    def validate(self) -> None:
        try:
            params = self.params
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.plan not in PLAN_KINDS:
            raise ConfigError(f"plan must be one of {PLAN_KINDS}, got {self.plan!r}")
        if self.symbols not in SYMBOL_SOURCES:
            raise ConfigError(f"symbols must be one of {SYMBOL_SOURCES}, got {self.symbols!r}")
        bad = [s for s in self.solvers if s not in SOLVER_CHOICES]
        if bad or not self.solvers:
            raise ConfigError(f"solvers must be drawn from {SOLVER_CHOICES}, got {self.solvers!r}")
        if self.plan == "carriers":
            if any(not 0 <= n < params.n_carriers for n in self.plan_indices):
                raise ConfigError("plan_indices reference a carrier out of range")
        elif self.plan == "indices":
            if any(not 0 <= i < params.n_codes for i in self.plan_indices):
                raise ConfigError("plan_indices reference a code slot out of range")
        elif not 0 <= self.plan_count <= params.n_carriers:
            raise ConfigError("plan_count must lie in [0, n_carriers]")
        if len(set(self.plan_indices)) != len(self.plan_indices):
            raise ConfigError("plan_indices contains duplicates")
        if self.symbols == "explicit" and self.plan != "random-carriers":
            expected = len(self.plan_indices) * (params.n_bits if self.plan == "carriers" else 1)
            if len(self.symbol_values) != expected:
                raise ConfigError(
                    f"symbol_values has {len(self.symbol_values)} entries, plan needs {expected}"
                )
        if self.symbols == "chu":
            n_info = self.plan_count if self.plan == "random-carriers" else len(self.plan_indices)
            if self.plan == "indices":
                raise ConfigError("chu symbols need a carrier-based plan")
            if len(self.chu_gammas) != n_info or any(g not in (1, -1) for g in self.chu_gammas):
                raise ConfigError("chu_gammas needs one +1/-1 per informative carrier")
        for name in ("max_iters", "n_trials", "workers", "detect_trials", "af_dopplers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.af_delays < 0:
            raise ConfigError("af_delays must be nonnegative (0 means every lag)")
        if not 0 < self.pfa < 1:
            raise ConfigError("pfa must lie in (0, 1)")
        if self.rel_cost_tol < 0 or self.noise_power <= 0:
            raise ConfigError("rel_cost_tol must be >= 0 and noise_power > 0")
        if self.ccdf_db_step <= 0 or self.snr_db_step <= 0 or self.snr_db_max < self.snr_db_min:
            raise ConfigError("grid steps must be positive and ranges nonempty")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_TUPLE_TYPES = {"plan_indices": int, "symbol_values": complex, "chu_gammas": int, "solvers": str}


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(name, raw: str):
    default = _FIELDS[name].default
    raw = raw.strip()
    try:
        if name in _TUPLE_TYPES:
            kind = _TUPLE_TYPES[name]
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if kind is complex:
                return tuple(complex(s.replace(" ", "")) for s in items)
            return tuple(kind(s) for s in items)
        if name == "freq_step_hz" or isinstance(default, float):
            return float(raw)
        if isinstance(default, int):
            return int(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse(text: str) -> ExperimentConfig:
    """Parse config text; unknown keys are an error."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if not parser.has_section(SECTION):
        raise ConfigError(f"missing [{SECTION}] section")
    values = {}
    for key, raw in parser.items(SECTION):
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _convert(key, raw)
    return ExperimentConfig(**values)


def load(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def serialize(config: ExperimentConfig) -> str:
    lines = [f"[{SECTION}]"]
    for name in sorted(_FIELDS):
        lines.append(f"{name} = {_format(getattr(config, name))}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig, extra: str = "") -> str:
    return hashlib.sha256((serialize(config) + extra).encode()).hexdigest()[:12]


def preset(name: str, **overrides) -> ExperimentConfig:
    """Canned setups for the three studies.

    ``envelope``: N=6, M=1, carriers 2 and 3 fixed to 1.
    ``ccdf``: N=6, M=10, two random informative carriers, QPSK.
    ``detect``: N=6, M=10, Chu codes on carriers 2 (gamma=+1) and 3 (gamma=-1).
    """
    if name == "envelope":
        base = ExperimentConfig()
    elif name == "ccdf":
        base = ExperimentConfig(
            n_bits=10, plan="random-carriers", plan_indices=(), symbols="qpsk",
            symbol_values=(), solvers=SOLVERS + ("none",),
        )
    elif name == "detect":
        base = ExperimentConfig(n_bits=10, symbols="chu", symbol_values=())
    else:
        raise ConfigError(f"unknown preset {name!r}")
    return base.replace(**overrides) if overrides else base

