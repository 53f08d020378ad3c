"""Simulation configuration: flat ``key = value`` files with ``#`` comments."""

import dataclasses
import re
from dataclasses import dataclass, field

from .presets import parse_preset

MONITORS = ("energy", "omega", "bkm", "xy")


class ConfigError(ValueError):
    """Raised for a missing, unknown, mistyped or out-of-range configuration key."""


@dataclass
class SimConfig:
    alpha: float
    nu: float
    n_x: int
    n_z: int
    t_end: float
    initial_data: str
    dt_policy: str = "cfl(0.5)"
    dt_max: float = 1e-2
    nonlinear: bool = True
    monitors: tuple = MONITORS
    delta: float = None
    rho: float = None
    record_dt: float = 0.05
    checkpoint_times: tuple = ()
    seed: int = 0
    blowup_factor: float = 1e6
    mp_tol: float = 1e-6
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    @property
    def dt_rule(self):
        """``("fixed", dt)`` or ``("cfl", safety)``."""
        return _parse_policy(self.dt_policy)

    def validate(self):
        if not 0 < self.alpha <= 2:
            raise ConfigError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.n_x < 8 or self.n_x % 2:
            raise ConfigError(f"n_x must be even and >= 8, got {self.n_x}")
        if self.n_z < 8:
            raise ConfigError(f"n_z must be >= 8, got {self.n_z}")
        if not self.dt_max > 0:
            raise ConfigError(f"dt_max must be positive, got {self.dt_max}")
        if not self.record_dt > 0:
            raise ConfigError(f"record_dt must be positive, got {self.record_dt}")
        if not self.blowup_factor > 1:
            raise ConfigError(f"blowup_factor must exceed 1, got {self.blowup_factor}")
        if self.mp_tol < 0:
            raise ConfigError(f"mp_tol must be non-negative, got {self.mp_tol}")
        for t in self.checkpoint_times:
            if not 0 <= t <= self.t_end:
                raise ConfigError(f"checkpoint_times entry {t} is outside [0, t_end]")
        bad = [m for m in self.monitors if m not in MONITORS]
        if bad:
            raise ConfigError(f"monitors: unknown names {bad}; choose from {list(MONITORS)}")
        _parse_policy(self.dt_policy)
        try:
            parse_preset(self.initial_data)
        except ValueError as exc:
            raise ConfigError(f"initial_data: {exc}") from None

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["monitors"] = list(self.monitors)
        d["checkpoint_times"] = list(self.checkpoint_times)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("monitors", "checkpoint_times"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


REQUIRED = [f.name for f in dataclasses.fields(SimConfig) if f.default is dataclasses.MISSING]
TYPES = {f.name: f.type for f in dataclasses.fields(SimConfig)}
TYPES.update(monitors="names", checkpoint_times="floats", delta="float?", rho="float?")


def _parse_policy(text):
    m = re.fullmatch(r"\s*(fixed|cfl)\s*\(\s*([^)]+?)\s*\)\s*", str(text))
    if not m:
        raise ConfigError(f"dt_policy must be fixed(dt) or cfl(safety), got {text!r}")
    try:
        value = float(m.group(2))
    except ValueError:
        raise ConfigError(f"dt_policy: {m.group(2)!r} is not a number") from None
    if not value > 0:
        raise ConfigError(f"dt_policy value must be positive, got {value}")
    return m.group(1), value


def coerce(key, raw):
    """Convert the text ``raw`` to the type of config key ``key``."""
    if key not in TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = TYPES[key]
    raw = raw.strip()
    try:
        if kind in (float, "float"):
            return float(raw)
        if kind == "float?":
            return None if raw.lower() in ("", "none", "default") else float(raw)
        if kind in (int, "int"):
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind in (bool, "bool"):
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "names":
            if raw.lower() == "all":
                return MONITORS
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None


def read_pairs(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def parse_config(path=None, overrides=None, text=None):
    """Build a validated :class:`SimConfig` from a file and/or ``{key: text}`` overrides.

    Overrides win over file values.  Unknown keys, missing required keys, bad
    types and out-of-range values raise :class:`ConfigError` naming the key.
    """
    pairs = {}
    if path is not None:
        with open(path) as fh:
            text = fh.read()
    if text is not None:
        pairs.update(read_pairs(text))
    pairs.update(overrides or {})
    values = {key: coerce(key, raw) for key, raw in pairs.items()}
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return SimConfig(**values)


def dump_config(cfg):
    """Inverse of :func:`parse_config` (floats written with ``repr``, so round trips are exact)."""
    lines = []
    for key, value in cfg.to_dict().items():
        if value is None:
            text = "none"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
