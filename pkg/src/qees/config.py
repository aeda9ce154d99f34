"""Run configuration: dataclass model plus an INI-style ``.cfg`` reader/writer.

A config file has one section per concern::

    [run]         format_version, mode, population, sigma, generations,
                  init_seed, checkpoint_interval
    [noise]       seed, length
    [adam]        alpha, beta1, beta2, eps, l2
    [policy]      hidden
    [environment] variant, max_steps, dt, max_speed, max_turn_rate, fitness
    [trap]        front_wall_x, side_wall_y, side_wall_length, wall_thickness
    [output]      record_wall_clock, dump_trajectory

The run seed, output directory and worker count come from the command line.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .core import ObjectiveMode
from .environment import EnvironmentSpec, FitnessDef, TrapGeometry, Variant
from .errors import ConfigError
from .policy import PolicySpec
from .sampling import DEFAULT_TABLE_LENGTH

FORMAT_VERSION = 1


@dataclass(frozen=True)
class AdamConfig:
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    l2_coeff: float = 0.005


@dataclass(frozen=True)
class RunConfig:
    mode: ObjectiveMode = ObjectiveMode.FITNESS_ONLY
    population: int = 200
    sigma: float = 0.02
    generations: int = 100
    table_seed: int = 12345
    table_length: int = DEFAULT_TABLE_LENGTH
    # None derives the initialization seed from the run seed
    init_seed: int | None = None
    run_seed: int = 0
    hidden: tuple[int, ...] = (16, 16)
    environment: EnvironmentSpec = field(default_factory=EnvironmentSpec)
    adam: AdamConfig = field(default_factory=AdamConfig)
    checkpoint_interval: int = 0
    output_dir: str | None = None
    workers: int = 1
    record_wall_clock: bool = False
    dump_trajectory: bool = False

    def __post_init__(self):
        validate_config(self)

    @property
    def policy(self) -> PolicySpec:
        return PolicySpec(self.environment.obs_dim, self.environment.action_dim, self.hidden)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def digest(self) -> str:
        """Hash of every setting that influences the numbers of a run.

        Generation count, output location, worker count and checkpoint
        cadence are excluded so a run may be resumed and extended.
        """
        payload = {
            "mode": self.mode.value,
            "population": self.population,
            "sigma": repr(float(self.sigma)),
            "table_seed": self.table_seed,
            "table_length": self.table_length,
            "init_seed": self.init_seed,
            "run_seed": self.run_seed,
            "hidden": list(self.hidden),
            "environment": _env_dict(self.environment),
            "adam": {k: repr(float(v)) for k, v in asdict(self.adam).items()},
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _env_dict(env: EnvironmentSpec) -> dict:
    d = {
        "variant": env.variant.value,
        "max_steps": env.max_steps,
        "dt": repr(float(env.dt)),
        "max_speed": repr(float(env.max_speed)),
        "max_turn_rate": repr(float(env.max_turn_rate)),
        "fitness": env.fitness_def.value,
    }
    if env.trap is not None:
        d["trap"] = {k: repr(float(v)) for k, v in asdict(env.trap).items()}
    return d


def validate_config(cfg: RunConfig) -> None:
    if not isinstance(cfg.mode, ObjectiveMode):
        raise ConfigError(f"bad mode {cfg.mode!r}", field="run.mode")
    if cfg.population <= 0 or cfg.population % 2:
        raise ConfigError(f"population must be even and positive, got {cfg.population}", field="run.population")
    if not (cfg.sigma > 0 and math.isfinite(cfg.sigma)):
        raise ConfigError(f"sigma must be positive, got {cfg.sigma}", field="run.sigma")
    if cfg.generations < 0:
        raise ConfigError(f"generations must be non-negative, got {cfg.generations}", field="run.generations")
    if cfg.table_length <= 0:
        raise ConfigError("noise table length must be positive", field="noise.length")
    if cfg.checkpoint_interval < 0:
        raise ConfigError("checkpoint_interval must be non-negative", field="run.checkpoint_interval")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1", field="workers")
    a = cfg.adam
    if not a.alpha > 0:
        raise ConfigError("alpha must be positive", field="adam.alpha")
    if not (0 < a.beta1 < 1):
        raise ConfigError("beta1 must lie in (0, 1)", field="adam.beta1")
    if not (0 < a.beta2 < 1):
        raise ConfigError("beta2 must lie in (0, 1)", field="adam.beta2")
    if not a.eps > 0:
        raise ConfigError("eps must be positive", field="adam.eps")
    if not a.l2_coeff >= 0:
        raise ConfigError("l2 must be non-negative", field="adam.l2")
    if any(h <= 0 for h in cfg.hidden):
        raise ConfigError("hidden widths must be positive", field="policy.hidden")


# ---------------------------------------------------------------- file format


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*[=:]", line):
            return lineno
    return None


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, text: str):
        self.p = parser
        self.text = text
        self.used: set[tuple[str, str]] = set()

    def error(self, section, key, msg):
        return ConfigError(msg, field=f"{section}.{key}" if key else section, line=_line_of(self.text, section, key))

    def get(self, section, key, conv, default=None, required=False):
        if not self.p.has_option(section, key):
            if required:
                raise self.error(section, key, "missing required field")
            return default
        self.used.add((section, key))
        raw = self.p.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise self.error(section, key, f"cannot parse {raw!r}: {exc}") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        # allow "1e7"-style integers
        f = float(raw)
        if not f.is_integer():
            raise ValueError("expected an integer") from None
        return int(f)


def _seed_or_auto(raw: str) -> int | None:
    return None if raw.lower() in ("auto", "none", "") else _int(raw)


def _widths(raw: str) -> tuple[int, ...]:
    if raw.strip() in ("", "[]", "none"):
        return ()
    return tuple(_int(tok) for tok in raw.replace("[", "").replace("]", "").split(",") if tok.strip())


_KNOWN = {
    "run": {"format_version", "mode", "population", "sigma", "generations", "init_seed", "checkpoint_interval"},
    "noise": {"seed", "length"},
    "adam": {"alpha", "beta1", "beta2", "eps", "l2"},
    "policy": {"hidden"},
    "environment": {"variant", "max_steps", "dt", "max_speed", "max_turn_rate", "fitness"},
    "trap": {"front_wall_x", "side_wall_y", "side_wall_length", "wall_thickness"},
    "output": {"record_wall_clock", "dump_trajectory"},
}


def parse_config(text: str, **overrides) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed config: {exc.message if hasattr(exc, 'message') else exc}", line=line) from None

    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]", field=section, line=_line_of(text, section, None))
        for key in parser.options(section):
            if key not in _KNOWN[section]:
                raise ConfigError("unknown field", field=f"{section}.{key}", line=_line_of(text, section, key))

    r = _Reader(parser, text)
    version = r.get("run", "format_version", _int, required=True)
    if version != FORMAT_VERSION:
        raise r.error("run", "format_version", f"unsupported format version {version}")

    def mode_conv(raw):
        return ObjectiveMode.parse(raw)

    variant = r.get("environment", "variant", lambda s: Variant(s.lower()), default=Variant.NORMAL)
    trap = None
    if variant is Variant.DECEPTIVE:
        base = TrapGeometry()
        try:
            trap = TrapGeometry(
                front_wall_x=r.get("trap", "front_wall_x", float, base.front_wall_x),
                side_wall_y=r.get("trap", "side_wall_y", float, base.side_wall_y),
                side_wall_length=r.get("trap", "side_wall_length", float, base.side_wall_length),
                wall_thickness=r.get("trap", "wall_thickness", float, base.wall_thickness),
            )
        except ValueError as exc:
            raise r.error("trap", None, str(exc)) from None
    elif parser.has_section("trap"):
        raise ConfigError("[trap] is only valid for the deceptive variant", field="trap", line=_line_of(text, "trap", None))

    base_env = EnvironmentSpec()
    try:
        env = EnvironmentSpec(
            variant=variant,
            max_steps=r.get("environment", "max_steps", _int, base_env.max_steps),
            dt=r.get("environment", "dt", float, base_env.dt),
            max_speed=r.get("environment", "max_speed", float, base_env.max_speed),
            max_turn_rate=r.get("environment", "max_turn_rate", float, base_env.max_turn_rate),
            trap=trap,
            fitness_def=r.get("environment", "fitness", lambda s: FitnessDef(s.lower()), base_env.fitness_def),
        )
    except ValueError as exc:
        raise r.error("environment", None, str(exc)) from None

    base = RunConfig.__dataclass_fields__
    adam = AdamConfig(
        alpha=r.get("adam", "alpha", float, AdamConfig.alpha),
        beta1=r.get("adam", "beta1", float, AdamConfig.beta1),
        beta2=r.get("adam", "beta2", float, AdamConfig.beta2),
        eps=r.get("adam", "eps", float, AdamConfig.eps),
        l2_coeff=r.get("adam", "l2", float, AdamConfig.l2_coeff),
    )
    kwargs = dict(
        mode=r.get("run", "mode", mode_conv, required=True),
        population=r.get("run", "population", _int, base["population"].default),
        sigma=r.get("run", "sigma", float, base["sigma"].default),
        generations=r.get("run", "generations", _int, base["generations"].default),
        init_seed=r.get("run", "init_seed", _seed_or_auto, None),
        checkpoint_interval=r.get("run", "checkpoint_interval", _int, 0),
        table_seed=r.get("noise", "seed", _int, base["table_seed"].default),
        table_length=r.get("noise", "length", _int, base["table_length"].default),
        hidden=r.get("policy", "hidden", _widths, base["hidden"].default),
        environment=env,
        adam=adam,
        record_wall_clock=r.get("output", "record_wall_clock", _bool, False),
        dump_trajectory=r.get("output", "dump_trajectory", _bool, False),
    )
    kwargs.update(overrides)
    try:
        return RunConfig(**kwargs)
    except ConfigError as exc:
        if exc.field and "." in exc.field and exc.line is None:
            section, key = exc.field.split(".", 1)
            key = {"l2_coeff": "l2"}.get(key, key)
            raise ConfigError(str(exc).split("] ", 1)[-1], field=exc.field, line=_line_of(text, section, key)) from None
        raise


def load_config(path, **overrides) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc.strerror}") from None
    return parse_config(text, **overrides)


def dump_config(cfg: RunConfig) -> str:
    """Render ``cfg`` in the file format; ``parse_config`` inverts it."""
    env = cfg.environment
    lines = [
        "[run]",
        f"format_version = {FORMAT_VERSION}",
        f"mode = {cfg.mode.value}",
        f"population = {cfg.population}",
        f"sigma = {cfg.sigma!r}",
        f"generations = {cfg.generations}",
        f"init_seed = {'auto' if cfg.init_seed is None else cfg.init_seed}",
        f"checkpoint_interval = {cfg.checkpoint_interval}",
        "",
        "[noise]",
        f"seed = {cfg.table_seed}",
        f"length = {cfg.table_length}",
        "",
        "[adam]",
        f"alpha = {cfg.adam.alpha!r}",
        f"beta1 = {cfg.adam.beta1!r}",
        f"beta2 = {cfg.adam.beta2!r}",
        f"eps = {cfg.adam.eps!r}",
        f"l2 = {cfg.adam.l2_coeff!r}",
        "",
        "[policy]",
        f"hidden = {', '.join(str(h) for h in cfg.hidden)}",
        "",
        "[environment]",
        f"variant = {env.variant.value}",
        f"max_steps = {env.max_steps}",
        f"dt = {env.dt!r}",
        f"max_speed = {env.max_speed!r}",
        f"max_turn_rate = {env.max_turn_rate!r}",
        f"fitness = {env.fitness_def.value}",
    ]
    if env.trap is not None:
        t = env.trap
        lines += [
            "",
            "[trap]",
            f"front_wall_x = {t.front_wall_x!r}",
            f"side_wall_y = {t.side_wall_y!r}",
            f"side_wall_length = {t.side_wall_length!r}",
            f"wall_thickness = {t.wall_thickness!r}",
        ]
    lines += [
        "",
        "[output]",
        f"record_wall_clock = {str(cfg.record_wall_clock).lower()}",
        f"dump_trajectory = {str(cfg.dump_trajectory).lower()}",
        "",
    ]
    return "\n".join(lines)
