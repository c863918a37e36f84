"""Experiment configuration files.

INI syntax with three sections::

    [experiment]
    N = 8
    R = 0.75
    r = 1.5
    sigma2_noise = 0.01
    master_seed = 2024

    [task]
    kind = memory
    d_max = 25

    [sweep]
    r = 0, 0.75, 1.5

Unknown sections or keys are rejected. Errors carry the line they refer to.
"""

from __future__ import annotations

import configparser
import itertools
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

TASK_KINDS = ("memory", "narma10", "mackey_glass", "spectral_norm")
SWEEP_AXES = ("R", "r", "sigma2_noise", "m")
DEFAULT_SLOPE = {"memory": 0.25, "narma10": 0.25, "mackey_glass": 1.0, "spectral_norm": 0.25}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class TaskConfig:
    kind: str
    d_max: int = 25
    tau: float = 17.0
    t_r: float = 3.0
    h: float = 0.1
    transient: float = 1000.0
    interpolation: str = "hermite"
    autonomous_steps: int = 200
    theta: float = 0.3
    attractor_lag: int = 6


@dataclass(frozen=True)
class ExperimentConfig:
    task: TaskConfig
    N: int = 8
    R: float = 0.75
    r: float = 0.0
    r_input: float = 2.0
    m: float = 0.25
    sigma2_noise: float = 0.0
    washout: int = 200
    train_len: int = 4000
    test_len: int = 1000
    n_realizations: int = 100
    master_seed: int = 0
    max_crystal_attempts: int = 200_000
    capacity_split: str = "test"
    ridge: float = 0.0
    sweep: dict = field(default_factory=dict)

    def grid(self) -> list["ExperimentConfig"]:
        """Cartesian product of the sweep axes, R outermost, m innermost."""
        axes = [(k, self.sweep.get(k, [getattr(self, k)])) for k in SWEEP_AXES]
        points = []
        for values in itertools.product(*(v for _, v in axes)):
            points.append(replace(self, sweep={}, **dict(zip(SWEEP_AXES, values))))
        return points

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep"] = {k: list(v) for k, v in self.sweep.items()}
        return d

    def to_text(self) -> str:
        """Resolved configuration in the file syntax; parses back to an equal config."""
        lines = ["[experiment]"]
        for f in fields(self):
            if f.name in ("task", "sweep"):
                continue
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        lines += ["", "[task]"]
        for f in fields(self.task):
            if f.name != "kind" and f.name not in _TASK_SPECIFIC[self.task.kind]:
                continue
            lines.append(f"{f.name} = {_fmt(getattr(self.task, f.name))}")
        if self.sweep:
            lines += ["", "[sweep]"]
            for k in SWEEP_AXES:
                if k in self.sweep:
                    lines.append(f"{k} = " + ", ".join(_fmt(v) for v in self.sweep[k]))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


# key -> (type, low, high) for numbers, (str, choices) for strings
_EXPERIMENT_KEYS = {
    "N": (int, 1, 64),
    "R": (float, 0.0, 1.0),
    "r": (float, 0.0, 10.0),
    "r_input": (float, 0.0, 10.0),
    "m": (float, -1e6, 1e6),
    "sigma2_noise": (float, 0.0, 1e6),
    "washout": (int, 0, 10**8),
    "train_len": (int, 2, 10**8),
    "test_len": (int, 2, 10**8),
    "n_realizations": (int, 1, 10**6),
    "master_seed": (int, 0, (1 << 64) - 1),
    "max_crystal_attempts": (int, 1, 10**9),
    "capacity_split": (str, ("test", "train")),
    "ridge": (float, 0.0, 1e12),
}
_TASK_KEYS = {
    "kind": (str, TASK_KINDS),
    "d_max": (int, 0, 10**4),
    "tau": (float, 1e-6, 1e6),
    "t_r": (float, 1e-6, 1e6),
    "h": (float, 1e-6, 0.1),
    "transient": (float, 0.0, 1e8),
    "interpolation": (str, ("hermite", "linear")),
    "autonomous_steps": (int, 1, 10**7),
    "theta": (float, 0.0, 1e6),
    "attractor_lag": (int, 1, 10**6),
}
_TASK_SPECIFIC = {
    "memory": {"d_max"},
    "spectral_norm": {"d_max"},
    "narma10": set(),
    "mackey_glass": {
        "tau", "t_r", "h", "transient", "interpolation",
        "autonomous_steps", "theta", "attractor_lag",
    },
}
_TASK_DEFAULT_DMAX = {"memory": 25, "spectral_norm": 40}


def _find_line(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section:
            k = re.split(r"[=:]", line, maxsplit=1)[0].strip()
            if k == key:
                return no
    return None


def _convert(raw: str, spec, where: str, line):
    kind = spec[0]
    raw = raw.strip()
    try:
        if kind is int:
            value = int(raw, 0) if raw.lower().startswith("0x") else int(raw)
        elif kind is float:
            value = float(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind.__name__}", line) from None
    if kind is str:
        if value not in spec[1]:
            raise ConfigError(f"{where}: {value!r} is not one of {', '.join(spec[1])}", line)
    else:
        lo, hi = spec[1], spec[2]
        if value != value or not lo <= value <= hi:
            raise ConfigError(f"{where} = {raw} is out of range [{lo}, {hi}]", line)
    return value


def parse_config(source) -> ExperimentConfig:
    """Parse a config from a path or from inline text, applying defaults."""
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and "[" not in source
    ):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
    else:
        text = str(source)

    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (R vs r)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("expected a [section] header", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    for section in cp.sections():
        if section not in ("experiment", "task", "sweep"):
            raise ConfigError(f"unknown section [{section}]", _find_line(text, section))
    if not cp.has_section("task") or not cp["task"]:
        raise ConfigError(
            "the [task] block is required and needs: kind (one of "
            + ", ".join(TASK_KINDS) + ")",
            _find_line(text, "task"),
        )

    task_raw = dict(cp["task"])
    if "kind" not in task_raw:
        raise ConfigError("[task] is missing required key: kind", _find_line(text, "task"))
    kind = _convert(task_raw["kind"], _TASK_KEYS["kind"], "task.kind", _find_line(text, "task", "kind"))
    task_values = {"kind": kind}
    allowed = _TASK_SPECIFIC[kind]
    for key, raw in task_raw.items():
        if key == "kind":
            continue
        line = _find_line(text, "task", key)
        if key not in _TASK_KEYS:
            raise ConfigError(f"unknown key task.{key}", line)
        if key not in allowed:
            raise ConfigError(f"task.{key} does not apply to kind {kind!r}", line)
        task_values[key] = _convert(raw, _TASK_KEYS[key], f"task.{key}", line)
    task_values.setdefault("d_max", _TASK_DEFAULT_DMAX.get(kind, 25))
    task = TaskConfig(**task_values)
    if kind == "mackey_glass":
        for name, ratio in (("tau", task.tau / task.h), ("t_r", task.t_r / task.h)):
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(
                    f"task.{name} must be a multiple of task.h", _find_line(text, "task", name)
                )

    exp_values = {}
    if cp.has_section("experiment"):
        for key, raw in cp["experiment"].items():
            line = _find_line(text, "experiment", key)
            if key not in _EXPERIMENT_KEYS:
                raise ConfigError(f"unknown key experiment.{key}", line)
            exp_values[key] = _convert(raw, _EXPERIMENT_KEYS[key], f"experiment.{key}", line)
    exp_values.setdefault("m", DEFAULT_SLOPE[kind])

    sweep = {}
    if cp.has_section("sweep"):
        for key, raw in cp["sweep"].items():
            line = _find_line(text, "sweep", key)
            if key not in SWEEP_AXES:
                raise ConfigError(
                    f"unknown sweep axis {key!r} (allowed: {', '.join(SWEEP_AXES)})", line
                )
            items = [x for x in raw.split(",") if x.strip()]
            if not items:
                raise ConfigError(f"sweep.{key} is empty", line)
            sweep[key] = [
                _convert(x, _EXPERIMENT_KEYS[key], f"sweep.{key}", line) for x in items
            ]

    cfg = ExperimentConfig(task=task, sweep=sweep, **exp_values)
    if kind == "memory" and cfg.task.d_max > cfg.washout:
        raise ConfigError(
            "task.d_max must not exceed experiment.washout (delayed targets need history)",
            _find_line(text, "task", "d_max"),
        )
    return cfg
