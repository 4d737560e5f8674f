"""Flat ``key=value`` run configuration with dotted keys.

The same keys are accepted as command-line flags (``--model.k_max 3``);
precedence is built-in default, then config file, then flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .exceptions import ConfigError, InvalidSpec
from .model import Hyperparameters, InitOptions
from .schedule import TemperatureSchedule
from . import synthdata as sd

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(text):
    low = text.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _scalar_or_floats(text):
    values = _floats(text)
    return values[0] if len(values) == 1 else values


def _optional(parse):
    def inner(text):
        return None if text.strip().lower() in ("", "none", "mean") else parse(text)

    return inner


def _optional_path(text):
    return None if text.strip().lower() in ("", "none") else text.strip()


# key -> (parser, default)
SCHEMA = {
    "model.k_max": (int, 10),
    "model.alpha0": (float, 0.1),
    "model.m0": (_optional(_scalar_or_floats), None),
    "model.beta0": (float, 1e-3),
    "model.a0": (float, 3.0),
    "model.b0": (_scalar_or_floats, 1.0),
    "model.b0_range": (_optional(_floats), None),
    "model.d0": (float, 0.9),
    "model.c_init": (float, 1.0),
    "model.max_iterations": (int, 200),
    "model.epsilon": (float, 1e-5),
    "model.standardize": (_bool, True),
    "schedule.kind": (str, "fixed"),
    "schedule.t0": (float, 1.0),
    "schedule.annealed_iterations": (int, 10),
    "init.concentration": (float, 3000.0),
    "init.n_init": (int, 5),
    "init.release_certainty": (float, 0.6),
    "init.max_hold": (int, 20),
    "selection.threshold": (float, 0.5),
    "run.repetitions": (int, 10),
    "run.base_seed": (int, 0),
    "run.shuffle_covariates": (_bool, True),
    "run.workers": (int, 1),
    "input.path": (_optional_path, None),
    "truth.labels": (_optional_path, None),
    "truth.relevant": (_optional_path, None),
    "output.dir": (str, "vbvarsel_out"),
    "simulate.enabled": (_bool, False),
    "simulate.n": (int, 100),
    "simulate.j_total": (int, 200),
    "simulate.frac_relevant": (float, 0.1),
    "simulate.weights": (_floats, (0.5, 0.3, 0.2)),
    "simulate.means": (_floats, (0.0, 2.0, -2.0)),
    "simulate.correlation": (str, "none"),
    "simulate.rho": (float, 0.0),
    "simulate.rho_low": (float, 0.0),
    "simulate.rho_high": (float, 0.5),
    "simulate.noise_sd": (float, 0.0),
    "simulate.misspecification": (str, "none"),
    "simulate.dof": (_floats, (2.0, 3.0, 3.0)),
    "simulate.seed": (int, 0),
    "simulate.permuted_copies": (int, 0),
}

CORRELATIONS = ("none", "fixed", "per_cluster", "per_cluster_covariate")
MISSPECIFICATIONS = ("none", "t_noise", "t_components")


def parse_value(key, text):
    if key not in SCHEMA:
        raise ConfigError(f"unknown configuration key {key!r}")
    parse, _ = SCHEMA[key]
    try:
        return parse(str(text))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def resolve(file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> dict:
    values = {key: default for key, (_, default) in SCHEMA.items()}
    values.update(file_values or {})
    values.update(overrides or {})
    return values


@dataclass
class RunConfig:
    values: dict = field(default_factory=resolve)

    def __post_init__(self):
        unknown = set(self.values) - set(SCHEMA)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        self.values = resolve(self.values)
        if self.values["run.repetitions"] < 1:
            raise ConfigError("run.repetitions must be >= 1")
        if self.values["run.workers"] < 1:
            raise ConfigError("run.workers must be >= 1")
        # fail early on invalid model, schedule, init or simulation settings
        self.hyperparameters()
        self.schedule()
        self.init_options()
        if self.values["simulate.enabled"]:
            self.synthetic_spec()
        b0_range = self.values["model.b0_range"]
        if b0_range is not None and not (len(b0_range) == 2 and 0 < b0_range[0] <= b0_range[1]):
            raise ConfigError("model.b0_range must be two positive numbers low,high")

    def __getitem__(self, key):
        return self.values[key]

    def hyperparameters(self, **changes) -> Hyperparameters:
        v = self.values
        kwargs = dict(
            k_max=v["model.k_max"],
            alpha0=v["model.alpha0"],
            m0=v["model.m0"],
            beta0=v["model.beta0"],
            a0=v["model.a0"],
            b0=v["model.b0"],
            d0=v["model.d0"],
            c_init=v["model.c_init"],
            max_iterations=v["model.max_iterations"],
            epsilon=v["model.epsilon"],
            standardize=v["model.standardize"],
        )
        kwargs.update(changes)
        return Hyperparameters(**kwargs)

    def schedule(self) -> TemperatureSchedule:
        v = self.values
        return TemperatureSchedule(v["schedule.kind"], v["schedule.t0"], v["schedule.annealed_iterations"])

    def init_options(self) -> InitOptions:
        v = self.values
        return InitOptions(
            concentration=v["init.concentration"],
            n_init=v["init.n_init"],
            release_certainty=v["init.release_certainty"],
            max_hold=v["init.max_hold"],
        )

    def synthetic_spec(self, seed: Optional[int] = None) -> sd.SyntheticSpec:
        v = self.values
        kind = v["simulate.correlation"]
        if kind not in CORRELATIONS:
            raise InvalidSpec(f"simulate.correlation must be one of {CORRELATIONS}")
        correlation = {
            "none": None,
            "fixed": sd.FixedAll(v["simulate.rho"]),
            "per_cluster": sd.PerCluster(v["simulate.rho_low"], v["simulate.rho_high"]),
            "per_cluster_covariate": sd.PerClusterAndCovariate(v["simulate.rho_low"], v["simulate.rho_high"]),
        }[kind]
        mis = v["simulate.misspecification"]
        if mis not in MISSPECIFICATIONS:
            raise InvalidSpec(f"simulate.misspecification must be one of {MISSPECIFICATIONS}")
        dof = v["simulate.dof"]
        if mis == "t_noise":
            misspecification = sd.StudentTNoise(tuple(dof) if len(dof) == 3 else (dof[0],) * 3)
        elif mis == "t_components":
            misspecification = sd.StudentTComponents(dof[0])
        else:
            misspecification = None
        if v["simulate.permuted_copies"] < 0:
            raise InvalidSpec("simulate.permuted_copies must be >= 0")
        return sd.SyntheticSpec(
            n=v["simulate.n"],
            j_total=v["simulate.j_total"],
            frac_relevant=v["simulate.frac_relevant"],
            weights=v["simulate.weights"],
            means=v["simulate.means"],
            correlation=correlation,
            noise_sd=v["simulate.noise_sd"],
            misspecification=misspecification,
            seed=v["simulate.seed"] if seed is None else seed,
        )

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(self.values.items())}
