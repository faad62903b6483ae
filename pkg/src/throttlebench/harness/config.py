"""Experiment configuration: a flat INI file of ``key = value`` lines with one
section per strategy cell.

Grammar (see README for a worked example)::

    [experiment]
    name = locked-label            # experiment_id in the report
    base_seed = 12345
    info_modes = full partial      # any of: full, partial
    horizons = 1024 2048 4096 8192
    replications = 200
    mu = 0.5                       # hindsight discount; default rho/vmax
    hindsight = on                 # per-episode hindsight benchmark (on|off)
    invariants = on                # per-episode structural checks (on|off)
    workers = 1                    # >1 runs cells on a process pool
    output = out/report.csv
    svg = out/regret.svg           # optional line chart

    [instance]
    kind = two_price               # generator name, or: kind = file / path = ...
    delta = 0.5                    # generator parameters, as needed

    [strategy:ogdcb]               # label after the colon; kind defaults to it
    [strategy:static-half]
    kind = static
    pi = 0.5

Episode seeds derive from hash(base_seed, horizon, strategy label,
replication), so reruns and worker pools reproduce byte-identical reports.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

from ..instances import Instance, build_instance, instance_from_text
from ..model import InfoMode


def derive_episode_seed(base_seed: int, horizon: int, strategy_label: str, replication: int) -> int:
    digest = hashlib.sha256(
        f"{base_seed}:{horizon}:{strategy_label}:{replication}".encode("ascii")
    ).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


@dataclass(frozen=True)
class StrategySpec:
    label: str
    kind: str
    params: tuple = ()  # sorted (key, value) pairs; hashable and picklable

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    @classmethod
    def make(cls, label: str, kind: str | None = None, params: dict | None = None):
        return cls(label, (kind or label).lower(), tuple(sorted((params or {}).items())))


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    params: tuple = ()
    path: str | None = None

    @classmethod
    def make(cls, kind: str, params: dict | None = None, path: str | None = None):
        return cls(kind.lower(), tuple(sorted((params or {}).items())), path)

    def build(self, horizon: int) -> Instance:
        if self.kind == "file":
            with open(self.path, "r", encoding="ascii") as fh:
                inst = instance_from_text(fh.read())
            if inst.horizon != horizon:
                raise ValueError(
                    f"instance file has horizon {inst.horizon}, experiment wants {horizon}")
            return inst
        return build_instance(self.kind, horizon, dict(self.params))


@dataclass
class ExperimentConfig:
    name: str
    instance: InstanceSpec
    strategies: list
    horizons: list
    replications: int
    base_seed: int = 0
    info_modes: list = field(default_factory=lambda: [InfoMode.FULL])
    mu: float | None = None
    hindsight: bool = True
    invariants: bool = True
    workers: int = 1
    output: str | None = None
    svg: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.horizons:
            raise ValueError("need at least one horizon")
        if not self.strategies:
            raise ValueError("need at least one strategy")
        self.horizons = sorted(int(t) for t in self.horizons)
        self.info_modes = [InfoMode.parse(m) for m in self.info_modes]


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI exit code 1)."""


_TRUE = {"on", "true", "yes", "1"}
_FALSE = {"off", "false", "no", "0"}


def _flag(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ConfigError(f"{key} must be on/off, got {text!r}")


def _auto(value: str):
    """Parse a parameter value: int if it looks integral, else float, else str."""
    text = value.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_experiment_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc
    if "experiment" not in cp or "instance" not in cp:
        raise ConfigError("config needs [experiment] and [instance] sections")
    exp = cp["experiment"]

    try:
        horizons = [int(tok) for tok in exp.get("horizons", "").split()]
        replications = exp.getint("replications")
        base_seed = exp.getint("base_seed", 0)
    except ValueError as exc:
        raise ConfigError(f"bad numeric field in [experiment]: {exc}") from exc
    if replications is None:
        raise ConfigError("replications is required")

    modes = exp.get("info_modes", "full").split()
    try:
        info_modes = [InfoMode.parse(m) for m in modes]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    inst_items = {k: v for k, v in cp["instance"].items()}
    kind = inst_items.pop("kind", None)
    if kind is None:
        raise ConfigError("[instance] needs a kind")
    path = inst_items.pop("path", None)
    if kind.strip().lower() == "file" and not path:
        raise ConfigError("[instance] kind = file needs a path")
    instance = InstanceSpec.make(kind, {k: _auto(v) for k, v in inst_items.items()}, path)

    strategies = []
    for section in cp.sections():
        if not section.startswith("strategy:"):
            continue
        label = section.partition(":")[2].strip()
        items = {k: v for k, v in cp[section].items()}
        skind = items.pop("kind", label)
        strategies.append(StrategySpec.make(label, skind, {k: _auto(v) for k, v in items.items()}))
    if not strategies:
        raise ConfigError("need at least one [strategy:...] section")

    mu = exp.getfloat("mu", fallback=None)
    try:
        return ExperimentConfig(
            name=exp.get("name", "experiment"),
            instance=instance,
            strategies=strategies,
            horizons=horizons,
            replications=replications,
            base_seed=base_seed,
            info_modes=info_modes,
            mu=mu,
            hindsight=_flag(exp.get("hindsight", "on"), "hindsight"),
            invariants=_flag(exp.get("invariants", "on"), "invariants"),
            workers=exp.getint("workers", 1),
            output=exp.get("output", fallback=None),
            svg=exp.get("svg", fallback=None),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_experiment_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_experiment_config(fh.read())
