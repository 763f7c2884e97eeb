"""Run configuration: TOML file with sections [model], [solver], [diophantine], [domain].

Unknown sections or fields, and values of the wrong type, raise
:class:`ConfigError` naming the field and, when it can be located, the line.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field, fields
from typing import Optional

try:  # Python 3.11+
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - 3.10
    import tomli as _toml

from .diophantine import GOLDEN_MEAN, DiophantineParams, DomainSetParams
from .models import MODELS, LambdaSpec, make_model
from .newton import SolverConfig


class ConfigError(ValueError):
    def __init__(self, message, line: Optional[int] = None, field_name: Optional[str] = None):
        loc = f"line {line}: " if line else ""
        super().__init__(loc + message)
        self.line = line
        self.field_name = field_name


@dataclass
class ModelConfig:
    name: str = "coupled-standard-whisker"
    kappa: float = 3.0
    a0: float = 0.15915494309189535  # 1 / (2 pi)
    a1: float = 0.3
    omega: float = GOLDEN_MEAN
    eta: float = 0.05
    lambda_kind: str = "fixed"
    lambda_value: float = 0.9
    lambda_alpha: float = -1.0
    lambda_power: int = 1
    mu_initial: Optional[float] = None

    def lam_spec(self) -> LambdaSpec:
        return LambdaSpec(self.lambda_kind, self.lambda_value, self.lambda_alpha, self.lambda_power)

    def family(self, eps=0.0):
        kw = dict(eps=eps, lam_spec=self.lam_spec(), omega=self.omega, eta=self.eta, a0=self.a0)
        if self.name == "coupled-standard-whisker":
            kw.update(kappa=self.kappa, a1=self.a1)
        return make_model(self.name, **kw)


@dataclass
class DomainConfig:
    threshold_A: float = 1.0
    order_N: int = 6
    r0: float = 0.1
    grid: int = 100
    grid_kind: str = "cartesian"
    n_r: int = 20
    n_theta: int = 64
    workers: int = 0  # 0: one per CPU
    use_bundles: bool = True
    modes: object = "auto"  # "auto" or a fixed number of Fourier modes


@dataclass
class DiophantineConfig:
    tau: float = 1.2
    k_max: int = 100_000
    tau_lambda: Optional[float] = None


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    diophantine: DiophantineConfig = field(default_factory=DiophantineConfig)
    domain: DomainConfig = field(default_factory=DomainConfig)

    def family(self, eps=0.0):
        return self.model.family(eps)

    def dio_params(self) -> DiophantineParams:
        d = self.diophantine
        return DiophantineParams(self.model.omega, d.tau, d.k_max, d.tau_lambda)

    def set_params(self) -> DomainSetParams:
        d = self.domain
        return DomainSetParams(d.threshold_A, d.order_N, d.r0)

    def as_dict(self):
        return {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}


SECTIONS = {"model": ModelConfig, "solver": SolverConfig, "diophantine": DiophantineConfig,
            "domain": DomainConfig}


def _locate(text: Optional[str], section: str, key: Optional[str] = None) -> Optional[int]:
    if not text:
        return None
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line.strip("[] ")
            if key is None and current == section:
                return i
            continue
        if key is not None and current == section and "=" in line and line.split("=", 1)[0].strip() == key:
            return i
    return None


def _coerce(value, ftype, where: str):
    """Check / convert a TOML value against a dataclass field annotation (given as a string)."""
    t = ftype.__name__ if isinstance(ftype, type) else str(ftype).replace("typing.", "")
    optional = t.startswith("Optional[")
    base = t[len("Optional["):-1] if optional else t
    if value is None and optional:
        return None
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f"{where} must be a number, got {type(value).__name__}")
        return float(value)
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"{where} must be an integer, got {type(value).__name__}")
        return value
    if base == "bool":
        if not isinstance(value, bool):
            raise TypeError(f"{where} must be true or false, got {type(value).__name__}")
        return value
    if base == "str":
        if not isinstance(value, str):
            raise TypeError(f"{where} must be a string, got {type(value).__name__}")
        return value
    return value


def _build(cls, data: dict, section: str, text: Optional[str]):
    known = {f.name: f for f in fields(cls)}
    kw = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"[{section}] unknown field {key!r} (known: {', '.join(sorted(known))})",
                              _locate(text, section, key), f"{section}.{key}")
        try:
            kw[key] = _coerce(value, known[key].type, f"[{section}] {key}")
        except TypeError as exc:
            raise ConfigError(str(exc), _locate(text, section, key), f"{section}.{key}") from None
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}", _locate(text, section), section) from None


def config_from_dict(data: dict, text: Optional[str] = None) -> RunConfig:
    for sec in data:
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}] (known: {', '.join(SECTIONS)})", _locate(text, sec), sec)
    parts = {}
    for sec, cls in SECTIONS.items():
        raw = data.get(sec, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{sec}] must be a table", _locate(text, sec), sec)
        parts[sec] = _build(cls, raw, sec, text)
    cfg = RunConfig(**parts)
    _validate(cfg, text)
    return cfg


def _validate(cfg: RunConfig, text):
    m = cfg.model
    if m.name not in MODELS:
        raise ConfigError(f"[model] name must be one of {sorted(MODELS)}, got {m.name!r}",
                          _locate(text, "model", "name"), "model.name")
    try:
        m.lam_spec()
        cfg.dio_params()
        cfg.set_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.domain.grid_kind not in ("cartesian", "polar"):
        raise ConfigError("[domain] grid_kind must be 'cartesian' or 'polar'",
                          _locate(text, "domain", "grid_kind"), "domain.grid_kind")
    md = cfg.domain.modes
    if not (md == "auto" or (isinstance(md, int) and not isinstance(md, bool) and md >= 1)):
        raise ConfigError("[domain] modes must be \"auto\" or a positive integer",
                          _locate(text, "domain", "modes"), "domain.modes")
    if cfg.solver.n_modes < 1:
        raise ConfigError("[solver] n_modes must be positive", _locate(text, "solver", "n_modes"), "solver.n_modes")


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8", errors="replace")
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        # tomli puts "(at line L, column C)" in the message
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML parse error: {exc}", int(m.group(1)) if m else None) from None
    return config_from_dict(data, text)


def default_toml() -> str:
    """A complete config file with every default spelled out."""
    cfg = RunConfig()
    lines = []
    for sec in SECTIONS:
        lines.append(f"[{sec}]")
        for k, v in dataclasses.asdict(getattr(cfg, sec)).items():
            if v is None:
                lines.append(f"# {k} =  (unset)")
            elif isinstance(v, bool):
                lines.append(f"{k} = {'true' if v else 'false'}")
            elif isinstance(v, str):
                lines.append(f'{k} = "{v}"')
            else:
                lines.append(f"{k} = {v!r}")
        lines.append("")
    return "\n".join(lines)
