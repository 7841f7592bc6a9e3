"""Flat `key = value` run configuration with `[section]` headers.

Sections: params (table overrides), sim, trainer, sensitivity, roa. Every
key is optional; defaults are the dataclass defaults of the owning module.
Unknown sections or keys are rejected with the offending line number, as is
anything that does not parse. Lines starting with `#` and blank lines are
ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .integrator import SimConfig
from .params import PARAM_NAMES, PhysicalParams
from .roa import RoaConfig
from .trainer import TrainerConfig


class ConfigError(Exception):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_pair(text: str) -> tuple:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected lo,hi pair: {text!r}")
    return tuple(parts)


def _parse_floats(text: str) -> tuple:
    return tuple(float(p) for p in text.split(","))


@dataclass
class SensitivityOptions:
    h_complex: float = 1e-8
    h_central: float = 1e-5
    time: float = 1.0               # uncontrolled horizon, s
    time_controlled: float = 10.0
    z0: tuple = (0.01, 0.0, 0.01, 0.0)


# casters per section; whatever is absent keeps its default
_SIM_KEYS = {"h": float, "horizon": float, "model": str}
_TRAINER_KEYS = {
    "gamma": float, "lr": float, "max_episodes": int, "horizon_steps": int,
    "success_threshold": float, "success_window": int, "ic_halfwidth": float,
    "model": str, "seed": int, "standardize_returns": _parse_bool,
}
_SENSITIVITY_KEYS = {
    "h_complex": float, "h_central": float, "time": float,
    "time_controlled": float, "z0": _parse_floats,
}
_ROA_KEYS = {
    "sim_time": float, "h": float, "angle_tol": float, "final_window": float,
    "cart_bound": float, "n_samples": int, "seed": int, "pairing": str,
    "box_x": _parse_pair, "box_xdot": _parse_pair,
    "box_alpha": _parse_pair, "box_alphadot": _parse_pair,
    "refine_radii": _parse_floats, "refine_per_center": int,
    "refine_max_total": int,
}
_SECTIONS = {
    "params": {name: float for name in PARAM_NAMES},
    "sim": _SIM_KEYS,
    "trainer": _TRAINER_KEYS,
    "sensitivity": _SENSITIVITY_KEYS,
    "roa": _ROA_KEYS,
}

_ROA_BOX_KEYS = ("box_x", "box_xdot", "box_alpha", "box_alphadot")
_ROA_REFINE_KEYS = {"refine_radii": "radii", "refine_per_center": "per_center",
                    "refine_max_total": "max_total"}


@dataclass
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    sim: SimConfig = field(default_factory=SimConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    sensitivity: SensitivityOptions = field(default_factory=SensitivityOptions)
    roa: RoaConfig = field(default_factory=RoaConfig)
    refine: "object" = None     # RefinementConfig overrides, if any

    @classmethod
    def load(cls, path) -> "RunConfig":
        return parse_config(Path(path).read_text(), source=str(path))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    raw = {name: {} for name in _SECTIONS}
    section = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(line_no, f"unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(line_no, f"expected `key = value`, got {stripped!r}")
        if section is None:
            raise ConfigError(line_no, "key outside any [section]")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        caster = _SECTIONS[section].get(key)
        if caster is None:
            raise ConfigError(line_no, f"unknown key {key!r} in [{section}]")
        try:
            raw[section][key] = caster(value)
        except ValueError as exc:
            raise ConfigError(line_no, f"bad value for {key}: {exc}") from None
    return _assemble(raw)


def _assemble(raw: dict) -> RunConfig:
    cfg = RunConfig()
    if raw["params"]:
        cfg.params = replace(cfg.params, **raw["params"])
    if raw["sim"]:
        cfg.sim = replace(cfg.sim, **raw["sim"])
    if raw["trainer"]:
        cfg.trainer = replace(cfg.trainer, **raw["trainer"])
    if raw["sensitivity"]:
        cfg.sensitivity = replace(cfg.sensitivity, **raw["sensitivity"])
    roa_kw = {k: v for k, v in raw["roa"].items()
              if k not in _ROA_BOX_KEYS and k not in _ROA_REFINE_KEYS}
    if any(k in raw["roa"] for k in _ROA_BOX_KEYS):
        box = list(RoaConfig().box)
        for i, k in enumerate(_ROA_BOX_KEYS):
            if k in raw["roa"]:
                box[i] = raw["roa"][k]
        roa_kw["box"] = tuple(box)
    if roa_kw:
        cfg.roa = replace(cfg.roa, **roa_kw)
    refine_kw = {attr: raw["roa"][k] for k, attr in _ROA_REFINE_KEYS.items()
                 if k in raw["roa"]}
    if refine_kw:
        from .roa import RefinementConfig
        cfg.refine = RefinementConfig(**refine_kw)
    return cfg
