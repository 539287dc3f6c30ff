"""Scenario configuration: JSON loading, schema validation, and construction."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .models import DTParams, GridSpec, build_diffusion_transport, build_heat_1d
from .semigroup import BoundarySignal
from .triple import MaximalTriple

SEED_ENV = "AIBVP_SEED"
DEFAULT_SEED = 42
DEFAULT_PANELS = 512


def load_schema() -> dict:
    text = resources.files("aibvp").joinpath("schema/scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated raw configuration plus the effective seed."""

    raw: dict
    seed: int

    @property
    def name(self) -> str:
        return self.raw.get("name", self.raw["model"])

    @property
    def model(self) -> str:
        return self.raw["model"]

    @property
    def feedback(self) -> bool:
        return bool(self.raw.get("feedback", False))

    @property
    def t_end(self) -> float:
        return float(self.raw["times"]["t_end"])

    @property
    def n_steps(self) -> int:
        return int(self.raw["times"]["n_steps"])

    @property
    def n_panels(self) -> int:
        return int(self.raw.get("quadrature", {}).get("n_panels", DEFAULT_PANELS))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_steps + 1)


@dataclass
class Scenario:
    """Everything a solver needs, built from a `ScenarioConfig`."""

    name: str
    triple: MaximalTriple
    grid: GridSpec
    f: np.ndarray
    g: np.ndarray
    psi: BoundarySignal
    feedback: bool
    t_end: float
    times: np.ndarray
    n_panels: int
    seed: int


def _check_semantics(raw: dict) -> None:
    model = raw["model"]
    if model == "heat":
        if "params" in raw:
            raise ConfigError("heat model takes no params")
        if raw.get("feedback", False):
            raise ConfigError("heat model has no feedback operator")
    elif "params" not in raw:
        raise ConfigError("diffusion_transport requires params")
    f = raw["initial"]["f"]
    p = raw["n_nodes"] - 2
    if isinstance(f, dict) and "samples" in f and len(f["samples"]) != p:
        raise ConfigError(f"initial.f.samples needs n_nodes - 2 = {p} values, got {len(f['samples'])}")
    if isinstance(f, dict) and "gaussian" in f and f["gaussian"][1] <= 0:
        raise ConfigError("gaussian width must be positive")
    sig = raw.get("boundary_signal")
    if sig:
        kind = sig["kind"]
        allowed = {
            "zero": set(),
            "constant": {"values"},
            "sine": {"amplitude", "omega", "phase"},
            "sampled": {"values", "times"},
        }[kind]
        extra = set(sig) - allowed - {"kind"}
        if extra:
            raise ConfigError(f"boundary_signal kind {kind!r} does not accept {sorted(extra)}")
        if kind == "constant" and "values" not in sig:
            raise ConfigError("constant boundary_signal needs values")
        if kind == "sine" and not {"amplitude", "omega"} <= set(sig):
            raise ConfigError("sine boundary_signal needs amplitude and omega")
        if kind == "sampled" and not {"values", "times"} <= set(sig):
            raise ConfigError("sampled boundary_signal needs values and times")
    if raw.get("quadrature", {}).get("n_panels", 2) % 2:
        raise ConfigError("quadrature.n_panels must be even")


def parse_config(raw, env=None) -> ScenarioConfig:
    """Validate a decoded JSON object; `AIBVP_SEED` in `env` overrides the seed."""
    env = os.environ if env is None else env
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    _check_semantics(raw)
    seed = raw.get("seed", DEFAULT_SEED)
    if env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return ScenarioConfig(raw, int(seed))


def load_config(path, env=None) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(raw, env)


def initial_state(spec, grid: GridSpec) -> np.ndarray:
    x = grid.interior
    if spec == "zero":
        return np.zeros_like(x)
    if spec == "sin_pi":
        return np.sin(math.pi * x)
    if "linear" in spec:
        a, b = spec["linear"]
        return a + (b - a) * x
    if "gaussian" in spec:
        c, w = spec["gaussian"]
        return np.exp(-(((x - c) / w) ** 2))
    return np.asarray(spec["samples"], dtype=float)


def boundary_signal(spec) -> BoundarySignal:
    if not spec or spec["kind"] == "zero":
        return BoundarySignal.zero(2)
    kind = spec["kind"]
    try:
        if kind == "constant":
            return BoundarySignal.constant(spec["values"])
        if kind == "sine":
            return BoundarySignal.sine(spec["amplitude"], spec["omega"], spec.get("phase", 0.0))
        return BoundarySignal.sampled(spec["times"], spec["values"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"boundary_signal: {exc}") from None


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    raw = cfg.raw
    grid = GridSpec(raw["n_nodes"])
    if cfg.model == "heat":
        triple = build_heat_1d(grid)
    else:
        prm = raw["params"]
        params = DTParams(prm["k"], prm.get("c", 0.0), prm.get("d", 0.0))
        triple = build_diffusion_transport(grid, params, prm.get("boundary_stencil", "three_point"))
    psi = boundary_signal(raw.get("boundary_signal"))
    if psi.m != 2:
        raise ConfigError("boundary_signal must have two components")
    return Scenario(
        name=cfg.name,
        triple=triple,
        grid=grid,
        f=initial_state(raw["initial"]["f"], grid),
        g=np.asarray(raw["initial"]["g"], dtype=float),
        psi=psi,
        feedback=cfg.feedback,
        t_end=cfg.t_end,
        times=cfg.times,
        n_panels=cfg.n_panels,
        seed=cfg.seed,
    )


def shipped_scenario_names() -> list[str]:
    root = resources.files("aibvp").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def shipped_config(name: str, env=None) -> ScenarioConfig:
    text = resources.files("aibvp").joinpath(f"scenarios/{name}.json").read_text(encoding="utf-8")
    return parse_config(json.loads(text), env)


def shipped_scenarios(env=None) -> list[Scenario]:
    return [build_scenario(shipped_config(n, env)) for n in shipped_scenario_names()]
