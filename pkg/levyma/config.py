"""Experiment configuration: TOML file -> validated, frozen dataclasses.

Precedence, lowest first: built-in defaults, scenario preset, config file,
``LEVYMA_SEED``, command-line flags. Validation errors name the key path and,
where the file shows it, the line.
"""

import copy
import logging
import os
import re
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import jsonschema

from .errors import ConfigError
from .estimator import BandwidthSchedule, EstimatorSettings
from .grids import LogGridSpec, RealGridSpec
from .levy import KernelFn, LevyModel
from .schema import CONFIG_SCHEMA
from .testfunctions import TestFunction, from_spec
from .xform import CutoffSchedule

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

SEED_ENV = "LEVYMA_SEED"

#: Scenario presets, applied under the file's own keys.
SCENARIOS: Dict[str, Dict[str, Dict[str, Any]]] = {
    "clt": {
        "kernel": {"kind": "indicator_cube", "sides": [1.0]},
        "sim": {"delta": 1.0, "h": 1.0, "window_side": 4096},
        "experiment": {"reps": 500, "window_sides": [4096]},
    },
    "exp_window": {
        "kernel": {"kind": "exp_window", "lambda": 1.0, "theta": 1.0},
        "sim": {"delta": 0.5, "h": 0.03125, "window_side": 4096},
        "experiment": {"reps": 500, "window_sides": [4096]},
    },
    "consistency": {
        "kernel": {"kind": "exp_window", "lambda": 1.0, "theta": 1.0},
        "sim": {"delta": 0.5, "h": 0.03125},
        "experiment": {"reps": 200, "window_sides": [256, 1024, 4096, 16384]},
    },
}


@dataclass(frozen=True)
class LevyConfig:
    kind: str = "gamma"
    b: float = 1.0
    a0: Optional[float] = None
    tau: float = 1.0
    eps: float = 0.1
    path: Optional[str] = None


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "indicator_cube"
    lam: float = 1.0
    theta: float = 1.0
    sides: Tuple[float, ...] = (1.0,)
    panels: Optional[int] = None
    path: Optional[str] = None


@dataclass(frozen=True)
class SimConfig:
    delta: float = 1.0
    h: float = 1.0
    window_side: int = 4096
    dim: int = 1
    seed: int = 0
    gamma: float = 0.0
    substeps: int = 1


@dataclass(frozen=True)
class GridConfig:
    real_half_width: float = 40.96
    real_points: int = 2**13
    log_s_lo: float = -12.0
    log_s_hi: float = 12.0
    log_points: int = 2**14
    ecf_points_per_unit: float = 8.0


@dataclass(frozen=True)
class EstimatorConfig:
    bandwidth_C: float = 1.0
    bandwidth_floor: float = 0.0
    eps: float = 0.1
    eta: float = 0.0
    cutoff_C: float = 1e-2
    cutoff_exponent: float = 0.25
    cutoff_floor: float = 0.0
    frozen_cutoff: Optional[float] = None
    route_tol: float = 1e-4


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "clt"
    window_sides: Tuple[int, ...] = (4096,)
    reps: int = 500
    seed: int = 0
    threads: int = 1
    test_functions: Tuple[Dict[str, Any], ...] = ({"kind": "bump"},)
    mc_sites: int = 100_000
    sigma_mode: str = "model_mc"
    level: float = 0.95
    inequality_t: float = 1.0
    inequality_K: float = 1.0
    inequality_x: Tuple[float, ...] = (1.0, 2.0, 4.0)
    beta1: float = 1.0
    beta2: float = 2.0


@dataclass(frozen=True)
class Config:
    """Everything one command needs, resolved and validated."""

    levy: LevyConfig = field(default_factory=LevyConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    acceptance: Dict[str, str] = field(default_factory=dict)
    source: Optional[str] = None

    def __post_init__(self):
        sides = self.experiment.window_sides
        if any(b <= a for a, b in zip(sides, sides[1:])):
            raise ConfigError(
                f"window sizes must increase strictly, got {list(sides)}",
                key="experiment.window_sides",
            )
        step = 2 * self.grid.real_half_width / self.grid.real_points
        freq_step = 2 * 3.141592653589793 / (self.grid.real_points * step)
        if freq_step > 1.0 / self.grid.ecf_points_per_unit:
            raise ConfigError(
                f"frequency spacing {freq_step:.4g} is coarser than "
                f"{self.grid.ecf_points_per_unit:g} points per unit; widen real_half_width",
                key="grid.real_half_width",
            )
        if self.grid.log_s_hi <= self.grid.log_s_lo:
            raise ConfigError("log_s_hi must exceed log_s_lo", key="grid.log_s_hi")

    # -- builders -----------------------------------------------------------

    def model(self) -> LevyModel:
        lv = self.levy
        if lv.kind == "gamma":
            return LevyModel.gamma(lv.b, tau=lv.tau, eps=lv.eps)
        if lv.path is None:
            raise ConfigError("tabulated Lévy density needs a path", key="levy.path")
        from .importer import read_columns

        cols = read_columns(lv.path, ("x", "v0"))
        return LevyModel.tabulated(cols["x"], cols["v0"], a0=lv.a0 or 0.0, tau=lv.tau, eps=lv.eps)

    def kernel_fn(self) -> KernelFn:
        k = self.kernel
        if k.kind == "exp_window":
            return KernelFn.exp_window(k.lam, k.theta, panels=k.panels or 32)
        if k.kind == "indicator_cube":
            return KernelFn.indicator_cube(k.sides, dim=self.sim.dim)
        if k.path is None:
            raise ConfigError("tabulated kernel needs a path", key="kernel.path")
        from .importer import read_columns

        cols = read_columns(k.path, ("s", "f"))
        return KernelFn.tabulated(cols["s"], cols["f"], panels=k.panels)

    def settings(self) -> EstimatorSettings:
        g, e = self.grid, self.estimator
        x_spec = RealGridSpec.centered(2 * g.real_half_width / g.real_points, g.real_points)
        cutoff = (
            CutoffSchedule.frozen(e.frozen_cutoff)
            if e.frozen_cutoff is not None
            else CutoffSchedule(e.cutoff_C, e.cutoff_exponent, e.cutoff_floor)
        )
        return EstimatorSettings(
            x_spec=x_spec,
            log_spec=LogGridSpec(g.log_s_lo, g.log_s_hi, g.log_points),
            bandwidth=BandwidthSchedule(e.eps, e.eta, e.bandwidth_C, e.bandwidth_floor),
            cutoff=cutoff,
            route_tol=e.route_tol,
        )

    def test_functions(self) -> List[TestFunction]:
        return [from_spec(item) for item in self.experiment.test_functions]

    def with_overrides(self, **flags) -> "Config":
        """Apply command-line flags (``seed``, ``reps``, ``threads``, ``n``)."""
        sim, exp = self.sim, self.experiment
        if flags.get("seed") is not None:
            sim = replace(sim, seed=int(flags["seed"]))
            exp = replace(exp, seed=int(flags["seed"]))
        if flags.get("reps") is not None:
            exp = replace(exp, reps=int(flags["reps"]))
        if flags.get("threads") is not None:
            exp = replace(exp, threads=int(flags["threads"]))
        if flags.get("n") is not None:
            n = int(flags["n"])
            if n < 1:
                raise ConfigError(f"sample size must be positive, got {n}", key="--n")
            sim = replace(sim, window_side=n)
        return replace(self, sim=sim, experiment=exp)

    def describe(self) -> Dict[str, Any]:
        """Plain dict of the resolved settings, written next to every result."""
        s = self.settings()
        return {
            "model": self.model().name,
            "kernel": self.kernel_fn().name,
            "delta": self.sim.delta,
            "h": self.sim.h,
            "dim": self.sim.dim,
            "x_grid": [s.x_spec.lo, s.x_spec.hi, s.x_spec.n_pts],
            "log_grid": [s.log_spec.s_lo, s.log_spec.s_hi, s.log_spec.n_pts],
            "bandwidth": {"C": s.bandwidth.C, "eps": s.bandwidth.eps, "eta": s.bandwidth.eta,
                          "floor": s.bandwidth.floor},
            "cutoff": {"C": s.cutoff.C, "exponent": s.cutoff.exponent, "floor": s.cutoff.floor},
        }


# ============================================================================
# LOADING
# ============================================================================

_LINE = re.compile(r"line (\d+)")


def _toml_line(exc: Exception) -> Optional[int]:
    lineno = getattr(exc, "lineno", None)
    if lineno:
        return int(lineno)
    match = _LINE.search(str(exc))
    return int(match.group(1)) if match else None


def _key_line(text: Optional[str], path: List[str]) -> Optional[int]:
    """Line of ``key = ...`` inside ``[section]``, when the file spells it out."""
    if not text or not path:
        return None
    section, key = path[0], path[1] if len(path) > 1 else None
    in_section = False
    for i, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped.strip("[] ") == section
            if in_section and key is None:
                return i
            continue
        if in_section and key is not None and re.match(rf"{re.escape(str(key))}\s*=", stripped):
            return i
    return None


def validate(data: Dict[str, Any], text: Optional[str] = None) -> None:
    """Check ``data`` against :data:`CONFIG_SCHEMA`; report the first error by path."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if not errors:
        return
    err = errors[0]
    path = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        extra = re.findall(r"'([^']+)'", err.message)
        if extra:
            path = path + [extra[0]]
    key = ".".join(path) or "<root>"
    raise ConfigError(f"{key}: {err.message}", key=key, line=_key_line(text, path))


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for section, values in update.items():
        if isinstance(values, dict) and isinstance(out.get(section), dict):
            out[section].update(values)
        else:
            out[section] = copy.deepcopy(values)
    return out


def from_dict(data: Dict[str, Any], text: Optional[str] = None,
              source: Optional[str] = None, env=None) -> Config:
    """Build a :class:`Config` from parsed TOML content."""
    validate(data, text)
    scenario = data.get("experiment", {}).get("scenario", "clt")
    data = _merge(SCENARIOS.get(scenario, {}), data)
    env = os.environ if env is None else env

    levy = LevyConfig(**data.get("levy", {}))
    kernel = dict(data.get("kernel", {}))
    if "lambda" in kernel:
        kernel["lam"] = kernel.pop("lambda")
    if "sides" in kernel:
        kernel["sides"] = tuple(kernel["sides"])
    experiment = dict(data.get("experiment", {}))
    for key in ("window_sides", "test_functions", "inequality_x"):
        if key in experiment:
            experiment[key] = tuple(experiment[key])
    sim = SimConfig(**data.get("sim", {}))

    seed = env.get(SEED_ENV)
    if seed is not None:
        try:
            value = int(seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {seed!r}", key=SEED_ENV) from None
        sim = replace(sim, seed=value)
        experiment["seed"] = value
        logger.info("seed %d taken from %s", value, SEED_ENV)

    return Config(
        levy=levy,
        kernel=KernelConfig(**kernel),
        sim=sim,
        grid=GridConfig(**data.get("grid", {})),
        estimator=EstimatorConfig(**data.get("estimator", {})),
        experiment=ExperimentConfig(**experiment),
        acceptance=dict(data.get("acceptance", {})),
        source=source,
    )


def loads(text: str, source: Optional[str] = None, env=None) -> Config:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}", line=_toml_line(e)) from e
    return from_dict(data, text=text, source=source, env=env)


def load_config(path: Optional[str] = None, env=None) -> Config:
    """Read a config file, or the defaults when ``path`` is None."""
    if path is None:
        return from_dict({}, env=env)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}", key="--config") from e
    logger.info("loaded config %s", path)
    return loads(text, source=path, env=env)
