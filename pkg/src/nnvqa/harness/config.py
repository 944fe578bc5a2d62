"""Experiment configuration schema (JSON) and its translation into core objects."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..algorithms import EscapeConfig, GuideConfig
from ..gradients import Mode, parse_mode
from ..optim import ConvergenceCriterion, Heaviside, Linear, OptimizerConfig
from ..problems import MaxCutInstance, gen_fully_connected, gen_k_regular_bimodal, load_instance
from ..simulator import NoiseModel


class ConfigError(ValueError):
    """Config rejected; ``errors`` is a list of {"field", "message"} dicts."""

    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("; ".join(f"{e['field']}: {e['message']}" for e in errors))


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FullyConnectedSource(_Model):
    generator: Literal["fully_connected"]
    num_nodes: int = Field(ge=2, le=24)
    mean: float = 0.0
    variance: float = Field(1.0, ge=0)
    seed: int = Field(0, ge=0)

    def build(self) -> MaxCutInstance:
        return gen_fully_connected(self.num_nodes, self.mean, self.variance, self.seed)


class RegularBimodalSource(_Model):
    generator: Literal["k_regular_bimodal"]
    num_nodes: int = Field(ge=2, le=24)
    degree: int = Field(ge=1)
    mean: float = 1.0
    variance: float = Field(1.0, ge=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _feasible(self):
        if (self.num_nodes * self.degree) % 2 or self.degree >= self.num_nodes:
            raise ValueError("need num_nodes * degree even and degree < num_nodes")
        return self

    def build(self) -> MaxCutInstance:
        return gen_k_regular_bimodal(self.num_nodes, self.degree, self.mean, self.variance, self.seed)


class FileSource(_Model):
    file: str

    def build(self) -> MaxCutInstance:
        return load_instance(self.file)


InstanceSource = Annotated[Union[FullyConnectedSource, RegularBimodalSource],
                           Field(discriminator="generator")] | FileSource


class QaoaSpec(_Model):
    type: Literal["qaoa"]
    p: int | list[int] = 1

    @field_validator("p")
    @classmethod
    def _depths(cls, v):
        depths = [v] if isinstance(v, int) else v
        if not depths or any(d < 1 for d in depths):
            raise ValueError("every depth p must be >= 1")
        return v

    @property
    def depths(self) -> list[int]:
        return [self.p] if isinstance(self.p, int) else list(self.p)


class HeaSpec(_Model):
    type: Literal["hea"]
    axes: str | list[str] = "random"
    architectures: int = Field(1, ge=1, description="how many random axis draws when axes == 'random'")

    @field_validator("axes")
    @classmethod
    def _axes(cls, v):
        for a in ([v] if isinstance(v, str) else v):
            if a != "random" and (not a or set(a.upper()) - set("XYZ")):
                raise ValueError("axes must be 'random' or strings over X, Y, Z")
        return v


class OptimizerSpec(_Model):
    kind: Literal["gd", "adam"] = "adam"
    step_size: float = Field(0.1, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)

    def build(self) -> OptimizerConfig:
        return OptimizerConfig(**self.model_dump())


class ConvergenceSpec(_Model):
    grad_inf_tol: float = Field(1e-3, gt=0)
    cost_change_tol: float = Field(1e-5, gt=0)
    window: int = Field(20, ge=1)
    max_iters: int = Field(2000, ge=1)

    def build(self) -> ConvergenceCriterion:
        return ConvergenceCriterion(**self.model_dump())


class ScheduleSpec(_Model):
    kind: Literal["heaviside", "linear"] = "heaviside"
    threshold: int | None = 150
    horizon: int = Field(350, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "heaviside" and (self.threshold is None or not 0 <= self.threshold <= self.horizon):
            raise ValueError("heaviside threshold must lie in [0, horizon]")
        return self

    def build(self):
        if self.kind == "linear":
            return Linear(self.horizon)
        return Heaviside(self.threshold, self.horizon)


class EscapeSpec(_Model):
    nn_steps: int = Field(80, ge=0)
    nn_step_size: float = Field(0.05, ge=0)
    nn_batch_size: int = Field(1024, ge=1)
    schedule: ScheduleSpec = ScheduleSpec()
    improvement_threshold: float = Field(0.1, ge=0)


class GuideSpec(_Model):
    alpha: float = Field(0.1, ge=0)
    nn_step_size: float = Field(0.05, ge=0)
    nn_batch_size: int = Field(1024, ge=1)
    schedule: ScheduleSpec = ScheduleSpec()
    compare_standard: bool = True


class NoiseSpec(_Model):
    bit_flip_prob: float = Field(ge=0, le=1)
    trajectories: int = Field(100, ge=1)

    def build(self) -> NoiseModel:
        return NoiseModel(self.bit_flip_prob, self.trajectories)


class OutputSpec(_Model):
    dir: str = "results"


class ExperimentConfig(_Model):
    name: str = "experiment"
    instance: InstanceSource
    ansatz: Annotated[Union[QaoaSpec, HeaSpec], Field(discriminator="type")]
    algorithm: Literal["standard", "escape", "guide"]
    inits: int = Field(200, description="number of random initializations R")
    base_seed: int = Field(0, ge=0)
    mode: str = "exact"
    noise: NoiseSpec | None = None
    optimizer: OptimizerSpec = OptimizerSpec()
    convergence: ConvergenceSpec = ConvergenceSpec()
    escape: EscapeSpec = EscapeSpec()
    guide: GuideSpec = GuideSpec()
    deterioration_threshold: float = Field(0.1, ge=0)
    output: OutputSpec = OutputSpec()

    @field_validator("inits")
    @classmethod
    def _inits(cls, v):
        if v < 1:
            raise ValueError("R ≥ 1 required (inits must be at least 1)")
        return v

    @field_validator("mode")
    @classmethod
    def _mode(cls, v):
        parse_mode(v)
        return v

    @model_validator(mode="after")
    def _noise_needs_qaoa(self):
        if self.noise is not None and self.ansatz.type != "qaoa":
            raise ValueError("noise is only supported for the QAOA ansatz")
        return self

    @property
    def grad_mode(self) -> Mode:
        return parse_mode(self.mode)

    def noise_model(self) -> NoiseModel | None:
        return self.noise.build() if self.noise else None

    def escape_config(self) -> EscapeConfig:
        e = self.escape
        return EscapeConfig(nn_steps=e.nn_steps, nn_step_size=e.nn_step_size, schedule=e.schedule.build(),
                            improvement_threshold=e.improvement_threshold, optimizer=self.optimizer.build(),
                            criterion=self.convergence.build(), mode=self.grad_mode, noise=self.noise_model(),
                            nn_batch_size=e.nn_batch_size)

    def guide_config(self) -> GuideConfig:
        g = self.guide
        return GuideConfig(alpha=g.alpha, nn_step_size=g.nn_step_size, schedule=g.schedule.build(),
                           optimizer=self.optimizer.build(), criterion=self.convergence.build(),
                           mode=self.grad_mode, noise=self.noise_model(), nn_batch_size=g.nn_batch_size)

    @property
    def improvement_threshold(self) -> float:
        return self.escape.improvement_threshold


def _field_errors(exc: ValidationError) -> list[dict]:
    out = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        msg = err["msg"].removeprefix("Value error, ")
        out.append({"field": loc, "message": msg})
    return out


def validate_config(doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_field_errors(exc)) from None
    if isinstance(cfg.instance, FileSource):
        path = Path(cfg.instance.file)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.is_file():
            raise ConfigError([{"field": "instance.file", "message": f"instance file not found: {path}"}])
        cfg.instance.file = str(path)
    return cfg


PRESET_PREFIX = "preset:"


def list_presets() -> list[str]:
    files = resources.files("nnvqa") / "presets"
    return sorted(p.name.removesuffix(".json") for p in files.iterdir() if p.name.endswith(".json"))


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a config file, or a packaged preset given as ``preset:<name>``."""
    text_path = str(path)
    if text_path.startswith(PRESET_PREFIX):
        name = text_path[len(PRESET_PREFIX):]
        res = resources.files("nnvqa") / "presets" / f"{name}.json"
        if not res.is_file():
            raise ConfigError([{"field": "<config>", "message": f"unknown preset {name!r}; "
                                f"available: {', '.join(list_presets())}"}])
        return validate_config(json.loads(res.read_text()))
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError([{"field": "<config>", "message": f"cannot read {path}: {exc.strerror}"}]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([{"field": "<config>", "message": f"invalid JSON: {exc}"}]) from None
    return validate_config(doc, base_dir=path.parent)


def config_schema() -> dict:
    return ExperimentConfig.model_json_schema()
