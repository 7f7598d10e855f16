"""File-backed run configuration: TOML file, mirrored by CLI flags.

Relative paths inside a config file resolve against the file's directory, so
configs stay portable; flag overrides resolve against the working directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .formatting import PromptFormat
from .models import LatencyModel, ModelSpec, load_script
from .orchestrator import SessionConfig
from .segmenter import DEFAULT_ABBREVIATIONS, Granularity, load_abbreviations

MODES = ("live", "baseline", "both")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    models: dict[str, ModelSpec] = field(default_factory=dict)
    mock_latencies: dict[str, LatencyModel] = field(default_factory=dict)
    # generic per-model scripts, used by the live service (bench runs use a
    # question-keyed script bank instead)
    mock_scripts: dict[str, list[str]] = field(default_factory=dict)
    dataset: Path | None = None
    scripts: Path | None = None
    abbreviations: Path | None = None
    mode: str = "both"
    n: int = 32
    seed: int = 0
    chars_per_min: float = 240.0
    clock: str = "virtual"
    workers: int = 1
    format: PromptFormat = PromptFormat.UA_SPI
    granularity: Granularity = Granularity.SENTENCE
    inference_model: str = ""
    output_model: str = ""
    task_hint: str | None = "End your response with: The answer is (X)."
    poll_interval_s: float = 0.05
    out_dir: Path = Path("reports")
    ui_dir: Path | None = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.clock not in ("virtual", "real"):
            raise ConfigError(f"clock must be 'virtual' or 'real', got {self.clock!r}")
        if self.n <= 0:
            raise ConfigError("n must be positive")
        if self.workers <= 0:
            raise ConfigError("workers must be positive")
        if self.poll_interval_s <= 0:
            raise ConfigError("poll_interval_s must be positive")
        for role, model_id in (("inference_model", self.inference_model),
                               ("output_model", self.output_model)):
            if not model_id:
                raise ConfigError(f"{role} is required")
            if model_id not in self.models:
                raise ConfigError(f"{role} {model_id!r} is not defined under [models]")

    def session_config(self) -> SessionConfig:
        abbreviations = DEFAULT_ABBREVIATIONS
        if self.abbreviations is not None:
            abbreviations = load_abbreviations(self.abbreviations)
        return SessionConfig(
            granularity=self.granularity,
            format=self.format,
            inference_model=self.models[self.inference_model],
            output_model=self.models[self.output_model],
            task_hint=self.task_hint,
            poll_interval_s=self.poll_interval_s,
            abbreviations=abbreviations,
        )

    def echo(self) -> dict:
        return {
            "dataset": str(self.dataset) if self.dataset else None,
            "scripts": str(self.scripts) if self.scripts else None,
        }


def _parse_model(model_id: str, raw: dict) -> tuple[ModelSpec, LatencyModel | None]:
    known = {
        "backend", "endpoint_url", "api_key_env", "temperature", "max_tokens",
        "prefill_s_per_token", "decode_s_per_token", "fixed_overhead_s", "chars_per_token",
        "script",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"models.{model_id}: unknown keys {sorted(unknown)}")
    try:
        spec = ModelSpec(
            id=model_id,
            backend=raw.get("backend", "mock"),
            endpoint_url=raw.get("endpoint_url"),
            api_key_env=raw.get("api_key_env"),
            temperature=float(raw.get("temperature", 0.0)),
            max_tokens=int(raw.get("max_tokens", 1024)),
        )
        latency = None
        if spec.backend == "mock":
            latency = LatencyModel(
                prefill_s_per_token=float(raw.get("prefill_s_per_token", 0.0)),
                decode_s_per_token=float(raw.get("decode_s_per_token", 0.0)),
                fixed_overhead_s=float(raw.get("fixed_overhead_s", 0.0)),
                chars_per_token=float(raw.get("chars_per_token", 4.0)),
            )
    except ValueError as exc:
        raise ConfigError(f"models.{model_id}: {exc}") from exc
    return spec, latency


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    base = path.parent
    cfg = RunConfig()

    for model_id, model_raw in raw.pop("models", {}).items():
        spec, latency = _parse_model(model_id, model_raw)
        cfg.models[model_id] = spec
        if latency is not None:
            cfg.mock_latencies[model_id] = latency
        if "script" in model_raw:
            script_path = Path(model_raw["script"])
            if not script_path.is_absolute():
                script_path = (base / script_path).resolve()
            try:
                cfg.mock_scripts[model_id] = load_script(script_path)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"models.{model_id}.script: {exc}") from exc

    paths = {"dataset", "scripts", "abbreviations", "out_dir", "ui_dir"}
    enums = {"format": PromptFormat.parse, "granularity": Granularity.parse}
    for key, value in raw.items():
        if not hasattr(cfg, key) or key in ("models", "mock_latencies", "mock_scripts"):
            raise ConfigError(f"{path}: unknown config key {key!r}")
        try:
            if key in paths:
                value = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
            elif key in enums:
                value = enums[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}: {key}: {exc}") from exc
        setattr(cfg, key, value)
    return cfg


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Flag overrides always win over file config."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("format", "granularity"):
            parser = PromptFormat.parse if key == "format" else Granularity.parse
            try:
                value = parser(value)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        elif key in ("dataset", "out_dir", "scripts", "abbreviations"):
            value = Path(value)
        setattr(cfg, key, value)
    return cfg
