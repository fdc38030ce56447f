"""Application configuration helpers for environment-driven settings and experiment files."""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from fdpq_lab.coding.scan import ScanKind
from fdpq_lab.errors import ConfigurationError, LabError
from fdpq_lab.keyvalue import read_key_value_file, split_list
from fdpq_lab.media.raw_io import SUPPORTED_BIT_DEPTHS, SUPPORTED_BLOCK_SIZES, ChromaFormat, SequenceDescriptor, descriptor_from_mapping
from fdpq_lab.quantisation import Quantiser
from fdpq_lab.quantisation.quant import DeadzoneMode, validate_qp

DEFAULT_QP_LIST: tuple[int, ...] = (17, 22, 27, 32, 37)
DEFAULT_QUANTISERS: tuple[Quantiser, ...] = (Quantiser.URQ, Quantiser.RDOQ, Quantiser.FDPQ)
_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _parse_qp_list(value: Any) -> list[int]:
    items = split_list(value) if isinstance(value, str) else list(value)
    try:
        return [validate_qp(int(item)) for item in items]
    except ValueError as exc:
        raise ValueError(f"invalid QP list {value!r}: {exc}") from exc


def _parse_quantisers(value: Any) -> list[Quantiser]:
    items = split_list(value) if isinstance(value, str) else list(value)
    parsed: list[Quantiser] = []
    for item in items:
        quantiser = Quantiser(str(item.value if isinstance(item, Quantiser) else item).lower())
        if quantiser not in parsed:
            parsed.append(quantiser)
    return parsed


class LabSettings(BaseModel):
    """Environment defaults shared by every sub-command."""

    output_dir: Path = Path("output")
    tb_size: int = 8
    qp_list: list[int] = list(DEFAULT_QP_LIST)
    quantisers: list[Quantiser] = list(DEFAULT_QUANTISERS)
    deadzone_mode: DeadzoneMode = DeadzoneMode.HALF
    workers: int = 1
    log_level: str = "INFO"

    @field_validator("qp_list", mode="before")
    @classmethod
    def _qp_list(cls, value: Any) -> list[int]:
        return _parse_qp_list(value)

    @field_validator("quantisers", mode="before")
    @classmethod
    def _quantisers(cls, value: Any) -> list[Quantiser]:
        return _parse_quantisers(value)

    @field_validator("tb_size")
    @classmethod
    def _tb_size(cls, value: int) -> int:
        if value not in SUPPORTED_BLOCK_SIZES:
            raise ValueError(f"tb_size must be one of {SUPPORTED_BLOCK_SIZES}")
        return value

    @field_validator("workers")
    @classmethod
    def _workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @field_validator("log_level")
    @classmethod
    def _log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(_LOG_LEVELS)}")
        return level

    @property
    def logging_level(self) -> int:
        return getattr(logging, self.log_level)


class SyntheticClipSettings(BaseModel):
    """Geometry used when rendering the built-in synthetic suite."""

    patterns: list[str] = []
    width: int = 64
    height: int = 64
    frames: int = 2
    bit_depth: int = 8
    chroma_format: ChromaFormat = ChromaFormat.YUV420

    @field_validator("patterns", mode="before")
    @classmethod
    def _patterns(cls, value: Any) -> list[str]:
        return split_list(value) if isinstance(value, str) else list(value)

    @field_validator("chroma_format", mode="before")
    @classmethod
    def _chroma(cls, value: Any) -> ChromaFormat:
        return ChromaFormat.parse(value)

    @field_validator("bit_depth")
    @classmethod
    def _depth(cls, value: int) -> int:
        if value not in SUPPORTED_BIT_DEPTHS:
            raise ValueError(f"bit_depth must be one of {SUPPORTED_BIT_DEPTHS}")
        return value

    @field_validator("width", "height", "frames")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("synthetic geometry values must be positive")
        return value


class ExperimentConfig(BaseModel):
    """One quantiser x QP sweep over a list of clips."""

    clips: list[SequenceDescriptor] = []
    synthetic: SyntheticClipSettings = SyntheticClipSettings()
    tb_size: int = 8
    qp_list: list[int] = list(DEFAULT_QP_LIST)
    quantisers: list[Quantiser] = list(DEFAULT_QUANTISERS)
    deadzone_mode: DeadzoneMode = DeadzoneMode.HALF
    scan_kind: ScanKind = ScanKind.DIAGONAL
    output_dir: Path = Path("output")
    workers: int = 1
    write_bitstreams: bool = True
    write_reconstructions: bool = False

    @field_validator("qp_list", mode="before")
    @classmethod
    def _qp_list(cls, value: Any) -> list[int]:
        return _parse_qp_list(value)

    @field_validator("quantisers", mode="before")
    @classmethod
    def _quantisers(cls, value: Any) -> list[Quantiser]:
        return _parse_quantisers(value)

    @field_validator("tb_size")
    @classmethod
    def _tb_size(cls, value: int) -> int:
        if value not in SUPPORTED_BLOCK_SIZES:
            raise ValueError(f"tb_size must be one of {SUPPORTED_BLOCK_SIZES}")
        return value

    @field_validator("workers")
    @classmethod
    def _workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @model_validator(mode="after")
    def _check_inputs(self) -> "ExperimentConfig":
        if not self.quantisers:
            raise ValueError("at least one quantiser is required")
        if not self.qp_list:
            raise ValueError("at least one QP is required")
        if not self.clips and not self.synthetic.patterns:
            raise ValueError("no input clips: give clip descriptors or synthetic patterns")
        names = [clip.name for clip in self.clips] + list(self.synthetic.patterns)
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"clip names must be unique, repeated: {', '.join(duplicates)}")
        return self

    @property
    def job_count(self) -> int:
        clip_count = len(self.clips) + len(self.synthetic.patterns)
        return clip_count * len(self.quantisers) * len(self.qp_list)


def _environment_overrides() -> dict[str, str]:
    mapping = {
        "LAB_OUTPUT_DIR": "output_dir",
        "LAB_TB_SIZE": "tb_size",
        "LAB_QP_LIST": "qp_list",
        "LAB_QUANTISERS": "quantisers",
        "LAB_DEADZONE": "deadzone_mode",
        "LAB_WORKERS": "workers",
        "LAB_LOG_LEVEL": "log_level",
    }
    return {field_name: os.environ[variable] for variable, field_name in mapping.items() if os.getenv(variable)}


def _load_from_environment() -> LabSettings:
    """Load settings using environment variables and .env file."""

    module_path = Path(__file__).resolve()
    project_root = module_path.parents[2]
    dotenv_path = project_root / ".env"
    load_dotenv(dotenv_path=dotenv_path, override=False, encoding="utf-8-sig")
    load_dotenv(override=False)  # Secondary search path (current working dir)
    try:
        return LabSettings(**_environment_overrides())
    except ValidationError as exc:
        raise ConfigurationError(f"Environment configuration is invalid: {exc}") from exc
    except LabError as exc:
        raise ConfigurationError(f"Environment configuration is invalid: {exc}") from exc


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """Return cached lab settings."""

    return _load_from_environment()


def build_experiment_config(settings: Optional[LabSettings] = None, **values: Any) -> ExperimentConfig:
    """Merge explicit values over the environment defaults; ``None`` values are ignored."""

    settings = settings or get_settings()
    merged: dict[str, Any] = {
        "tb_size": settings.tb_size,
        "qp_list": settings.qp_list,
        "quantisers": settings.quantisers,
        "deadzone_mode": settings.deadzone_mode,
        "output_dir": settings.output_dir,
        "workers": settings.workers,
    }
    merged.update({key: value for key, value in values.items() if value is not None})
    try:
        return ExperimentConfig(**merged)
    except ValidationError as exc:
        raise ConfigurationError(f"Experiment configuration is invalid: {exc}") from exc
    except LabError as exc:
        raise ConfigurationError(f"Experiment configuration is invalid: {exc}") from exc


def override_experiment_config(config: ExperimentConfig, **values: Any) -> ExperimentConfig:
    """Apply non-``None`` overrides to a loaded config and validate the result again."""

    merged = dict(config)
    merged.update({key: value for key, value in values.items() if value is not None})
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as exc:
        raise ConfigurationError(f"Experiment configuration is invalid: {exc}") from exc
    except LabError as exc:
        raise ConfigurationError(f"Experiment configuration is invalid: {exc}") from exc


_SYNTHETIC_KEYS = {
    "synthetic": "patterns",
    "synthetic_width": "width",
    "synthetic_height": "height",
    "synthetic_frames": "frames",
    "synthetic_bit_depth": "bit_depth",
    "synthetic_chroma_format": "chroma_format",
}
_EXPERIMENT_KEYS = {
    "tb_size",
    "qp_list",
    "quantisers",
    "deadzone_mode",
    "scan_kind",
    "output_dir",
    "workers",
    "write_bitstreams",
    "write_reconstructions",
}


def load_experiment_config(path: str | Path, settings: Optional[LabSettings] = None) -> ExperimentConfig:
    """Read an experiment description from a key-value file.

    Top-level keys set sweep parameters (see ``docs/config_file.md``); each
    ``[clip]`` section is a sequence descriptor whose ``path`` is resolved
    relative to the config file.
    """

    config_path = Path(path)
    document = read_key_value_file(config_path)
    values: dict[str, Any] = {}
    synthetic: dict[str, Any] = {}
    for key, value in document.values.items():
        if key in _SYNTHETIC_KEYS:
            synthetic[_SYNTHETIC_KEYS[key]] = value
        elif key in _EXPERIMENT_KEYS:
            values[key] = value
        else:
            raise ConfigurationError(f"{config_path}: unknown key '{key}'")
    if "output_dir" in values and not Path(values["output_dir"]).is_absolute():
        values["output_dir"] = config_path.parent / values["output_dir"]
    unknown_sections = sorted({name for name, _ in document.sections if name != "clip"})
    if unknown_sections:
        raise ConfigurationError(f"{config_path}: unknown section(s) {', '.join(unknown_sections)}")
    values["clips"] = [
        descriptor_from_mapping(section, base_dir=config_path.parent) for section in document.sections_named("clip")
    ]
    if synthetic:
        try:
            values["synthetic"] = SyntheticClipSettings(**synthetic)
        except (ValidationError, LabError) as exc:
            raise ConfigurationError(f"{config_path}: invalid synthetic clip settings: {exc}") from exc
    return build_experiment_config(settings, **values)
