import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings

from app.exceptions import PipelineConfigError
from app.schemas.pipeline import PipelineConfig

logger = logging.getLogger(__name__)

SCRIPT_SUFFIXES = (".txt", ".script")


class Settings(BaseSettings):

    embedding_endpoint: Optional[str] = Field(default=None, env="EMBEDDING_ENDPOINT")
    embedding_api_key: Optional[str] = Field(default=None, env="EMBEDDING_API_KEY")
    embedding_timeout: float = Field(default=30.0, env="EMBEDDING_TIMEOUT")

    repair_endpoint: Optional[str] = Field(default=None, env="REPAIR_ENDPOINT")
    label_endpoint: Optional[str] = Field(default=None, env="LABEL_ENDPOINT")

    app_name: str = Field(default="VirtualSense", env="APP_NAME")
    app_version: str = Field(default="1.0.0", env="APP_VERSION")
    log_level: str = Field(default="INFO", env="LOG_LEVEL")
    log_format: str = Field(default="json", env="LOG_FORMAT")

    data_dir: str = Field(default="data", env="DATA_DIR")

    class Config:
        env_file = ".env"
        case_sensitive = False
        extra = "ignore"


settings = Settings()


def _set_dotted(document: Dict[str, Any], key: str, value: Any) -> None:
    """Apply a 'section.field' override onto a nested config document"""
    parts = key.split(".")
    node = document
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value


def _resolve(path: Optional[str], base: Path) -> Optional[str]:
    if path is None:
        return None
    candidate = Path(path)
    if not candidate.is_absolute():
        candidate = base / candidate
    return str(candidate)


def load_pipeline_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None
) -> PipelineConfig:
    """Read a config file and layer CLI overrides on top.

    Precedence is overrides > file > model defaults. Relative input paths in the file
    resolve against the file's directory; override paths stay relative to the cwd.
    None-valued overrides are ignored.
    """
    document: Dict[str, Any] = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError as e:
            raise PipelineConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise PipelineConfigError(f"invalid config JSON in {path} at line {e.lineno}: {e.msg}") from e
        if not isinstance(document, dict):
            raise PipelineConfigError(f"{path}: config must be a JSON object")
        base = path.resolve().parent
        document = _rebase_paths(document, base)

    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(document, key, value)

    try:
        config = PipelineConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise PipelineConfigError(f"{location}: {first['msg']}") from e
    logger.debug(f"Loaded pipeline config from {path or 'defaults'}")
    return config


def _rebase_paths(document: Dict[str, Any], base: Path) -> Dict[str, Any]:
    document = json.loads(json.dumps(document))
    for key in ("vocabulary", "label_mapping", "output_dir"):
        if isinstance(document.get(key), str):
            document[key] = _resolve(document[key], base)
    if "layout" in document:
        shorthand = {"layout": document.pop("layout"), "scripts": document.pop("scripts", [])}
        document["homes"] = [shorthand] + list(document.get("homes", []))
    for home in document.get("homes", []):
        if isinstance(home, dict):
            if isinstance(home.get("layout"), str):
                home["layout"] = _resolve(home["layout"], base)
            home["scripts"] = [_resolve(s, base) for s in home.get("scripts", [])]
    train_eval = document.get("train_eval")
    if isinstance(train_eval, dict):
        for key in ("virtual", "real"):
            if isinstance(train_eval.get(key), str):
                train_eval[key] = _resolve(train_eval[key], base)
    return document


def expand_scripts(entries: List[str]) -> List[Path]:
    """Script files named directly plus the script files of named directories, sorted"""
    files: List[Path] = []
    for entry in entries:
        entry_path = Path(entry)
        if entry_path.is_dir():
            files.extend(sorted(p for p in entry_path.iterdir() if p.suffix in SCRIPT_SUFFIXES))
        else:
            files.append(entry_path)
    return files


def validate_inputs(config: PipelineConfig, generate: bool = True, train_eval: bool = False) -> None:
    """Fail before any work when a referenced input is missing"""
    missing = []
    if generate:
        if not config.homes:
            raise PipelineConfigError("homes: at least one layout is required")
        for i, home in enumerate(config.homes):
            if not Path(home.layout).is_file():
                missing.append((f"homes.{i}.layout", home.layout))
            if not home.scripts:
                raise PipelineConfigError(f"homes.{i}.scripts: no day scripts given")
            for script in home.scripts:
                if not Path(script).exists():
                    missing.append((f"homes.{i}.scripts", script))
        for field in ("vocabulary", "label_mapping"):
            value = getattr(config, field)
            if value is not None and not Path(value).is_file():
                missing.append((field, value))
    if train_eval:
        for field in ("virtual", "real"):
            value = getattr(config.train_eval, field)
            if value is None:
                raise PipelineConfigError(f"train_eval.{field}: windows file is required")
            if not Path(value).is_file():
                missing.append((f"train_eval.{field}", value))
    if missing:
        field, value = missing[0]
        raise PipelineConfigError(f"{field}: file not found: {value}")


def config_hash(config: PipelineConfig) -> str:
    """SHA-256 of the canonical config JSON, output directory excluded"""
    document = config.model_dump(mode="json", exclude={"output_dir"})
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
