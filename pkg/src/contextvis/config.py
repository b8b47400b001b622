"""Service configuration: JSON file plus CONTEXTVIS_* environment overrides."""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ValidationError, model_validator

from .errors import BadConfig

ENV_PREFIX = "CONTEXTVIS_"


class ApiConfig(BaseModel):
    listen_address: str = "127.0.0.1:8000"
    data_dir: Path = Path("./data")
    provider_mode: Literal["mock", "remote"] = "mock"
    text_endpoint: Optional[str] = None
    image_endpoint: Optional[str] = None
    credentials_ref: Optional[str] = None
    max_attempts: int = 3
    sticker_parallelism: int = 4
    seed_override: Optional[int] = None
    template_dir: Optional[Path] = None

    @model_validator(mode="after")
    def _check(self) -> "ApiConfig":
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.provider_mode == "remote" and not (self.text_endpoint and self.image_endpoint):
            raise ValueError("remote provider mode requires both text_endpoint and image_endpoint")
        return self

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        try:
            return host or "127.0.0.1", int(port)
        except ValueError:
            raise BadConfig(f"invalid listen_address: {self.listen_address}") from None


def load_config(path: Optional[Path] = None, env: Optional[dict[str, str]] = None) -> ApiConfig:
    """Read config from a JSON file (when given) and apply env overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise BadConfig(f"cannot read config file {path}: {exc}") from exc
    for field_name in ApiConfig.model_fields:
        value = env.get(ENV_PREFIX + field_name.upper())
        if value is not None:
            raw[field_name] = value
    try:
        return ApiConfig.model_validate(raw)
    except ValidationError as exc:
        raise BadConfig(str(exc)) from exc
