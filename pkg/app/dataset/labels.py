import json
import logging
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union, runtime_checkable

import requests
from pydantic import ValidationError

from app.config import settings
from app.exceptions import DatasetError
from app.grounding.prompts import render_label_prompt
from app.schemas.dataset import DEFAULT_LABEL, LabelMapping, normalize_activity

logger = logging.getLogger(__name__)


def map_label(activity_name: str, mapping: LabelMapping) -> str:
    return mapping.entries.get(normalize_activity(activity_name), mapping.default_label)


def load_label_mapping(path: Union[str, Path]) -> LabelMapping:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return LabelMapping.model_validate(json.load(f))
    except FileNotFoundError as e:
        raise DatasetError(f"label mapping not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"invalid label mapping JSON in {path} at line {e.lineno}: {e.msg}") from e
    except ValidationError as e:
        raise DatasetError(f"{path}: {e.errors()[0]['msg']}") from e


@runtime_checkable
class LabelProvider(Protocol):
    def label(self, activity_name: str, routine_text: str = "") -> str:
        ...


class ActivityNameLabelProvider:
    """Open-vocabulary labels: the normalized activity name itself"""

    def label(self, activity_name: str, routine_text: str = "") -> str:
        return normalize_activity(activity_name) or DEFAULT_LABEL


class MappingLabelProvider:
    """Static table lookup with the mapping's default label for misses"""

    def __init__(self, mapping: LabelMapping):
        self.mapping = mapping

    def label(self, activity_name: str, routine_text: str = "") -> str:
        return map_label(activity_name, self.mapping)


class HttpLabelProvider:
    """Asks a remote model to pick one label; answers outside the label set fall back to the default"""

    def __init__(self, mapping: LabelMapping, endpoint: Optional[str] = None, timeout: Optional[float] = None,
                 session: Optional[requests.Session] = None):
        self.mapping = mapping
        self.endpoint = endpoint or settings.label_endpoint
        if not self.endpoint:
            raise DatasetError("no label endpoint configured (set LABEL_ENDPOINT)")
        self.timeout = timeout if timeout is not None else settings.embedding_timeout
        self.session = session or requests.Session()

    def prompt(self, activity_name: str, routine_text: str, labels: Sequence[str]) -> str:
        return render_label_prompt(activity_name, routine_text, labels)

    def label(self, activity_name: str, routine_text: str = "") -> str:
        labels = self.mapping.label_set
        try:
            response = self.session.post(
                self.endpoint, json={"prompt": self.prompt(activity_name, routine_text, labels)}, timeout=self.timeout
            )
            response.raise_for_status()
            answer = str(response.json().get("label", "")).strip()
        except (requests.exceptions.RequestException, ValueError) as e:
            logger.warning(f"⚠️ Label request failed for '{activity_name}': {e}")
            return self.mapping.default_label
        if answer not in labels:
            logger.warning(f"⚠️ Label '{answer}' for '{activity_name}' is not in the {self.mapping.dataset} set")
            return self.mapping.default_label
        return answer
