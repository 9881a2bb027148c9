import logging
from typing import List, Optional, Protocol, runtime_checkable

import requests
from pydantic import BaseModel, Field

from app.config import settings
from app.exceptions import GroundingError
from app.grounding.prompts import render_repair_prompt

logger = logging.getLogger(__name__)


class RepairRequest(BaseModel):
    """Everything a repair backend gets to see about one flagged line"""
    line: str
    reason: str
    room: str = ""
    context: List[str] = Field(default_factory=list)
    actions: List[str] = Field(default_factory=list)
    objects: List[str] = Field(default_factory=list)
    attempt: int = 1


@runtime_checkable
class RepairProvider(Protocol):
    def repair(self, request: RepairRequest) -> Optional[str]:
        ...


class NullRepairProvider:
    """Never proposes a replacement, so flagged lines are discarded at once"""

    def repair(self, request: RepairRequest) -> Optional[str]:
        return None


class HttpRepairProvider:
    """POST {prompt, line, context} -> {line}; an empty or missing line means no repair"""

    def __init__(self, endpoint: Optional[str] = None, timeout: Optional[float] = None,
                 session: Optional[requests.Session] = None):
        self.endpoint = endpoint or settings.repair_endpoint
        if not self.endpoint:
            raise GroundingError("no repair endpoint configured (set REPAIR_ENDPOINT)")
        self.timeout = timeout if timeout is not None else settings.embedding_timeout
        self.session = session or requests.Session()

    def repair(self, request: RepairRequest) -> Optional[str]:
        prompt = render_repair_prompt(
            request.line, request.reason, request.context, request.room, request.actions, request.objects
        )
        try:
            response = self.session.post(
                self.endpoint,
                json={"prompt": prompt, "line": request.line, "context": request.context},
                timeout=self.timeout,
            )
            response.raise_for_status()
            candidate = response.json().get("line")
        except (requests.exceptions.RequestException, ValueError) as e:
            logger.warning(f"⚠️ Repair request failed for {request.line!r}: {e}")
            return None
        if not candidate or not str(candidate).strip():
            return None
        return str(candidate).strip()
