import logging
import re
from typing import List, Optional, Tuple

from app.exceptions import ScriptParseError
from app.script.parser import parse_time_range

logger = logging.getLogger(__name__)

# "7:20 - 7:22, bathroom"
_INTERVAL_HEADER = re.compile(
    r"^\s*(\d{1,2}\s*:\s*\d{2})\s*[-–—]\s*(\d{1,2}\s*:\s*\d{2})\s*,\s*([A-Za-z_][\w ]*?)\s*:?\s*$"
)
# "Step 3:", "3.", "3)", "- ", "* "
_PREFIX = re.compile(r"^\s*(?:step\s*\d+\s*[:.)-]?|\d+\s*[.):]|[-*•])\s*", re.IGNORECASE)
_TIME_GROUP = re.compile(r"\(([^()]*\d{1,2}\s*:\s*\d{2}[^()]*)\)")
_ROOM_GROUP = re.compile(r"^\s*\(([^()]*)\)\s*$")
# A time group directly followed by a room group ends the command
_COMPLETE = re.compile(r"\)\s*\([^()]*\)\s*$")
_DAY_LABEL = re.compile(
    r"^\s*(?:day\s*\d*\b|monday|tuesday|wednesday|thursday|friday|saturday|sunday|weekday|weekend)",
    re.IGNORECASE,
)
# "brushing_teeth (07:20 - 07:26)" or "Activity: breakfast"
_ACTIVITY_HEADER = re.compile(
    r"^\s*(?:activity\s*:.*|[A-Za-z][\w ]*\(\s*\d{1,2}\s*:\s*\d{2}\s*[-–—]\s*\d{1,2}\s*:\s*\d{2}\s*\)\s*:?)\s*$",
    re.IGNORECASE,
)


def _canonical_times(content: str) -> str:
    try:
        start, end = parse_time_range(content, 1)
    except ScriptParseError:
        # Left as written so the grounder flags it
        return content.strip()
    return f"{start} - {end}"


def _clean_command(payload: str, room: Optional[str]) -> Optional[str]:
    match = _TIME_GROUP.search(payload)
    if match is None:
        return None
    head = re.sub(r"\s+", " ", payload[:match.start()].strip())
    tail = payload[match.end():]
    times = _canonical_times(match.group(1))
    room_match = _ROOM_GROUP.match(tail)
    if room_match and room_match.group(1).strip():
        line_room = room_match.group(1).strip()
    elif tail.strip():
        return None
    elif room is not None:
        line_room = room
    else:
        return None
    return f"{head} ({times}) ({line_room})"


def clean_output_with_stats(raw_text: str, room: Optional[str] = None) -> Tuple[List[str], int]:
    """Reduce free-form generator output to command lines.

    Commands wrapped over several physical lines are joined back. Returns the cleaned
    lines and the number of unrecognized lines that were dropped; `room` seeds the
    inherited room before any interval header is seen.
    """
    lines: List[str] = []
    dropped = 0
    current_room = room
    pending: Optional[str] = None

    def finish(text: str) -> None:
        nonlocal dropped
        cleaned = _clean_command(text, current_room)
        if cleaned is None:
            dropped += 1
            logger.debug(f"Dropped unrecognized line: {text!r}")
        else:
            lines.append(cleaned)

    for raw in raw_text.splitlines():
        stripped = raw.strip()
        if not stripped:
            continue

        if pending is not None:
            if stripped[0] in "(<":
                pending = f"{pending} {stripped}"
                if _COMPLETE.search(pending):
                    finish(pending)
                    pending = None
                continue
            finish(pending)
            pending = None

        header = _INTERVAL_HEADER.match(stripped)
        if header:
            current_room = header.group(3).strip()
            continue

        payload = stripped if stripped.startswith("[") else _PREFIX.sub("", stripped, count=1)
        if payload.startswith("["):
            if _COMPLETE.search(payload):
                finish(payload)
            else:
                pending = payload
            continue

        if _DAY_LABEL.match(stripped) or _ACTIVITY_HEADER.match(stripped) or stripped == "---":
            continue
        dropped += 1
        logger.debug(f"Dropped unrecognized line: {stripped!r}")

    if pending is not None:
        finish(pending)

    if dropped:
        logger.info(f"Cleaner dropped {dropped} unrecognized line(s)")
    return lines, dropped


def clean_output(raw_text: str) -> List[str]:
    lines, _ = clean_output_with_stats(raw_text)
    return lines
