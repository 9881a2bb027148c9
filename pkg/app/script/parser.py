import logging
import re
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError

from app.exceptions import ScriptParseError
from app.schemas.script import (
    VERB_ARITY,
    ActionStep,
    ActionVerb,
    Diagnostic,
    Script,
    ScriptMetadata,
    TimeOfDay,
)

logger = logging.getLogger(__name__)

MALFORMED = "MALFORMED"
UNKNOWN_VERB = "UNKNOWN_VERB"
ARITY = "ARITY"
BAD_TIME = "BAD_TIME"
TIME_ORDER = "TIME_ORDER"
SCRIPT_ORDER = "SCRIPT_ORDER"

# A decrease larger than this between consecutive steps is read as crossing midnight
ROLLOVER_MINUTES = 12 * 60

_TIME_RANGE = re.compile(r"^\s*(\d{1,2})\s*:\s*(\d{2})\s*[-–—]\s*(\d{1,2})\s*:\s*(\d{2})\s*$")
_VERBS: Dict[str, ActionVerb] = {verb.value: verb for verb in ActionVerb}


class _Cursor:
    """Character scanner that remembers 1-based columns for diagnostics"""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    @property
    def column(self) -> int:
        return self.pos + 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def read_delimited(self, open_char: str, close_char: str, what: str) -> Tuple[str, int]:
        start_col = self.column
        if self.peek() != open_char:
            raise ScriptParseError(MALFORMED, start_col, f"expected '{open_char}' to open {what}", self.text)
        end = self.text.find(close_char, self.pos + 1)
        if end < 0:
            raise ScriptParseError(MALFORMED, start_col, f"unclosed '{open_char}' in {what}", self.text)
        content = self.text[self.pos + 1:end]
        self.pos = end + 1
        return content, start_col


def parse_time_range(content: str, column: int, line: str = "") -> Tuple[TimeOfDay, TimeOfDay]:
    match = _TIME_RANGE.match(content)
    if not match:
        raise ScriptParseError(BAD_TIME, column, f"cannot read time range '{content.strip()}'", line)
    h1, m1, h2, m2 = (int(g) for g in match.groups())
    try:
        start = TimeOfDay(hours=h1, minutes=m1)
        end = TimeOfDay(hours=h2, minutes=m2)
    except ValidationError:
        raise ScriptParseError(BAD_TIME, column, f"time out of range in '{content.strip()}'", line)
    return start, end


def parse_line(text: str) -> ActionStep:
    """Parse one command line: [verb] <obj>* (HH:MM - HH:MM) (room)"""
    cur = _Cursor(text)
    cur.skip_ws()
    raw_verb, verb_col = cur.read_delimited("[", "]", "verb")
    verb = _VERBS.get(raw_verb.strip().lower())
    if verb is None:
        raise ScriptParseError(UNKNOWN_VERB, verb_col + 1, f"unknown verb '{raw_verb.strip()}'", text)

    objects: List[str] = []
    cur.skip_ws()
    while cur.peek() == "<":
        token, token_col = cur.read_delimited("<", ">", "object")
        token = token.strip()
        if not token:
            raise ScriptParseError(MALFORMED, token_col, "empty object token", text)
        objects.append(token)
        cur.skip_ws()

    time_content, time_col = cur.read_delimited("(", ")", "time range")
    start, end = parse_time_range(time_content, time_col, text)

    cur.skip_ws()
    room, room_col = cur.read_delimited("(", ")", "room")
    room = room.strip()
    if not room:
        raise ScriptParseError(MALFORMED, room_col, "empty room", text)

    cur.skip_ws()
    if not cur.at_end():
        raise ScriptParseError(MALFORMED, cur.column, f"unexpected trailing text '{text[cur.pos:].strip()}'", text)

    if len(objects) != VERB_ARITY[verb]:
        raise ScriptParseError(
            ARITY, verb_col, f"{verb.value} takes {VERB_ARITY[verb]} object(s), got {len(objects)}", text
        )
    if end < start:
        raise ScriptParseError(TIME_ORDER, time_col, f"start {start} is after end {end}", text)

    return ActionStep(verb=verb, objects=tuple(objects), start=start, end=end, room=room)


def render_step(step: ActionStep) -> str:
    parts = [f"[{step.verb.value}]"]
    parts.extend(f"<{obj}>" for obj in step.objects)
    parts.append(f"({step.start} - {step.end})")
    parts.append(f"({step.room})")
    return " ".join(parts)


def render_script(script: Script) -> str:
    return "".join(render_step(step) + "\n" for step in script.steps)


def render_header(metadata: ScriptMetadata) -> str:
    fields = [
        ("persona", metadata.persona),
        ("day", metadata.day),
        ("activity", metadata.activity),
        ("location", metadata.location),
        ("labels", ", ".join(metadata.label_candidates) or None),
        ("walk_speed", metadata.walk_speed),
        ("run_speed", metadata.run_speed),
    ]
    lines = [f"{key}: {value}" for key, value in fields if value is not None]
    return "---\n" + "".join(line + "\n" for line in lines) + "---\n"


def render_day(scripts: Sequence[Script]) -> str:
    """Day file with one header block per activity script"""
    return "".join(render_header(s.metadata) + render_script(s) for s in scripts)


def normalize_steps(steps: Sequence[ActionStep]) -> Tuple[List[Tuple[int, ActionStep]], List[Tuple[int, str]]]:
    """Assign midnight rollovers and drop steps that go back in time.

    Returns the kept (input index, step) pairs and the (input index, message) rejections.
    """
    kept: List[Tuple[int, ActionStep]] = []
    rejected: List[Tuple[int, str]] = []
    offset = 0
    previous: Optional[int] = None
    for i, step in enumerate(steps):
        absolute = (offset + step.day_offset) * 1440 + step.start.total_minutes
        if previous is not None and absolute < previous:
            if previous - absolute > ROLLOVER_MINUTES:
                offset += 1
                absolute += 1440
            else:
                rejected.append((i, f"step at {step.start} starts before the previous step"))
                continue
        normalized = step.model_copy(update={"day_offset": offset + step.day_offset})
        kept.append((i, normalized))
        previous = absolute
    return kept, rejected


def parse_script(text: str, metadata: Optional[ScriptMetadata] = None) -> Tuple[Script, List[Diagnostic]]:
    """Parse every command line; bad lines become diagnostics instead of errors"""
    diagnostics: List[Diagnostic] = []
    parsed: List[ActionStep] = []
    line_numbers: List[int] = []
    lines = text.splitlines()

    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            parsed.append(parse_line(line))
            line_numbers.append(number)
        except ScriptParseError as e:
            diagnostics.append(
                Diagnostic(line_number=number, code=e.code, column=e.column, message=str(e), text=line)
            )

    kept, rejected = normalize_steps(parsed)
    for index, message in rejected:
        number = line_numbers[index]
        diagnostics.append(
            Diagnostic(line_number=number, code=SCRIPT_ORDER, column=1, message=message, text=lines[number - 1])
        )
    diagnostics.sort(key=lambda d: d.line_number)

    script = Script(metadata=metadata or ScriptMetadata(), steps=[step for _, step in kept])
    if diagnostics:
        logger.warning(f"⚠️ {len(diagnostics)} script line(s) rejected")
    return script, diagnostics


class ScriptBlock(BaseModel):
    """One activity block of a day file, header parsed, body untouched"""
    metadata: ScriptMetadata
    body: str
    first_line: int = Field(..., description="1-based line number of the first body line")


def split_day_blocks(text: str, keep_outside: bool = False) -> List[ScriptBlock]:
    """Split a day file into activity blocks opened by '---' headers"""
    lines = text.splitlines()
    blocks: List[ScriptBlock] = []
    persistent: Dict[str, str] = {}
    header: Dict[str, str] = {}
    body: List[str] = []
    body_start = 1
    i = 0

    def flush():
        if header or any(line.strip() for line in body):
            fields = {**persistent, **header}
            blocks.append(
                ScriptBlock(metadata=_metadata_from(fields), body="\n".join(body), first_line=body_start)
            )

    while i < len(lines):
        if lines[i].strip() == "---":
            flush()
            header = {}
            body = []
            i += 1
            while i < len(lines) and lines[i].strip() != "---":
                key, sep, value = lines[i].partition(":")
                if sep:
                    header[key.strip().lower()] = value.strip()
                i += 1
            i += 1
            for key in ("persona", "day"):
                if key in header:
                    persistent[key] = header[key]
            body_start = i + 1
            continue
        body.append(lines[i])
        i += 1
    flush()

    retained = []
    for block in blocks:
        location = (block.metadata.location or "at home").lower()
        if location == "outside" and not keep_outside:
            logger.info(f"Skipping outside activity '{block.metadata.activity}'")
            continue
        retained.append(block)
    return retained


def _metadata_from(fields: Dict[str, str]) -> ScriptMetadata:
    candidates = [c.strip() for c in fields.get("labels", "").split(",") if c.strip()]
    return ScriptMetadata(
        persona=fields.get("persona"),
        day=fields.get("day"),
        activity=fields.get("activity"),
        location=fields.get("location"),
        label_candidates=candidates,
        walk_speed=float(fields["walk_speed"]) if "walk_speed" in fields else None,
        run_speed=float(fields["run_speed"]) if "run_speed" in fields else None,
    )


def parse_day(text: str) -> Tuple[List[Script], List[Diagnostic]]:
    """Parse a clean day file into one Script per in-home activity block"""
    scripts: List[Script] = []
    diagnostics: List[Diagnostic] = []
    for block in split_day_blocks(text):
        script, block_diagnostics = parse_script(block.body, block.metadata)
        for d in block_diagnostics:
            diagnostics.append(d.model_copy(update={"line_number": d.line_number + block.first_line - 1}))
        scripts.append(script)
    return scripts, diagnostics


def merge_scripts(scripts: Sequence[Script]) -> Tuple[Script, List[int], List[str]]:
    """Concatenate activity blocks into one day-long script.

    Returns the merged script, the block index of every kept step and messages for
    steps dropped because they overlap an earlier block.
    """
    flat: List[ActionStep] = []
    owners: List[int] = []
    for block_index, script in enumerate(scripts):
        for step in script.steps:
            flat.append(step.model_copy(update={"day_offset": 0}))
            owners.append(block_index)
    kept, rejected = normalize_steps(flat)
    messages = [f"block {owners[i]}: {message}" for i, message in rejected]
    first = scripts[0].metadata if scripts else ScriptMetadata()
    merged_meta = ScriptMetadata(
        persona=first.persona, day=first.day, walk_speed=first.walk_speed, run_speed=first.run_speed
    )
    merged = Script(metadata=merged_meta, steps=[step for _, step in kept])
    return merged, [owners[i] for i, _ in kept], messages
