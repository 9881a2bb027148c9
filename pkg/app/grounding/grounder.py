import logging
import re
from typing import Collection, List, Optional, Tuple, Union

from pydantic import ValidationError

from app.exceptions import ScriptParseError
from app.grounding.cleaner import clean_output_with_stats
from app.grounding.index import VocabularyIndex, nearest
from app.grounding.repair import NullRepairProvider, RepairProvider, RepairRequest
from app.grounding.vocabulary import GroundingIndexes
from app.schemas.grounding import (
    Accepted,
    Discarded,
    Flagged,
    GroundedStep,
    GroundingReport,
    GroundingThresholds,
    LineOutcome,
    Repaired,
    Substitution,
)
from app.schemas.layout import HomeLayout
from app.schemas.script import ActionStep, ActionVerb, Script, ScriptMetadata
from app.script.parser import normalize_steps, parse_time_range

logger = logging.getLogger(__name__)

# Raw shape only; tokens are not checked against any vocabulary here
_RAW_LINE = re.compile(
    r"^\s*\[(?P<verb>[^\[\]]*)\]\s*(?P<objects>(?:<[^<>]*>\s*)*)\((?P<times>[^()]*)\)\s*\((?P<room>[^()]*)\)\s*$"
)
_TRAILING_ROOM = re.compile(r"\(([^()]*)\)\s*$")
_CONTEXT_RADIUS = 2


def _line_room(line: str) -> Optional[str]:
    match = _TRAILING_ROOM.search(line)
    return match.group(1).strip() if match else None


def ground_step(
    line: str,
    action_index: VocabularyIndex,
    object_index: VocabularyIndex,
    thresholds: GroundingThresholds,
    known_rooms: Optional[Collection[str]] = None,
) -> Union[GroundedStep, Flagged]:
    """Replace verb and object tokens by their nearest vocabulary entries.

    Any token below its threshold flags the whole line. Times and rooms are
    taken as written.
    """
    match = _RAW_LINE.match(line)
    if match is None:
        return Flagged(line=line, reason="unparseable line", room=_line_room(line))
    room = match.group("room").strip()

    try:
        start, end = parse_time_range(match.group("times"), 1, line)
    except ScriptParseError as e:
        return Flagged(line=line, reason=f"malformed time: {e}", room=room)

    if not room or (known_rooms is not None and room not in known_rooms):
        return Flagged(line=line, reason="unknown room", room=room, token=room)
    if object_index.room_partition and room not in object_index.room_partition:
        return Flagged(line=line, reason="unknown room", room=room, token=room)

    raw_verb = match.group("verb").strip()
    if not raw_verb:
        return Flagged(line=line, reason="empty action token", room=room)
    verb_token, verb_score = nearest(action_index, raw_verb)
    if verb_score < thresholds.tau_act:
        return Flagged(
            line=line, reason="action below threshold", room=room,
            token=raw_verb, best_token=verb_token, score=verb_score,
        )
    substitutions = [Substitution(raw=raw_verb, grounded=verb_token, score=verb_score, kind="action")]

    raw_objects = [token.strip() for token in re.findall(r"<([^<>]*)>", match.group("objects"))]
    verb = ActionVerb(verb_token)
    if len(raw_objects) != verb.arity:
        return Flagged(
            line=line, reason=f"{verb.value} takes {verb.arity} object(s), got {len(raw_objects)}", room=room
        )

    partition_room = room if object_index.room_partition else None
    grounded_objects: List[str] = []
    for raw in raw_objects:
        if not raw:
            return Flagged(line=line, reason="empty object token", room=room)
        token, score = nearest(object_index, raw, partition_room)
        if score < thresholds.tau_obj:
            return Flagged(
                line=line, reason="object below threshold", room=room,
                token=raw, best_token=token, score=score,
            )
        substitutions.append(Substitution(raw=raw, grounded=token, score=score, kind="object"))
        grounded_objects.append(token)

    try:
        step = ActionStep(verb=verb, objects=tuple(grounded_objects), start=start, end=end, room=room)
    except ValidationError as e:
        return Flagged(line=line, reason=e.errors()[0]["msg"], room=room)
    return GroundedStep(step=step, substitutions=substitutions)


def _repair_line(
    flagged: Flagged,
    context: List[str],
    indexes: GroundingIndexes,
    thresholds: GroundingThresholds,
    repair: RepairProvider,
    known_rooms: Collection[str],
) -> Tuple[Union[GroundedStep, Flagged], int, Optional[str]]:
    attempts = 0
    current = flagged
    room = flagged.room or ""
    objects = indexes.objects.room_tokens(room) if room in indexes.objects.room_partition else list(indexes.objects.tokens)
    while attempts < thresholds.max_retries:
        request = RepairRequest(
            line=current.line, reason=current.reason, room=room, context=context,
            actions=list(indexes.actions.tokens), objects=objects, attempt=attempts + 1,
        )
        candidate = repair.repair(request)
        if candidate is None:
            break
        attempts += 1
        cleaned, _ = clean_output_with_stats(candidate, room=flagged.room)
        if not cleaned:
            current = Flagged(line=candidate, reason="unparseable repair", room=flagged.room)
            continue
        result = ground_step(cleaned[0], indexes.actions, indexes.objects, thresholds, known_rooms)
        if isinstance(result, GroundedStep):
            return result, attempts, cleaned[0]
        current = result
    return current, attempts, None


def ground_script(
    raw_text: str,
    layout: HomeLayout,
    indexes: GroundingIndexes,
    thresholds: Optional[GroundingThresholds] = None,
    repair: Optional[RepairProvider] = None,
    metadata: Optional[ScriptMetadata] = None,
) -> Tuple[Script, GroundingReport]:
    """Clean, ground and repair free-form routine text into a valid Script"""
    thresholds = thresholds or GroundingThresholds()
    repair = repair or NullRepairProvider()
    known_rooms = set(layout.room_names)

    lines, dropped = clean_output_with_stats(raw_text)
    outcomes: List[LineOutcome] = []
    steps: List[ActionStep] = []
    step_lines: List[int] = []

    for i, line in enumerate(lines):
        result = ground_step(line, indexes.actions, indexes.objects, thresholds, known_rooms)
        if isinstance(result, GroundedStep):
            outcome = Accepted(substitutions=result.substitutions)
        else:
            context = lines[max(0, i - _CONTEXT_RADIUS):i] + lines[i + 1:i + 1 + _CONTEXT_RADIUS]
            result, attempts, repaired_line = _repair_line(
                result, context, indexes, thresholds, repair, known_rooms
            )
            if isinstance(result, GroundedStep):
                outcome = Repaired(attempts=attempts, repaired_line=repaired_line, substitutions=result.substitutions)
                logger.debug(f"Repaired line {i + 1} after {attempts} attempt(s)")
            else:
                outcome = Discarded(reason=result.reason, attempts=attempts)
                logger.warning(f"⚠️ Discarded line {i + 1}: {result.reason}: {line!r}")
        outcomes.append(LineOutcome(line_number=i + 1, line=line, result=outcome))
        if isinstance(result, GroundedStep):
            steps.append(result.step)
            step_lines.append(i)

    kept, rejected = normalize_steps(steps)
    for index, message in rejected:
        line_index = step_lines[index]
        previous = outcomes[line_index].result
        attempts = previous.attempts if isinstance(previous, Repaired) else 0
        outcomes[line_index] = outcomes[line_index].model_copy(
            update={"result": Discarded(reason=message, attempts=attempts)}
        )
        logger.warning(f"⚠️ Discarded line {line_index + 1}: {message}")

    script = Script(metadata=metadata or ScriptMetadata(), steps=[step for _, step in kept])
    report = GroundingReport(lines=outcomes, dropped_lines=dropped)
    logger.info(
        f"Grounded {len(lines)} line(s): {report.accepted} accepted, "
        f"{report.repaired} repaired, {report.discarded} discarded"
    )
    return script, report
