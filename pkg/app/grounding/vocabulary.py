import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Set, Union

from pydantic import ValidationError

from app.exceptions import GroundingError
from app.grounding.embeddings import EmbeddingProvider
from app.grounding.index import IndexKind, VocabularyIndex, build_index
from app.schemas.grounding import Vocabulary
from app.schemas.layout import HomeLayout
from app.schemas.script import ActionVerb

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundingIndexes:
    actions: VocabularyIndex
    objects: VocabularyIndex


def load_vocabulary(path: Union[str, Path]) -> Vocabulary:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return Vocabulary.model_validate(json.load(f))
    except FileNotFoundError as e:
        raise GroundingError(f"vocabulary file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise GroundingError(f"invalid vocabulary JSON in {path} at line {e.lineno}: {e.msg}") from e
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise GroundingError(f"{path}: {location}: {first['msg']}") from e


def action_tokens(vocabulary: Optional[Vocabulary] = None) -> List[str]:
    """Action vocabulary; verbs outside the simulator's closed set are skipped"""
    known = [verb.value for verb in ActionVerb]
    if vocabulary is None or not vocabulary.actions:
        return known
    tokens: List[str] = []
    for action in vocabulary.actions:
        token = action.strip().lower()
        if token not in known:
            logger.warning(f"⚠️ Vocabulary action '{action}' is not a simulator verb, skipped")
            continue
        if token not in tokens:
            tokens.append(token)
    return tokens


def room_partition(layout: HomeLayout, vocabulary: Optional[Vocabulary] = None) -> Dict[str, List[str]]:
    """Per-room candidate objects: layout classes in the room, vocabulary objects listing it and every room name"""
    partition: Dict[str, Set[str]] = {room: set(layout.room_names) for room in layout.room_names}
    for obj in layout.graph.nodes.values():
        partition[obj.room].add(obj.class_name)
    if vocabulary is not None:
        for entry in vocabulary.objects:
            for room in entry.rooms:
                if room in partition:
                    partition[room].add(entry.class_name)
    return {room: sorted(members) for room, members in partition.items()}


def build_indexes(
    layout: HomeLayout, vocabulary: Optional[Vocabulary], provider: EmbeddingProvider
) -> GroundingIndexes:
    actions = build_index(action_tokens(vocabulary), IndexKind.ACTION, provider)

    partition = room_partition(layout, vocabulary)
    object_tokens: Set[str] = set()
    for members in partition.values():
        object_tokens.update(members)
    if vocabulary is not None:
        object_tokens.update(entry.class_name for entry in vocabulary.objects)
    objects = build_index(sorted(object_tokens), IndexKind.OBJECT, provider, partition)

    logger.info(
        f"✅ Grounding indexes for '{layout.name}': {len(actions)} actions, {len(objects)} objects"
    )
    return GroundingIndexes(actions=actions, objects=objects)
