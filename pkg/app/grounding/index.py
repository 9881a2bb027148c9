import logging
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import EmbeddingProviderError, GroundingError
from app.grounding.embeddings import EmbeddingProvider

logger = logging.getLogger(__name__)


class IndexKind(str, Enum):
    ACTION = "action"
    OBJECT = "object"


class VocabularyIndex:
    """Unit-normalized vocabulary embeddings, searched exhaustively.

    Immutable after build; the object kind keeps a room -> entry-index partition.
    """

    def __init__(
        self,
        tokens: Sequence[str],
        matrix: np.ndarray,
        kind: IndexKind,
        provider: EmbeddingProvider,
        room_partition: Optional[Mapping[str, Sequence[int]]] = None,
    ):
        self.tokens: Tuple[str, ...] = tuple(tokens)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.kind = kind
        self.provider = provider
        self.room_partition: Dict[str, np.ndarray] = {
            room: np.asarray(sorted(indices), dtype=np.int64) for room, indices in (room_partition or {}).items()
        }

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.tokens

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    def room_tokens(self, room: str) -> List[str]:
        return [self.tokens[i] for i in self.room_partition.get(room, ())]


def _unit(vector: np.ndarray, token: str) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if not np.isfinite(norm) or norm == 0.0:
        raise EmbeddingProviderError(token, "zero or non-finite embedding")
    return vector / norm


def build_index(
    tokens: Sequence[str],
    kind: IndexKind,
    provider: EmbeddingProvider,
    room_partition: Optional[Mapping[str, Sequence[str]]] = None,
) -> VocabularyIndex:
    """Embed every token once; room_partition maps room -> tokens of that room"""
    if not tokens:
        raise GroundingError(f"{kind.value} vocabulary is empty")
    seen = set()
    for token in tokens:
        if token in seen:
            raise GroundingError(f"duplicate {kind.value} token '{token}'")
        seen.add(token)

    rows = []
    for token in tokens:
        try:
            vector = np.asarray(provider.embed(token), dtype=np.float64)
        except EmbeddingProviderError:
            raise
        except Exception as e:
            raise EmbeddingProviderError(token, str(e)) from e
        rows.append(_unit(vector, token))
    dims = {row.shape[0] for row in rows}
    if len(dims) != 1:
        raise GroundingError(f"inconsistent embedding dimensions {sorted(dims)}")
    matrix = np.vstack(rows)

    partition: Dict[str, List[int]] = {}
    if kind is IndexKind.OBJECT and room_partition:
        position = {token: i for i, token in enumerate(tokens)}
        for room, members in room_partition.items():
            missing = [m for m in members if m not in position]
            if missing:
                raise GroundingError(f"room '{room}' lists tokens outside the vocabulary: {missing}")
            partition[room] = sorted({position[m] for m in members})

    logger.debug(f"Built {kind.value} index with {len(tokens)} entries (d={matrix.shape[1]})")
    return VocabularyIndex(tokens, matrix, kind, provider, partition)


def nearest_vector(index: VocabularyIndex, query: np.ndarray, room: Optional[str] = None) -> Tuple[str, float]:
    """Exhaustive cosine argmax; equal scores resolve to the lexicographically smallest token"""
    if len(index) == 0:
        raise GroundingError("index is empty")
    if room is not None and index.kind is IndexKind.OBJECT:
        candidates = index.room_partition.get(room)
        if candidates is None or len(candidates) == 0:
            raise GroundingError(f"no {index.kind.value} candidates for room '{room}'")
    else:
        candidates = np.arange(len(index))

    query = _unit(np.asarray(query, dtype=np.float64), "<query>")
    if query.shape[0] != index.dimension:
        raise GroundingError(f"query dimension {query.shape[0]} != index dimension {index.dimension}")
    scores = np.clip(index.matrix[candidates] @ query, -1.0, 1.0)
    best = scores.max()
    tied = candidates[scores == best]
    token = min(index.tokens[i] for i in tied)
    return token, float(best)


def nearest(index: VocabularyIndex, query_token: str, room: Optional[str] = None) -> Tuple[str, float]:
    try:
        query = index.provider.embed(query_token)
    except EmbeddingProviderError:
        raise
    except Exception as e:
        raise EmbeddingProviderError(query_token, str(e)) from e
    return nearest_vector(index, query, room)
