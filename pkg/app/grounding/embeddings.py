import hashlib
import logging
import math
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple, Union, runtime_checkable

import numpy as np
import requests

from app.config import settings
from app.exceptions import EmbeddingProviderError, GroundingError

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION = 256
DEFAULT_SYNONYM_COSINE = 0.9

SynonymSpec = Union[str, Tuple[str, float], Mapping[str, object]]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """cos(u, v) = u.v / (|u| |v|), clipped to [-1, 1]"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise GroundingError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise GroundingError("cosine is undefined for a zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@runtime_checkable
class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> np.ndarray:
        ...

    def dimension(self) -> int:
        ...


def _token_seed(token: str) -> int:
    digest = hashlib.sha256(token.lower().encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class DeterministicEmbeddingProvider:
    """In-process provider: every token maps to a seeded pseudorandom unit vector.

    Synonyms map a near-miss token onto a target at an exact cosine, e.g.
    {"friedge": "fridge"} (cosine 0.9) or {"wallk": {"target": "walk", "cosine": 0.85}}.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION, synonyms: Optional[Mapping[str, SynonymSpec]] = None):
        if dimension < 2:
            raise GroundingError("embedding dimension must be at least 2")
        self._dimension = dimension
        self._synonyms: Dict[str, Tuple[str, float]] = {}
        for token, spec in (synonyms or {}).items():
            self._synonyms[token.lower()] = self._parse_synonym(token, spec)
        self._cache: Dict[str, np.ndarray] = {}

    @staticmethod
    def _parse_synonym(token: str, spec: SynonymSpec) -> Tuple[str, float]:
        if isinstance(spec, str):
            target, value = spec, DEFAULT_SYNONYM_COSINE
        elif isinstance(spec, Mapping):
            target = str(spec["target"])
            value = float(spec.get("cosine", DEFAULT_SYNONYM_COSINE))
        else:
            target, value = spec[0], float(spec[1])
        if not -1.0 <= value <= 1.0:
            raise GroundingError(f"synonym cosine for '{token}' must lie in [-1, 1], got {value}")
        if target.lower() == token.lower():
            raise GroundingError(f"synonym '{token}' points at itself")
        return target.lower(), value

    def dimension(self) -> int:
        return self._dimension

    def _base_vector(self, key: str) -> np.ndarray:
        rng = np.random.default_rng(_token_seed(key))
        v = rng.standard_normal(self._dimension)
        return v / np.linalg.norm(v)

    def _vector(self, key: str, chain: Tuple[str, ...]) -> np.ndarray:
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if key in chain:
            raise GroundingError(f"synonym cycle through '{key}'")

        own = self._base_vector(key)
        if key in self._synonyms:
            target_key, c = self._synonyms[key]
            target = self._vector(target_key, chain + (key,))
            orthogonal = own - np.dot(own, target) * target
            orthogonal /= np.linalg.norm(orthogonal)
            vector = c * target + math.sqrt(max(0.0, 1.0 - c * c)) * orthogonal
            vector /= np.linalg.norm(vector)
        else:
            vector = own
        vector.setflags(write=False)
        self._cache[key] = vector
        return vector

    def embed(self, text: str) -> np.ndarray:
        key = text.strip().lower()
        if not key:
            raise EmbeddingProviderError(text, "empty token")
        return self._vector(key, ())


class HttpEmbeddingProvider:
    """Remote provider: POST {"input": [...]} -> {"embeddings": [[...], ...]}"""

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout: Optional[float] = None,
        session: Optional[requests.Session] = None,
    ):
        self.endpoint = endpoint or settings.embedding_endpoint
        if not self.endpoint:
            raise GroundingError("no embedding endpoint configured (set EMBEDDING_ENDPOINT)")
        self.api_key = api_key if api_key is not None else settings.embedding_api_key
        self.timeout = timeout if timeout is not None else settings.embedding_timeout
        self.session = session or requests.Session()
        self._cache: Dict[str, np.ndarray] = {}
        self._dimension: Optional[int] = None

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        missing = [t for t in dict.fromkeys(texts) if t not in self._cache]
        if missing:
            try:
                response = self.session.post(
                    self.endpoint, json={"input": missing}, headers=self._headers(), timeout=self.timeout
                )
                response.raise_for_status()
                vectors = response.json()["embeddings"]
            except requests.exceptions.RequestException as e:
                raise EmbeddingProviderError(missing[0], f"request failed: {e}") from e
            except (KeyError, ValueError) as e:
                raise EmbeddingProviderError(missing[0], f"malformed response: {e}") from e
            if len(vectors) != len(missing):
                raise EmbeddingProviderError(missing[0], f"expected {len(missing)} vectors, got {len(vectors)}")
            for text, raw in zip(missing, vectors):
                vector = np.asarray(raw, dtype=np.float64)
                if vector.ndim != 1 or not np.all(np.isfinite(vector)):
                    raise EmbeddingProviderError(text, "vector is not a finite 1-d array")
                if self._dimension is None:
                    self._dimension = int(vector.shape[0])
                elif vector.shape[0] != self._dimension:
                    raise EmbeddingProviderError(text, f"dimension {vector.shape[0]} != {self._dimension}")
                self._cache[text] = vector
            logger.debug(f"Embedded {len(missing)} text(s) via {self.endpoint}")
        return [self._cache[t] for t in texts]

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]

    def dimension(self) -> int:
        if self._dimension is None:
            self.embed("probe")
        return self._dimension


def make_provider(kind: str = "deterministic", dimension: int = DEFAULT_DIMENSION,
                  synonyms: Optional[Mapping[str, SynonymSpec]] = None) -> EmbeddingProvider:
    if kind == "deterministic":
        return DeterministicEmbeddingProvider(dimension=dimension, synonyms=synonyms)
    if kind == "http":
        return HttpEmbeddingProvider()
    raise GroundingError(f"unknown embedding provider '{kind}'")
