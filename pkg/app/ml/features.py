from functools import lru_cache
from typing import List, Sequence, Union

import numpy as np
from sklearn.feature_extraction.text import HashingVectorizer

from app.dataset.tdost import render_sentences
from app.schemas.dataset import ActivityWindow, TdostVariant, WindowRecord

DEFAULT_FEATURES = 4096


@lru_cache(maxsize=8)
def make_vectorizer(n_features: int = DEFAULT_FEATURES) -> HashingVectorizer:
    """Word 1-2 grams over whitespace tokens, raw counts"""
    return HashingVectorizer(
        n_features=n_features,
        tokenizer=str.split,
        token_pattern=None,
        lowercase=False,
        ngram_range=(1, 2),
        alternate_sign=False,
        norm=None,
        dtype=np.float64,
    )


def featurize_sentences(sentences: Sequence[str], n_features: int = DEFAULT_FEATURES) -> np.ndarray:
    """Per-sentence hashed counts summed over the window, then L2-normalized"""
    if not sentences:
        return np.zeros(n_features)
    counts = np.asarray(make_vectorizer(n_features).transform(list(sentences)).sum(axis=0)).ravel()
    norm = np.linalg.norm(counts)
    return counts / norm if norm > 0 else counts


def window_sentences(window: Union[ActivityWindow, WindowRecord], variant: TdostVariant) -> List[str]:
    if isinstance(window, WindowRecord):
        return window.sentences(variant)
    return render_sentences(window, variant)


def featurize(
    window: Union[ActivityWindow, WindowRecord],
    variant: TdostVariant = TdostVariant.BASIC,
    n_features: int = DEFAULT_FEATURES,
) -> np.ndarray:
    return featurize_sentences(window_sentences(window, variant), n_features)


def featurize_many(
    windows: Sequence[Union[ActivityWindow, WindowRecord]],
    variant: TdostVariant = TdostVariant.BASIC,
    n_features: int = DEFAULT_FEATURES,
) -> np.ndarray:
    if not windows:
        return np.zeros((0, n_features))
    return np.vstack([featurize(w, variant, n_features) for w in windows])
