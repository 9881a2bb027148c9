from app.grounding.cleaner import clean_output, clean_output_with_stats
from app.grounding.embeddings import (
    DeterministicEmbeddingProvider,
    EmbeddingProvider,
    HttpEmbeddingProvider,
    cosine,
    make_provider,
)
from app.grounding.grounder import ground_script, ground_step
from app.grounding.index import IndexKind, VocabularyIndex, build_index, nearest, nearest_vector
from app.grounding.repair import HttpRepairProvider, NullRepairProvider, RepairProvider, RepairRequest
from app.grounding.vocabulary import GroundingIndexes, build_indexes, load_vocabulary, room_partition
