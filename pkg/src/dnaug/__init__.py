"""dnaug: data augmentation for Chinese disease-name normalization.

Builds unnormalized-to-standard training pairs from a coded vocabulary and
a seed dataset via axis-word replacement and multi-granularity aggregation,
filters them with an n-gram / embedding-cosine gate, and measures the
effect on a retrieval-based normalizer.
"""

from .augment import (
    AugConfig,
    TaggedIndex,
    ar1,
    ar2,
    mga_code,
    mga_region,
    replace_span,
)
from .evaluate import (
    EvalReport,
    SynonymIndex,
    accuracy,
    evaluate,
    f1_set,
    ndcg_at_k,
    rank,
    recall_at_k,
    subsample_experiment,
)
from .filtering import (
    FilterConfig,
    FileEmbedder,
    HashedNgramEmbedder,
    cosine,
    filter_pairs,
    load_embedding_file,
    ngm_score,
)
from .pipeline import PipelineConfig, RunStats, dedupe, read_dataset, run, write_dataset
from .tagging import (
    AxisLabel,
    AxisSpan,
    LexiconTagger,
    TaggedTerm,
    axis_value,
    bio_to_spans,
    spans_to_bio,
    tag,
)
from .terms import TermText
from .vocab import (
    AxisLexicons,
    IcdEntry,
    IcdVocabulary,
    InputError,
    NormPair,
    Provenance,
    RegionTree,
    children_of,
    is_ancestor_region,
    load_axis_lexicons,
    load_icd,
    load_region_tree,
    load_task_pairs,
)

__version__ = "0.1.0"
