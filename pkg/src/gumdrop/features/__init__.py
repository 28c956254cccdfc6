from .document import quote_paren_state, sent_percentile
from .extract import TokenFeaturizer
from .lexical import (Lexicon, UnigramTagger, build_lexicon, char_type_counts,
                      first_last_chars, orth_case)
from .schema import (CATEGORICAL, NUMERIC, FeatureSchema, FeatureSpec, window_features,
                     window_records)
from .selection import filter_redundant, pearson, theils_u
from .syntax import (CLAUSAL_RELATIONS, bin_head_distance, clause_spans, dep_brackets,
                     head_distance, subtree_features)

__all__ = [
    "quote_paren_state", "sent_percentile", "TokenFeaturizer", "Lexicon", "UnigramTagger",
    "build_lexicon", "char_type_counts", "first_last_chars", "orth_case", "CATEGORICAL",
    "NUMERIC", "FeatureSchema", "FeatureSpec", "window_features", "window_records",
    "filter_redundant", "pearson", "theils_u", "CLAUSAL_RELATIONS", "bin_head_distance",
    "clause_spans", "dep_brackets", "head_distance", "subtree_features",
]
