from .config import PipelineConfig
from .ensemble import (EnsembleModel, baseline_segment_by_sentence, predict_connectives,
                       predict_segments, predict_sentences, repair_conn_labels, train_connective,
                       train_ensemble, train_segmenter, train_sentencer)
from .modules import (BOWCounter, FreqConnective, PunctSentencer, SubtreeSegmenter,
                      WikiSentencer, WindowSentencer, build_modules)

__all__ = [
    "PipelineConfig", "EnsembleModel", "baseline_segment_by_sentence", "predict_connectives",
    "predict_segments", "predict_sentences", "repair_conn_labels", "train_connective",
    "train_ensemble", "train_segmenter", "train_sentencer", "BOWCounter", "FreqConnective",
    "PunctSentencer", "SubtreeSegmenter", "WikiSentencer", "WindowSentencer", "build_modules",
]
