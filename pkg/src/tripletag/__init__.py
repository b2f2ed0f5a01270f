"""Aspect sentiment triplet extraction with position-aware tags and a BiLSTM-CRF."""

from .corpus import CorpusRecord, load_aste_txt, load_corpus, load_jsonl, stats, write_jsonl
from .crf import log_partition, log_prob, sequence_score, viterbi
from .encoder import CrfModel, ModelConfig, Vocabulary, run_encoder
from .evaluation import MatchMode, ensemble_merge, length_breakdown, score
from .tagging import Scheme, Sentiment, Span, Tag, TagSequence, Triplet, decode, encode, enumerate_tagset
from .training import Checkpoint, TrainConfig, load_checkpoint, predict_triplets, save_checkpoint, train

__version__ = "0.1.0"
