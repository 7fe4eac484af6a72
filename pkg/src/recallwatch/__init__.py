"""Hazard-report detection in consumer reviews from positive-only complaints
and unlabeled reviews, with an informed feature prior against selection bias.
"""

__version__ = "0.1.0"

from .corpus import Corpus, CorpusKind, Document, RecallRecord, load_corpus, load_recalls
from .evalharness import LabeledEvalSet, confusion_metrics, roc_auc, run_trials
from .informed_prior import (
    PriorTransform,
    apply_transform,
    compute_transform,
    feature_class_counts,
    fit_informed,
    predict_unlabeled,
    smoothed_conditional,
)
from .linmodel import FitParams, LinearModel, WeightedDataset, class_weights, fit, loss_and_gradient, predict_proba
from .pu_train import PUConfig, build_training_set
from .recall_match import hazard_rates, lead_time, match_recalls
from .synthgen import SynthConfig, generate
from .vectorizer import SparseVector, Vocabulary, build_vocabulary, vectorize
