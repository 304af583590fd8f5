from .ensemble import (LabeledDataset, TrainedEnsemble, evaluate_ensemble, hierarchical_predict,
                       load_bundle, majority_vote, majority_vote_rows, save_bundle,
                       train_ensemble, train_test_split)
from .models import KINDS, ClassifierModel, predict, predict_batch, train_classifier

__all__ = [
    "LabeledDataset", "TrainedEnsemble", "evaluate_ensemble", "hierarchical_predict",
    "load_bundle", "majority_vote", "majority_vote_rows", "save_bundle", "train_ensemble",
    "train_test_split", "KINDS", "ClassifierModel", "predict", "predict_batch",
    "train_classifier",
]
