"""Affective meal recommendation from EEG: features, voting ensembles, TOPSIS and menu packing."""

from .data_io import (ChannelLayout, EegRecording, FoodItem, StimulusProtocol, SurveyLabels,
                      load_food_db, load_labels, load_recording, segment_trials,
                      synthesize_session)
from .learn import TrainedEnsemble, hierarchical_predict, train_ensemble
from .metrics import ConfusionMatrix, MetricsReport, auc, f1
from .pipeline import PipelineConfig, run_pipeline
from .planner import DayBudget, MealPlan, plan_menu, validate_plan
from .recommend import rank_foods, topsis

__version__ = "0.1.0"

__all__ = [
    "ChannelLayout", "EegRecording", "FoodItem", "StimulusProtocol", "SurveyLabels",
    "load_food_db", "load_labels", "load_recording", "segment_trials", "synthesize_session",
    "TrainedEnsemble", "hierarchical_predict", "train_ensemble",
    "ConfusionMatrix", "MetricsReport", "auc", "f1",
    "PipelineConfig", "run_pipeline", "DayBudget", "MealPlan", "plan_menu", "validate_plan",
    "rank_foods", "topsis",
]
