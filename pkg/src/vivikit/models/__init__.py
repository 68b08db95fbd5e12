"""Predictors: kNN, random forest and external subprocess models."""

from .base import CLASSIFICATION, REGRESSION, Predictor, SchemaError, predict
from .external import ExternalModelError, ExternalPredictor, external_predictor
from .forest import RandomForest, Tree, embedded_importance, forest_fit
from .knn import KNearestNeighbors, knn_fit
from .persist import dump_model, load_model

__all__ = [
    "CLASSIFICATION", "REGRESSION", "Predictor", "SchemaError", "predict",
    "ExternalModelError", "ExternalPredictor", "external_predictor",
    "RandomForest", "Tree", "embedded_importance", "forest_fit",
    "KNearestNeighbors", "knn_fit", "dump_model", "load_model",
]
