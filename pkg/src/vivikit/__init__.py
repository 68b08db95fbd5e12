"""Variable importance and interaction displays for fitted models."""

from .arrange import Dendrogram, Ordering, cluster_interactions, leaf_sort, seriate
from .models import (CLASSIFICATION, REGRESSION, ExternalPredictor, KNearestNeighbors,
                     RandomForest, dump_model, external_predictor, load_model)
from .netgraph import EulerSequence, ViviGraph, build_graph, cluster_nodes, eulerian
from .pdp import Grid1D, class_link, ice, make_grid, pdp_1d, pdp_2d
from .simbench import SimConfig, friedman
from .tabular import Column, DataError, FeatureSchema, Table, log_transform, read_csv, split
from .vivi import (FlatSurfaceWarning, ViviMatrix, h_normalized, h_unnormalized,
                   permutation_importance, vivi_matrix)

__version__ = "0.1.0"

__all__ = [
    "Column", "DataError", "FeatureSchema", "Table", "read_csv", "log_transform", "split",
    "CLASSIFICATION", "REGRESSION", "KNearestNeighbors", "RandomForest", "ExternalPredictor",
    "external_predictor", "dump_model", "load_model",
    "Grid1D", "make_grid", "class_link", "pdp_1d", "pdp_2d", "ice",
    "ViviMatrix", "FlatSurfaceWarning", "permutation_importance", "h_unnormalized",
    "h_normalized", "vivi_matrix",
    "Dendrogram", "Ordering", "cluster_interactions", "leaf_sort", "seriate",
    "ViviGraph", "EulerSequence", "build_graph", "cluster_nodes", "eulerian",
    "SimConfig", "friedman",
]
