"""Disentangled graph representation learning with a beta-VAE over padded
canonical adjacency encodings, plus the generators, metrics and experiment
drivers around it."""

__version__ = "0.1.0"

from .canonical import EncodedSample, bosam_order, threshold_decode, to_padded
from .errors import (CapacityError, CheckpointError, GraphDisError,
                     NonFiniteError, ShapeError, TrainingDiverged,
                     ValidationError)
from .experiments import (RandomizationResult, SweepResult, TraversalSpec,
                          encode_sweep, randomization_sweep,
                          render_contact_sheet, sample_vs_population,
                          traverse, traverse_grid)
from .graphs import (Dataset, GenParams, Graph, assign_uniform_attribute,
                     gen_dataset, gen_graph, load_dataset,
                     randomize_attributes, save_dataset)
from .metrics import (AttrMigResult, GraphStats, MigReport, discretize,
                      entropy, graph_stats, mig, mig_attr,
                      mutual_information, pearson)
from .model import GraphVae, ModelConfig, kl_terms, reparameterize
from .training import (TrainConfig, TrainHistory, load_checkpoint,
                       save_checkpoint, train)
from .walks import (WalkConfig, biased_walk, load_edge_list, rw_sample,
                    sample_dataset, transition_weights)

__all__ = [
    "__version__",
    "AttrMigResult", "CapacityError", "CheckpointError", "Dataset",
    "EncodedSample", "GenParams", "Graph", "GraphDisError", "GraphStats",
    "GraphVae", "MigReport", "ModelConfig", "NonFiniteError",
    "RandomizationResult", "ShapeError", "SweepResult", "TrainConfig",
    "TrainHistory", "TrainingDiverged", "TraversalSpec", "ValidationError",
    "WalkConfig", "assign_uniform_attribute", "biased_walk", "bosam_order",
    "discretize", "encode_sweep", "entropy", "gen_dataset", "gen_graph",
    "graph_stats", "kl_terms", "load_checkpoint", "load_dataset", "mig",
    "mig_attr", "mutual_information", "pearson", "randomization_sweep", "render_contact_sheet",
    "randomize_attributes", "load_edge_list", "reparameterize", "rw_sample",
    "sample_dataset", "sample_vs_population", "transition_weights",
    "save_checkpoint", "save_dataset", "threshold_decode", "to_padded",
    "train", "traverse", "traverse_grid",
]
