"""Sparse stochastic-clique CRF engine for interactive image segmentation."""

from .field import (ImageGrid, ScribbleMask, SegmentationMask, EncodedStats,
                    StatsField, compute_encoded_stats, local_pairs)
from .divergence import (DivergenceKind, bregman_sqnorm, kl, hellinger,
                         connectivity)
from .randgraph import (SparseGraph, SparsificationBounds, gen_gnp, gen_gnm,
                        gen_gnpij, connected_components, sparsification_bounds)
from .cliques import (ClusterModel, CliqueSet, cluster_nodes,
                      cluster_connectivity, calibrate_gamma, sample_cliques,
                      degree_report)
from .energy import (EnergyModel, fit_appearance_model, unary_potentials,
                     theta_local, theta_long, total_energy)
from .mincut import (FlowNetwork, build_st_graph, max_flow, extract_labels,
                     brute_force_min_energy)
from .metrics import confusion_counts, region_f1, iou, boundary_f1
from .pipeline import RunConfig, segment

__version__ = "0.1.0"

__all__ = [
    "ImageGrid", "ScribbleMask", "SegmentationMask", "EncodedStats",
    "StatsField", "compute_encoded_stats", "local_pairs",
    "DivergenceKind", "bregman_sqnorm", "kl", "hellinger", "connectivity",
    "SparseGraph", "SparsificationBounds", "gen_gnp", "gen_gnm", "gen_gnpij",
    "connected_components", "sparsification_bounds",
    "ClusterModel", "CliqueSet", "cluster_nodes", "cluster_connectivity",
    "calibrate_gamma", "sample_cliques", "degree_report",
    "EnergyModel", "fit_appearance_model", "unary_potentials", "theta_local",
    "theta_long", "total_energy",
    "FlowNetwork", "build_st_graph", "max_flow", "extract_labels",
    "brute_force_min_energy",
    "confusion_counts", "region_f1", "iou", "boundary_f1",
    "RunConfig", "segment",
]
