"""Transfer-entropy influence networks with spectral source ranking."""

__version__ = "0.1.0"

from .errors import NumericalError, ValidationError
from .estimators import DelayGrid, EmbeddingConfig, TeEstimate, net_te, scan_delays, te_binned, te_ksg
from .generators import (
    CascadeConfig,
    CascadeEdge,
    LorenzPairConfig,
    gen_cascade,
    gen_lorenz_pair,
    gen_var,
    random_tree,
)
from .network import GraphConfig, InfluenceGraph, adjacency, build_graph
from .pipeline import AnalysisConfig, RollingReport, analyze, emit_outputs, run_rolling
from .ranking import RankVector, google_matrix, rank_sources, row_normalize
from .surrogates import SignificanceResult, iaaft, iaaft_ensemble, test_edge
from .timeseries import TimeSeriesSet, WindowSpec, load_csv, save_csv, slice_windows, standardize

__all__ = [
    "AnalysisConfig", "CascadeConfig", "CascadeEdge", "DelayGrid", "EmbeddingConfig", "GraphConfig",
    "InfluenceGraph", "LorenzPairConfig", "NumericalError", "RankVector", "RollingReport", "SignificanceResult",
    "TeEstimate", "TimeSeriesSet", "ValidationError", "WindowSpec", "adjacency", "analyze", "build_graph",
    "emit_outputs", "gen_cascade", "gen_lorenz_pair", "gen_var", "google_matrix", "iaaft", "iaaft_ensemble",
    "load_csv", "net_te", "random_tree", "rank_sources", "row_normalize", "run_rolling", "save_csv",
    "scan_delays", "slice_windows", "standardize", "te_binned", "te_ksg", "test_edge",
]
