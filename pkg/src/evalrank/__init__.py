"""Evaluatology-style ranking of scientific and engineering achievements."""
from __future__ import annotations

__version__ = "0.1.0"

from .baselines import (
    CitationRecord,
    JournalYearRecord,
    citation_ranking,
    h_index,
    impact_factor,
    venue_count_ranking,
)
from .corpus import (
    Achievement,
    Contributor,
    Corpus,
    Orientation,
    Publication,
    Role,
    SignificanceDim,
    TimeInterval,
    build_corpus,
    filter_corpus,
    ingest_corpus,
)
from .errors import EvalRankError
from .evolution import EvolutionTrace, build_evolution_trace, replay
from .pruning import PragmaticEM, PruneConfig, prune, select_top_n, significance_value
from .ranking import RankingReport, RankParams, contributor_shares, institution_rollup, rank_report
from .relations import (
    RelationEdge,
    RelationGraph,
    RelationKind,
    classify_relationships,
    graph_to_dot,
    is_parallel,
    is_pioneering,
    is_progressive,
    is_related_not_connected,
    many_to_one_groups,
    one_to_many_groups,
)
from .taxonomy import ECLevel, ECNode, Taxonomy, is_ancestor, subtree_ids, validate_taxonomy

__all__ = [
    "Achievement", "CitationRecord", "Contributor", "Corpus", "ECLevel", "ECNode", "EvalRankError",
    "EvolutionTrace", "JournalYearRecord", "Orientation", "PragmaticEM", "PruneConfig", "Publication",
    "RankParams", "RankingReport", "RelationEdge", "RelationGraph", "RelationKind", "Role",
    "SignificanceDim", "Taxonomy", "TimeInterval", "build_corpus", "build_evolution_trace",
    "citation_ranking", "classify_relationships", "contributor_shares", "filter_corpus",
    "graph_to_dot", "h_index", "impact_factor", "ingest_corpus", "institution_rollup", "is_ancestor",
    "is_parallel", "is_pioneering", "is_progressive", "is_related_not_connected",
    "many_to_one_groups", "one_to_many_groups", "prune", "rank_report", "replay", "select_top_n",
    "significance_value", "subtree_ids", "validate_taxonomy", "venue_count_ranking",
]
