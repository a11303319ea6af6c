"""Community-smell detection and sentiment-feature analysis for developer communities."""

__version__ = "0.1.0"

from .features import CLASS_NAMES, FEATURE_NAMES, Dataset, FeatureVector  # noqa: E402
from .graphs import (  # noqa: E402
    AnalysisWindow,
    CommunityPartition,
    SocioGraph,
    build_collaboration_graph,
    build_communication_graph,
    detect_communities,
    make_windows,
    modularity,
)
from .ingest import Corpus, IngestError, load_corpus, resolve_identities  # noqa: E402
from .smells import SmellKind, derive_labels, detect_window_smells  # noqa: E402

__all__ = [
    "AnalysisWindow",
    "CLASS_NAMES",
    "CommunityPartition",
    "Corpus",
    "Dataset",
    "FEATURE_NAMES",
    "FeatureVector",
    "IngestError",
    "SmellKind",
    "SocioGraph",
    "build_collaboration_graph",
    "build_communication_graph",
    "derive_labels",
    "detect_communities",
    "detect_window_smells",
    "load_corpus",
    "make_windows",
    "modularity",
    "resolve_identities",
]
