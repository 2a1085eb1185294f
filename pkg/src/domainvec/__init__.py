"""Domain Vectors: online-defined metric Domain Spaces.

A Domain Vector carries a UL naming the online definition of its Domain
Space plus one optional scalar per dimension. Spaces are metric: weighted
Manhattan or Euclidean distances rank vectors for similarity search, range
filters select cohorts, and group statistics pool across federated peers
without moving raw records.
"""

from .codec import (
    DomainVector,
    FullUrl,
    LocalTableIndex,
    NumericHierarchic,
    SameAsBefore,
    UlContext,
    UlRef,
    canonical_ul_text,
    decode_dv,
    decode_uint,
    decode_ul,
    encode_dv,
    encode_uint,
    encode_ul,
    ul_from_text,
)
from .decision import (
    Interval,
    RoleTagging,
    evaluate_variants,
    suggest_dimensions,
    suggest_intervals,
    weights_from_intervals,
)
from .federation import (
    FederatedRequest,
    PeerResponse,
    PooledStatistics,
    coordinate,
    peer_answer,
    pool,
)
from .model import (
    DimensionDefinition,
    DomainDefinition,
    FlattenedDimension,
    GlobalDimensionId,
    NestedSpace,
    canonical_bytes,
    content_hash,
    definition_from_bytes,
    flatten,
    information_content,
    validate_definition,
    validate_dv,
)
from .search import (
    Constraint,
    GroupStatistics,
    SearchQuery,
    SearchResult,
    cross_space_search,
    dimension_usages,
    distance,
    group_stats,
    search,
)
from .service import Node, Server, ServiceConfig
from .store import DvStore, Registry, export_space, import_space

__version__ = "0.1.0"
