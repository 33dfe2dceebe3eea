"""Adaptive geo-time partitioning with a deterministic cluster simulator."""

from .cluster import CatalogAck, Cluster, parse_nodes, replay
from .engine import (
    Proposal,
    TableStats,
    apply_due_updates,
    evaluate,
    force_age_out,
    route_catalog,
    route_query,
    schedule_update,
)
from .estimator import AdaptivePartitioner
from .model import (
    GLOBAL_BOX,
    GLOBAL_KEYS,
    LAT_TOP,
    GeoBox,
    KeyRange,
    MainIndex,
    PartitionConfig,
    ScheduledUpdate,
    TableDescriptor,
    TableState,
    TimeInterval,
    TrackPoint,
    bisect_geo,
    bisect_key,
    contains,
    intersects,
    intersects_time,
    validate_index,
)
from .placement import ServerInfo, growth_rate, load_factor, optimum_rate, place_replicas, server_load
from .storage import ArchiveFile, TableStore, archive_table, restore_table

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
