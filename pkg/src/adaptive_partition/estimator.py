"""Scikit-learn style facade over a simulated adaptive partition."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cluster import Cluster, parse_nodes, replay
from .model import (
    GEO,
    MainIndex,
    PartitionConfig,
    Range,
    TableState,
    TimeInterval,
    TrackPoint,
    contains,
    global_range,
)
from .script import query_box
from .validation import check_device_ids, check_track_array, to_track_points


class AdaptivePartitioner(BaseEstimator):
    """Learn an adaptive geo-time partition from a stream of track points.

    ``fit`` replays the rows of ``X`` (``lat, lon, reported_at``) through a
    fresh simulated cluster in time order; ``partial_fit`` keeps feeding the
    same cluster. ``predict`` returns, for each row, the id of the table that
    covers its position at its reported tick, or -1 when that table has been
    archived.

    Parameters mirror :class:`PartitionConfig`, plus the node roster
    (``"id:location,..."``), the replication delay and the RNG seed.
    """

    def __init__(self, optimum_count=1000, optimum_age=60, replication_factor=1,
                 location_count=1, update_lead=2, retention=1440, key_space=GEO,
                 nodes="n1:loc1", sync_delay=1, seed=0):
        self.optimum_count = optimum_count
        self.optimum_age = optimum_age
        self.replication_factor = replication_factor
        self.location_count = location_count
        self.update_lead = update_lead
        self.retention = retention
        self.key_space = key_space
        self.nodes = nodes
        self.sync_delay = sync_delay
        self.seed = seed

    def _make_cluster(self) -> Cluster:
        config = PartitionConfig(
            optimum_count=self.optimum_count,
            optimum_age=self.optimum_age,
            replication_factor=self.replication_factor,
            location_count=self.location_count,
            update_lead=self.update_lead,
            retention=self.retention,
            key_space=self.key_space,
        )
        return Cluster(config, parse_nodes(self.nodes), seed=self.seed, sync_delay=self.sync_delay)

    def fit(self, X, y=None, device_ids: Optional[Sequence[str]] = None):
        for attr in ("cluster_", "n_records_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X, y, device_ids=device_ids)

    def partial_fit(self, X, y=None, device_ids: Optional[Sequence[str]] = None):
        if not hasattr(self, "cluster_"):
            self.cluster_ = self._make_cluster()
            self.n_records_ = 0
        points = to_track_points(X, device_ids, offset=self.n_records_)
        self.n_records_ += replay(self.cluster_, points)
        self.index_: MainIndex = self.cluster_.coordinator_index()
        self.n_tables_ = len(self.index_)
        self.n_live_tables_ = len(self.index_.live())
        return self

    def predict(self, X, device_ids: Optional[Sequence[str]] = None) -> np.ndarray:
        check_is_fitted(self, "cluster_")
        X = check_track_array(X)
        ids = check_device_ids(device_ids, X.shape[0])
        tables = [d for _, d in sorted(self.index_.descriptors.items())
                  if d.state is not TableState.ARCHIVED]
        out = np.full(X.shape[0], -1, dtype=np.int64)
        for i, (device, (lat, lon, t)) in enumerate(zip(ids, X.tolist())):
            point = TrackPoint(device, lat, lon, int(t))
            for d in tables:
                if d.time_range.contains_tick(point.reported_at) and contains(d.range, point):
                    out[i] = d.table_id
                    break
        return out

    def query(self, box: Optional[Range | tuple] = None, t0: int = 0,
              t1: Optional[int] = None) -> list[TrackPoint]:
        """Records inside ``box`` reported in ``[t0, t1)``; ``box`` may be a 4-tuple."""
        check_is_fitted(self, "cluster_")
        if box is None:
            box = global_range(self.key_space)
        elif isinstance(box, tuple):
            box = query_box(*box)
        entry = self.cluster_.coordinator_id()
        return self.cluster_.query(entry, box, TimeInterval(t0, t1))
