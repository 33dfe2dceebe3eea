"""Input validation helpers for array-shaped track point data."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.utils import check_array

from .errors import InvalidPointError
from .model import TrackPoint

N_COLUMNS = 3  # lat, lon, reported_at


def check_track_array(X) -> np.ndarray:
    """Validate an ``(n, 3)`` array of ``lat, lon, reported_at`` rows."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=0)
    if X.shape[1] != N_COLUMNS:
        raise InvalidPointError(f"expected {N_COLUMNS} columns (lat, lon, reported_at), got {X.shape[1]}")
    lat, lon, t = X[:, 0], X[:, 1], X[:, 2]
    if np.any((lat < -90) | (lat > 90)):
        raise InvalidPointError("latitude outside [-90, 90]")
    if np.any((lon < -180) | (lon >= 180)):
        raise InvalidPointError("longitude outside [-180, 180)")
    if np.any(t < 0) or np.any(t != np.floor(t)):
        raise InvalidPointError("reported_at must hold non-negative integer ticks")
    return X


def check_device_ids(device_ids: Optional[Sequence[str]], n_samples: int, offset: int = 0) -> list[str]:
    if device_ids is None:
        return [f"p{offset + i}" for i in range(n_samples)]
    ids = [str(d) for d in device_ids]
    if len(ids) != n_samples:
        raise InvalidPointError(f"{len(ids)} device ids for {n_samples} samples")
    return ids


def to_track_points(X, device_ids: Optional[Sequence[str]] = None, offset: int = 0) -> list[TrackPoint]:
    """Turn validated rows into TrackPoints, stably sorted by reported time."""
    X = check_track_array(X)
    ids = check_device_ids(device_ids, X.shape[0], offset)
    points = [TrackPoint(d, lat, lon, int(t)) for d, (lat, lon, t) in zip(ids, X.tolist())]
    return sorted(points, key=lambda p: p.reported_at)
