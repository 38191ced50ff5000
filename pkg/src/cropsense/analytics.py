"""Aggregations over the report store: demographics, time, and space.

Pure reductions over store snapshots. Region, gender, and age-group
dimensions resolve the submitting agent's registered metadata (a report
belongs to its agent's station, not to reverse-geocoded coordinates);
spatial density uses plain grid binning with left-closed right-open cell
edges.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .ingestion import Report, ReportLabel, ReportStore
from .registry import AgeGroup, Gender, Registry, Zardi

__all__ = [
    "Dimension",
    "Bucket",
    "AggregationResult",
    "DensityGrid",
    "aggregate",
    "weekly_series",
    "spatial_density",
    "export_geojson",
    "geojson_total",
    "aggregation_to_csv",
    "AnalyticsError",
    "InvalidCellSize",
    "UnresolvableAgent",
]


class AnalyticsError(Exception):
    pass


class InvalidCellSize(AnalyticsError):
    pass


class UnresolvableAgent(AnalyticsError):
    """A report's agent is missing from the registry."""


class Dimension(str, Enum):
    REGION = "Region"
    GENDER = "Gender"
    AGE_GROUP = "AgeGroup"
    LABEL = "Label"
    WEEK = "Week"


@dataclass(frozen=True)
class Bucket:
    key: str
    count: int
    share: float


@dataclass
class AggregationResult:
    dimension: Dimension
    buckets: list[Bucket]
    total: int


def week_start(d: date | datetime) -> date:
    """Monday of the ISO week containing d."""
    if isinstance(d, datetime):
        d = d.date()
    return d - timedelta(days=d.weekday())


def _resolve(registry: Registry | None, agent_id: str):
    if registry is None or agent_id not in registry:
        raise UnresolvableAgent(f"agent {agent_id!r} not found in registry")
    return registry.get(agent_id)


def _bucket_key(report: Report, dimension: Dimension, registry: Registry | None) -> str:
    if dimension is Dimension.LABEL:
        return report.label.value
    if dimension is Dimension.WEEK:
        return week_start(report.received_at).isoformat()
    agent = _resolve(registry, report.agent_id)
    if dimension is Dimension.REGION:
        return agent.region.value
    if dimension is Dimension.GENDER:
        return agent.profile.gender.value
    group = agent.age_group
    if group is None:
        raise UnresolvableAgent(f"agent {agent.agent_id!r} has no age group")
    return group.value


def _key_order(dimension: Dimension, seen: Iterable[str]) -> list[str]:
    if dimension is Dimension.REGION:
        return [z.value for z in Zardi]
    if dimension is Dimension.GENDER:
        return [g.value for g in Gender]
    if dimension is Dimension.AGE_GROUP:
        return [g.value for g in AgeGroup]
    if dimension is Dimension.LABEL:
        return [l.value for l in ReportLabel]
    weeks = sorted(seen)
    if not weeks:
        return []
    # zero-fill between the first and last observed weeks
    out = []
    cursor = date.fromisoformat(weeks[0])
    last = date.fromisoformat(weeks[-1])
    while cursor <= last:
        out.append(cursor.isoformat())
        cursor += timedelta(days=7)
    return out


def aggregate(
    store: ReportStore | Sequence[Report],
    dimension: Dimension,
    registry: Registry | None = None,
    filter: dict | None = None,
) -> AggregationResult:
    """Bucket counts and shares along one dimension.

    Buckets are exhaustive and mutually exclusive, in fixed enum order
    (weeks ascending); an empty scope yields no buckets and total 0.
    """
    reports = _in_scope(store, registry, filter)
    counts: dict[str, int] = {}
    for report in reports:
        key = _bucket_key(report, dimension, registry)
        counts[key] = counts.get(key, 0) + 1

    total = sum(counts.values())
    if total == 0:
        return AggregationResult(dimension=dimension, buckets=[], total=0)
    buckets = [
        Bucket(key=key, count=counts.get(key, 0), share=counts.get(key, 0) / total)
        for key in _key_order(dimension, counts)
    ]
    return AggregationResult(dimension=dimension, buckets=buckets, total=total)


def _in_scope(
    store: ReportStore | Sequence[Report],
    registry: Registry | None,
    filter: dict | None,
) -> list[Report]:
    if isinstance(store, ReportStore):
        filter = dict(filter or {})
        region = filter.pop("region", None)
        reports = store.query(**filter)
    else:
        reports = list(store)
        region = (filter or {}).get("region")
    if region is not None:
        region = Zardi(region)
        reports = [r for r in reports if _resolve(registry, r.agent_id).region is region]
    return reports


def weekly_series(
    store: ReportStore | Sequence[Report], date_range: tuple[date, date]
) -> list[tuple[date, int]]:
    """Report counts per ISO week (Monday start), zero-filled over the range."""
    start, end = date_range
    if end < start:
        return []
    reports = store.snapshot() if isinstance(store, ReportStore) else list(store)
    counts: dict[date, int] = {}
    for report in reports:
        d = report.received_at.date()
        if start <= d <= end:
            w = week_start(d)
            counts[w] = counts.get(w, 0) + 1
    out = []
    cursor = week_start(start)
    last = week_start(end)
    while cursor <= last:
        out.append((cursor, counts.get(cursor, 0)))
        cursor += timedelta(days=7)
    return out


@dataclass
class DensityGrid:
    """Sparse spatial bins: (row, col) -> report count."""

    origin: tuple[float, float]  # (lat, lon) of the south-west corner
    cell_size: float
    cells: dict[tuple[int, int], int] = field(default_factory=dict)
    overflow: int = 0  # clipped reports outside bounds

    @property
    def total(self) -> int:
        return sum(self.cells.values())


_EDGE_EPS = 1e-9


def _cell_index(value: float, origin: float, cell_size: float) -> int:
    # the epsilon puts boundary-exact coordinates in the higher cell
    return math.floor((value - origin) / cell_size + _EDGE_EPS)


def spatial_density(
    store: ReportStore | Sequence[Report],
    cell_size: float,
    bounds: tuple[tuple[float, float], tuple[float, float]] | None = None,
    clip: bool = False,
) -> DensityGrid:
    """Bin every geolocated report into one grid cell.

    Cell edges are left-closed, right-open; a coordinate exactly on an
    edge lands in the higher-index cell. With explicit bounds, reports
    outside go to the overflow bucket when clip is set, otherwise raise.
    """
    if not cell_size > 0:
        raise InvalidCellSize(f"cell_size must be > 0, got {cell_size}")
    reports = store.snapshot() if isinstance(store, ReportStore) else list(store)

    if bounds is None:
        if not reports:
            return DensityGrid(origin=(0.0, 0.0), cell_size=cell_size)
        lat_min = min(r.latitude for r in reports)
        lon_min = min(r.longitude for r in reports)
        lat_max = max(r.latitude for r in reports)
        lon_max = max(r.longitude for r in reports)
    else:
        (lat_min, lon_min), (lat_max, lon_max) = bounds

    grid = DensityGrid(origin=(lat_min, lon_min), cell_size=cell_size)
    for r in reports:
        inside = lat_min <= r.latitude <= lat_max and lon_min <= r.longitude <= lon_max
        if not inside:
            if clip:
                grid.overflow += 1
                continue
            raise AnalyticsError(
                f"report {r.report_id} at ({r.latitude}, {r.longitude}) "
                f"is outside bounds; pass clip=True to count it as overflow"
            )
        row = _cell_index(r.latitude, lat_min, cell_size)
        col = _cell_index(r.longitude, lon_min, cell_size)
        grid.cells[(row, col)] = grid.cells.get((row, col), 0) + 1
    return grid


def export_geojson(grid: DensityGrid) -> dict:
    """One square polygon feature per nonzero cell, tiling without overlap."""
    lat0, lon0 = grid.origin
    size = grid.cell_size
    features = []
    for (row, col) in sorted(grid.cells):
        count = grid.cells[(row, col)]
        if count == 0:
            continue
        south = lat0 + row * size
        west = lon0 + col * size
        ring = [
            [west, south],
            [west + size, south],
            [west + size, south + size],
            [west, south + size],
            [west, south],
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {"count": count, "row": row, "col": col},
            }
        )
    return {
        "type": "FeatureCollection",
        "features": features,
        "properties": {
            "origin_lat": lat0,
            "origin_lon": lon0,
            "cell_size": size,
            "overflow": grid.overflow,
        },
    }


def geojson_total(feature_collection: dict) -> int:
    """Re-sum counts from an exported feature collection."""
    return sum(f["properties"]["count"] for f in feature_collection["features"])


def aggregation_to_csv(result: AggregationResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["key", "count", "share"])
        for bucket in result.buckets:
            writer.writerow([bucket.key, bucket.count, f"{bucket.share:.6f}"])


def weekly_series_to_csv(series: list[tuple[date, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["week_start", "count"])
        for week, count in series:
            writer.writerow([week.isoformat(), count])


def write_geojson(feature_collection: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(feature_collection, fh)
        fh.write("\n")
