"""Observed-maxima containers and CSV ingestion.

Grouped data (random effects): CSV with header ``group,value``, group keys
arbitrary strings.  Series data (hidden MA): header ``series,index,value``
with integer, contiguous per-series indices.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class GroupedSample:
    """Observations organized by group; groups are independent."""

    groups: list[np.ndarray]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.groups:
            raise DataError("no groups in sample")
        self.groups = [np.asarray(g, dtype=float) for g in self.groups]
        if any(g.size < 1 for g in self.groups):
            raise DataError("every group needs at least one observation")
        if not self.labels:
            self.labels = [str(i + 1) for i in range(len(self.groups))]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> list[int]:
        return [int(g.size) for g in self.groups]

    def pooled(self) -> np.ndarray:
        return np.concatenate(self.groups)


@dataclass
class SeriesSample:
    """One or more observed series in time order."""

    series: list[np.ndarray]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.series:
            raise DataError("no series in sample")
        self.series = [np.asarray(s, dtype=float) for s in self.series]
        if any(s.size < 1 for s in self.series):
            raise DataError("every series needs at least one observation")
        if not self.labels:
            self.labels = [str(i + 1) for i in range(len(self.series))]

    @property
    def n_series(self) -> int:
        return len(self.series)

    def pooled(self) -> np.ndarray:
        return np.concatenate(self.series)


def _open_csv(path):
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def read_grouped_csv(path) -> GroupedSample:
    """Read ``group,value`` CSV into a GroupedSample (group order of first appearance)."""
    by_group: dict[str, list[float]] = {}
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"group", "value"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected header 'group,value'")
        for i, row in enumerate(reader, start=2):
            try:
                val = float(row["value"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{i}: bad value {row.get('value')!r}") from None
            by_group.setdefault(row["group"], []).append(val)
    if not by_group:
        raise DataError(f"{path}: no data rows")
    labels = list(by_group)
    return GroupedSample(groups=[np.array(by_group[k]) for k in labels], labels=labels)


def read_series_csv(path) -> SeriesSample:
    """Read ``series,index,value`` CSV into a SeriesSample.

    Indices must be integers and contiguous within each series.
    """
    by_series: dict[str, list[tuple[int, float]]] = {}
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"series", "index", "value"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected header 'series,index,value'")
        for i, row in enumerate(reader, start=2):
            try:
                idx = int(row["index"])
                val = float(row["value"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{i}: bad index/value") from None
            by_series.setdefault(row["series"], []).append((idx, val))
    if not by_series:
        raise DataError(f"{path}: no data rows")
    labels = list(by_series)
    series = []
    for k in labels:
        pairs = sorted(by_series[k])
        idxs = [i for i, _ in pairs]
        if idxs != list(range(idxs[0], idxs[0] + len(idxs))):
            raise DataError(f"{path}: series {k!r} indices not contiguous")
        series.append(np.array([v for _, v in pairs]))
    return SeriesSample(series=series, labels=labels)


def write_grouped_csv(path, sample: GroupedSample) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "value"])
        for label, group in zip(sample.labels, sample.groups):
            for v in group:
                writer.writerow([label, repr(float(v))])


def write_series_csv(path, sample: SeriesSample) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["series", "index", "value"])
        for label, series in zip(sample.labels, sample.series):
            for i, v in enumerate(series, start=1):
                writer.writerow([label, i, repr(float(v))])
