"""Cascade and parameter types, JSONL ingestion, and the early/total-count filter.

A cascade file holds one JSON object per line::

    {"id": "a", "timestamps": [1.0, 2.0], "horizon": 10.0}

Timestamps are seconds relative to the posting time of the root item.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np


class CascadeFormatError(ValueError):
    """A record in a cascade stream could not be turned into a Cascade."""

    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


class UnsortedTimestampsWarning(UserWarning):
    pass


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cascade:
    """Forwarding history of one item observed on ``[0, horizon]``."""

    id: str
    timestamps: np.ndarray
    horizon: float

    def __post_init__(self):
        ts = _frozen_array(self.timestamps)
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon <= 0:
            raise ValueError(f"horizon must be positive and finite, got {self.horizon!r}")
        if not np.all(np.isfinite(ts)):
            raise ValueError("timestamps must be finite")
        if ts.size:
            if np.any(ts < 0):
                raise ValueError("negative timestamp")
            if np.any(np.diff(ts) < 0):
                raise ValueError("timestamps must be non-decreasing")
            if ts[-1] > horizon:
                raise ValueError("timestamp exceeds horizon")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "id", str(self.id))

    @property
    def n_events(self) -> int:
        return int(self.timestamps.size)

    def count_until(self, t) -> np.ndarray | int:
        """Number of events with timestamp <= t (vectorised over t)."""
        counts = np.searchsorted(self.timestamps, t, side="right")
        return int(counts) if np.ndim(counts) == 0 else counts

    def truncate(self, horizon: float) -> "Cascade":
        """Restrict the cascade to the events observed on ``[0, horizon]``."""
        if horizon > self.horizon:
            raise ValueError(
                f"cannot truncate cascade {self.id!r} at {horizon} beyond its horizon {self.horizon}"
            )
        keep = self.timestamps[: self.count_until(horizon)]
        return Cascade(self.id, keep, horizon)

    def to_record(self) -> dict:
        return {"id": self.id, "timestamps": self.timestamps.tolist(), "horizon": self.horizon}

    def __eq__(self, other):
        if not isinstance(other, Cascade):
            return NotImplemented
        return (
            self.id == other.id
            and self.horizon == other.horizon
            and np.array_equal(self.timestamps, other.timestamps)
        )

    def __hash__(self):
        return hash((self.id, self.horizon, self.timestamps.tobytes()))

    def __repr__(self):
        return f"Cascade(id={self.id!r}, N={self.n_events}, T={self.horizon!r})"


@dataclass(frozen=True)
class SehpParams:
    """Model triple: initial strength ``v``, per-event jump ``alpha``, decay ``beta``."""

    v: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("v", "alpha", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.v <= 0:
            raise ValueError(f"v must be > 0, got {self.v!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")

    @property
    def branching_ratio(self) -> float:
        return self.alpha / self.beta

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.alpha, self.beta])


@dataclass(frozen=True)
class FilterCriteria:
    early_window: float = 3600.0
    min_early: int = 10
    total_window: float = 172800.0
    min_total: int = 100

    def __post_init__(self):
        if self.early_window < 0 or self.total_window < 0:
            raise ValueError("windows must be non-negative")
        if self.early_window > self.total_window:
            raise ValueError("early_window must not exceed total_window")
        if self.min_early < 0 or self.min_total < 0:
            raise ValueError("minimum counts must be non-negative")


def _parse_record(line: str, lineno: int) -> tuple[Cascade, bool]:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CascadeFormatError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise CascadeFormatError(lineno, "record is not an object")
    keys = set(rec)
    if keys != {"id", "timestamps", "horizon"}:
        missing = {"id", "timestamps", "horizon"} - keys
        extra = keys - {"id", "timestamps", "horizon"}
        parts = []
        if missing:
            parts.append("missing keys " + ", ".join(sorted(missing)))
        if extra:
            parts.append("unexpected keys " + ", ".join(sorted(extra)))
        raise CascadeFormatError(lineno, "; ".join(parts))
    cid, ts, horizon = rec["id"], rec["timestamps"], rec["horizon"]
    if not isinstance(cid, str):
        raise CascadeFormatError(lineno, "id must be a string")
    if not isinstance(ts, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in ts
    ):
        raise CascadeFormatError(lineno, "timestamps must be an array of numbers")
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool):
        raise CascadeFormatError(lineno, "horizon must be a number")
    if not math.isfinite(horizon) or horizon <= 0:
        raise CascadeFormatError(lineno, "horizon must be positive")
    arr = np.array(ts, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise CascadeFormatError(lineno, "timestamps must be finite")
    if np.any(arr < 0):
        raise CascadeFormatError(lineno, "negative timestamp")
    if np.any(arr > horizon):
        raise CascadeFormatError(lineno, "timestamp exceeds horizon")
    unsorted = bool(np.any(np.diff(arr) < 0))
    if unsorted:
        # stable sort keeps tied events in input order
        arr = np.sort(arr, kind="stable")
    return Cascade(cid, arr, horizon), unsorted


def iter_cascades(lines: Iterable[str]) -> Iterator[tuple[int, Cascade | CascadeFormatError]]:
    """Yield ``(line_number, cascade_or_error)`` for each non-blank line."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            cascade, unsorted = _parse_record(line, lineno)
        except CascadeFormatError as exc:
            yield lineno, exc
            continue
        if unsorted:
            warnings.warn(
                f"line {lineno}: timestamps of {cascade.id!r} were not sorted; sorted on read",
                UnsortedTimestampsWarning,
                stacklevel=2,
            )
        yield lineno, cascade


def parse_cascades(
    stream: IO[str] | Iterable[str], errors: list[CascadeFormatError] | None = None
) -> list[Cascade]:
    """Parse a line-delimited cascade stream.

    Bad records raise :class:`CascadeFormatError` unless an ``errors`` list is
    given, in which case they are appended there and skipped.
    """
    out = []
    for _, item in iter_cascades(stream):
        if isinstance(item, CascadeFormatError):
            if errors is None:
                raise item
            errors.append(item)
        else:
            out.append(item)
    return out


def format_cascade(cascade: Cascade) -> str:
    return json.dumps(cascade.to_record(), separators=(", ", ": "))


def write_cascades(cascades: Iterable[Cascade], stream: IO[str]) -> int:
    n = 0
    for c in cascades:
        stream.write(format_cascade(c) + "\n")
        n += 1
    return n


def read_cascades(path, errors: list[CascadeFormatError] | None = None) -> list[Cascade]:
    with open(path, encoding="utf-8") as fh:
        return parse_cascades(fh, errors)


def filter_cascades(cascades: Sequence[Cascade], criteria: FilterCriteria) -> list[Cascade]:
    """Keep cascades with more than ``min_early`` events by ``early_window``
    and more than ``min_total`` events by ``total_window`` (strict, order kept)."""
    return [
        c
        for c in cascades
        if c.count_until(criteria.early_window) > criteria.min_early
        and c.count_until(criteria.total_window) > criteria.min_total
    ]
