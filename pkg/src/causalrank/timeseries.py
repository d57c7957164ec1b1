"""Multivariate time series container, CSV ingestion, z-scoring and windowing."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

log = logging.getLogger(__name__)

MIN_WINDOW = 64


@dataclass(frozen=True)
class TimeSeriesSet:
    """N named series of M uniformly spaced samples.

    ``data`` is variable-major: ``data[i]`` is the series called ``names[i]``.
    ``constant`` lists series that were zeroed by :func:`standardize`.
    """

    names: tuple[str, ...]
    data: np.ndarray
    sample_interval: float = 1.0
    constant: tuple[str, ...] = field(default=())

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2:
            raise ValidationError(f"data must be 2-D (variables x samples), got shape {data.shape}")
        if data.shape[0] != len(names):
            raise ValidationError(f"{len(names)} names for {data.shape[0]} series")
        if data.shape[1] < 2:
            raise ValidationError("each series needs at least 2 samples")
        if any(not n for n in names):
            raise ValidationError("series names must be non-empty")
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValidationError(f"duplicate series names: {dupes}")
        if not np.all(np.isfinite(data)):
            i, j = np.argwhere(~np.isfinite(data))[0]
            raise ValidationError(f"non-finite value in series {names[i]!r} at sample {j}")
        if not (self.sample_interval > 0 and math.isfinite(self.sample_interval)):
            raise ValidationError(f"sample_interval must be > 0, got {self.sample_interval}")
        data.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_interval", float(self.sample_interval))
        object.__setattr__(self, "constant", tuple(self.constant))

    @property
    def n_series(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown series {name!r}; have {list(self.names)}") from None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[self.index(name)]

    def select(self, names: Sequence[str]) -> "TimeSeriesSet":
        idx = [self.index(n) for n in names]
        return TimeSeriesSet(
            tuple(names), self.data[idx], self.sample_interval,
            tuple(n for n in self.constant if n in names),
        )


@dataclass(frozen=True)
class WindowSpec:
    """Rolling window of ``width`` samples advanced by ``step`` samples."""

    width: int
    step: int | None = None

    def __post_init__(self):
        step = self.width if self.step is None else self.step
        if int(self.width) != self.width or self.width < MIN_WINDOW:
            raise ValidationError(f"window width must be an integer >= {MIN_WINDOW}, got {self.width}")
        if int(step) != step or step < 1:
            raise ValidationError(f"window step must be an integer >= 1, got {step}")
        if step > self.width:
            raise ValidationError(f"window step {step} exceeds width {self.width}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "step", int(step))

    def count(self, n_samples: int) -> int:
        if self.width > n_samples:
            raise ValidationError(f"window width {self.width} exceeds series length {n_samples}")
        return (n_samples - self.width) // self.step + 1

    def offsets(self, n_samples: int) -> list[int]:
        return [w * self.step for w in range(self.count(n_samples))]


def load_csv(path, sample_interval: float = 1.0) -> TimeSeriesSet:
    """Read a header-first CSV with one column per variable."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    ncol = len(header)
    values = np.empty((len(body), ncol))
    for r, row in enumerate(body, start=2):
        if len(row) != ncol:
            raise ValidationError(f"{path}: row {r} has {len(row)} cells, header has {ncol}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{path}: non-numeric cell {cell!r} at row {r}, column {header[c]!r}"
                ) from None
            if not math.isfinite(v):
                raise ValidationError(
                    f"{path}: non-finite cell {cell!r} at row {r}, column {header[c]!r}"
                )
            values[r - 2, c] = v
    return TimeSeriesSet(tuple(header), values.T, sample_interval)


def save_csv(ts: TimeSeriesSet, path) -> None:
    """Write ``ts`` in the format read by :func:`load_csv` (floats as repr, lossless)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ts.names)
        for row in ts.data.T:
            w.writerow([repr(float(v)) for v in row])


def standardize(ts: TimeSeriesSet) -> TimeSeriesSet:
    """Z-score every series with the population (1/M) standard deviation.

    Constant series become all zeros and are recorded in ``constant``.
    """
    data = np.array(ts.data, dtype=float)
    constant = list(ts.constant)
    for i, x in enumerate(data):
        sd = x.std()
        if sd == 0.0 or np.all(x == x[0]):
            data[i] = 0.0
            if ts.names[i] not in constant:
                constant.append(ts.names[i])
            log.warning("series %r is constant; zeroed", ts.names[i])
        else:
            data[i] = (x - x.mean()) / sd
    return TimeSeriesSet(ts.names, data, ts.sample_interval, tuple(constant))


def slice_windows(ts: TimeSeriesSet, spec: WindowSpec) -> list[TimeSeriesSet]:
    """Cut ``ts`` into windows starting at 0, step, 2*step, ...; partial tail dropped."""
    return [
        TimeSeriesSet(ts.names, ts.data[:, o:o + spec.width], ts.sample_interval, ts.constant)
        for o in spec.offsets(ts.n_samples)
    ]
