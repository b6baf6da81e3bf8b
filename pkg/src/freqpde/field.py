"""Uniform-grid scalar field: data model, statistics, trimming, binary I/O.

A Field is an n-dimensional real array on a uniform axis-aligned grid with
1-3 spatial axes followed by a trailing time axis.  Data is stored row-major
so 1-D temporal traces are contiguous.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"FDI1"

_LABEL_TO_CODE = {"x": 0, "y": 1, "z": 2, "t": 3}
_CODE_TO_LABEL = {v: k for k, v in _LABEL_TO_CODE.items()}

MAX_AXES = 4


class FieldError(ValueError):
    """Invalid field construction or operation."""


class FormatError(FieldError):
    """Malformed field bundle file."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Field:
    """Immutable scalar samples on a uniform grid, time axis last."""

    data: np.ndarray
    spacings: tuple[float, ...]
    axis_labels: tuple[str, ...]

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacings", tuple(float(s) for s in self.spacings))
        object.__setattr__(self, "axis_labels", tuple(self.axis_labels))
        n = data.ndim
        if not 2 <= n <= MAX_AXES:
            raise FieldError(f"field needs 2..{MAX_AXES} axes, got {n}")
        if len(self.spacings) != n or len(self.axis_labels) != n:
            raise FieldError("spacings/axis_labels length must match ndim")
        if any(d < 1 for d in data.shape):
            raise FieldError("all axis lengths must be positive")
        if any(s <= 0 for s in self.spacings):
            raise FieldError("spacings must be strictly positive")
        for lab in self.axis_labels:
            if lab not in _LABEL_TO_CODE:
                raise FieldError(f"unknown axis label {lab!r}")
        if self.axis_labels[-1] != "t":
            raise FieldError("time axis must be last")
        if "t" in self.axis_labels[:-1]:
            raise FieldError("only the final axis may be time")
        if len(set(self.axis_labels)) != n:
            raise FieldError("duplicate axis labels")
        if not np.all(np.isfinite(data)):
            raise FieldError("field samples must all be finite")
        data.flags.writeable = False

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def axis(self, label: str) -> int:
        """Index of the axis carrying the given label."""
        try:
            return self.axis_labels.index(label)
        except ValueError:
            raise FieldError(f"field has no axis {label!r}") from None

    def with_data(self, data: np.ndarray) -> "Field":
        """Same grid, new samples (shape must match)."""
        if data.shape != self.dims:
            raise FieldError(f"shape {data.shape} != field dims {self.dims}")
        return Field(data, self.spacings, self.axis_labels)


@dataclass(frozen=True)
class FieldStats:
    mean: float
    std: float  # population (N denominator)
    min: float
    max: float


def field_stats(f: Field) -> FieldStats:
    """Joint statistics over all samples; std uses the N denominator."""
    d = f.data
    return FieldStats(
        mean=float(d.mean()), std=float(d.std()), min=float(d.min()), max=float(d.max())
    )


def trim_interior(f: Field, margins) -> Field:
    """Drop ``margins[a] = (lo, hi)`` samples from each end of each axis.

    Spacings and labels are preserved.  Raises FieldError if any trimmed
    axis would end up shorter than 4 samples.
    """
    margins = [(int(lo), int(hi)) for lo, hi in margins]
    if len(margins) != f.ndim:
        raise FieldError("one (lo, hi) margin pair required per axis")
    slices = []
    for ax, (lo, hi) in enumerate(margins):
        if lo < 0 or hi < 0:
            raise FieldError("margins must be non-negative")
        new_len = f.dims[ax] - lo - hi
        if new_len < 4:
            raise FieldError(
                f"degenerate grid: axis {f.axis_labels[ax]} would have "
                f"{new_len} samples after trimming"
            )
        slices.append(slice(lo, f.dims[ax] - hi or None))
    return Field(f.data[tuple(slices)], f.spacings, f.axis_labels)


def write_field(f: Field, path, metadata: dict | None = None) -> None:
    """Write a field bundle; optional JSON sidecar holds provenance only."""
    path = Path(path)
    n = f.ndim
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", n))
        fh.write(struct.pack(f"<{n}Q", *f.dims))
        fh.write(struct.pack(f"<{n}d", *f.spacings))
        fh.write(bytes(_LABEL_TO_CODE[lab] for lab in f.axis_labels))
        fh.write(f.data.astype("<f8", copy=False).tobytes())
    if metadata is not None:
        path.with_suffix(".json").write_text(json.dumps(metadata, indent=2))


def read_sidecar(path) -> dict | None:
    side = Path(path).with_suffix(".json")
    if not side.exists():
        return None
    return json.loads(side.read_text())


def read_field(path) -> Field:
    """Read a field bundle written by :func:`write_field` (bit-exact)."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}", 0)
    off = 4
    if len(raw) < off + 1:
        raise FormatError("truncated header: missing axis count", off)
    n = raw[off]
    off += 1
    if not 2 <= n <= MAX_AXES:
        raise FormatError(f"axis count {n} outside 2..{MAX_AXES}", 4)
    need = n * 8
    if len(raw) < off + need:
        raise FormatError("truncated header: dims", off)
    dims = struct.unpack_from(f"<{n}Q", raw, off)
    off += need
    total = 1
    for d in dims:
        if d == 0:
            raise FormatError("zero axis length", off - need)
        total *= d
        if total > 2**40:
            raise FormatError("dim product overflow", off - need)
    if len(raw) < off + n * 8:
        raise FormatError("truncated header: spacings", off)
    spacings = struct.unpack_from(f"<{n}d", raw, off)
    off += n * 8
    if len(raw) < off + n:
        raise FormatError("truncated header: axis labels", off)
    codes = raw[off : off + n]
    off += n
    labels = []
    for c in codes:
        if c not in _CODE_TO_LABEL:
            raise FormatError(f"unknown axis-label code {c}", off - n)
        labels.append(_CODE_TO_LABEL[c])
    payload = total * 8
    if len(raw) < off + payload:
        raise FormatError(
            f"truncated payload: need {payload} bytes, have {len(raw) - off}", off
        )
    data = np.frombuffer(raw, dtype="<f8", count=total, offset=off).reshape(dims)
    try:
        return Field(data, spacings, labels)
    except FieldError as exc:
        raise FormatError(str(exc), off) from exc
