"""Numerical differentiation along one grid axis.

Two methods: central finite differences of configurable even accuracy, and
local least-squares polynomial fits (Savitzky-Golay construction) that trade
formal accuracy for noise smoothing.  Both support a strided stencil so the
effective step size can be enlarged to suppress high-frequency noise.

Boundary points are filled with shifted one-sided stencils and their count is
reported so callers can trim them before assembling any linear system.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .field import Field, FieldError

MAX_ORDER = 4


@dataclass(frozen=True)
class DiffConfig:
    method: str = "finite_difference"  # or "local_polynomial"
    fd_order_of_accuracy: int = 2
    poly_degree: int = 6
    poly_window: int = 21
    step_stride: int = 1

    def __post_init__(self):
        if self.method not in ("finite_difference", "local_polynomial"):
            raise ValueError(f"unknown differentiation method {self.method!r}")
        if self.fd_order_of_accuracy < 2 or self.fd_order_of_accuracy % 2:
            raise ValueError("fd_order_of_accuracy must be an even integer >= 2")
        if self.poly_window % 2 == 0 or self.poly_window <= self.poly_degree:
            raise ValueError("poly_window must be odd and > poly_degree")
        if self.step_stride < 1:
            raise ValueError("step_stride must be >= 1")


@dataclass(frozen=True)
class DerivResult:
    """Derivative field plus the per-end count of one-sided boundary points."""

    field: Field
    margin: int


def fornberg_weights(order: int, offsets: tuple[float, ...]) -> np.ndarray:
    """Finite-difference weights for d^order/dx^order at x=0 on given nodes.

    Fornberg's recursive algorithm; offsets are in grid-step units.
    """
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    if order >= n:
        raise ValueError("stencil too small for requested derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                # New row from the not-yet-overwritten previous row.
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _polyfit_weights(order: int, degree: int, offsets: tuple[float, ...]) -> np.ndarray:
    """Weights of the degree-d least-squares polynomial derivative at x=0."""
    x = np.asarray(offsets, dtype=float)
    if degree < order:
        raise ValueError("poly_degree must be >= derivative order")
    # Scale nodes to O(1) for conditioning; undo on the derivative coefficient.
    scale = max(abs(x).max(), 1.0)
    v = np.vander(x / scale, degree + 1, increasing=True)
    pinv = np.linalg.pinv(v)
    return factorial(order) * pinv[order] / scale**order


@lru_cache(maxsize=256)
def _stencil(method: str, order: int, acc: int, degree: int, window: int):
    """(offsets in grid steps, interior weight vector) for unit spacing."""
    if method == "finite_difference":
        half = (2 * ((order + 1) // 2) - 1 + acc) // 2
        offsets = tuple(range(-half, half + 1))
        weights = fornberg_weights(order, offsets)
    else:
        half = window // 2
        offsets = tuple(range(-half, half + 1))
        weights = _polyfit_weights(order, degree, offsets)
    return offsets, weights


@lru_cache(maxsize=1024)
def _one_sided_weights(method: str, order: int, npoints: int, degree: int, shift: int):
    """Weights on nodes shift, shift+1, ..., shift+npoints-1 evaluated at 0."""
    offsets = tuple(range(shift, shift + npoints))
    if method == "finite_difference":
        return offsets, fornberg_weights(order, offsets)
    return offsets, _polyfit_weights(order, degree, offsets)


def stencil_margin(order: int, cfg: DiffConfig) -> int:
    """Boundary points per end that use one-sided (non-central) stencils."""
    offsets, _ = _stencil(
        cfg.method, order, cfg.fd_order_of_accuracy, cfg.poly_degree, cfg.poly_window
    )
    return (len(offsets) // 2) * cfg.step_stride


def differentiate(f: Field, axis, order: int, cfg: DiffConfig) -> DerivResult:
    """Approximate the order-th partial derivative of f along one axis.

    axis may be an integer index or an axis label.  The returned field has
    identical dims; the leading/trailing ``margin`` points per end along the
    axis come from one-sided stencils and should be trimmed before use in
    system assembly.
    """
    if not 1 <= order <= MAX_ORDER:
        raise FieldError(f"derivative order must be 1..{MAX_ORDER}, got {order}")
    ax = f.axis(axis) if isinstance(axis, str) else int(axis)
    if cfg.method == "local_polynomial" and cfg.poly_degree < order:
        raise FieldError("poly_degree must be >= derivative order")
    offsets, weights = _stencil(
        cfg.method, order, cfg.fd_order_of_accuracy, cfg.poly_degree, cfg.poly_window
    )
    s = cfg.step_stride
    npts = len(offsets)
    half = npts // 2
    n = f.dims[ax]
    if (npts - 1) * s + 1 > n:
        raise FieldError(
            f"stencil needs {(npts - 1) * s + 1} points but axis "
            f"{f.axis_labels[ax]} has {n}"
        )
    h = f.spacings[ax] * s
    scale = 1.0 / h**order

    a = np.moveaxis(f.data, ax, -1)
    lead_shape = a.shape[:-1]
    a = a.reshape(-1, n)
    out = np.empty_like(a)

    margin = half * s
    # Interior: vectorized sum of strided shifts.
    interior = np.zeros((a.shape[0], n - 2 * margin))
    for k, w in zip(offsets, weights):
        lo = margin + k * s
        interior += w * a[:, lo : lo + n - 2 * margin]
    out[:, margin : n - margin] = interior * scale

    # Boundaries: shifted stencils, one column at a time.
    for p in range(margin):
        # Left end, evaluation point p: window starts at the edge when the
        # centered window would run out; keep nodes on the strided lattice.
        shift = -(p // s)
        offs, w = _one_sided_weights(cfg.method, order, npts, cfg.poly_degree, shift)
        idx = p + np.array(offs) * s
        if idx[-1] >= n:
            raise FieldError("axis too short for boundary stencil")
        out[:, p] = (a[:, idx] @ w) * scale
        # Right end, mirrored.
        shift_r = -(npts - 1) + (p // s)
        offs_r, w_r = _one_sided_weights(
            cfg.method, order, npts, cfg.poly_degree, shift_r
        )
        idx_r = (n - 1 - p) + np.array(offs_r) * s
        out[:, n - 1 - p] = (a[:, idx_r] @ w_r) * scale

    out = np.moveaxis(out.reshape(*lead_shape, n), -1, ax)
    return DerivResult(field=f.with_data(out), margin=margin)
