"""Reference solutions of the seven benchmark PDEs plus the noise model.

All equations are solved pseudo-spectrally on periodic grids.  Nonlinear
equations use exponential time differencing (ETDRK4) so stiff linear parts
(KdV dispersion, the fourth derivative in Kuramoto-Sivashinsky) are handled
exactly; the two linear benchmarks (2-D wave, anisotropic 3-D diffusion) are
propagated exactly mode by mode.  Noise is additive Gaussian scaled by the
global field standard deviation, drawn from a counter-based generator so
trials are reproducible under any parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .candlib import TermDescriptor
from .field import Field, FieldError, field_stats


class UnstableConfigError(RuntimeError):
    """Solver stability check failed for a given grid configuration."""


@dataclass(frozen=True)
class EquationSpec:
    name: str
    coefficients: dict
    true_terms: tuple  # ((TermDescriptor, coefficient), ...)
    lhs_order: int = 1

    def __post_init__(self):
        if not self.true_terms:
            raise ValueError("true_terms must be non-empty")
        if self.lhs_order not in (1, 2):
            raise ValueError("lhs_order must be 1 or 2")

    @property
    def true_names(self) -> list[str]:
        return [t.name for t, _ in self.true_terms]

    @property
    def true_map(self) -> dict[str, float]:
        return {t.name: float(c) for t, c in self.true_terms}

    @property
    def spatial_dims(self) -> int:
        axes = {t.axis for t, _ in self.true_terms if t.axis is not None}
        return len(axes - {"t"})


@dataclass(frozen=True)
class GridSpec:
    """Output grid: spatial extents/counts, time horizon, solver substeps."""

    extents: tuple[float, ...]  # spatial extents then time horizon
    points: tuple[int, ...]  # spatial counts then output time count
    substeps: int = 1
    origins: tuple[float, ...] | None = None  # spatial origins, default 0

    def __post_init__(self):
        if any(e <= 0 for e in self.extents):
            raise ValueError("extents must be positive")
        if len(self.extents) != len(self.points):
            raise ValueError("extents/points length mismatch")
        if any(p < 8 for p in self.points[:-1]):
            raise ValueError("spatial point counts must be >= 8")
        if self.points[-1] < 16:
            raise ValueError("output time count must be >= 16")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")

    @property
    def spatial_points(self) -> tuple[int, ...]:
        return self.points[:-1]

    @property
    def nt(self) -> int:
        return self.points[-1]

    def coords(self) -> list[np.ndarray]:
        """Spatial coordinate vectors (periodic: endpoint excluded)."""
        origins = self.origins or (0.0,) * (len(self.points) - 1)
        return [
            o + ext * np.arange(n) / n
            for o, ext, n in zip(origins, self.extents[:-1], self.spatial_points)
        ]

    def spacings(self) -> tuple[float, ...]:
        sp = [e / n for e, n in zip(self.extents[:-1], self.spatial_points)]
        sp.append(self.extents[-1] / (self.nt - 1))
        return tuple(sp)


@dataclass(frozen=True)
class NoiseSpec:
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("noise level alpha must be >= 0")


def _t(power, axis=None, order=0):
    return TermDescriptor(power, axis, order)


EQUATIONS: dict[str, EquationSpec] = {
    "burgers1d": EquationSpec(
        "burgers1d",
        {"advection": -1.0, "viscosity": 0.05},
        ((_t(1, "x", 1), -1.0), (_t(0, "x", 2), 0.05)),
    ),
    "kdv": EquationSpec(
        "kdv",
        {"drift": -0.5, "advection": -1.5, "dispersion": -0.25},
        ((_t(0, "x", 1), -0.5), (_t(1, "x", 1), -1.5), (_t(0, "x", 3), -0.25)),
    ),
    "ks": EquationSpec(
        "ks",
        {"advection": -1.0, "antidiffusion": -0.7, "dispersion": -1.0,
         "hyperviscosity": -1.3},
        ((_t(1, "x", 1), -1.0), (_t(0, "x", 2), -0.7),
         (_t(0, "x", 3), -1.0), (_t(0, "x", 4), -1.3)),
    ),
    "wave2d": EquationSpec(
        "wave2d",
        {"cxx": 1.0, "cyy": 1.0},
        ((_t(0, "x", 2), 1.0), (_t(0, "y", 2), 1.0)),
        lhs_order=2,
    ),
    "burgers2d": EquationSpec(
        "burgers2d",
        {"advection": -1.0, "viscosity": 0.01},
        ((_t(1, "x", 1), -1.0), (_t(0, "x", 2), 0.01),
         (_t(1, "y", 1), -1.0), (_t(0, "y", 2), 0.01)),
    ),
    "diffusion3d": EquationSpec(
        "diffusion3d",
        {"dxx": 1.0, "dyy": 1.5, "dzz": 2.0},
        ((_t(0, "x", 2), 1.0), (_t(0, "y", 2), 1.5), (_t(0, "z", 2), 2.0)),
    ),
    "burgers3d": EquationSpec(
        "burgers3d",
        {"advection": -1.0, "viscosity": 0.1},
        ((_t(1, "x", 1), -1.0), (_t(0, "x", 2), 0.1),
         (_t(1, "y", 1), -1.0), (_t(0, "y", 2), 0.1),
         (_t(1, "z", 1), -1.0), (_t(0, "z", 2), 0.1)),
    ),
}

# Versioned built-in grid/IC catalog (v1).  Every benchmark command is
# parameter-free: these defaults are what the reported numbers refer to.
DEFAULT_GRIDS: dict[str, GridSpec] = {
    "burgers1d": GridSpec((16.0, 10.0), (2048, 401), substeps=10, origins=(-8.0,)),
    "kdv": GridSpec((20.0, 5.0), (1024, 801), substeps=40, origins=(-10.0,)),
    "ks": GridSpec((64.0, 100.0), (1024, 801), substeps=5),
    "wave2d": GridSpec((2 * np.pi, 2 * np.pi, 4.0), (80, 80, 81)),
    "burgers2d": GridSpec((2 * np.pi, 2 * np.pi, 2.0), (128, 128, 51), substeps=10),
    "diffusion3d": GridSpec((2 * np.pi,) * 3 + (0.5,), (48, 48, 48, 40)),
    "burgers3d": GridSpec((2 * np.pi,) * 3 + (1.5,), (48, 48, 48, 40), substeps=8),
}

_AXIS_LABELS = {1: ("x", "t"), 2: ("x", "y", "t"), 3: ("x", "y", "z", "t")}


def _initial_condition(name: str, grid: GridSpec) -> np.ndarray:
    coords = grid.coords()
    if name == "burgers1d":
        x = coords[0]
        u0 = np.exp(-((x + 1.0) ** 2))
        return u0 - u0.mean()
    if name == "kdv":
        x = coords[0]
        u0 = 1.5 * np.exp(-((x + 4.0) ** 2)) + 0.8 * np.exp(-((x - 1.0) ** 2) / 2.0)
        return u0 - u0.mean()
    if name == "ks":
        x = coords[0]
        L = grid.extents[0]
        return np.cos(2 * np.pi * x / L) * (1.0 + np.sin(2 * np.pi * x / L))
    # Multi-dimensional: isotropic Gaussian bump centered in the box.
    mesh = np.meshgrid(*coords, indexing="ij")
    centers = [
        (grid.origins or (0.0,) * len(coords))[i] + grid.extents[i] / 2.0
        for i in range(len(coords))
    ]
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, centers))
    if name == "wave2d":
        return np.exp(-2.0 * r2)
    if name == "burgers2d":
        u0 = 0.5 * np.exp(-2.0 * r2)
        return u0 - u0.mean()
    if name == "diffusion3d":
        return np.exp(-2.0 * r2)
    if name == "burgers3d":
        # Amplitude sized so advection and the 0.1-viscosity diffusion act on
        # comparable scales; a weak bump would relax diffusively and leave the
        # nonlinear terms unobservable.
        u0 = 5.0 * np.exp(-2.0 * r2)
        return u0 - u0.mean()
    raise FieldError(f"unsupported equation {name!r}")


def _wavenumbers(grid: GridSpec) -> list[np.ndarray]:
    ks = []
    nd = len(grid.spatial_points)
    for a, (n, ext) in enumerate(zip(grid.spatial_points, grid.extents[:-1])):
        k = 2 * np.pi * np.fft.fftfreq(n, d=ext / n)
        shape = [1] * nd
        shape[a] = n
        ks.append(k.reshape(shape))
    return ks


def _dealias_mask(spatial_points: tuple[int, ...]) -> np.ndarray:
    mask = np.ones(spatial_points, dtype=bool)
    for a, n in enumerate(spatial_points):
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n).round().astype(int))
        keep = idx <= n // 3
        shape = [1] * len(spatial_points)
        shape[a] = n
        mask &= keep.reshape(shape)
    return mask


def _etdrk4_coeffs(L: np.ndarray, dt: float, n_contour: int = 32, chunk: int = 1 << 17):
    """ETDRK4 scalar coefficients for diagonal linear operator L.

    The phi-function combinations are evaluated by averaging over a unit
    circle around each dt*L value, which is stable near the removable
    singularity at zero.  Chunked to bound memory for 3-D grids.
    """
    shape = L.shape
    z = (dt * L).ravel()
    is_real = not np.iscomplexobj(z) or np.allclose(z.imag, 0.0)
    r = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    # Full circle for complex spectra; half circle + conjugate symmetry is
    # only valid for real L, where we just take the real part of the mean.
    if not is_real:
        r = np.exp(2j * np.pi * (np.arange(n_contour) + 0.5) / n_contour)
    E = np.exp(z)
    E2 = np.exp(z / 2.0)
    Q = np.empty(z.shape, dtype=complex)
    f1 = np.empty_like(Q)
    f2 = np.empty_like(Q)
    f3 = np.empty_like(Q)
    for lo in range(0, z.size, chunk):
        zz = z[lo : lo + chunk, None] + r[None, :]
        ez = np.exp(zz)
        Q[lo : lo + chunk] = ((np.exp(zz / 2.0) - 1.0) / zz).mean(axis=1)
        zz3 = zz**3
        f1[lo : lo + chunk] = (
            (-4.0 - zz + ez * (4.0 - 3.0 * zz + zz**2)) / zz3
        ).mean(axis=1)
        f2[lo : lo + chunk] = ((2.0 + zz + ez * (-2.0 + zz)) / zz3).mean(axis=1)
        f3[lo : lo + chunk] = (
            (-4.0 - 3.0 * zz - zz**2 + ez * (4.0 - zz)) / zz3
        ).mean(axis=1)
    if is_real:
        Q, f1, f2, f3 = Q.real, f1.real, f2.real, f3.real
        E, E2 = E.real, E2.real
    out = [E, E2, dt * Q, dt * f1, dt * f2, dt * f3]
    return [a.reshape(shape) for a in out]


def _check_cfl(u: np.ndarray, grid: GridSpec, dt: float) -> None:
    if not np.all(np.isfinite(u)):
        raise UnstableConfigError(
            "solution blew up; increase substeps or refine the grid"
        )
    umax = float(np.abs(u).max())
    labels = _AXIS_LABELS[len(grid.spatial_points)]
    for a, (n, ext) in enumerate(zip(grid.spatial_points, grid.extents[:-1])):
        kmax = np.pi * n / ext
        if dt * umax * kmax > 4.0:
            raise UnstableConfigError(
                f"advective CFL violated on axis {labels[a]}: "
                f"dt*|u|*kmax = {dt * umax * kmax:.2f} > 4; increase substeps"
            )


def _solve_etdrk4(name: str, eq: EquationSpec, grid: GridSpec) -> np.ndarray:
    nd = len(grid.spatial_points)
    ks = _wavenumbers(grid)
    adv = eq.coefficients["advection"]

    if name == "burgers1d":
        L = eq.coefficients["viscosity"] * (1j * ks[0]) ** 2
    elif name == "kdv":
        L = (
            eq.coefficients["drift"] * (1j * ks[0])
            + eq.coefficients["dispersion"] * (1j * ks[0]) ** 3
        )
    elif name == "ks":
        c = eq.coefficients
        ik = 1j * ks[0]
        L = c["antidiffusion"] * ik**2 + c["dispersion"] * ik**3 + c["hyperviscosity"] * ik**4
    else:  # burgers2d / burgers3d
        L = eq.coefficients["viscosity"] * sum((1j * k) ** 2 for k in ks)
    L = np.broadcast_to(L, grid.spatial_points).copy()

    ik_sum = sum(1j * k for k in ks)
    mask = _dealias_mask(grid.spatial_points)

    def nonlin(vhat):
        u = np.fft.ifftn(vhat).real
        return 0.5 * adv * ik_sum * (np.fft.fftn(u * u) * mask)

    dt_out = grid.extents[-1] / (grid.nt - 1)
    dt = dt_out / grid.substeps
    E, E2, Q, f1, f2, f3 = _etdrk4_coeffs(L, dt)

    u0 = _initial_condition(name, grid)
    _check_cfl(u0, grid, dt)
    vhat = np.fft.fftn(u0) * mask
    out = np.empty(grid.spatial_points + (grid.nt,))
    out[..., 0] = u0
    for i in range(1, grid.nt):
        for _ in range(grid.substeps):
            nv = nonlin(vhat)
            a = E2 * vhat + Q * nv
            na = nonlin(a)
            b = E2 * vhat + Q * na
            nb = nonlin(b)
            c = E2 * a + Q * (2.0 * nb - nv)
            nc = nonlin(c)
            vhat = E * vhat + nv * f1 + 2.0 * (na + nb) * f2 + nc * f3
        u = np.fft.ifftn(vhat).real
        _check_cfl(u, grid, dt)
        out[..., i] = u
    return out


def _solve_wave2d(grid: GridSpec) -> np.ndarray:
    kx, ky = _wavenumbers(grid)
    u0 = _initial_condition("wave2d", grid)
    uhat0 = np.fft.fftn(u0)
    omega = np.sqrt(kx**2 + ky**2)
    dt_out = grid.extents[-1] / (grid.nt - 1)
    out = np.empty(grid.spatial_points + (grid.nt,))
    for i in range(grid.nt):
        # Started at rest: u_t(0) = 0, so each mode just oscillates in place.
        out[..., i] = np.fft.ifftn(uhat0 * np.cos(omega * (i * dt_out))).real
    return out


def _solve_diffusion3d(eq: EquationSpec, grid: GridSpec) -> np.ndarray:
    kx, ky, kz = _wavenumbers(grid)
    c = eq.coefficients
    decay = c["dxx"] * kx**2 + c["dyy"] * ky**2 + c["dzz"] * kz**2
    u0 = _initial_condition("diffusion3d", grid)
    uhat0 = np.fft.fftn(u0)
    dt_out = grid.extents[-1] / (grid.nt - 1)
    out = np.empty(grid.spatial_points + (grid.nt,))
    for i in range(grid.nt):
        out[..., i] = np.fft.ifftn(uhat0 * np.exp(-decay * (i * dt_out))).real
    return out


def solve_reference(eq: EquationSpec, grid: GridSpec | None = None) -> Field:
    """Clean periodic solution of one benchmark equation on its output grid."""
    name = eq.name
    if name not in EQUATIONS:
        raise FieldError(f"unsupported equation {name!r}")
    if grid is None:
        grid = DEFAULT_GRIDS[name]
    nd = len(grid.spatial_points)
    if nd != EQUATIONS[name].spatial_dims:
        raise FieldError(f"{name} needs {EQUATIONS[name].spatial_dims} spatial axes")
    if name == "wave2d":
        data = _solve_wave2d(grid)
    elif name == "diffusion3d":
        data = _solve_diffusion3d(eq, grid)
    else:
        data = _solve_etdrk4(name, eq, grid)
    return Field(data, grid.spacings(), _AXIS_LABELS[nd])


def inject_noise(f: Field, noise: NoiseSpec) -> Field:
    """Additive Gaussian noise: u + alpha * std(u) * N(0,1) per sample.

    Draws come from a Philox counter-based stream in row-major grid order,
    so the output depends only on (field, alpha, seed).
    """
    if noise.alpha == 0.0:
        return f
    rng = np.random.Generator(np.random.Philox(key=noise.seed))
    g = rng.standard_normal(f.dims)
    return f.with_data(f.data + noise.alpha * field_stats(f).std * g)
