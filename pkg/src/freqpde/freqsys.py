"""Frequency-domain system assembly.

Each evaluated term field is Fourier-transformed along every axis and only a
small block of low-frequency modes is kept.  Because the DFT is linear, any
linear relation among the term fields holds exactly, mode by mode, in the
retained block, so the identification system can be assembled entirely from
low-noise rows.  The time-space sampled system and a low-pass-filter baseline
live here too.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .candlib import EvaluatedLibrary, TermDescriptor
from .deriv import DiffConfig
from .field import Field, FieldError


@dataclass(frozen=True)
class CutoffSpec:
    """Per-axis retained-mode counts: keep indices 0, +-1, ..., +-(K-1)."""

    ks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if any(k < 1 for k in self.ks):
            raise ValueError("retained-mode counts must be >= 1")

    def validate_for(self, dims: tuple[int, ...]) -> None:
        if len(self.ks) != len(dims):
            raise FieldError(
                f"cutoff has {len(self.ks)} axes but data has {len(dims)}"
            )
        for k, n in zip(self.ks, dims):
            if 2 * k - 1 > n:
                raise FieldError(f"cutoff {k} exceeds axis length {n}")


@dataclass(frozen=True)
class FreqSystem:
    matrix: np.ndarray  # complex, rows = retained modes, cols = terms
    rhs: np.ndarray
    column_names: tuple[str, ...]
    mode_index_list: tuple[tuple[int, ...], ...]
    column_norms: np.ndarray  # original 2-norm of each column


@dataclass(frozen=True)
class RealSystem:
    matrix: np.ndarray  # real, rows = sampled grid points
    rhs: np.ndarray
    column_names: tuple[str, ...]
    column_norms: np.ndarray  # all ones: time-space columns are not rescaled


def dft_nd(f: Field | np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along every axis."""
    data = f.data if isinstance(f, Field) else f
    return np.fft.fftn(data)


def retained_modes(cut: CutoffSpec) -> list[tuple[int, ...]]:
    """All retained signed mode tuples, conjugate-redundant ones removed.

    For real input the DFT at -m is the conjugate of the DFT at m, so of each
    {m, -m} pair only the lexicographically larger tuple is kept (the all-zero
    tuple is self-conjugate and kept).
    """
    ranges = [range(-(k - 1), k) for k in cut.ks]
    kept = []
    for m in itertools.product(*ranges):
        neg = tuple(-c for c in m)
        if m >= neg:
            kept.append(m)
    return kept


def _gather(fhat: np.ndarray, modes: list[tuple[int, ...]]) -> np.ndarray:
    dims = fhat.shape
    idx = tuple(
        np.array([m[a] % dims[a] for m in modes]) for a in range(len(dims))
    )
    return fhat[idx]


def assemble_freq_system(
    lib: EvaluatedLibrary, cut: CutoffSpec, allow_small: bool = False
) -> FreqSystem:
    """Low-frequency spectral linear system: one row per retained mode.

    Columns are scaled to unit 2-norm; the original norms are recorded so
    coefficients can be mapped back to physical scale.
    """
    dims = lib.lhs_field.dims
    cut.validate_for(dims)
    modes = retained_modes(cut)
    n_terms = len(lib.descriptors)
    if len(modes) < 3 * n_terms:
        msg = (
            f"only {len(modes)} retained modes for {n_terms} terms "
            f"(< 3x); enlarge the cutoff"
        )
        if not allow_small:
            raise FieldError(msg)
        warnings.warn(msg, stacklevel=2)

    cols = np.empty((len(modes), n_terms), dtype=complex)
    for j, tf in enumerate(lib.term_fields):
        cols[:, j] = _gather(np.fft.fftn(tf.data), modes)
    rhs = _gather(np.fft.fftn(lib.lhs_field.data), modes)

    norms = np.linalg.norm(cols, axis=0)
    if np.any(norms == 0):
        zero = [lib.names[j] for j in np.flatnonzero(norms == 0)]
        raise FieldError(f"all-zero spectral column(s): {zero}")
    cols = cols / norms

    return FreqSystem(
        matrix=cols,
        rhs=rhs,
        column_names=tuple(lib.names),
        mode_index_list=tuple(modes),
        column_norms=norms,
    )


def assemble_timespace_system(
    lib: EvaluatedLibrary, sample_stride: int = 1
) -> RealSystem:
    """Grid-sample linear system: one row per (strided) interior grid point."""
    if sample_stride < 1:
        raise FieldError("sample_stride must be >= 1")
    sl = tuple(slice(None, None, sample_stride) for _ in lib.lhs_field.dims)
    n_terms = len(lib.descriptors)
    rhs = lib.lhs_field.data[sl].ravel()
    if rhs.size < n_terms:
        raise FieldError(
            f"stride {sample_stride} leaves {rhs.size} rows for {n_terms} columns"
        )
    cols = np.empty((rhs.size, n_terms))
    for j, tf in enumerate(lib.term_fields):
        cols[:, j] = tf.data[sl].ravel()
    return RealSystem(
        matrix=cols,
        rhs=rhs,
        column_names=tuple(lib.names),
        column_norms=np.ones(n_terms),
    )


def _lowpass_mask(dims: tuple[int, ...], cut: CutoffSpec) -> np.ndarray:
    mask = np.ones(dims, dtype=bool)
    for a, (k, n) in enumerate(zip(cut.ks, dims)):
        freq_idx = np.fft.fftfreq(n, d=1.0 / n).round().astype(int)
        keep = np.abs(freq_idx) <= (k - 1)
        shape = [1] * len(dims)
        shape[a] = n
        mask &= keep.reshape(shape)
    return mask


def lowpass_filter(f: Field, cut: CutoffSpec) -> Field:
    """Zero every DFT mode outside the retained block; return the real part."""
    cut.validate_for(f.dims)
    fhat = np.fft.fftn(f.data)
    fhat[~_lowpass_mask(f.dims, cut)] = 0.0
    return f.with_data(np.fft.ifftn(fhat).real)


@dataclass(frozen=True)
class SpectralErrorProfile:
    """Mean relative error of one term, computed by 0/1/all-axis transforms."""

    raw: float
    time_only: float
    full: float


def _block_error(clean: np.ndarray, noisy: np.ndarray) -> float:
    denom = np.abs(clean).mean()
    if denom == 0.0:
        return 0.0
    return float(np.abs(noisy - clean).mean() / denom)


def spectral_error_profile(
    clean: Field,
    noisy: Field,
    term: TermDescriptor,
    cfg: DiffConfig,
    cut: CutoffSpec,
) -> SpectralErrorProfile:
    """Error of a noisy term field against the clean one in three domains:
    the raw grid, the low time-frequency block, and the full low block.
    """
    from .candlib import LibrarySpec, evaluate_library

    spec = LibrarySpec((term,), lhs_order=1)
    c = evaluate_library(clean, spec, cfg).term_fields[0].data
    n = evaluate_library(noisy, spec, cfg).term_fields[0].data

    raw = _block_error(c, n)

    kt = cut.ks[-1]
    t_idx = np.r_[0:kt, c.shape[-1] - kt + 1 : c.shape[-1]]
    c_t = np.fft.fft(c, axis=-1)[..., t_idx]
    n_t = np.fft.fft(n, axis=-1)[..., t_idx]
    time_only = _block_error(c_t, n_t)

    mask = _lowpass_mask(c.shape, cut)
    c_f = np.fft.fftn(c)[mask]
    n_f = np.fft.fftn(n)[mask]
    full = _block_error(c_f, n_f)

    return SpectralErrorProfile(raw=raw, time_only=time_only, full=full)
