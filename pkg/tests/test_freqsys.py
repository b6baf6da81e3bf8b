"""Exactness of the spectral system assembly.

Because the DFT and the low-mode restriction are linear, any linear relation
that holds on the grid — even between arbitrary noisy fields — must hold
exactly, mode by mode, in the assembled system.
"""

import numpy as np
import pytest

import freqpde as fp
from freqpde.candlib import EvaluatedLibrary, TermDescriptor
from freqpde.field import FieldError


def _manufactured_library(rng, dims=(24, 18), n_terms=5, coefs=None):
    """Arbitrary rough fields with an exactly linear LHS."""
    spac = tuple(0.1 + 0.05 * i for i in range(len(dims)))
    labels = ("x", "t") if len(dims) == 2 else ("x", "y", "t")
    terms = tuple(rng.standard_normal(dims) for _ in range(n_terms))
    if coefs is None:
        coefs = rng.standard_normal(n_terms)
    lhs = sum(c * t for c, t in zip(coefs, terms))
    descriptors = tuple(
        TermDescriptor(u_power=min(p, 3), axis="x", order=1 + p % 4)
        for p in range(n_terms)
    )
    lib = EvaluatedLibrary(
        descriptors=descriptors,
        term_fields=tuple(fp.Field(t, spac, labels) for t in terms),
        lhs_field=fp.Field(lhs, spac, labels),
        margins=tuple((0, 0) for _ in dims),
    )
    return lib, np.asarray(coefs)


def test_linear_relation_survives_assembly_exactly(rng):
    lib, coefs = _manufactured_library(rng)
    sys_ = fp.assemble_freq_system(lib, fp.CutoffSpec((6, 4)), allow_small=True)
    # residual of the true coefficients on the normalized system
    scaled = coefs * sys_.column_norms
    resid = sys_.matrix @ scaled - sys_.rhs
    assert np.max(np.abs(resid)) < 1e-10 * max(1.0, np.abs(sys_.rhs).max())


def test_fit_recovers_exact_coefficients(rng):
    lib, coefs = _manufactured_library(rng)
    sys_ = fp.assemble_freq_system(lib, fp.CutoffSpec((6, 4)), allow_small=True)
    fit = fp.fit_selected(sys_, list(range(len(coefs))))
    assert np.max(np.abs(fit.values - coefs)) < 1e-10


def test_assembly_exact_in_three_axes(rng):
    lib, coefs = _manufactured_library(rng, dims=(10, 8, 6), n_terms=3)
    sys_ = fp.assemble_freq_system(lib, fp.CutoffSpec((3, 3, 2)), allow_small=True)
    fit = fp.fit_selected(sys_, [0, 1, 2])
    assert np.max(np.abs(fit.values - coefs)) < 1e-10


def test_columns_are_unit_norm(rng):
    lib, _ = _manufactured_library(rng)
    sys_ = fp.assemble_freq_system(lib, fp.CutoffSpec((6, 4)), allow_small=True)
    assert np.allclose(np.linalg.norm(sys_.matrix, axis=0), 1.0, atol=1e-12)
    assert np.all(sys_.column_norms > 0)


def test_small_system_guard(rng):
    lib, _ = _manufactured_library(rng, n_terms=5)
    with pytest.raises(FieldError, match="retained modes"):
        fp.assemble_freq_system(lib, fp.CutoffSpec((2, 2)))
    with pytest.warns(UserWarning, match="retained modes"):
        fp.assemble_freq_system(lib, fp.CutoffSpec((2, 2)), allow_small=True)


def test_cutoff_validation():
    with pytest.raises(ValueError):
        fp.CutoffSpec((0, 3))
    cut = fp.CutoffSpec((8, 3))
    with pytest.raises(FieldError, match="exceeds axis length"):
        cut.validate_for((10, 10))
    with pytest.raises(FieldError, match="axes"):
        cut.validate_for((32, 32, 32))
