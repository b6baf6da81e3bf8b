"""Spectral-transform correctness against an independent naive-sum oracle."""

import itertools

import numpy as np
import pytest

import freqpde as fp
from freqpde.freqsys import retained_modes, lowpass_filter


def naive_dft(a: np.ndarray) -> np.ndarray:
    """O(N^2) direct evaluation of the unnormalized multidimensional DFT."""
    dims = a.shape
    out = np.zeros(dims, dtype=complex)
    for k in itertools.product(*(range(n) for n in dims)):
        acc = 0.0 + 0.0j
        for m in itertools.product(*(range(n) for n in dims)):
            phase = sum(ki * mi / ni for ki, mi, ni in zip(k, m, dims))
            acc += a[m] * np.exp(-2j * np.pi * phase)
        out[k] = acc
    return out


@pytest.mark.parametrize("dims", [(7,), (6, 5), (4, 3, 2), (3, 2, 2, 2)])
def test_dft_matches_naive_sum(rng, dims):
    a = rng.standard_normal(dims)
    got = fp.dft_nd(a)
    want = naive_dft(a)
    assert np.max(np.abs(got - want)) < 1e-10 * max(1.0, np.abs(want).max())


def test_dft_accepts_field(rng):
    a = rng.standard_normal((6, 5))
    f = fp.Field(a, (0.1, 0.2), ("x", "t"))
    assert np.array_equal(fp.dft_nd(f), fp.dft_nd(a))


@pytest.mark.parametrize("dims", [(16,), (8, 12), (4, 6, 5)])
def test_parseval(rng, dims):
    a = rng.standard_normal(dims)
    fhat = fp.dft_nd(a)
    n_total = a.size
    lhs = np.sum(np.abs(a) ** 2)
    rhs = np.sum(np.abs(fhat) ** 2) / n_total
    assert abs(lhs - rhs) < 1e-10 * max(1.0, lhs)


def test_retained_modes_drop_exactly_one_of_each_conjugate_pair():
    cut = fp.CutoffSpec((3, 2))
    kept = set(retained_modes(cut))
    full = set(itertools.product(range(-2, 3), range(-1, 2)))
    for m in full:
        neg = tuple(-c for c in m)
        # exactly one of {m, -m} retained; the origin is self-paired
        assert (m in kept) + (neg in kept) == (2 if m == neg else 1)
    assert (0, 0) in kept


def test_retained_modes_count_1d():
    # 2k-1 signed modes collapse to k after conjugate removal
    assert len(retained_modes(fp.CutoffSpec((5,)))) == 5


def test_lowpass_filter_preserves_retained_modes(rng):
    a = rng.standard_normal((32, 24))
    f = fp.Field(a, (0.1, 0.1), ("x", "t"))
    cut = fp.CutoffSpec((4, 3))
    g = lowpass_filter(f, cut)
    fa, ga = np.fft.fftn(f.data), np.fft.fftn(g.data)
    for m in retained_modes(cut):
        idx = tuple(mi % ni for mi, ni in zip(m, a.shape))
        assert abs(fa[idx] - ga[idx]) < 1e-9 * max(1.0, abs(fa[idx]))
    # and the filter is idempotent
    g2 = lowpass_filter(g, cut)
    assert np.max(np.abs(g2.data - g.data)) < 1e-12


def test_lowpass_filter_removes_high_modes(rng):
    x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    data = np.cos(10 * x)[:, None] + 0.5 * np.cos(2 * x)[:, None] * np.cos(t)
    f = fp.Field(data, (x[1], t[1]), ("x", "t"))
    g = lowpass_filter(f, fp.CutoffSpec((4, 4)))
    want = 0.5 * np.cos(2 * x)[:, None] * np.cos(t)
    assert np.max(np.abs(g.data - want)) < 1e-10
