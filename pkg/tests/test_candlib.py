"""Candidate library construction and evaluation."""

import numpy as np
import pytest

import freqpde as fp
from freqpde.candlib import TermDescriptor, parse_term
from freqpde.deriv import DiffConfig


def test_standard_library_sizes_and_names():
    lib1 = fp.standard_library(1)
    assert len(lib1.terms) == 19
    names = [t.name for t in lib1.terms]
    for expected in ("u", "u^2", "u^3", "u_x", "u*u_x", "u_xx", "u_xxxx",
                     "u^3*u_xxxx"):
        assert expected in names
    assert len(names) == len(set(names))
    assert len(fp.standard_library(2).terms) == 20
    assert len(fp.standard_library(3).terms) == 20


def test_descriptor_validation():
    with pytest.raises(ValueError):
        TermDescriptor(u_power=4)
    with pytest.raises(ValueError):
        TermDescriptor(u_power=1, axis="x", order=5)
    with pytest.raises(ValueError):
        TermDescriptor(u_power=1, order=2)  # derivative without axis
    with pytest.raises(ValueError):
        TermDescriptor(u_power=1, axis="x", order=0)  # axis without derivative


def test_parse_term_round_trip():
    d = TermDescriptor(u_power=2, axis="y", order=3)
    assert parse_term({"u_power": 2, "axis": "y", "order": 3}) == d


def test_evaluate_library_exact_on_trig(rng):
    """Evaluated term values check out against closed forms on a smooth field."""
    n, m = 128, 32
    x = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    t = np.linspace(0.0, 1.0, m)
    u = np.sin(x)[:, None] * np.exp(-t)[None, :]
    f = fp.Field(u, (x[1], t[1]), ("x", "t"))
    lib = fp.evaluate_library(f, fp.standard_library(1),
                              DiffConfig(fd_order_of_accuracy=4))
    names = lib.names
    (mx0, mx1), (mt0, mt1) = lib.margins
    xs = x[mx0 : n - mx1]
    ts = t[mt0 : m - mt1]
    inner_u = np.sin(xs)[:, None] * np.exp(-ts)[None, :]
    got = dict(zip(names, lib.term_fields))
    assert np.max(np.abs(got["u"].data - inner_u)) < 1e-12
    assert np.max(np.abs(got["u^2"].data - inner_u**2)) < 1e-12
    want_ux = np.cos(xs)[:, None] * np.exp(-ts)[None, :]
    assert np.max(np.abs(got["u_x"].data - want_ux)) < 1e-4
    assert np.max(np.abs(got["u*u_x"].data - inner_u * want_ux)) < 1e-4
    # LHS is du/dt = -u
    assert np.max(np.abs(lib.lhs_field.data + inner_u)) < 1e-3


def test_all_term_fields_share_interior_shape(rng):
    f = fp.Field(rng.standard_normal((64, 24)), (0.1, 0.05), ("x", "t"))
    lib = fp.evaluate_library(f, fp.standard_library(1), DiffConfig())
    shape = lib.lhs_field.dims
    assert all(tf.dims == shape for tf in lib.term_fields)
    assert len(lib.term_fields) == 19


def test_second_order_lhs(rng):
    n, m = 64, 48
    x = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    u = np.sin(x)[:, None] * np.cos(t)[None, :]
    f = fp.Field(u, (x[1], t[1]), ("x", "t"))
    lib = fp.evaluate_library(f, fp.standard_library(1, lhs_order=2),
                              DiffConfig(fd_order_of_accuracy=4))
    (mx0, mx1), (mt0, mt1) = lib.margins
    want = -np.sin(x[mx0 : n - mx1])[:, None] * np.cos(t[mt0 : m - mt1])[None, :]
    assert np.max(np.abs(lib.lhs_field.data - want)) < 1e-3


def test_trim_interior(rng):
    f = fp.Field(rng.standard_normal((10, 8)), (0.1, 0.1), ("x", "t"))
    g = fp.trim_interior(f, ((2, 1), (0, 3)))
    assert g.dims == (7, 5)
    assert np.array_equal(g.data, f.data[2:9, 0:5])
