"""Noise injection: amplitude law, reproducibility, statistics."""

import numpy as np

import freqpde as fp


def _field(rng, dims=(256, 200)):
    return fp.Field(rng.standard_normal(dims) * 2.5 + 1.0,
                    (0.1, 0.05), ("x", "t"))


def test_sample_std_matches_alpha(rng):
    f = _field(rng)
    alpha = 0.5
    noisy = fp.inject_noise(f, fp.NoiseSpec(alpha=alpha, seed=3))
    added = noisy.data - f.data
    target = alpha * np.std(f.data)
    assert abs(np.std(added) / target - 1.0) < 0.02
    assert abs(np.mean(added)) < 0.02 * target


def test_amplitude_scales_with_field_std(rng):
    f = _field(rng)
    g = f.with_data(f.data * 4.0)
    nf = fp.inject_noise(f, fp.NoiseSpec(alpha=1.0, seed=7))
    ng = fp.inject_noise(g, fp.NoiseSpec(alpha=1.0, seed=7))
    # same seed, 4x the std => exactly 4x the added noise
    assert np.allclose(ng.data - g.data, 4.0 * (nf.data - f.data), atol=1e-12)


def test_seed_reproducibility(rng):
    f = _field(rng)
    a = fp.inject_noise(f, fp.NoiseSpec(alpha=0.3, seed=11))
    b = fp.inject_noise(f, fp.NoiseSpec(alpha=0.3, seed=11))
    c = fp.inject_noise(f, fp.NoiseSpec(alpha=0.3, seed=12))
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_alpha_zero_is_identity(rng):
    f = _field(rng, dims=(32, 16))
    out = fp.inject_noise(f, fp.NoiseSpec(alpha=0.0, seed=5))
    assert np.array_equal(out.data, f.data)


def test_field_stats_two_pass(rng):
    data = rng.standard_normal((64, 32)) + 1e6  # catastrophic for naive E[x^2]
    f = fp.Field(data, (0.1, 0.1), ("x", "t"))
    st = fp.field_stats(f)
    assert abs(st.mean - data.mean()) < 1e-9
    assert abs(st.std - data.std()) < 1e-9 * max(1.0, data.std())
