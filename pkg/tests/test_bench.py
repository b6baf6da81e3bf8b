"""Benchmark-harness plumbing: seeds, defaults, report bookkeeping."""

import numpy as np

import freqpde as fp
from freqpde import bench


def test_trial_seed_is_deterministic_and_order_free():
    a = bench.trial_seed(0, 3, 7)
    b = bench.trial_seed(0, 3, 7)
    assert a == b
    seen = {bench.trial_seed(0, i, j) for i in range(6) for j in range(10)}
    assert len(seen) == 60  # no collisions across the grid
    assert bench.trial_seed(1, 3, 7) != a


def test_default_diff_config_dispatch():
    noisy_1d = bench.default_diff_config(1, True, equation="burgers1d")
    assert noisy_1d.method == "local_polynomial"
    clean_1d = bench.default_diff_config(1, False)
    assert clean_1d.method == "finite_difference"
    d3 = bench.default_diff_config(3, True)
    assert d3.step_stride == 2
    d2 = bench.default_diff_config(2, True)
    assert d2.fd_order_of_accuracy == 4


def test_default_cutoff_shapes():
    for dims in (1, 2, 3):
        cut = bench.default_cutoff(dims)
        assert len(cut.ks) == dims + 1


def test_alpha_sweep_small(tmp_path):
    """Tiny sweep on an analytically solved linear equation: bookkeeping only."""
    eq = fp.EQUATIONS["diffusion3d"]
    grid = fp.GridSpec((2 * np.pi,) * 3 + (1.0,), (16, 16, 16, 16))
    clean = fp.solve_reference(eq, grid)
    report = bench.alpha_sweep(eq, [0.0], trials=2, base_seed=0, clean=clean)
    rows = report.per_alpha()
    assert rows[0]["alpha"] == 0.0
    assert rows[0]["trials"] == 2
    assert report.trials == 2
    csv_path = tmp_path / "sweep.csv"
    bench.write_sweep_csv(report, csv_path)
    assert csv_path.read_text().count("\n") >= 3  # header + 2 trials


def test_alpha_max_is_prefix_contiguous(monkeypatch):
    """alpha_max is the largest alpha such that every alpha up to and
    including it passed; a later pass after a failure does not count."""
    from freqpde.bench import TrialOutcome

    eq = fp.EQUATIONS["burgers1d"]
    clean = fp.Field(np.zeros((8, 4)) + 1.0, (0.1, 0.1), ("x", "t"))

    def run_with(flags):
        alphas = [0.25 * i for i in range(len(flags))]
        ok_by_alpha = dict(zip(alphas, flags))

        def fake_trial(clean_f, eq_, alpha, seed, cfg):
            return TrialOutcome(alpha=alpha, seed=seed,
                                structure_correct=ok_by_alpha[alpha],
                                mre=0.0, per_term_errors={},
                                selected=("u*u_x", "u_xx"))

        monkeypatch.setattr(bench, "run_trial", fake_trial)
        return bench.alpha_sweep(eq, alphas, trials=2, clean=clean,
                                 pipeline_factory=lambda a: None)

    assert run_with([True, True, True, False]).alpha_max == 0.5
    rep = run_with([True, True, False, True])
    assert rep.alpha_max == 0.25
    assert not rep.exceeds_grid
    rep2 = run_with([True, True, True, True])
    assert rep2.alpha_max == 0.75
    assert rep2.exceeds_grid
    assert run_with([False, True, True, True]).alpha_max is None
