"""Experiment drivers: the randomized identity suite (with a mutation
check), the corrector study, and the ladder sweep with its artifacts and
determinism."""

import numpy as np
import pytest

from ldglimit.config import ExperimentConfig
from ldglimit.geometry import MaterialParams
from ldglimit.fields import GridSpec
from ldglimit.runner import (
    CHECK_TOLERANCES,
    RATE_QUANTITIES,
    SWEEP_COLUMNS,
    geometry_identity_suite,
    hedgehog_corrector_exact,
    run_check_geometry,
    run_corrector,
    run_sweep,
    write_sweep_artifacts,
)
from ldglimit.tensor_algebra import I3, norm


def tiny_config(**overrides):
    base = dict(
        dims=(6, 6, 6),
        box_lo=0.0,
        box_hi=3.0,
        l_ladder=(0.1, 0.05, 0.025),
        eps=0.2,
        margin=0.0,
        max_iters=4000,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_geometry_suite_passes():
    ok, results = run_check_geometry(seed=0, trials=2000)
    assert ok
    for name, value in results.items():
        assert value <= CHECK_TOLERANCES.get(name, 1e-10), name


def test_geometry_suite_is_deterministic():
    a = geometry_identity_suite(seed=3, trials=500)
    b = geometry_identity_suite(seed=3, trials=500)
    assert a == b


def test_geometry_suite_mutation_fails():
    """Scaling the base points off the manifold must blow up the residuals;
    the suite is capable of failing."""
    bad = geometry_identity_suite(seed=0, trials=500, s_scale=1.05)
    assert max(bad.values()) > 1e-3
    ok, _ = run_check_geometry(seed=0, trials=500, tol=1e-30)
    assert not ok


def test_hedgehog_corrector_exact_amplitude(unit_params):
    grid = GridSpec(dims=(8, 8, 8), box=((-1.0, 1.0),) * 3)
    p = unit_params
    s = p.s_plus
    a = hedgehog_corrector_exact(grid, p)
    coords = grid.coords()[1:-1, 1:-1, 1:-1]
    r2 = np.sum(coords**2, axis=-1)
    nhat = coords / np.sqrt(r2)[..., None]
    expected = (-18.0 * s / ((6.0 * p.a2 + p.b2 * s) * r2))[..., None, None] * (
        nhat[..., :, None] * nhat[..., None, :] - I3 / 3.0
    )
    assert np.max(np.abs(a - expected)) < 1e-13
    # at unit parameters the amplitude is -3.6 / r^2
    amp = -3.6 / r2
    assert np.max(np.abs(norm(a) - np.abs(amp) * np.sqrt(2.0 / 3.0))) < 1e-10


def test_run_corrector_hedgehog_mode(unit_params):
    cfg = tiny_config(boundary="hedgehog", box_lo=-1.0, box_hi=1.0,
                      dims=(12, 12, 12))
    rep = run_corrector(cfg)
    assert rep["mode"] == "hedgehog"
    assert rep["nodes"] > 0
    assert np.isfinite(rep["max_err"])
    # the finite-difference corrector tracks the closed form away from the
    # defect: error well below the field's own scale
    assert rep["max_err"] < 0.2 * rep["sup_a"]


def test_run_corrector_near_constant_mode():
    cfg = tiny_config()
    rep = run_corrector(cfg)
    assert rep["mode"] == "near_constant"
    assert len(rep["ls"]) == len(cfg.l_ladder)
    assert all(np.isfinite(v) for v in rep["a_err_interior"])


def test_run_sweep_rows_fits_and_artifacts(tmp_path):
    cfg = tiny_config(output_dir=str(tmp_path / "out"))
    report = run_sweep(cfg)
    assert len(report.rows) == len(cfg.l_ladder)
    for row in report.rows:
        assert set(row) == set(SWEEP_COLUMNS)
    assert set(report.fits) == set(RATE_QUANTITIES)
    assert set(report.results_by_l) == set(cfg.l_ladder)
    for L, res in report.results_by_l.items():
        assert res.converged
        assert np.all(np.diff(res.energy_history) <= 0.0)
    for name in ("sweep.csv", "rates.csv", "q_star.csv"):
        assert (tmp_path / "out" / name).exists()


def test_run_sweep_deterministic_artifacts(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run_sweep(tiny_config(output_dir=str(out1)))
    run_sweep(tiny_config(output_dir=str(out2)))
    for name in ("sweep.csv", "rates.csv", "q_star.csv", "q_l_0.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_run_sweep_single_l_yields_degenerate_fits():
    logs = []
    cfg = tiny_config(l_ladder=(0.1,))
    report = run_sweep(cfg, log=logs.append, write=False)
    assert all(fit is None for fit in report.fits.values())
    assert any("degenerate" in line for line in logs)


def test_run_sweep_eps_zero_yields_degenerate_fits():
    cfg = tiny_config(eps=0.0)
    report = run_sweep(cfg, write=False)
    # the exact constant solution gives zero errors at every L
    assert all(row["l2_err"] < 1e-12 for row in report.rows)
    assert report.fits["l2_err"] is None
