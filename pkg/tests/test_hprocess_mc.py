import math

import numpy as np
import pytest

from dhtlab.hprocess_mc import (OccupationGrid, PathStats, SdeConfig,
                                drift_field, estimate_T, expected_occupation,
                                occupation_check, refine_dt, simulate_path)
from dhtlab.seqops import Seq

TWO_PI = 2.0 * math.pi

# frozen by iterated quadrature of the occupation representation at this
# exact start point (see identities.conditional_kernel_quad)
T_N1_Y6 = 0.22704636450554652


def test_config_validation():
    with pytest.raises(ValueError):
        SdeConfig(n=0, start=(0.0, 1.0), dt=1e-3, kill_eps=1e-2)  # dt too big
    with pytest.raises(ValueError):
        SdeConfig(n=0, start=(0.0, -1.0))
    with pytest.raises(ValueError):
        SdeConfig(n=0, start=(0.0, 1.0), max_time=0.0)
    cfg = SdeConfig(n=2, start=(0.0, 5.0))
    assert cfg.dt <= cfg.kill_eps ** 2 / 4.0


def test_drift_matches_log_gradient():
    cfg = SdeConfig(n=1, start=(TWO_PI, 8.0))

    def logp(x, y):
        xt = x - TWO_PI
        return math.log(y / (math.pi * (xt * xt + y * y)))

    h = 1e-6
    for (x, y) in [(1.0, 2.0), (6.0, 0.5), (-3.0, 4.0), (7.0, 9.0)]:
        bx, by = drift_field(cfg, np.array([x]), np.array([y]))
        nx = (logp(x + h, y) - logp(x - h, y)) / (2 * h)
        ny = (logp(x, y + h) - logp(x, y - h)) / (2 * h)
        assert bx[0] == pytest.approx(nx, abs=1e-5)
        assert by[0] == pytest.approx(ny, abs=1e-5)


def test_reproducibility_bitwise():
    cfg = SdeConfig(n=1, start=(TWO_PI, 4.0), seed=7, max_time=2000.0)
    s1 = estimate_T(Seq.delta(0), cfg, 800)
    s2 = estimate_T(Seq.delta(0), cfg, 800)
    assert s1 == s2


def test_linearity_exact():
    cfg = SdeConfig(n=1, start=(TWO_PI, 4.0), seed=7, max_time=2000.0)
    s1 = estimate_T(Seq.delta(0), cfg, 500)
    s2 = estimate_T(Seq.delta(0, 2.0), cfg, 500)
    assert s2.mean == 2.0 * s1.mean
    assert s2.std_error == 2.0 * s1.std_error
    assert s2.killed_fraction == s1.killed_fraction


def test_antithetic_cancellation_exact():
    cfg = SdeConfig(n=0, start=(0.0, 5.0), seed=4, max_time=2000.0)
    stats = estimate_T(Seq.delta(0), cfg, 400, antithetic=True)
    assert stats.mean == 0.0
    with pytest.raises(ValueError):
        estimate_T(Seq.delta(0), cfg, 401, antithetic=True)
    # same mechanism at a nonzero target with data symmetric about it;
    # mirroring about a nonzero centre does not commute with rounding, so
    # the cancellation is exact only to machine precision there
    cfg1 = SdeConfig(n=1, start=(TWO_PI, 5.0), seed=4, max_time=2000.0)
    sym = Seq.from_dict({0: 1.0, 2: 1.0})
    stats1 = estimate_T(sym, cfg1, 200, antithetic=True)
    assert abs(stats1.mean) < 1e-14


def test_n0_functional_is_pointwise_zero():
    # for the unit atom at the target site the rotated integrand vanishes
    # identically, so every sample is rounding noise
    cfg = SdeConfig(n=0, start=(0.0, 4.0), seed=1, max_time=2000.0)
    stats = estimate_T(Seq.delta(0), cfg, 300)
    assert abs(stats.mean) < 1e-15
    assert abs(stats.mean) <= 3.0 * stats.std_error + 1e-18


def test_single_path_sample():
    cfg = SdeConfig(n=1, start=(TWO_PI, 3.0), seed=3, max_time=3000.0)
    s = simulate_path(Seq.delta(0), cfg)
    assert math.isfinite(s.value)
    assert s.absorbed
    assert s.lifetime > 0
    assert abs(s.end[0] - TWO_PI) < cfg.match_radius
    assert s.end[1] < cfg.kill_eps


def test_absorbed_fraction_grows_with_max_time():
    base = dict(n=1, start=(TWO_PI, 6.0), seed=5)
    fracs = []
    for mt in (20.0, 80.0, 2000.0):
        stats = estimate_T(Seq.delta(0), SdeConfig(max_time=mt, **base), 400)
        fracs.append(stats.killed_fraction)
    assert fracs[0] < fracs[1] < fracs[2]
    assert fracs[2] > 0.95


def test_path_stats_se_definition():
    cfg = SdeConfig(n=1, start=(TWO_PI, 2.0), seed=9, max_time=1000.0)
    one = estimate_T(Seq.delta(0), cfg, 1)
    assert one.std_error == 0.0
    many = estimate_T(Seq.delta(0), cfg, 64)
    assert many.std_error > 0


def test_estimate_matches_finite_start_quadrature():
    # the mid-scale correctness pin: MC against the deterministic occupation
    # integral at the very same start point (no limit involved)
    cfg = SdeConfig(n=1, start=(TWO_PI, 6.0), seed=11, max_time=5000.0)
    stats = estimate_T(Seq.delta(0), cfg, 8000)
    z = (stats.mean - T_N1_Y6) / stats.std_error
    assert abs(z) <= 3.0


def test_expected_occupation_symmetry():
    cfg = SdeConfig(n=1, start=(TWO_PI, 6.0))
    grid = OccupationGrid(x_min=TWO_PI - 2.0, x_max=TWO_PI + 2.0,
                          y_min=0.5, y_max=2.5, nx=4, ny=2)
    exp = expected_occupation(cfg, grid)
    assert np.max(np.abs(exp - exp[:, ::-1])) < 1e-13
    assert np.all(exp > 0)


def test_occupation_check_smoke():
    cfg = SdeConfig(n=1, start=(TWO_PI, 6.0), seed=11, max_time=5000.0)
    grid = OccupationGrid(x_min=math.pi, x_max=3 * math.pi,
                          y_min=0.5, y_max=4.5, nx=4, ny=4)
    rep = occupation_check(cfg, grid, 8000)
    assert rep.frac_within_3 >= 0.85
    assert abs(rep.total_z) <= 3.0
    assert rep.chi2_z <= 4.0


def test_occupation_grid_validation():
    with pytest.raises(ValueError):
        OccupationGrid(x_min=0, x_max=1, y_min=-1, y_max=2, nx=2, ny=2)
    with pytest.raises(ValueError):
        OccupationGrid(x_min=1, x_max=0, y_min=0.5, y_max=2, nx=2, ny=2)


def test_refine_dt():
    cfg = SdeConfig(n=1, start=(0.0, 4.0))
    fine = refine_dt(cfg)
    assert fine.dt == cfg.dt / 2 and fine.step_scale == cfg.step_scale / 2


@pytest.mark.heavy
def test_refinement_probe_heavy():
    """Halving every step-size control moves cell estimates by less than the
    statistical error at 1e5 paths (discretization-bias probe)."""
    cfg = SdeConfig(n=1, start=(TWO_PI, 8.0), seed=2028, kill_eps=4e-3,
                    dt=4e-6, match_radius=2e-2, max_time=4e4)
    grid = OccupationGrid(x_min=math.pi, x_max=3 * math.pi,
                          y_min=1.0, y_max=5.0, nx=4, ny=4)
    base = occupation_check(cfg, grid, 100_000)
    fine = occupation_check(refine_dt(cfg), grid, 100_000)
    dz = np.abs(base.observed - fine.observed) / np.sqrt(
        base.std_error ** 2 + fine.std_error ** 2)
    assert float(np.mean(dz <= 3.0)) >= 0.95
