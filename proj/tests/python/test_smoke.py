import math

import pytest

import hyperbat as hb


def test_ep_optimum():
    p = hb.BatteryParams(omega_b=1.0, g=0.25, gamma=1.0, Omega=1.0)
    op = hb.optimal_energy(p)
    assert op.t_E == 4.0
    assert op.regime == hb.Regime.ExceptionalPoint
    assert op.E_max / math.sinh(1.0) ** 2 == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_ergotropy_record():
    p = hb.BatteryParams(g=2.0, gamma=1.0, Omega=5.0)
    r = hb.ergotropy(p, hb.optimal_time(p))
    assert r.ergotropy / r.E > 0.99
    assert r.ergotropy == pytest.approx(r.E - r.E_beta)


def test_moments_match_closed_form():
    p = hb.BatteryParams(g=2.0, gamma=1.0, Omega=1.0)
    grid = [0.1 * k for k in range(51)]
    traj = hb.propagate_moments(hb.post_pulse_moments(1.0), p, grid)
    for t, m in zip(grid, traj):
        assert m.n_b == pytest.approx(hb.population_holder(p, t), rel=1e-8, abs=1e-12)


def test_oracle_small_run():
    p = hb.BatteryParams(g=2.0, gamma=1.0, Omega=0.5)
    reports = hb.run_oracle(p, [0.0, 0.5, 1.0])
    for r in reports:
        assert r.certified()
        assert abs(r.mean_a) + abs(r.mean_b) < 1e-8
        assert r.moments.n_b == pytest.approx(hb.population_holder(p, r.t), rel=1e-3, abs=1e-9)


def test_tables():
    t = hb.trace_table(hb.BatteryParams(), "0:5:11")
    assert t["columns"][:2] == ["t_gamma", "E_norm"]
    assert len(t["rows"]) == 11
    s = hb.sweep_table("tE", "0.25:10:2")
    assert s["rows"][0][1] == 4.0


def test_errors_surface_as_exceptions():
    with pytest.raises(hb.HyperbatError, match="no-charging"):
        hb.optimal_time(hb.BatteryParams(g=0.0))
    with pytest.raises(hb.HyperbatError, match="invalid-time"):
        hb.stored_energy(hb.BatteryParams(), -1.0)
