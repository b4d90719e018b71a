import numpy as np
import pytest

from culturedyn import ConvergenceError, DivergenceError, ValidationError, integrate, refine_until_converged
from culturedyn.integrator import max_relative_change
from culturedyn.model import CultureParams, single_culture
from culturedyn.presets import fig1a, fig2


def test_zero_horizon_returns_initial_state():
    traj = integrate(fig2().replace(horizon=0.0))
    assert len(traj) == 1
    assert traj.times.tolist() == [0.0]
    assert traj.D[0].tolist() == [30.0, 3.0]
    assert traj.S[0].tolist() == [2.0, 50.0]
    assert traj.H[0].tolist() == [12.0, 10.0]


def test_linear_system_is_exact(linear_scenario):
    traj = integrate(linear_scenario)
    assert np.all(traj.D[:, 0] == 4.0)
    # only summation rounding remains (3000 steps)
    np.testing.assert_allclose(traj.S[:, 0], 1.5 + 10 * traj.times, rtol=1e-12, atol=0)
    assert np.all(traj.H[:, 0] == 5.0)


def test_grid_integrity():
    for horizon, every in ((10, 0.01), (2.5, 0.1), (1.05, 0.1), (0.009, 0.01)):
        s = fig1a().replace(horizon=horizon, sample_every=every)
        traj = integrate(s)
        assert len(traj) == int(np.floor(horizon / every + 1e-9)) + 1
        assert traj.times[0] == 0.0
        assert np.all(np.diff(traj.times) > 0)
        assert horizon - traj.times[-1] < every


def test_trajectory_records_hierarchy(fig1a_traj):
    np.testing.assert_allclose(fig1a_traj.H[:, 0], 1 + 0.1 * fig1a_traj.times, rtol=1e-15)
    assert fig1a_traj.H[-1, 0] == pytest.approx(2.0)


def test_bit_identical_reruns():
    a, b = integrate(fig2()), integrate(fig2())
    assert a.identical(b)


def test_outputs_are_read_only(fig1a_traj):
    with pytest.raises(ValueError):
        fig1a_traj.D[0, 0] = 1.0


def test_values_finite_and_nonnegative(fig1a_traj, fig2_traj):
    for traj in (fig1a_traj, fig2_traj):
        assert np.all(np.isfinite(traj.D)) and np.all(np.isfinite(traj.S))
        assert np.all(traj.D >= 0)
        assert traj.events == () and traj.n_clamps == 0


def test_fourth_order_convergence():
    base = fig1a().replace(dt=2e-3)
    finals = [integrate(base.replace(dt=base.dt / 2 ** k)).D[-1, 0] for k in range(4)]
    errors = [abs(f - finals[-1]) for f in finals[:-1]]
    assert 12 <= errors[0] / errors[1] <= 20
    assert 12 <= errors[1] / errors[2] <= 20


def divergent_scenario():
    # G(S) ~ S with S pushed up by d * h0 = 1e12 per unit time: D explodes
    p = CultureParams(a=1e6, b=0, d=1e6, e=0, s0=0, s1=1e9, h0=1e6)
    return single_culture(p, 1.0, 1.0, horizon=1.0)


def test_divergence_raises_with_partial_trajectory():
    with pytest.raises(DivergenceError, match="divergence at t =") as info:
        integrate(divergent_scenario())
    partial = info.value.trajectory
    assert partial.diverged
    assert 1 <= len(partial) < divergent_scenario().n_samples
    assert np.all(np.isfinite(partial.D))
    assert info.value.time <= 1.0


def test_refine_linear_converges_first_comparison(linear_scenario):
    dt_used, traj = refine_until_converged(linear_scenario, 1e-12)
    assert dt_used == linear_scenario.dt / 2
    assert len(traj) == linear_scenario.n_samples


def test_refine_fig1a():
    dt_used, traj = refine_until_converged(fig1a(), 1e-4)
    assert dt_used <= 1e-2
    coarse = integrate(fig1a().replace(dt=dt_used * 2))
    assert max_relative_change(coarse, traj) < 1e-4


def test_refine_divergent_errors():
    with pytest.raises((DivergenceError, ConvergenceError)):
        refine_until_converged(divergent_scenario(), 1e-4)


def test_refine_gives_up(linear_scenario):
    with pytest.raises(ConvergenceError, match="no convergence after 2 halvings"):
        refine_until_converged(fig1a().replace(dt=0.01, sample_every=0.01), 1e-14, max_halvings=2)
    with pytest.raises(ValidationError):
        refine_until_converged(linear_scenario, 0)
