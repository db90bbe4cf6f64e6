"""
Tests para el integrador semi-implícito y los estados estacionarios de una especie.
"""
import numpy as np
import pytest

from disperse.core.errors import convergence_error, non_positive_field_error, timestep_error
from disperse.models.grid_model import spatial_field
from disperse.models.scenario_schema import state
from disperse.services.dynamics_service import dynamics_service
from disperse.services.grid_service import grid_service
from disperse.services.spectra_service import spectra_service
from tests.conftest import HETEROGENEOUS_K, build_scenario


def test_zero_state_stays_zero():
    """Test para el equilibrio trivial (0, 0)."""
    sc = build_scenario(u0="0", v0="0")
    st = state(t=0.0, u=sc.u0, v=sc.v0)
    after = dynamics_service.step(st, sc)
    assert np.all(after.u.values == 0.0)
    assert np.all(after.v.values == 0.0)
    assert after.t == pytest.approx(sc.stepper.dt)


def test_homogeneous_logistic_update():
    """Test para coeficientes constantes: la dispersión no actúa y u sigue la logística explícita."""
    sc = build_scenario(K="1", u0="0.4", v0="0", dt=0.05)
    after = dynamics_service.step(state(t=0.0, u=sc.u0, v=sc.v0), sc)
    expected = 0.4 + 0.05 * 0.4 * (1.0 - 0.4)
    assert np.allclose(after.u.values, expected, rtol=1e-13)
    assert np.all(after.v.values == 0.0)


def test_mass_conserved_without_growth():
    """Test para r ≡ 0: la dispersión implícita conserva ∫u."""
    sc = build_scenario(P="1 + 0.5*cos(pi*x)", Q="1 + x", u0="1 + x^2", v0="0.5 + sin(3*x)^2", dt=0.1)
    sc = sc.model_copy(update={"r": spatial_field.constant(sc.grid, 0.0)})
    st = state(t=0.0, u=sc.u0, v=sc.v0)
    for _ in range(20):
        new = dynamics_service.step(st, sc)
        for old_f, new_f in ((st.u, new.u), (st.v, new.v)):
            before = grid_service.integrate(old_f)
            assert grid_service.integrate(new_f) == pytest.approx(before, rel=1e-12)
        st = new


def test_timestep_bound_violation():
    """Test para dt demasiado grande: timestep_error antes de avanzar."""
    sc = build_scenario(dt=10.0)
    with pytest.raises(timestep_error):
        dynamics_service.step(state(t=0.0, u=sc.u0, v=sc.v0), sc)


def test_reaction_number_formula():
    sc = build_scenario(K="2", r="3", r_mult=(1.0, 2.0), u0="1", v0="0.5")
    number = dynamics_service.reaction_number(sc, sc.u0.values, sc.v0.values, 0.01)
    assert number == pytest.approx(0.01 * 2.0 * 3.0 * (1.0 + 2.0 * 1.5 / 2.0))


def test_ideal_free_equilibrium_is_preserved():
    """Test para u0 = K, v0 = 0 y P ∝ K: estacionario de inmediato y u = K."""
    K = "2 + 0.5*cos(pi*x)"
    sc = build_scenario(K=K, P=f"0.5*({K})", u0=K, v0="0", t_end=10.0)
    series, final, steady = dynamics_service.run(sc)
    assert steady
    assert final.t < 1.0
    assert np.max(np.abs(final.u.values - sc.K.values)) <= 1e-12 * sc.K.sup_norm()
    assert np.all(final.v.values == 0.0)
    assert series.times[-1] == pytest.approx(final.t)


def test_coexistence_converges_to_ideal_free_pair(coexistence_scenario):
    """Test para K = P + Q: la corrida converge a (P, Q)."""
    sc = coexistence_scenario
    _, final, steady = dynamics_service.run(sc)
    assert steady
    assert np.max(np.abs(final.u.values - sc.P.values)) <= 1e-3 * sc.P.sup_norm()
    assert np.max(np.abs(final.v.values - sc.Q.values)) <= 1e-3 * sc.Q.sup_norm()


def test_absent_species_stays_absent():
    """Test para u0 = 0: u permanece nulo y v converge a v*."""
    sc = build_scenario(P="1 + 0.5*cos(pi*x)", u0="0", v0="0.5", dt=0.02)
    _, final, steady = dynamics_service.run(sc)
    assert steady
    assert np.all(final.u.values == 0.0)
    v_star = dynamics_service.solve_single_steady(sc, "v")
    assert np.max(np.abs(final.v.values - v_star.values)) <= 1e-6 * v_star.sup_norm()


def test_time_series_is_sampled_and_increasing():
    sc = build_scenario(dt=0.01, t_end=1.0, record_every=10)
    series, final, steady = dynamics_service.run(sc)
    assert not steady
    assert len(series) == 10
    assert all(b > a for a, b in zip(series.times, series.times[1:]))
    assert series.times[-1] == pytest.approx(1.0)
    assert final.t == pytest.approx(1.0)


def test_single_steady_ideal_free():
    """Test para P ∝ K: u* = K."""
    K = "2 + 0.5*cos(pi*x)"
    sc = build_scenario(K=K, P=f"0.5*({K})", dt=0.02)
    u_star = dynamics_service.solve_single_steady(sc, "u")
    assert np.max(np.abs(u_star.values - sc.K.values)) <= 1e-10 * sc.K.sup_norm()


def test_single_steady_with_mismatched_strategy():
    """Test para P y K independientes: ∫rK > ∫r·u* y residuo pequeño."""
    sc = build_scenario(K="1 + 0.8*cos(pi*x)", r="1 + 0.5*x", Q="1 + x", a="0.5", dt=0.02)
    for label in ("u", "v"):
        star = dynamics_service.solve_single_steady(sc, label)
        assert np.all(star.values > 0.0)
        assert grid_service.integrate(sc.r * sc.K) > grid_service.integrate(sc.r * star)
        assert dynamics_service.stationary_residual(sc, label, star) <= 1e-8 * float(np.max(sc.r.values * sc.K.values))


def test_single_steady_from_custom_guess():
    sc = build_scenario(dt=0.02)
    guess = spatial_field.constant(sc.grid, 0.1)
    from_guess = dynamics_service.solve_single_steady(sc, "u", initial=guess)
    from_K = dynamics_service.solve_single_steady(sc, "u")
    assert np.max(np.abs(from_guess.values - from_K.values)) <= 1e-7 * from_K.sup_norm()


def test_single_steady_rejects_non_positive_guess():
    sc = build_scenario()
    with pytest.raises(non_positive_field_error):
        dynamics_service.solve_single_steady(sc, "u", initial=spatial_field.constant(sc.grid, 0.0))


def test_single_steady_without_convergence():
    """Test para un t_end demasiado corto: convergence_error con el residuo alcanzado."""
    sc = build_scenario(t_end=0.5, dt=0.01)
    with pytest.raises(convergence_error) as exc:
        dynamics_service.solve_single_steady(sc, "u")
    assert exc.value.residual > 0.0


def test_default_initial_data():
    sc = build_scenario()
    u0, v0 = dynamics_service.default_initial_data(sc.K)
    assert np.allclose(u0.values, 0.3 * sc.K.values)
    assert np.all(v0.values > 0.0)
    assert not np.allclose(u0.values, v0.values)


def test_random_initial_data_is_reproducible():
    """Test para la semilla: mismos datos con la misma semilla, distintos con otra."""
    sc = build_scenario()
    a_u, a_v = dynamics_service.random_initial_data(sc.K, seed=7)
    b_u, _ = dynamics_service.random_initial_data(sc.K, seed=7)
    c_u, _ = dynamics_service.random_initial_data(sc.K, seed=8)
    assert np.array_equal(a_u.values, b_u.values)
    assert not np.array_equal(a_u.values, c_u.values)
    assert np.all(a_u.values > 0.0) and np.all(a_v.values > 0.0)


def test_seed_invader():
    sc = build_scenario(u0="0", v0="1")
    st = dynamics_service.seed_invader(state(t=2.0, u=sc.u0, v=sc.v0), "u", 1e-3, sc.K)
    assert st.t == 2.0
    assert np.allclose(st.u.values, 1e-3 * sc.K.values)
    assert np.array_equal(st.v.values, sc.v0.values)


def test_invader_growth_rate_follows_principal_eigenvalue(slower_dispersal_scenario):
    """Test para la tasa de crecimiento del invasor sembrado con ψ: su signo y valor siguen a σ₁."""
    sc = slower_dispersal_scenario
    u_star = dynamics_service.solve_single_steady(sc, "u")
    v_star = dynamics_service.solve_single_steady(sc, "v")
    problems = spectra_service.invasion_problems(sc, u_star, v_star)
    zero = spatial_field.constant(sc.grid, 0.0)
    for label, key, resident in (("u", "u_at_v_star", state(t=0.0, u=zero, v=v_star)),
                                 ("v", "v_at_u_star", state(t=0.0, u=u_star, v=zero))):
        eigen = spectra_service.principal_eigen(problems[key])
        rate = dynamics_service.invader_growth_rate(sc, resident, label, eigen.psi, horizon=2.0)
        assert (rate > 0.0) == (eigen.sigma1 > 0.0)
        assert rate == pytest.approx(eigen.sigma1, rel=0.05)


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_coexistence_is_reached_from_random_data(coexistence_scenario, seed):
    """Test para la unicidad del equilibrio de coexistencia: datos aleatorios llegan a (P, Q)."""
    sc = coexistence_scenario
    u0, v0 = dynamics_service.random_initial_data(sc.K, seed=seed)
    _, final, steady = dynamics_service.run(sc.model_copy(update={"u0": u0, "v0": v0}))
    _, reference, _ = dynamics_service.run(sc)
    assert steady
    assert np.max(np.abs(final.u.values - reference.u.values)) <= 1e-6 * sc.K.sup_norm()
    assert np.max(np.abs(final.v.values - reference.v.values)) <= 1e-6 * sc.K.sup_norm()
    assert np.max(np.abs(final.u.values - sc.P.values)) <= 1e-3 * sc.P.sup_norm()


def test_steady_state_is_invariant_under_joint_scaling():
    """Test para (d, r_mult) = (1, 1) contra (2, 2): mismos u* y v* dentro de 1e-8."""
    sc = build_scenario(K=HETEROGENEOUS_K, P="1 + 0.3*x", a="0.5", dt=0.01, t_end=3000.0, tol_steady=1e-12)
    doubled = sc.model_copy(update={
        "species_u": sc.species_u.scaled(2.0),
        "species_v": sc.species_v.scaled(2.0),
        "stepper": sc.stepper.model_copy(update={"dt": 0.005}),
    })
    assert doubled.species_u.d == 2.0 and doubled.species_u.r_mult == 2.0
    for label in ("u", "v"):
        base = dynamics_service.solve_single_steady(sc, label)
        scaled = dynamics_service.solve_single_steady(doubled, label)
        assert np.max(np.abs(base.values - scaled.values)) <= 1e-8 * sc.K.sup_norm()


def test_run_is_first_order_in_dt():
    """Test para el refinamiento de dt: las diferencias con dt/4 caen a un tercio al pasar de dt a dt/2."""
    finals = []
    for dt in (0.02, 0.01, 0.005):
        sc = build_scenario(K=HETEROGENEOUS_K, P="1 + 0.3*x", a="0.5", dt=dt, t_end=2.0, tol_steady=1e-14)
        _, final, steady = dynamics_service.run(sc)
        assert not steady
        assert final.t == pytest.approx(2.0)
        finals.append(np.concatenate([final.u.values, final.v.values]))
    coarse = np.max(np.abs(finals[0] - finals[2]))
    medium = np.max(np.abs(finals[1] - finals[2]))
    assert coarse < 1e-2
    assert medium < 0.5 * coarse
