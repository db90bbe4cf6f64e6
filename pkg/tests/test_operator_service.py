"""
Tests para el operador de dispersión u ↦ ∇·[d·a∇(u/P)].
"""
import math

import numpy as np
import pytest

from disperse.core.errors import field_mismatch_error, non_positive_field_error
from disperse.models.grid_model import grid_1d, spatial_field
from disperse.services.grid_service import grid_service
from disperse.services.operator_service import operator_service


def _assemble(grid, a="1", P="1", d=1.0):
    return operator_service.assemble(
        grid, grid_service.sample_text(a, grid, name="a"), grid_service.sample_text(P, grid, name="P"), d
    )


def test_constant_coefficients_give_scaled_laplacian(grid64):
    """Test para a ≡ 2, P ≡ 4, d = 3: (a·d/p)·Laplaciano de 3 puntos en las celdas interiores."""
    op = _assemble(grid64, a="2", P="4", d=3.0)
    u = grid_service.sample_text("x^2 + sin(3*x)", grid64)
    lu = op.apply(u).values
    h = grid64.h
    expected = 1.5 * (u.values[:-2] - 2 * u.values[1:-1] + u.values[2:]) / h ** 2
    assert np.allclose(lu[1:-1], expected, rtol=1e-12, atol=1e-9)
    # celdas de frontera: flujo nulo
    assert lu[0] == pytest.approx(1.5 * (u.values[1] - u.values[0]) / h ** 2, rel=1e-12)


@pytest.mark.parametrize("a,P", [("1", "1 + 0.5*cos(pi*x)"), ("exp(x)", "2 + sin(3*x)"),
                                 ("0.1 + x^2", "1 + x")])
def test_strategy_is_in_the_kernel(grid64, a, P):
    """Test para L P = 0 a precisión de máquina."""
    op = _assemble(grid64, a=a, P=P, d=2.5)
    lp = op.apply(op.strategy).values
    assert np.max(np.abs(lp)) <= 1e-13 * op.norm_inf() * op.strategy.sup_norm()


def test_ideal_free_profile_is_stationary():
    """Test para P = K: u* = K anula el residuo estacionario completo."""
    grid = grid_1d(n_cells=128)
    K = grid_service.sample_text("1 + 0.5*cos(pi*x)", grid)
    op = operator_service.assemble(grid, spatial_field.constant(grid, 1.0), K, 1.0)
    residual = op.apply(K).values + K.values * (1.0 - K.values / K.values)
    assert np.max(np.abs(residual)) < 1e-12


def test_apply_zero_and_multiples_of_strategy(grid64):
    op = _assemble(grid64, a="1 + x", P="1 + 0.5*cos(pi*x)")
    zero = spatial_field.constant(grid64, 0.0)
    assert np.all(operator_service.apply(op, zero).values == 0.0)
    seven = 7.0 * op.strategy
    assert np.max(np.abs(operator_service.apply(op, seven).values)) <= 1e-13 * op.norm_inf() * seven.sup_norm()


def test_mass_conservation_random_fields(grid64):
    """Test para h·Σ (L u)_i = 0 con u aleatorio positivo."""
    op = _assemble(grid64, a="1 + x", P="1 + 0.5*cos(pi*x)", d=2.0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = spatial_field(grid=grid64, values=rng.uniform(0.1, 2.0, grid64.n_cells))
        mass = grid_service.integrate(op.apply(u))
        assert abs(mass) <= 1e-13 * u.sup_norm() * op.norm_inf() * grid64.length


def test_matrix_structure(grid64):
    """Test para la forma matricial: coincide con la forma de flujos y tiene off-diagonales no negativas."""
    op = _assemble(grid64, a="1 + x", P="1 + 0.5*cos(pi*x)")
    u = grid_service.sample_text("cos(2*x)", grid64)
    assert np.allclose(op.to_dense() @ u.values, op.apply_values(u), rtol=1e-12, atol=1e-9)
    assert np.all(op.sub > 0.0) and np.all(op.sup > 0.0)
    assert np.all(op.diag < 0.0)
    triplets = list(op.triplets())
    assert len(triplets) == 3 * grid64.n_cells - 2
    assert triplets[0] == (0, 0, float(op.diag[0]))


def test_shifted_banded_is_diagonally_dominant(grid64):
    """Test para I − dt·L: dominancia diagonal por columnas (las columnas de L suman cero)."""
    op = _assemble(grid64, a="1 + x", P="1 + 0.5*cos(pi*x)")
    ab = op.shifted_banded(1.0, 10.0)
    # en formato de bandas cada columna de la matriz es una columna de ab
    off = np.abs(ab[0]) + np.abs(ab[2])
    assert np.all(ab[1] > off)


def test_assemble_rejects_non_positive(grid64):
    a = spatial_field.constant(grid64, 1.0)
    with pytest.raises(non_positive_field_error):
        operator_service.assemble(grid64, a, grid_service.sample_text("x - 0.5", grid64, name="P"), 1.0)
    with pytest.raises(non_positive_field_error):
        operator_service.assemble(grid64, a, a, 0.0)


def test_apply_on_other_grid(grid64, grid4):
    op = _assemble(grid64)
    with pytest.raises(field_mismatch_error):
        op.apply(spatial_field.constant(grid4, 1.0))


def test_advection_equivalent_zero_advection(grid64):
    K = grid_service.sample_text("1 + 0.5*cos(pi*x)", grid64)
    a, P, r = operator_service.advection_equivalent(0.7, 0.0, K)
    assert np.all(P.values == 1.0)
    assert np.allclose(a.values, 0.7)
    assert np.array_equal(r.values, K.values)


def test_advection_equivalent_constant_K(grid64):
    """Test para K ≡ k₀: P ≡ a ≡ exp(k₀) y el operador se reduce a Δu."""
    K = spatial_field.constant(grid64, 1.5)
    a, P, _ = operator_service.advection_equivalent(1.0, 1.0, K)
    assert np.allclose(P.values, math.exp(1.5))
    assert np.allclose(a.values, math.exp(1.5))
    op = operator_service.assemble(grid64, a, P, 1.0)
    u = grid_service.sample_text("cos(pi*x)", grid64)
    lu = op.apply(u).values
    expected = (u.values[:-2] - 2 * u.values[1:-1] + u.values[2:]) / grid64.h ** 2
    assert np.allclose(lu[1:-1], expected, rtol=1e-10)


def test_advection_equivalent_consistency_order():
    """Test para ∇·[μ∇u − αu∇K]: error O(h²) en las celdas interiores al refinar."""
    mu, alpha = 1.0, 0.5
    errors = []
    for n in (64, 128, 256):
        grid = grid_1d(n_cells=n)
        x = grid.centers
        K = grid_service.sample_text("1 + 0.5*cos(pi*x)", grid)
        a, P, _ = operator_service.advection_equivalent(mu, alpha, K)
        op = operator_service.assemble(grid, a, P, 1.0)
        u = grid_service.sample_text("1 + 0.3*cos(2*pi*x)", grid)
        du = -0.6 * math.pi * np.sin(2 * math.pi * x)
        d2u = -1.2 * math.pi ** 2 * np.cos(2 * math.pi * x)
        dK = -0.5 * math.pi * np.sin(math.pi * x)
        d2K = -0.5 * math.pi ** 2 * np.cos(math.pi * x)
        exact = mu * d2u - alpha * (du * dK + u.values * d2K)
        errors.append(np.max(np.abs(op.apply(u).values[1:-1] - exact[1:-1])))
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8


def test_noncorrespondence(grid64):
    """Test para ∇·[a∇(K/P)]: nulo si P ∝ K, no nulo en otro caso."""
    K = grid_service.sample_text("2 + 0.5*cos(pi*x)", grid64)
    a = spatial_field.constant(grid64, 1.0)
    assert not operator_service.noncorrespondence(K, 0.5 * K, a)
    assert operator_service.noncorrespondence(K, spatial_field.constant(grid64, 1.0), a)
