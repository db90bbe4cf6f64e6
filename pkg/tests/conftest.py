"""
Fixtures compartidas: mallas, perfiles y escenarios pequeños para que la batería corra rápido.
"""
from pathlib import Path
from typing import Optional, Tuple

import pytest

from disperse.models.grid_model import grid_1d
from disperse.models.scenario_schema import scenario, species_params, stepper_config
from disperse.services.dynamics_service import dynamics_service
from disperse.services.grid_service import grid_service

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIOS_DIR = REPO_ROOT / "scenarios"

# K muy heterogéneo: la exclusión se resuelve en pocas decenas de unidades de tiempo
HETEROGENEOUS_K = "1 + 0.8*cos(pi*x)"


def build_scenario(
    n_cells: int = 32,
    K: str = "2 + 0.5*cos(pi*x)",
    P: str = "1",
    Q: str = "1",
    r: str = "1",
    a: str = "1",
    d: Tuple[float, float] = (1.0, 1.0),
    r_mult: Tuple[float, float] = (1.0, 1.0),
    u0: Optional[str] = None,
    v0: Optional[str] = None,
    dt: float = 0.01,
    t_end: float = 400.0,
    tol_steady: float = 1e-10,
    record_every: int = 10,
    seed: int = 0,
    x_right: float = 1.0,
) -> scenario:
    """Construye un escenario a partir de expresiones; u0/v0 = None usa el preset por defecto."""
    grid = grid_1d(n_cells=n_cells, x_right=x_right)
    fields = {name: grid_service.sample_text(text, grid, name=name)
              for name, text in (("K", K), ("P", P), ("Q", Q), ("r", r), ("a", a))}
    default_u0, default_v0 = dynamics_service.default_initial_data(fields["K"])
    return scenario(
        grid=grid,
        K=fields["K"],
        r=fields["r"],
        a=fields["a"],
        species_u=species_params(strategy=fields["P"], d=d[0], r_mult=r_mult[0]),
        species_v=species_params(strategy=fields["Q"], d=d[1], r_mult=r_mult[1]),
        u0=default_u0 if u0 is None else grid_service.sample_text(u0, grid, name="u0"),
        v0=default_v0 if v0 is None else grid_service.sample_text(v0, grid, name="v0"),
        stepper=stepper_config(dt=dt, t_end=t_end, tol_steady=tol_steady, record_every=record_every),
        seed=seed,
    )


@pytest.fixture
def grid4():
    """Malla de 4 celdas sobre [0, 1] (centros 0.125, 0.375, 0.625, 0.875)."""
    return grid_1d(n_cells=4)


@pytest.fixture
def grid64():
    return grid_1d(n_cells=64)


@pytest.fixture
def coexistence_scenario():
    """Par ideal libre K = P + Q con P = 1 + 0.5cos(πx), Q = 1 + x."""
    return build_scenario(
        K="(1 + 0.5*cos(pi*x)) + (1 + x)", P="1 + 0.5*cos(pi*x)", Q="1 + x",
        dt=0.02, t_end=600.0,
    )


@pytest.fixture
def ideal_free_scenario():
    """P = K/2 (estrategia ideal libre), Q ≡ 1."""
    return build_scenario(K="2 + 0.5*cos(pi*x)", P="0.5*(2 + 0.5*cos(pi*x))", Q="1", dt=0.02)


@pytest.fixture
def slower_dispersal_scenario():
    """P ≡ Q ≡ 1, r₁ = r₂, d₁ = 1 < d₂ = 4 con a = 0.1."""
    return build_scenario(K=HETEROGENEOUS_K, a="0.1", d=(1.0, 4.0), tol_steady=1e-8)


@pytest.fixture
def scenario_file(tmp_path):
    """Devuelve una función que escribe un archivo de escenario y retorna su ruta."""
    def write(text: str, name: str = "scenario.ini") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
