"""
Integración temporal del sistema de competencia con dispersión dirigida por estrategia.

Esquema semi-implícito: dispersión implícita (una resolución tridiagonal por especie
y paso) y reacción logística explícita.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from disperse.core.config import get_settings
from disperse.core.errors import (
    convergence_error,
    linear_solve_error,
    non_positive_field_error,
    timestep_error,
)
from disperse.models.grid_model import spatial_field
from disperse.models.operator_model import dispersal_operator
from disperse.models.scenario_schema import scenario, species_label, state, time_series
from disperse.services.operator_service import operator_service

logger = logging.getLogger(__name__)


class _marcher:
    """
    Avanza el par (u, v) con dt fijo. Mantiene las matrices en bandas de (I − dt·L).
    """

    def __init__(self, sc: scenario, dt: float):
        self.sc = sc
        self.dt = dt
        self.op_u, self.op_v = dynamics_service.operators(sc)
        self.ab_u = self.op_u.shifted_banded(1.0, dt)
        self.ab_v = self.op_v.shifted_banded(1.0, dt)
        self.K = sc.K.values
        self.growth_u = sc.species_u.r_mult * sc.r.values
        self.growth_v = sc.species_v.r_mult * sc.r.values
        self.k_sup = float(np.max(np.abs(self.K)))
        self.negativity_tol = get_settings().stepper.negativity_tol

    def advance(self, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        dynamics_service.check_timestep(self.sc, u, v, self.dt)
        crowding = 1.0 - (u + v) / self.K
        rhs_u = u + self.dt * self.growth_u * u * crowding
        rhs_v = v + self.dt * self.growth_v * v * crowding
        u_new = self._solve(self.ab_u, rhs_u)
        v_new = self._solve(self.ab_v, rhs_v)
        for label, values in (("u", u_new), ("v", v_new)):
            low = float(np.min(values))
            if low < -self.negativity_tol * self.k_sup:
                raise timestep_error(
                    f"la especie {label} tomó el valor negativo {low:.3e}: "
                    f"paso de tiempo demasiado grande (dt={self.dt})"
                )
        return u_new, v_new

    @staticmethod
    def _solve(ab: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return solve_banded((1, 1), ab, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise linear_solve_error(f"fallo del solver tridiagonal: {exc}") from exc


class dynamics_service:
    """
    Operaciones del módulo de dinámica: paso, corrida completa y estados
    estacionarios de una sola especie.
    """

    @staticmethod
    def operators(sc: scenario) -> Tuple[dispersal_operator, dispersal_operator]:
        """Operadores de dispersión de u (con P, d₁, a₁) y de v (con Q, d₂, a₂)."""
        op_u = operator_service.assemble(sc.grid, sc.a_for("u"), sc.P, sc.species_u.d)
        op_v = operator_service.assemble(sc.grid, sc.a_for("v"), sc.Q, sc.species_v.d)
        return op_u, op_v

    @staticmethod
    def reaction_number(sc: scenario, u: np.ndarray, v: np.ndarray, dt: float) -> float:
        """dt·max(r₁, r₂)·max r·(1 + 2(‖u‖∞ + ‖v‖∞)/min K); debe ser < 1."""
        r_mult = max(sc.species_u.r_mult, sc.species_v.r_mult)
        return dynamics_service.bound_number(sc.r.values, sc.K.values, r_mult, u, v, dt)

    @staticmethod
    def bound_number(r: np.ndarray, K: np.ndarray, r_mult: float, u: np.ndarray, v: np.ndarray, dt: float) -> float:
        sup = float(np.max(np.abs(u))) + float(np.max(np.abs(v)))
        return dt * r_mult * float(np.max(r)) * (1.0 + 2.0 * sup / float(np.min(K)))

    @staticmethod
    def raise_timestep(dt: float, number: float) -> None:
        if not number < 1.0:
            raise timestep_error(
                f"paso de tiempo demasiado grande: dt={dt} da un número de reacción {number:.3e} >= 1"
            )

    @staticmethod
    def check_timestep(sc: scenario, u: np.ndarray, v: np.ndarray, dt: float) -> None:
        """
        Raises:
            timestep_error: Si el paso viola la cota de reacción.
        """
        dynamics_service.raise_timestep(dt, dynamics_service.reaction_number(sc, u, v, dt))

    @staticmethod
    def step(st: state, sc: scenario) -> state:
        """
        Un paso semi-implícito para ambas especies:
        (I − dt·L_u) u^{n+1} = u^n + dt·r₁·r·u^n(1 − (u^n+v^n)/K), y análogo para v.

        Raises:
            timestep_error: Cota de reacción violada o negatividad por debajo de la tolerancia.
            linear_solve_error: Fallo del solver.
        """
        marcher = _marcher(sc, sc.stepper.dt)
        u_new, v_new = marcher.advance(st.u.values, st.v.values)
        return state(t=st.t + sc.stepper.dt, u=st.u.with_values(u_new, name="u"),
                     v=st.v.with_values(v_new, name="v"))

    @staticmethod
    def run(sc: scenario) -> Tuple[time_series, state, bool]:
        """
        Integra hasta t_end o hasta estado estacionario: las tasas ‖u_{n+1}−u_n‖∞/dt
        y su análoga de v quedan bajo tol_steady·max(‖u‖∞, ‖v‖∞, 1) durante
        steady_window pasos consecutivos.

        Returns:
            (serie temporal, estado final, estacionario)
        """
        series, final, steady = dynamics_service._march(sc, sc.u0.values, sc.v0.values, sc.stepper.tol_steady)
        return series, final, steady

    @staticmethod
    def _march(
        sc: scenario, u: np.ndarray, v: np.ndarray, tol_steady: float
    ) -> Tuple[time_series, state, bool]:
        cfg = sc.stepper
        window = get_settings().stepper.steady_window
        dt = cfg.dt
        marcher = _marcher(sc, dt)
        h = sc.grid.h
        n_steps = max(1, int(math.ceil(cfg.t_end / dt - 1e-9)))
        series = time_series()
        calm = 0
        steady = False
        k = 0
        rate_u = rate_v = float("nan")
        logger.info("inicio de la corrida: n_cells=%d dt=%g t_end=%g", sc.grid.n_cells, dt, cfg.t_end)
        while k < n_steps:
            u_new, v_new = marcher.advance(u, v)
            k += 1
            rate_u = float(np.max(np.abs(u_new - u))) / dt
            rate_v = float(np.max(np.abs(v_new - v))) / dt
            u, v = u_new, v_new
            sup_u = float(np.max(np.abs(u)))
            sup_v = float(np.max(np.abs(v)))
            threshold = tol_steady * max(sup_u, sup_v, 1.0)
            calm = calm + 1 if (rate_u < threshold and rate_v < threshold) else 0
            if k % cfg.record_every == 0:
                series.append(k * dt, h * float(np.sum(u)), h * float(np.sum(v)), sup_u, sup_v, rate_u, rate_v)
            if calm >= window:
                steady = True
                break
        t_final = k * dt
        series.append(t_final, h * float(np.sum(u)), h * float(np.sum(v)),
                      float(np.max(np.abs(u))), float(np.max(np.abs(v))), rate_u, rate_v)
        if steady:
            logger.info("estado estacionario detectado en t=%g (%d pasos)", t_final, k)
        else:
            logger.warning("t_end=%g alcanzado sin estado estacionario (tasas %.3e, %.3e)",
                           cfg.t_end, rate_u, rate_v)
        final = state(t=t_final, u=sc.u0.with_values(u, name="u"), v=sc.v0.with_values(v, name="v"))
        return series, final, steady

    @staticmethod
    def stationary_residual(sc: scenario, label: species_label, profile: spatial_field) -> float:
        """‖d·L u* + r_mult·r·u*(1 − u*/K)‖∞ de la ecuación de una sola especie."""
        op_u, op_v = dynamics_service.operators(sc)
        op = op_u if label == "u" else op_v
        growth = sc.species(label).r_mult * sc.r.values
        values = profile.values
        return float(np.max(np.abs(op.apply_values(values) + growth * values * (1.0 - values / sc.K.values))))

    @staticmethod
    def solve_single_steady(
        sc: scenario, label: species_label, initial: Optional[spatial_field] = None
    ) -> spatial_field:
        """
        Estado estacionario de una sola especie por integración temporal (la otra ≡ 0).

        Args:
            sc: Escenario.
            label: "u" o "v".
            initial: Dato inicial positivo (por defecto K).

        Returns:
            spatial_field: u* (o v*) con residuo ≤ steady_residual_rtol·‖r_mult·r·K‖∞.

        Raises:
            non_positive_field_error: Dato inicial no positivo.
            convergence_error: Sin convergencia hasta t_end (con el residuo alcanzado).
        """
        stepper = get_settings().stepper
        guess = sc.K if initial is None else initial
        if np.any(guess.values <= 0.0):
            raise non_positive_field_error("el dato inicial del problema estacionario debe ser positivo")
        zero = np.zeros(sc.grid.n_cells)
        u, v = (guess.values, zero) if label == "u" else (zero, guess.values)
        tol = min(sc.stepper.tol_steady, 0.1 * stepper.steady_residual_rtol)
        _, final, steady = dynamics_service._march(sc, u, v, tol)
        profile = final.u if label == "u" else final.v
        profile = profile.with_values(profile.values, name=f"{label}*")
        residual = dynamics_service.stationary_residual(sc, label, profile)
        scale = sc.species(label).r_mult * float(np.max(np.abs(sc.r.values * sc.K.values)))
        if not steady or residual > stepper.steady_residual_rtol * scale:
            raise convergence_error(
                f"el estado estacionario de {label} no convergió hasta t_end={sc.stepper.t_end}", residual
            )
        logger.debug("estado estacionario de %s: residuo %.3e", label, residual)
        return profile

    @staticmethod
    def default_initial_data(sc_K: spatial_field) -> Tuple[spatial_field, spatial_field]:
        """u0 = 0.3K, v0 = 0.3K + 0.01K·cos(πξ)."""
        xi = sc_K.grid.normalized()
        u0 = sc_K.with_values(0.3 * sc_K.values, name="u0")
        v0 = sc_K.with_values(0.3 * sc_K.values + 0.01 * sc_K.values * np.cos(np.pi * xi), name="v0")
        return u0, v0

    @staticmethod
    def random_initial_data(sc_K: spatial_field, seed: int) -> Tuple[spatial_field, spatial_field]:
        """
        Datos iniciales suaves y positivos: K·(b + Σ_k c_k cos(kπξ)) con
        b ∈ [0.2, 0.6] y c_k ∈ [−0.04, 0.04], k = 1..4, a partir de la semilla.
        """
        rng = np.random.default_rng(seed)
        xi = sc_K.grid.normalized()
        modes = np.cos(np.pi * np.outer(np.arange(1, 5), xi))
        profiles = []
        for name in ("u0", "v0"):
            base = rng.uniform(0.2, 0.6)
            coeffs = rng.uniform(-0.04, 0.04, size=4)
            profiles.append(sc_K.with_values(sc_K.values * (base + coeffs @ modes), name=name))
        return profiles[0], profiles[1]

    @staticmethod
    def seed_invader(st: state, label: species_label, amplitude: float, profile: spatial_field) -> state:
        """Añade amplitude·profile a la especie indicada (invasor pequeño; profile suele ser K o ψ)."""
        if label == "u":
            return state(t=st.t, u=st.u + amplitude * profile, v=st.v)
        return state(t=st.t, u=st.u, v=st.v + amplitude * profile)

    @staticmethod
    def invader_growth_rate(
        sc: scenario,
        resident: state,
        label: species_label,
        profile: spatial_field,
        horizon: Optional[float] = None,
        amplitude: Optional[float] = None,
    ) -> float:
        """
        Tasa media log(m(T)/m(0))/T de la masa del invasor sembrado sobre un estado semi-trivial.

        Args:
            sc: Escenario (usa su dt y sus operadores).
            resident: Estado semi-trivial (0, v*) o (u*, 0).
            label: Especie invasora.
            profile: Forma de la semilla; con la autofunción principal ψ no hay transitorio.
            horizon: Ventana T (por defecto numerics.invasion_window).
            amplitude: Amplitud relativa a ‖K‖∞ (por defecto numerics.invasion_amplitude).
        """
        numerics = get_settings().numerics
        horizon = numerics.invasion_window if horizon is None else horizon
        amplitude = numerics.invasion_amplitude if amplitude is None else amplitude
        scale = amplitude * sc.K.sup_norm() / profile.sup_norm()
        seeded = dynamics_service.seed_invader(resident, label, scale, profile)
        marcher = _marcher(sc, sc.stepper.dt)
        u, v = seeded.u.values, seeded.v.values
        start = float(np.sum(u if label == "u" else v))
        n_steps = max(1, int(math.ceil(horizon / sc.stepper.dt - 1e-9)))
        for _ in range(n_steps):
            u, v = marcher.advance(u, v)
        end = float(np.sum(u if label == "u" else v))
        return math.log(end / start) / (n_steps * sc.stepper.dt)
