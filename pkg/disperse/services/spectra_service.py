"""
Autovalores principales de ψ ↦ ∇·[d·a∇(ψ/P)] + c(x)ψ con flujo nulo, y
cocientes de Rayleigh en funciones de prueba.

En la variable w = ψ/P el problema discreto es A w + diag(cP) w = σ diag(P) w
con A simétrica; con y = √P·w queda una matriz tridiagonal simétrica.
"""
import logging
from typing import Dict, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from disperse.core.config import get_settings
from disperse.core.errors import (
    convergence_error,
    ill_conditioned_error,
    linear_solve_error,
    zero_field_error,
)
from disperse.models.grid_model import spatial_field
from disperse.models.report_schema import eigen_result, instability_report, linearized_problem
from disperse.models.scenario_schema import scenario
from disperse.services.dynamics_service import dynamics_service
from disperse.services.grid_service import grid_service

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


class spectra_service:
    """
    Operaciones del módulo espectral.
    """

    @staticmethod
    def problem(op, potential: spatial_field, label: str = "problema") -> linearized_problem:
        return linearized_problem(op=op, potential=potential, label=label)

    @staticmethod
    def principal_eigen(problem: linearized_problem) -> eigen_result:
        """
        Autovalor principal y autofunción positiva (max ψ = 1).

        Usa el solver tridiagonal simétrico denso si n_cells ≤ eigen_dense_max_cells;
        si no, iteración inversa desplazada.

        Raises:
            convergence_error: Si la iteración inversa no converge antes del tope.
        """
        numerics = get_settings().numerics
        if problem.op.grid.n_cells <= numerics.eigen_dense_max_cells:
            return spectra_service._dense(problem)
        return spectra_service._inverse_iteration(problem)

    @staticmethod
    def residual(problem: linearized_problem, psi: np.ndarray, sigma: float) -> float:
        """‖L ψ + cψ − σψ‖∞."""
        c = problem.potential.values
        return float(np.max(np.abs(problem.op.apply_values(psi) + c * psi - sigma * psi)))

    @staticmethod
    def _residual_bound(problem: linearized_problem, sigma: float) -> float:
        numerics = get_settings().numerics
        scale = problem.potential.sup_norm() + abs(sigma)
        return numerics.eigen_residual_tol * scale + 64.0 * _EPS * problem.op.norm_inf()

    @staticmethod
    def _finish(problem: linearized_problem, psi: np.ndarray, iterations: int, method: str) -> eigen_result:
        if np.mean(psi) < 0.0:
            psi = -psi
        psi = psi / np.max(psi)
        field = problem.potential.with_values(psi, name="psi")
        sigma = spectra_service.rayleigh_quotient(problem, field)
        residual = spectra_service.residual(problem, psi, sigma)
        if residual > spectra_service._residual_bound(problem, sigma):
            logger.warning("%s: residuo del autopar %.3e por encima de la cota", problem.label, residual)
        if np.min(psi) <= 0.0:
            logger.warning("%s: la autofunción principal no es estrictamente positiva", problem.label)
        logger.debug("%s: sigma1=%.12g residuo=%.3e (%s, %d iteraciones)",
                     problem.label, sigma, residual, method, iterations)
        return eigen_result(sigma1=sigma, psi=field, residual=residual, iterations=iterations, method=method)

    @staticmethod
    def _dense(problem: linearized_problem) -> eigen_result:
        op = problem.op
        P = op.strategy.values
        c = problem.potential.values
        n = op.grid.n_cells
        flux = op.face_coef
        diag = c.copy()
        diag[:-1] -= flux / P[:-1]
        diag[1:] -= flux / P[1:]
        off = flux / np.sqrt(P[:-1] * P[1:])
        _, vectors = eigh_tridiagonal(diag, off, select="i", select_range=(n - 1, n - 1))
        psi = np.sqrt(P) * vectors[:, 0]
        return spectra_service._finish(problem, psi, 0, "dense")

    @staticmethod
    def _inverse_iteration(problem: linearized_problem) -> eigen_result:
        """
        Iteración inversa sobre M = L + diag(c), que es Metzler e irreducible.
        Las cotas de Collatz–Wielandt min(Mψ/ψ) ≤ σ₁ ≤ max(Mψ/ψ) fijan el desplazamiento
        s > σ₁, de modo que sI − M es una M-matriz y los iterados siguen positivos.
        """
        numerics = get_settings().numerics
        op = problem.op
        c = problem.potential.values
        floor = 64.0 * _EPS * op.norm_inf()
        psi = op.strategy.values / np.max(op.strategy.values)
        for iteration in range(1, numerics.eigen_max_iterations + 1):
            image = op.apply_values(psi) + c * psi
            ratios = image / psi
            lower, upper = float(np.min(ratios)), float(np.max(ratios))
            sigma = 0.5 * (lower + upper)
            scale = problem.potential.sup_norm() + abs(sigma)
            tol = numerics.eigen_residual_tol * scale + floor
            if upper - lower <= tol or float(np.max(np.abs(image - sigma * psi))) <= tol * np.max(psi):
                return spectra_service._finish(problem, psi, iteration, "inverse_iteration")
            shift = upper + max(upper - lower, _EPS * max(scale, 1.0))
            ab = op.shifted_banded(shift, 1.0)
            ab[1] -= c
            try:
                psi = solve_banded((1, 1), ab, psi, check_finite=False)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise linear_solve_error(f"fallo del solver en la iteración inversa: {exc}") from exc
            psi = psi / np.max(np.abs(psi))
        residual = spectra_service.residual(problem, psi, sigma)
        raise convergence_error(
            f"{problem.label}: la iteración inversa no convergió en {numerics.eigen_max_iterations} iteraciones",
            residual,
        )

    @staticmethod
    def rayleigh_quotient(problem: linearized_problem, trial: spatial_field) -> float:
        """
        [−∫ d·a |∇(ψ/P)|² dx + ∫ c ψ²/P dx] / ∫ ψ²/P dx evaluado en ψ = trial.

        Raises:
            zero_field_error: Si la función de prueba es idénticamente nula.
        """
        op = problem.op
        trial.require_same_grid(problem.potential)
        strategy = op.strategy
        denominator = grid_service.integrate(trial * trial / strategy)
        if denominator == 0.0:
            raise zero_field_error("el cociente de Rayleigh requiere una función de prueba no nula")
        dispersal = grid_service.gradient_sq_weighted(trial / strategy, op.a * op.d)
        potential = grid_service.integrate(problem.potential * trial * trial / strategy)
        return (potential - dispersal) / denominator

    @staticmethod
    def zero_problems(sc: scenario) -> Dict[str, linearized_problem]:
        """Linealizaciones en (0, 0): potencial r_mult·r para cada especie."""
        op_u, op_v = dynamics_service.operators(sc)
        return {
            "zero_u": spectra_service.problem(op_u, sc.r * sc.species_u.r_mult, "zero_u"),
            "zero_v": spectra_service.problem(op_v, sc.r * sc.species_v.r_mult, "zero_v"),
        }

    @staticmethod
    def invasion_problems(
        sc: scenario, u_star: Optional[spatial_field], v_star: Optional[spatial_field]
    ) -> Dict[str, linearized_problem]:
        """
        Linealizaciones del invasor en los estados semi-triviales:
        u invadiendo (0, v*) con c = r₁·r(1 − v*/K) y v invadiendo (u*, 0) con c = r₂·r(1 − u*/K).
        """
        op_u, op_v = dynamics_service.operators(sc)
        problems = {}
        if v_star is not None:
            potential = sc.r * (1.0 - v_star / sc.K) * sc.species_u.r_mult
            problems["u_at_v_star"] = spectra_service.problem(op_u, potential, "u_at_v_star")
        if u_star is not None:
            potential = sc.r * (1.0 - u_star / sc.K) * sc.species_v.r_mult
            problems["v_at_u_star"] = spectra_service.problem(op_v, potential, "v_at_u_star")
        return problems

    @staticmethod
    def instability_certificates(
        sc: scenario, u_star: spatial_field, v_star: spatial_field
    ) -> instability_report:
        """
        σ₁ en (0, 0) para cada especie y del invasor en cada estado semi-trivial,
        con cocientes de Rayleigh de funciones de prueba como cotas inferiores:
        √(K·P), √α·P y v* para u invadiendo (0, v*); √(K·Q), √β·Q y u* para v invadiendo (u*, 0).
        """
        zero = spectra_service.zero_problems(sc)
        invasion = spectra_service.invasion_problems(sc, u_star, v_star)
        sigma = {name: spectra_service.principal_eigen(p).sigma1 for name, p in {**zero, **invasion}.items()}

        u_inv = invasion["u_at_v_star"]
        v_inv = invasion["v_at_u_star"]
        trials = {
            "u_at_v_star:sqrt(K*P)": (u_inv, sc.K.with_values(np.sqrt(sc.K.values * sc.P.values))),
            "u_at_v_star:v_star": (u_inv, v_star),
            "v_at_u_star:sqrt(K*Q)": (v_inv, sc.K.with_values(np.sqrt(sc.K.values * sc.Q.values))),
            "v_at_u_star:u_star": (v_inv, u_star),
        }
        try:
            hull = grid_service.positive_hull_coefficients(sc.K, sc.P, sc.Q)
        except (ill_conditioned_error, zero_field_error) as exc:
            logger.debug("sin envolvente positiva para los testigos: %s", exc)
            hull = None
        if hull is not None:
            alpha, beta = hull
            trials["u_at_v_star:sqrt(alpha)*P"] = (u_inv, sc.P * float(np.sqrt(alpha)))
            trials["v_at_u_star:sqrt(beta)*Q"] = (v_inv, sc.Q * float(np.sqrt(beta)))
        witnesses = {name: spectra_service.rayleigh_quotient(p, trial) for name, (p, trial) in trials.items()}
        return instability_report(
            sigma_zero_u=sigma["zero_u"],
            sigma_zero_v=sigma["zero_v"],
            sigma_at_v_star=sigma["u_at_v_star"],
            sigma_at_u_star=sigma["v_at_u_star"],
            witnesses=witnesses,
        )
