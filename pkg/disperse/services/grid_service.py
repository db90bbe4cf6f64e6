"""
Operaciones de dominio sobre campos espaciales: muestreo de perfiles,
cuadratura de punto medio, integrales de Dirichlet ponderadas y
predicados de independencia lineal y de envolvente positiva.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from disperse.core.config import get_settings
from disperse.core.errors import ill_conditioned_error, profile_evaluation_error, zero_field_error
from disperse.models.grid_model import grid_1d, spatial_field
from disperse.models.profile_model import profile_expr
from disperse.services.profile_service import profile_service

logger = logging.getLogger(__name__)


class grid_service:
    """
    Servicio con las operaciones del módulo de dominio.
    """

    @staticmethod
    def sample(expr: profile_expr, grid: grid_1d, name: Optional[str] = None) -> spatial_field:
        """
        Evalúa la expresión en los centros de celda.

        Raises:
            profile_evaluation_error: Con la coordenada x de la celda problemática.
        """
        centers = grid.centers
        try:
            values = profile_service.evaluate(expr, centers)
        except profile_evaluation_error as exc:
            raise profile_evaluation_error(exc.reason, exc.index, float(centers[exc.index])) from exc
        return spatial_field(grid=grid, values=values, name=name)

    @staticmethod
    def sample_text(text: str, grid: grid_1d, name: Optional[str] = None) -> spatial_field:
        """Atajo: analiza y muestrea una expresión de texto."""
        return grid_service.sample(profile_service.parse_profile(text), grid, name=name)

    @staticmethod
    def integrate(f: spatial_field) -> float:
        """Regla del punto medio: h·Σ f_i."""
        return float(f.grid.h * np.sum(f.values))

    @staticmethod
    def gradient_sq_weighted(f: spatial_field, weight: spatial_field) -> float:
        """
        Integral discreta ∫ weight·|∇f|² dx sobre las interfaces interiores.

        El peso en la interfaz i+1/2 es la media aritmética de las celdas vecinas;
        las interfaces de frontera no contribuyen (flujo nulo).
        """
        f.require_same_grid(weight)
        h = f.grid.h
        w_face = 0.5 * (weight.values[1:] + weight.values[:-1])
        grad = np.diff(f.values) / h
        return float(np.sum(w_face * grad * grad) * h)

    @staticmethod
    def sine_of_angle_sq(f: spatial_field, g: spatial_field) -> float:
        """
        Cuadrado del seno del ángulo entre los vectores de valores,
        1 − ⟨f,g⟩²/(⟨f,f⟩⟨g,g⟩), calculado por proyección para que
        campos proporcionales den ~0 sin cancelación.

        Raises:
            zero_field_error: Si alguno de los campos es idénticamente nulo.
        """
        f.require_same_grid(g)
        nf = np.linalg.norm(f.values)
        ng = np.linalg.norm(g.values)
        if nf == 0.0 or ng == 0.0:
            raise zero_field_error("la comparación de independencia requiere campos no nulos")
        fu = f.values / nf
        gu = g.values / ng
        residual = gu - np.dot(fu, gu) * fu
        return float(np.dot(residual, residual))

    @staticmethod
    def linearly_independent(f: spatial_field, g: spatial_field, tol: Optional[float] = None) -> bool:
        """
        True si el seno del ángulo entre f y g supera tol (por defecto numerics.independence_tol).
        """
        tol = get_settings().numerics.independence_tol if tol is None else tol
        return grid_service.sine_of_angle_sq(f, g) > tol * tol

    @staticmethod
    def proportionality_factor(f: spatial_field, g: spatial_field, tol: Optional[float] = None) -> Optional[float]:
        """
        Devuelve c tal que g ≈ c·f si los campos son dependientes; None en caso contrario.
        """
        if grid_service.linearly_independent(f, g, tol):
            return None
        return float(np.dot(f.values, g.values) / np.dot(f.values, f.values))

    @staticmethod
    def positive_hull_coefficients(
        K: spatial_field,
        P: spatial_field,
        Q: spatial_field,
        tol: Optional[float] = None,
    ) -> Optional[Tuple[float, float]]:
        """
        Ajuste por mínimos cuadrados K ≈ αP + βQ.

        Returns:
            (α, β) si ambos superan tol y el residuo relativo ‖K − αP − βQ‖₂/‖K‖₂ < tol;
            None en caso contrario.

        Raises:
            ill_conditioned_error: Si P y Q son casi dependientes.
        """
        numerics = get_settings().numerics
        tol = numerics.hull_tol if tol is None else tol
        K.require_same_grid(P)
        K.require_same_grid(Q)
        design = np.column_stack([P.values, Q.values])
        scale = np.linalg.norm(design, axis=0)
        if np.any(scale == 0.0):
            raise zero_field_error("P y Q deben ser no nulos")
        condition = np.linalg.cond(design / scale)
        if not np.isfinite(condition) or condition > numerics.hull_max_condition:
            raise ill_conditioned_error(
                f"ecuaciones normales mal condicionadas (cond={condition:.3e}): P y Q casi dependientes"
            )
        coeffs, *_ = np.linalg.lstsq(design / scale, K.values, rcond=None)
        alpha, beta = (coeffs / scale).tolist()
        residual = np.linalg.norm(K.values - alpha * P.values - beta * Q.values) / np.linalg.norm(K.values)
        logger.debug("ajuste de envolvente: alpha=%.6g beta=%.6g residuo=%.3e", alpha, beta, residual)
        if alpha > tol and beta > tol and residual < tol:
            return alpha, beta
        return None
