"""
Servicio de ensamblado y aplicación del operador de dispersión.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from disperse.core.config import get_settings
from disperse.core.errors import non_positive_field_error
from disperse.models.grid_model import grid_1d, spatial_field
from disperse.models.operator_model import dispersal_operator

logger = logging.getLogger(__name__)


class operator_service:
    """
    Operaciones del módulo del operador: ensamblado, aplicación y
    equivalencia con el modelo de advección dirigida.
    """

    @staticmethod
    def assemble(grid: grid_1d, a: spatial_field, P: spatial_field, d: float) -> dispersal_operator:
        """
        Ensambla la matriz tridiagonal de u ↦ ∇·[d·a∇(u/P)] con flujo nulo de u/P en la frontera.

        Args:
            grid: Malla.
            a: Perfil positivo.
            P: Estrategia positiva.
            d: Multiplicador (> 0).

        Returns:
            dispersal_operator: Operador inmutable.

        Raises:
            non_positive_field_error: Si a, P o d no son positivos.
        """
        if not d > 0.0:
            raise non_positive_field_error(f"el multiplicador d debe ser positivo (recibido {d})")
        a.require_positive("a")
        P.require_positive("P")
        a_face = 0.5 * (a.values[1:] + a.values[:-1])
        face_coef = d * a_face / (grid.h * grid.h)
        n = grid.n_cells
        sup = face_coef / P.values[1:]
        sub = face_coef / P.values[:-1]
        diag = np.zeros(n)
        diag[:-1] -= face_coef
        diag[1:] -= face_coef
        diag /= P.values
        return dispersal_operator(
            grid=grid, strategy=P, a=a, d=float(d),
            face_coef=face_coef, sub=sub, diag=diag, sup=sup,
        )

    @staticmethod
    def apply(op: dispersal_operator, u: spatial_field) -> spatial_field:
        """
        Aplica el operador: devuelve L u.

        Raises:
            field_mismatch_error: Si u está en otra malla.
        """
        return op.apply(u)

    @staticmethod
    def advection_equivalent(
        mu: float, alpha: float, K: spatial_field
    ) -> Tuple[spatial_field, spatial_field, spatial_field]:
        """
        Parámetros (a, P, r) que reproducen ∇·[μ∇u − αu∇K] con reacción u(K − u):
        P = exp((α/μ)K), a = μP, r = K.

        Raises:
            non_positive_field_error: Si mu <= 0.
        """
        if not mu > 0.0:
            raise non_positive_field_error(f"mu debe ser positivo (recibido {mu})")
        P = K.with_values(np.exp((alpha / mu) * K.values), name="P")
        a = P.with_values(mu * P.values, name="a")
        r = K.with_values(K.values, name="r")
        return a, P, r

    @staticmethod
    def divergence_of_ratio(K: spatial_field, P: spatial_field, a: spatial_field) -> spatial_field:
        """∇·[a∇(K/P)] discreto (incluye la condición de flujo nulo en las celdas de frontera)."""
        op = operator_service.assemble(K.grid, a, P, 1.0)
        return op.apply(K)

    @staticmethod
    def noncorrespondence(
        K: spatial_field, P: spatial_field, a: spatial_field, tol: Optional[float] = None
    ) -> bool:
        """
        True si ∇·[a∇(K/P)] no es idénticamente nulo, es decir, si K no es un perfil
        estacionario de la dispersión con estrategia P. La escala de referencia es
        ‖a‖∞·‖K/P‖∞/h².
        """
        tol = get_settings().numerics.noncorrespondence_tol if tol is None else tol
        div = operator_service.divergence_of_ratio(K, P, a)
        scale = a.sup_norm() * float(np.max(np.abs(K.values / P.values))) / (K.grid.h ** 2)
        return div.sup_norm() > tol * scale
