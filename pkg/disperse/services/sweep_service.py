"""
Barridos de un parámetro (d1, d2, r1, r2): resultado y σ₁ en los estados
semi-triviales para cada valor.
"""
from concurrent.futures import ThreadPoolExecutor
import logging
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from disperse.core.errors import convergence_error, disperse_error
from disperse.models.scenario_schema import scenario
from disperse.services.analysis_service import analysis_service
from disperse.services.dynamics_service import dynamics_service
from disperse.services.spectra_service import spectra_service

logger = logging.getLogger(__name__)

sweep_axis = Literal["d1", "d2", "r1", "r2"]
SWEEP_AXES = ("d1", "d2", "r1", "r2")


class sweep_row(BaseModel):
    """
    Fila del barrido.

    Atributos:
        param: Eje barrido.
        value: Valor del parámetro.
        outcome: Resultado (predicho, u observado si se simula).
        sigma_u_at_v_star: σ₁ de u invadiendo (0, v*).
        sigma_v_at_u_star: σ₁ de v invadiendo (u*, 0).
    """
    model_config = ConfigDict(frozen=True)

    param: sweep_axis
    value: float
    outcome: str
    sigma_u_at_v_star: Optional[float] = None
    sigma_v_at_u_star: Optional[float] = None


class sweep_service:
    """
    Servicio de barridos de parámetros.
    """

    @staticmethod
    def values(start: float, stop: float, count: int) -> List[float]:
        """Valores equiespaciados (count >= 1) entre start y stop, ambos incluidos."""
        if count < 1:
            raise ValueError("count debe ser >= 1")
        return np.linspace(start, stop, count).tolist()

    @staticmethod
    def with_parameter(sc: scenario, axis: sweep_axis, value: float) -> scenario:
        """Escenario con d₁, d₂, r₁ o r₂ reemplazado."""
        if axis not in SWEEP_AXES:
            raise ValueError(f"eje de barrido inválido '{axis}' (use d1, d2, r1 o r2)")
        label = "species_u" if axis.endswith("1") else "species_v"
        key = "d" if axis.startswith("d") else "r_mult"
        params = getattr(sc, label)
        updated = params.model_validate({**params.__dict__, key: value})
        return sc.model_copy(update={label: updated})

    @staticmethod
    def evaluate_point(sc: scenario, axis: sweep_axis, value: float, simulate: bool = False) -> sweep_row:
        """
        Evalúa un punto: predicción (o clasificación de una corrida si simulate) y
        σ₁ del invasor en cada estado semi-trivial.
        """
        point = sweep_service.with_parameter(sc, axis, value)
        prediction = analysis_service.predict_outcome(point)
        label = prediction.label()
        if simulate:
            try:
                series, final, steady = dynamics_service.run(point)
                label = analysis_service.classify_outcome(final, series, point.K, point.P, point.Q, steady).label()
            except disperse_error as exc:
                logger.warning("%s=%g: la corrida falló: %s", axis, value, exc)
                label = "undetermined"
        try:
            u_star = dynamics_service.solve_single_steady(point, "u")
            v_star = dynamics_service.solve_single_steady(point, "v")
        except convergence_error as exc:
            logger.warning("%s=%g: estado semi-trivial sin convergencia: %s", axis, value, exc)
            return sweep_row(param=axis, value=value, outcome=label)
        problems = spectra_service.invasion_problems(point, u_star, v_star)
        return sweep_row(
            param=axis,
            value=value,
            outcome=label,
            sigma_u_at_v_star=spectra_service.principal_eigen(problems["u_at_v_star"]).sigma1,
            sigma_v_at_u_star=spectra_service.principal_eigen(problems["v_at_u_star"]).sigma1,
        )

    @staticmethod
    def sweep(
        sc: scenario,
        axis: sweep_axis,
        values: Sequence[float],
        workers: int = 1,
        simulate: bool = False,
    ) -> List[sweep_row]:
        """
        Evalúa todos los puntos; con workers > 1 usa un pool de hilos.
        Las filas se devuelven en el orden de values.

        Raises:
            ValueError: Eje inválido.
        """
        if axis not in SWEEP_AXES:
            raise ValueError(f"eje de barrido inválido '{axis}' (use d1, d2, r1 o r2)")
        logger.info("barrido de %s sobre %d valores (%d hilos)", axis, len(values), workers)
        if workers <= 1:
            return [sweep_service.evaluate_point(sc, axis, v, simulate) for v in values]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda v: sweep_service.evaluate_point(sc, axis, v, simulate), values))
