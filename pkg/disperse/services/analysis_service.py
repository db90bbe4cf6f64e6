"""
Identidades integrales, desigualdades, umbrales y predicción/clasificación
del resultado de la competencia.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from disperse.core.config import get_settings
from disperse.core.errors import (
    hypothesis_error,
    ill_conditioned_error,
    non_positive_field_error,
    zero_field_error,
)
from disperse.models.grid_model import spatial_field
from disperse.models.report_schema import identity_report, outcome, threshold_report
from disperse.models.scenario_schema import scenario, species_label, state, time_series
from disperse.services.grid_service import grid_service

logger = logging.getLogger(__name__)

# igualdad de multiplicadores d, r (relativa)
RATE_TOL = 1e-12


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= RATE_TOL * max(abs(a), abs(b))


def _within_identity(lhs: float, rhs: float, scale: float, atol: Optional[float] = None) -> bool:
    numerics = get_settings().numerics
    atol = numerics.identity_atol if atol is None else atol
    err = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return err < numerics.identity_rtol or abs(lhs - rhs) <= atol * scale


class analysis_service:
    """
    Operaciones del módulo de análisis.
    """

    @staticmethod
    def check_steady_gradient_identity(
        star: spatial_field,
        K: spatial_field,
        strategy: spatial_field,
        r: spatial_field,
        a: spatial_field,
        d: float = 1.0,
        r_mult: float = 1.0,
        name: str = "steady_gradient_identity_u",
        crowding: Optional[spatial_field] = None,
        atol: Optional[float] = None,
    ) -> identity_report:
        """
        Identidad de un estado estacionario positivo de una especie:
        r_mult·∫ r·P·(u*/K − 1) dx = d·∫ a |∇(u*/P)|²/(u*/P)² dx.

        El lado derecho usa gradientes en las interfaces y el peso w_i·w_{i+1}
        (w = u*/P) en cada interfaz; con ese peso la identidad discreta es exacta
        salvo el residuo del estado estacionario.

        Args:
            star: Estado estacionario u* (o v*, u_s, v_s).
            K, strategy, r, a: Coeficientes (strategy = P o Q).
            d, r_mult: Multiplicadores de la especie.
            name: Nombre del reporte.
            crowding: Densidad total que satura (u_s + v_s en coexistencia); por defecto star.
            atol: Tolerancia absoluta relativa a r_mult·∫ r·P (por defecto numerics.identity_atol).

        Raises:
            non_positive_field_error: Si star no es positivo.
        """
        if np.any(star.values <= 0.0):
            raise non_positive_field_error(f"{name}: el estado estacionario debe ser positivo")
        total = star if crowding is None else crowding
        h = star.grid.h
        lhs = r_mult * grid_service.integrate(r * strategy * (total / K - 1.0))
        w = star.values / strategy.values
        grad = np.diff(w) / h
        w_sq_face = w[1:] * w[:-1]
        a_face = 0.5 * (a.values[1:] + a.values[:-1])
        rhs = d * float(np.sum(a_face * grad * grad / w_sq_face) * h)
        scale = r_mult * grid_service.integrate(r * strategy)
        return identity_report.compare(name, lhs, rhs, _within_identity(lhs, rhs, scale, atol))

    @staticmethod
    def check_carrying_capacity_inequality(
        star: spatial_field, K: spatial_field, r: spatial_field, name: str = "carrying_capacity_inequality_u"
    ) -> identity_report:
        """
        ∫ r K dx > ∫ r u* dx con margen mayor que 1e−10·∫ r K dx.
        """
        lhs = grid_service.integrate(r * K)
        rhs = grid_service.integrate(r * star)
        satisfied = lhs - rhs > 1e-10 * lhs
        return identity_report.compare(name, lhs, rhs, satisfied)

    @staticmethod
    def check_coexistence_identities(
        u_s: spatial_field,
        v_s: spatial_field,
        K: spatial_field,
        r: spatial_field,
        P: Optional[spatial_field] = None,
        Q: Optional[spatial_field] = None,
        a_u: Optional[spatial_field] = None,
        a_v: Optional[spatial_field] = None,
        d: Tuple[float, float] = (1.0, 1.0),
        r_mult: Tuple[float, float] = (1.0, 1.0),
    ) -> List[identity_report]:
        """
        Chequeos de un estado de coexistencia (u_s, v_s):

        - balance logístico total: ∫ r (r₁u_s + r₂v_s)(1 − (u_s+v_s)/K) dx ≈ 0
          (|valor| < coexistence_identity_tol·∫ r K);
        - exceso de capacidad: si ‖u_s + v_s − K‖∞ supera √tol·‖K‖∞, ∫ r K dx > ∫ r (u_s+v_s) dx
          con margen identity_atol·∫ r K; si no, igualdad dentro de √tol·∫ r K
          (tol = coexistence_identity_tol);
        - si se dan P, Q y a: las identidades de gradiente de cada especie. Si la especie es
          independiente de su estrategia (seno del ángulo > √tol) el lado derecho debe ser
          estrictamente positivo (mayor que identity_atol·r_mult·∫ r·estrategia).
        """
        numerics = get_settings().numerics
        tol = numerics.coexistence_identity_tol
        total = u_s + v_s
        rK = grid_service.integrate(r * K)
        balance = grid_service.integrate(r * (u_s * r_mult[0] + v_s * r_mult[1]) * (1.0 - total / K))
        reports = [
            identity_report.compare(
                "coexistence_logistic_balance", balance, 0.0,
                abs(balance) < tol * rK,
            ),
        ]
        # ∫r(K − T) = ∫r(K − T)²/K en el equilibrio: el exceso es cuadrático en la distancia a K
        near = math.sqrt(tol)
        margin_rK = numerics.identity_atol * rK
        excess_rhs = grid_service.integrate(r * total)
        if (total - K).sup_norm() <= near * K.sup_norm():
            excess_ok = abs(rK - excess_rhs) <= near * rK
        else:
            excess_ok = rK - excess_rhs > margin_rK
        reports.append(identity_report.compare("coexistence_capacity_excess", rK, excess_rhs, excess_ok))
        for label, density, strategy, a, d_k, r_k in (
            ("u", u_s, P, a_u, d[0], r_mult[0]),
            ("v", v_s, Q, a_v, d[1], r_mult[1]),
        ):
            if strategy is None or a is None:
                continue
            report = analysis_service.check_steady_gradient_identity(
                density, K, strategy, r, a, d=d_k, r_mult=r_k,
                name=f"coexistence_gradient_identity_{label}", crowding=total, atol=tol,
            )
            if grid_service.linearly_independent(strategy, density, tol=near):
                margin = numerics.identity_atol * r_k * grid_service.integrate(r * strategy)
                report = identity_report.compare(
                    report.name, report.lhs, report.rhs, report.satisfied and report.rhs > margin
                )
            reports.append(report)
        return reports

    @staticmethod
    def thresholds(sc: scenario, resident_star: spatial_field, invader: species_label = "u") -> threshold_report:
        """
        Umbrales para que el invasor crezca desde el estado semi-trivial del residente.

        M = ∫ r K (1 − residente*/K) dx, G = ∫ a |∇√(K/estrategia)|² dx,
        d* = r_inv·M/G y r* = d_inv·G/M, de modo que d*·r* = d_inv·r_inv.

        Raises:
            hypothesis_error: Si M ≤ 0 o G = 0 (K proporcional a la estrategia del invasor).
        """
        params = sc.species(invader)
        M = grid_service.integrate(sc.r * sc.K * (1.0 - resident_star / sc.K))
        root = sc.K.with_values(np.sqrt(sc.K.values / params.strategy.values))
        G = grid_service.gradient_sq_weighted(root, sc.a_for(invader))
        if not M > 0.0:
            raise hypothesis_error(f"M = {M:.6g} <= 0: el residente no deja recursos sin usar")
        if not G > 0.0:
            raise hypothesis_error("∫a|∇√(K/P)|² = 0: la estrategia del invasor es proporcional a K")
        return threshold_report(
            M=M, gradient=G,
            d_star=params.r_mult * M / G,
            r_star=params.d * G / M,
            invader=invader,
        )

    @staticmethod
    def effective_dispersal(sc: scenario) -> Optional[float]:
        """
        Si Q = k_s·P y a_v = k_a·a_u, la especie v se comporta como estrategia P
        con tasa d₂·k_a/k_s. Devuelve esa tasa, o None si no hay tal proporcionalidad.
        """
        k_s = grid_service.proportionality_factor(sc.P, sc.Q)
        k_a = grid_service.proportionality_factor(sc.a_for("u"), sc.a_for("v"))
        if k_s is None or k_a is None:
            return None
        return sc.species_v.d * k_a / k_s

    @staticmethod
    def predict_outcome(sc: scenario) -> outcome:
        """
        Predicción según las hipótesis de los teoremas:

        (i) P, Q independientes y K = αP + βQ con α, β > 0, r₁ = r₂: coexistencia en (αP, βQ);
        (ii) P ∝ K y Q independiente de K, r₁ = r₂: gana u (y el caso simétrico);
        (iii) P ≡ Q no proporcional a K, r₁ = r₂, d₁ < d₂: gana u (y el simétrico);
        (iv) P ≡ Q no proporcional a K, d₁ = d₂, r₁ > r₂: gana u (y el simétrico);
        en otro caso, indeterminado.

        P ≡ Q y d se entienden a través de la tasa efectiva (ver effective_dispersal).
        """
        r1, r2 = sc.species_u.r_mult, sc.species_v.r_mult
        equal_r = _same(r1, r2)
        P_prop_K = grid_service.proportionality_factor(sc.K, sc.P) is not None
        Q_prop_K = grid_service.proportionality_factor(sc.K, sc.Q) is not None
        PQ_independent = grid_service.linearly_independent(sc.P, sc.Q)

        if PQ_independent:
            if P_prop_K and not Q_prop_K:
                if equal_r:
                    return outcome(kind="exclusion_u_wins", diagnostics=["P ∝ K y Q independiente de K: límite (K, 0)"])
                return outcome(kind="undetermined", diagnostics=["P ∝ K pero r₁ ≠ r₂"])
            if Q_prop_K and not P_prop_K:
                if equal_r:
                    return outcome(kind="exclusion_v_wins", diagnostics=["Q ∝ K y P independiente de K: límite (0, K)"])
                return outcome(kind="undetermined", diagnostics=["Q ∝ K pero r₁ ≠ r₂"])
            try:
                hull = grid_service.positive_hull_coefficients(sc.K, sc.P, sc.Q)
            except (ill_conditioned_error, zero_field_error) as exc:
                return outcome(kind="undetermined", diagnostics=[str(exc)])
            if hull is None:
                return outcome(kind="undetermined", diagnostics=["K fuera de la envolvente positiva de P y Q"])
            if not equal_r:
                return outcome(kind="undetermined", diagnostics=["par ideal libre pero r₁ ≠ r₂"])
            alpha, beta = hull
            return outcome(kind="coexistence", alpha=alpha, beta=beta,
                           diagnostics=[f"K = {alpha:.6g}·P + {beta:.6g}·Q"])

        if P_prop_K:
            return outcome(kind="undetermined", diagnostics=["ambas estrategias proporcionales a K: especies neutrales"])
        d_v = analysis_service.effective_dispersal(sc)
        if d_v is None:
            return outcome(kind="undetermined", diagnostics=["P ∝ Q pero los perfiles a no son proporcionales"])
        d_u = sc.species_u.d
        notes = [f"misma estrategia no proporcional a K; tasas efectivas d₁={d_u:.6g}, d₂={d_v:.6g}"]
        if sc.species_u.a is not None or sc.species_v.a is not None:
            notes.append("perfiles a propios absorbidos en la tasa efectiva")
        if equal_r and not _same(d_u, d_v):
            kind = "exclusion_u_wins" if d_u < d_v else "exclusion_v_wins"
            return outcome(kind=kind, diagnostics=notes + ["gana la dispersión más lenta"])
        if _same(d_u, d_v) and not equal_r:
            kind = "exclusion_u_wins" if r1 > r2 else "exclusion_v_wins"
            return outcome(kind=kind, diagnostics=notes + ["gana el crecimiento más rápido"])
        if _same(d_u, d_v) and equal_r:
            return outcome(kind="undetermined", diagnostics=notes + ["especies idénticas"])
        return outcome(kind="undetermined", diagnostics=notes + ["d y r distintos a la vez"])

    @staticmethod
    def _tail_non_increasing(values: List[float], fraction: float) -> bool:
        if not values:
            return False
        count = max(2, int(math.ceil(fraction * len(values))))
        tail = np.asarray(values[-count:])
        return bool(np.all(np.diff(tail) <= 0.0))

    @staticmethod
    def _ideal_free_approach(
        final_state: state, series: time_series, K: spatial_field, P: spatial_field, Q: spatial_field
    ) -> Optional[Tuple[str, str]]:
        """
        Exclusión por convergencia a (K, 0) o a (0, K) cuando la ganadora sigue una estrategia ∝ K:
        ‖winner − K‖∞ y ‖loser‖∞ por debajo de ideal_free_tol·‖K‖∞ y masa de la perdedora no creciente.
        """
        cfg = get_settings().classification
        k_sup = K.sup_norm()
        candidates = (
            ("exclusion_u_wins", P, final_state.u, final_state.v, series.mass_v),
            ("exclusion_v_wins", Q, final_state.v, final_state.u, series.mass_u),
        )
        for kind, strategy, winner, loser, loser_mass in candidates:
            if grid_service.proportionality_factor(K, strategy) is None:
                continue
            gap = (winner - K).sup_norm() / k_sup
            rest = loser.sup_norm() / k_sup
            if gap < cfg.ideal_free_tol and rest < cfg.ideal_free_tol and \
                    analysis_service._tail_non_increasing(loser_mass, cfg.monotone_tail_fraction):
                return kind, f"convergencia a la distribución ideal libre: |ganadora − K| = {gap:.3e}, " \
                             f"perdedora = {rest:.3e} (relativos a ‖K‖∞)"
        return None

    @staticmethod
    def classify_outcome(
        final_state: state,
        series: time_series,
        K: spatial_field,
        P: spatial_field,
        Q: spatial_field,
        steady: bool = True,
    ) -> outcome:
        """
        Clasifica el resultado observado de una corrida.

        Una especie está extinta si su norma del supremo es < extinction_threshold·‖K‖∞
        y su masa no crece en el último tramo (monotone_tail_fraction) de la serie.
        Hay coexistencia si ambas normas superan coexistence_threshold·‖K‖∞ en estado
        estacionario; (α, β) se ajustan con u + v ≈ αP + βQ y, si ese ajuste falla,
        por proyección de cada especie sobre su estrategia.
        """
        cfg = get_settings().classification
        k_sup = K.sup_norm()
        sup_u, sup_v = final_state.u.sup_norm(), final_state.v.sup_norm()
        extinct_u = sup_u < cfg.extinction_threshold * k_sup and analysis_service._tail_non_increasing(
            series.mass_u, cfg.monotone_tail_fraction)
        extinct_v = sup_v < cfg.extinction_threshold * k_sup and analysis_service._tail_non_increasing(
            series.mass_v, cfg.monotone_tail_fraction)
        present_u = sup_u > cfg.coexistence_threshold * k_sup
        present_v = sup_v > cfg.coexistence_threshold * k_sup
        notes = [f"sup u = {sup_u:.6g}, sup v = {sup_v:.6g}, ‖K‖∞ = {k_sup:.6g}"]

        if extinct_u and extinct_v:
            return outcome(kind="extinction", diagnostics=notes)
        if extinct_v and present_u:
            return outcome(kind="exclusion_u_wins", diagnostics=notes)
        if extinct_u and present_v:
            return outcome(kind="exclusion_v_wins", diagnostics=notes)

        # con estrategia ∝ K el rival decae sólo algebraicamente; basta llegar a (K, 0)
        approach = analysis_service._ideal_free_approach(final_state, series, K, P, Q)
        if approach is not None:
            kind, note = approach
            return outcome(kind=kind, diagnostics=notes + [note])

        if not (present_u and present_v and steady):
            return outcome(kind="undetermined", diagnostics=notes + ["datos no concluyentes"])

        for label, strategy, other_sup in (("v", P, series.sup_v), ("u", Q, series.sup_u)):
            if grid_service.proportionality_factor(K, strategy) is not None and \
                    len(other_sup) >= 2 and other_sup[-1] < other_sup[-2]:
                return outcome(kind="undetermined",
                               diagnostics=notes + [f"estrategia ideal libre y {label} todavía decae"])

        total = final_state.u + final_state.v
        try:
            hull = grid_service.positive_hull_coefficients(total, P, Q, tol=cfg.fit_tol)
        except (ill_conditioned_error, zero_field_error) as exc:
            hull = None
            notes.append(f"ajuste conjunto no disponible: {exc}")
        if hull is not None:
            alpha, beta = hull
            return outcome(kind="coexistence", alpha=alpha, beta=beta, diagnostics=notes)
        alpha = float(np.dot(final_state.u.values, P.values) / np.dot(P.values, P.values))
        beta = float(np.dot(final_state.v.values, Q.values) / np.dot(Q.values, Q.values))
        notes.append("u + v fuera de la envolvente de P y Q: coeficientes por proyección")
        return outcome(kind="coexistence", alpha=alpha, beta=beta, diagnostics=notes)
