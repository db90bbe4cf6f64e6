"""
Batería de verificación de un escenario: estructura del operador, estados
estacionarios, identidades, signos de autovalores, umbrales y predicción
contra observación.

Los chequeos cuyas hipótesis no se cumplen quedan como "skipped".
"""
import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from disperse.core.config import get_settings
from disperse.core.errors import convergence_error, disperse_error, hypothesis_error
from disperse.models.grid_model import grid_1d, spatial_field
from disperse.models.operator_model import dispersal_operator
from disperse.models.report_schema import check_result, outcome, relative_error
from disperse.models.scenario_schema import scenario, species_label, state
from disperse.services.analysis_service import analysis_service
from disperse.services.dynamics_service import dynamics_service
from disperse.services.grid_service import grid_service
from disperse.services.operator_service import operator_service
from disperse.services.spectra_service import spectra_service

logger = logging.getLogger(__name__)

assemble_fn = Callable[[grid_1d, spatial_field, spatial_field, float], dispersal_operator]

_EPS = float(np.finfo(float).eps)


def _fmt(value: float) -> str:
    return format(value, ".17g")


class verification_service:
    """
    Ejecuta todos los chequeos aplicables a un escenario.
    """

    @staticmethod
    def run_checks(sc: scenario, assemble: Optional[assemble_fn] = None) -> List[check_result]:
        """
        Args:
            sc: Escenario.
            assemble: Ensamblador del operador usado en los chequeos de estructura
                (por defecto operator_service.assemble).

        Returns:
            List[check_result]: Chequeos en orden fijo.
        """
        assemble = assemble or operator_service.assemble
        results: List[check_result] = []
        results += verification_service.operator_checks(sc, assemble)

        zero = spectra_service.zero_problems(sc)
        sigma_zero = {name: spectra_service.principal_eigen(p).sigma1 for name, p in zero.items()}
        low = min(sigma_zero.values())
        results.append(check_result(
            name="zero_repeller",
            status="pass" if low > 0.0 else "fail",
            detail=f"sigma1 en (0,0): u={_fmt(sigma_zero['zero_u'])} v={_fmt(sigma_zero['zero_v'])}",
            lhs=low, rhs=0.0,
        ))

        stars: Dict[str, Optional[spatial_field]] = {}
        for label in ("u", "v"):
            try:
                stars[label] = dynamics_service.solve_single_steady(sc, label)
                residual = dynamics_service.stationary_residual(sc, label, stars[label])
                results.append(check_result(name=f"steady_state_{label}", status="pass",
                                            detail=f"residuo {_fmt(residual)}", lhs=residual, rhs=0.0))
            except convergence_error as exc:
                stars[label] = None
                results.append(check_result(name=f"steady_state_{label}", status="fail", detail=str(exc),
                                            lhs=exc.residual, rhs=0.0))

        for label in ("u", "v"):
            results += verification_service.single_species_checks(sc, label, stars[label])

        prediction = analysis_service.predict_outcome(sc)
        results += verification_service.invasion_checks(sc, prediction, stars["u"], stars["v"])
        results += verification_service.invasion_growth_checks(sc, stars["u"], stars["v"])
        results += verification_service.threshold_checks(sc, stars["u"], stars["v"])
        results += verification_service.dynamics_checks(sc, prediction)
        return results

    @staticmethod
    def operator_checks(sc: scenario, assemble: assemble_fn) -> List[check_result]:
        """Núcleo (L P = 0) y conservación (h·Σ(L u) = 0) para cada especie."""
        numerics = get_settings().numerics
        rng = np.random.default_rng(sc.seed)
        results = []
        for label in ("u", "v"):
            params = sc.species(label)
            op = assemble(sc.grid, sc.a_for(label), params.strategy, params.d)
            kernel = float(np.max(np.abs(op.apply_values(params.strategy.values))))
            bound = numerics.kernel_tol * params.strategy.sup_norm()
            results.append(check_result(
                name=f"operator_kernel_{label}",
                status="pass" if kernel <= bound else "fail",
                detail=f"max|L strategy| = {_fmt(kernel)}",
                lhs=kernel, rhs=bound,
            ))
            u = rng.uniform(0.5, 1.5, sc.grid.n_cells)
            mass = abs(sc.grid.h * float(np.sum(op.apply_values(u))))
            bound = numerics.conservation_tol * float(np.max(np.abs(u))) * op.norm_inf()
            results.append(check_result(
                name=f"operator_conservation_{label}",
                status="pass" if mass <= bound else "fail",
                detail=f"|h*sum(L u)| = {_fmt(mass)}",
                lhs=mass, rhs=bound,
            ))
        return results

    @staticmethod
    def single_species_checks(
        sc: scenario, label: species_label, star: Optional[spatial_field]
    ) -> List[check_result]:
        """Identidad de gradiente y desigualdad de capacidad de carga de u* (o v*)."""
        identity_name = f"steady_gradient_identity_{label}"
        inequality_name = f"carrying_capacity_inequality_{label}"
        if star is None:
            reason = f"{label}* no disponible"
            return [check_result.skipped(identity_name, reason), check_result.skipped(inequality_name, reason)]
        params = sc.species(label)
        a = sc.a_for(label)
        independent = grid_service.linearly_independent(sc.K, params.strategy)
        noncorrespondent = operator_service.noncorrespondence(sc.K, params.strategy, a)
        predicates = f"no_proporcional={independent} divergencia_no_nula={noncorrespondent}"
        results = []
        if independent:
            report = analysis_service.check_steady_gradient_identity(
                star, sc.K, params.strategy, sc.r, a, d=params.d, r_mult=params.r_mult, name=identity_name)
            results.append(check_result.from_identity(report, predicates))
        else:
            results.append(check_result.skipped(identity_name, f"estrategia proporcional a K ({predicates})"))
        if noncorrespondent:
            report = analysis_service.check_carrying_capacity_inequality(star, sc.K, sc.r, name=inequality_name)
            results.append(check_result.from_identity(report, predicates))
        else:
            results.append(check_result.skipped(inequality_name, f"∇·[a∇(K/P)] ≡ 0 ({predicates})"))
        return results

    @staticmethod
    def invasion_checks(
        sc: scenario, prediction: outcome, u_star: Optional[spatial_field], v_star: Optional[spatial_field]
    ) -> List[check_result]:
        """
        Signos de σ₁ en los estados semi-triviales y testigos de Rayleigh según la predicción.
        """
        names = ["invasion_u_at_v_star", "invasion_v_at_u_star", "rayleigh_witness"]
        if prediction.kind == "undetermined":
            return [check_result.skipped(name, "predicción indeterminada") for name in names]
        if u_star is None or v_star is None:
            return [check_result.skipped(name, "estados semi-triviales no disponibles") for name in names]
        problems = spectra_service.invasion_problems(sc, u_star, v_star)
        numerics = get_settings().numerics
        sigma = {name: spectra_service.principal_eigen(p).sigma1 for name, p in problems.items()}
        expect_u_grows = prediction.kind in ("coexistence", "exclusion_u_wins")
        expect_v_grows = prediction.kind in ("coexistence", "exclusion_v_wins")
        results = []
        for name, key, grows in (
            ("invasion_u_at_v_star", "u_at_v_star", expect_u_grows),
            ("invasion_v_at_u_star", "v_at_u_star", expect_v_grows),
        ):
            value = sigma[key]
            if grows:
                ok = value > 0.0
                expected = "> 0"
            else:
                ok = value <= numerics.eigen_residual_tol * (problems[key].potential.sup_norm() + 1.0)
                expected = "<= 0"
            results.append(check_result(name=name, status="pass" if ok else "fail",
                                        detail=f"sigma1 = {_fmt(value)} (esperado {expected})",
                                        lhs=value, rhs=0.0))

        if prediction.kind == "coexistence":
            trials = [("u_at_v_star", sc.P * float(np.sqrt(prediction.alpha))),
                      ("v_at_u_star", sc.Q * float(np.sqrt(prediction.beta)))]
        elif prediction.kind == "exclusion_u_wins":
            trials = [("u_at_v_star", v_star)] if not grid_service.linearly_independent(sc.P, sc.Q) else \
                [("u_at_v_star", sc.K.with_values(np.sqrt(sc.K.values * sc.P.values)))]
        else:
            trials = [("v_at_u_star", u_star)] if not grid_service.linearly_independent(sc.P, sc.Q) else \
                [("v_at_u_star", sc.K.with_values(np.sqrt(sc.K.values * sc.Q.values)))]
        quotients = [spectra_service.rayleigh_quotient(problems[key], trial) for key, trial in trials]
        low = min(quotients)
        results.append(check_result(
            name="rayleigh_witness",
            status="pass" if low > 0.0 else "fail",
            detail="cocientes " + " ".join(f"{key}={_fmt(q)}" for (key, _), q in zip(trials, quotients)),
            lhs=low, rhs=0.0,
        ))
        return results

    @staticmethod
    def invasion_growth_checks(
        sc: scenario, u_star: Optional[spatial_field], v_star: Optional[spatial_field]
    ) -> List[check_result]:
        """
        Siembra el invasor con su autofunción principal sobre cada estado semi-trivial,
        integra una ventana corta y compara el signo de la tasa de crecimiento con el de σ₁.

        Se omite cuando |σ₁| no supera numerics.invasion_sigma_floor·(‖c‖∞ + 1).
        """
        numerics = get_settings().numerics
        problems = spectra_service.invasion_problems(sc, u_star, v_star)
        results = []
        for name, key, label in (
            ("invasion_growth_u_at_v_star", "u_at_v_star", "u"),
            ("invasion_growth_v_at_u_star", "v_at_u_star", "v"),
        ):
            if key not in problems:
                results.append(check_result.skipped(name, "estado semi-trivial no disponible"))
                continue
            eigen = spectra_service.principal_eigen(problems[key])
            floor = numerics.invasion_sigma_floor * (problems[key].potential.sup_norm() + 1.0)
            if abs(eigen.sigma1) <= floor:
                results.append(check_result.skipped(name, f"sigma1 = {_fmt(eigen.sigma1)} indistinguible de 0"))
                continue
            zero = sc.K.with_values(np.zeros(sc.grid.n_cells))
            resident = state(t=0.0, u=zero, v=v_star) if label == "u" else state(t=0.0, u=u_star, v=zero)
            rate = dynamics_service.invader_growth_rate(sc, resident, label, eigen.psi)
            ok = (rate > 0.0) == (eigen.sigma1 > 0.0)
            results.append(check_result(
                name=name, status="pass" if ok else "fail",
                detail=f"tasa {_fmt(rate)} sigma1 {_fmt(eigen.sigma1)}",
                lhs=rate, rhs=eigen.sigma1,
            ))
        return results

    @staticmethod
    def threshold_checks(
        sc: scenario, u_star: Optional[spatial_field], v_star: Optional[spatial_field]
    ) -> List[check_result]:
        """
        Umbrales d*, r* del invasor: d*·r* = d·r_mult y σ₁ > 0 con d = d*/2.
        Requiere K independiente de P y de Q.
        """
        results = []
        hypotheses = grid_service.linearly_independent(sc.K, sc.P) and grid_service.linearly_independent(sc.K, sc.Q)
        for invader, resident_star in (("u", v_star), ("v", u_star)):
            names = [f"threshold_product_{invader}", f"threshold_small_dispersal_{invader}"]
            if not hypotheses:
                results += [check_result.skipped(n, "K no es independiente de P y Q") for n in names]
                continue
            if resident_star is None:
                results += [check_result.skipped(n, "estado del residente no disponible") for n in names]
                continue
            params = sc.species(invader)
            try:
                report = analysis_service.thresholds(sc, resident_star, invader)
            except hypothesis_error as exc:
                results += [check_result(name=n, status="fail", detail=str(exc)) for n in names]
                continue
            product = report.d_star * report.r_star
            target = params.d * params.r_mult
            results.append(check_result(
                name=names[0],
                status="pass" if abs(product - target) <= 4.0 * _EPS * target else "fail",
                detail=f"d*={_fmt(report.d_star)} r*={_fmt(report.r_star)}",
                lhs=product, rhs=target, rel_err=relative_error(product, target),
            ))
            op = operator_service.assemble(sc.grid, sc.a_for(invader), params.strategy, 0.5 * report.d_star)
            potential = sc.r * (1.0 - resident_star / sc.K) * params.r_mult
            sigma = spectra_service.principal_eigen(spectra_service.problem(op, potential, names[1])).sigma1
            results.append(check_result(
                name=names[1],
                status="pass" if sigma > 0.0 else "fail",
                detail=f"sigma1 con d = d*/2 = {_fmt(0.5 * report.d_star)}: {_fmt(sigma)}",
                lhs=sigma, rhs=0.0,
            ))
        return results

    @staticmethod
    def dynamics_checks(sc: scenario, prediction: outcome) -> List[check_result]:
        """Corrida completa, clasificación contra predicción e identidades de coexistencia."""
        cfg = get_settings().classification
        names = ["outcome_matches_prediction", "coexistence_identities"]
        if prediction.kind == "undetermined":
            return [check_result.skipped(n, "predicción indeterminada") for n in names]
        if sc.u0.sup_norm() + sc.v0.sup_norm() == 0.0:
            return [check_result.skipped(n, "datos iniciales nulos") for n in names]
        try:
            series, final, steady = dynamics_service.run(sc)
        except disperse_error as exc:
            return [check_result(name=n, status="fail", detail=str(exc)) for n in names]
        observed = analysis_service.classify_outcome(final, series, sc.K, sc.P, sc.Q, steady)
        ok = observed.kind == prediction.kind
        if ok and prediction.kind == "coexistence":
            ok = abs(observed.alpha - prediction.alpha) <= cfg.fit_tol * max(prediction.alpha, 1.0) and \
                abs(observed.beta - prediction.beta) <= cfg.fit_tol * max(prediction.beta, 1.0)
        results = [check_result(
            name=names[0],
            status="pass" if ok else "fail",
            detail=f"predicho={prediction.label()} observado={observed.label()} t={_fmt(final.t)}",
        )]
        if observed.kind != "coexistence":
            results.append(check_result.skipped(names[1], "no se observó coexistencia"))
            return results
        reports = analysis_service.check_coexistence_identities(
            final.u, final.v, sc.K, sc.r, sc.P, sc.Q, sc.a_for("u"), sc.a_for("v"),
            d=(sc.species_u.d, sc.species_v.d), r_mult=(sc.species_u.r_mult, sc.species_v.r_mult),
        )
        results += [check_result.from_identity(report) for report in reports]
        return results

    @staticmethod
    def all_passed(results: List[check_result]) -> bool:
        return all(result.status != "fail" for result in results)
