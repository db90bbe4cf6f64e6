"""
Esquemas de los resultados: problemas linealizados, autopares principales,
identidades, umbrales, resultados de competencia y chequeos de verificación.
"""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from disperse.core.errors import field_mismatch_error
from disperse.models.grid_model import spatial_field
from disperse.models.operator_model import dispersal_operator
from disperse.models.scenario_schema import species_label


class linearized_problem(BaseModel):
    """
    Problema ψ ↦ L ψ + c·ψ con L el operador de dispersión de una especie.

    Atributos:
        op (dispersal_operator): Operador (lleva d, a y la estrategia).
        potential (spatial_field): Potencial c(x).
        label (str): Nombre del problema en los reportes.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    op: dispersal_operator
    potential: spatial_field
    label: str = "problema"

    @model_validator(mode="after")
    def check_grid(self) -> "linearized_problem":
        if self.potential.grid != self.op.grid:
            raise field_mismatch_error("el potencial y el operador están definidos sobre mallas distintas")
        return self


class eigen_result(BaseModel):
    """
    Autopar principal.

    Atributos:
        sigma1 (float): Autovalor principal.
        psi (spatial_field): Autofunción positiva con max ψ = 1.
        residual (float): ‖L ψ + cψ − σ₁ψ‖∞.
        iterations (int): Iteraciones (0 en el camino denso).
        method (str): "dense" o "inverse_iteration".
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sigma1: float
    psi: spatial_field
    residual: float
    iterations: int = 0
    method: Literal["dense", "inverse_iteration"] = "dense"


class identity_report(BaseModel):
    """
    Comparación de los dos lados de una identidad o desigualdad.

    Atributos:
        name (str): Nombre del chequeo.
        lhs, rhs (float): Lados izquierdo y derecho.
        relative_error (float): |lhs − rhs|/max(|lhs|, |rhs|, 1e−300).
        satisfied (bool): Resultado del chequeo.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    lhs: float
    rhs: float
    relative_error: float
    satisfied: bool

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float, satisfied: bool) -> "identity_report":
        return cls(name=name, lhs=lhs, rhs=rhs, relative_error=relative_error(lhs, rhs), satisfied=satisfied)


def relative_error(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


class threshold_report(BaseModel):
    """
    Umbrales de dispersión lenta y crecimiento rápido para un invasor.

    Atributos:
        M (float): ∫ r K (1 − residente*/K) dx.
        gradient (float): ∫ a |∇√(K/estrategia del invasor)|² dx.
        d_star (float): Umbral de dispersión (invade si d < d_star).
        r_star (float): Umbral de crecimiento (invade si r_mult > r_star).
        invader (str): "u" o "v".
    """
    model_config = ConfigDict(frozen=True)

    M: float
    gradient: float
    d_star: float = Field(gt=0.0)
    r_star: float = Field(gt=0.0)
    invader: species_label = "u"


outcome_kind = Literal["coexistence", "exclusion_u_wins", "exclusion_v_wins", "extinction", "undetermined"]


class outcome(BaseModel):
    """
    Resultado de la competencia (predicho u observado).

    Atributos:
        kind: Tipo de resultado.
        alpha, beta: Coeficientes de (αP, βQ) en coexistencia.
        diagnostics: Notas legibles sobre la decisión.
    """
    model_config = ConfigDict(frozen=True)

    kind: outcome_kind
    alpha: Optional[float] = None
    beta: Optional[float] = None
    diagnostics: List[str] = []

    @model_validator(mode="after")
    def check_coefficients(self) -> "outcome":
        if self.kind == "coexistence":
            if self.alpha is None or self.beta is None or self.alpha <= 0.0 or self.beta <= 0.0:
                raise ValueError("la coexistencia requiere alpha, beta > 0")
        return self

    def mirrored(self) -> "outcome":
        """El mismo resultado con las especies intercambiadas."""
        flip = {"exclusion_u_wins": "exclusion_v_wins", "exclusion_v_wins": "exclusion_u_wins"}
        return outcome(kind=flip.get(self.kind, self.kind), alpha=self.beta, beta=self.alpha,
                       diagnostics=list(self.diagnostics))

    def label(self) -> str:
        if self.kind == "coexistence":
            return f"coexistence({self.alpha:.6g},{self.beta:.6g})"
        return self.kind


class instability_report(BaseModel):
    """
    Autovalores principales en los equilibrios triviales y semi-triviales,
    con los cocientes de Rayleigh de las funciones de prueba como testigos.

    Atributos:
        sigma_zero_u, sigma_zero_v: σ₁ de la linealización en (0, 0) para cada especie.
        sigma_at_v_star: σ₁ para u invadiendo (0, v*).
        sigma_at_u_star: σ₁ para v invadiendo (u*, 0).
        witnesses: Cociente de Rayleigh por nombre de función de prueba.
    """
    model_config = ConfigDict(frozen=True)

    sigma_zero_u: float
    sigma_zero_v: float
    sigma_at_v_star: float
    sigma_at_u_star: float
    witnesses: Dict[str, float] = {}


check_status = Literal["pass", "fail", "skipped"]


class check_result(BaseModel):
    """
    Resultado de un chequeo de la batería de verificación.

    Atributos:
        name: Nombre del chequeo.
        status: "pass", "fail" o "skipped" (hipótesis no cumplida).
        detail: Texto breve.
        lhs, rhs, rel_err: Valores numéricos, si aplican.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    status: check_status
    detail: str = ""
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    rel_err: Optional[float] = None

    @classmethod
    def from_identity(cls, report: identity_report, detail: str = "") -> "check_result":
        return cls(
            name=report.name,
            status="pass" if report.satisfied else "fail",
            detail=detail,
            lhs=report.lhs,
            rhs=report.rhs,
            rel_err=report.relative_error,
        )

    @classmethod
    def skipped(cls, name: str, reason: str) -> "check_result":
        return cls(name=name, status="skipped", detail=f"hipótesis no cumplida: {reason}")


class run_manifest(BaseModel):
    """
    Manifiesto de una ejecución del CLI (manifest.json).

    Atributos:
        scenario_hash: SHA-256 del escenario resuelto.
        command: Comando ejecutado.
        outputs: Archivos escritos (nombres relativos a --out).
        wall_clock_seconds: Tiempo de reloj.
        summary: Resumen pass/fail o resultado.
        exit_code: Código de salida.
    """
    scenario_hash: str
    command: str
    outputs: List[str] = []
    wall_clock_seconds: float = 0.0
    summary: str = ""
    exit_code: int = 0
