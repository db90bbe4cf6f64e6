"""
Esquemas del problema completo: parámetros por especie, integrador,
escenario, estado y serie temporal.
"""
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from disperse.core.errors import field_mismatch_error, non_positive_field_error
from disperse.models.grid_model import grid_1d, spatial_field


species_label = Literal["u", "v"]


class species_params(BaseModel):
    """
    Parámetros de una especie.

    Atributos:
        strategy (spatial_field): Estrategia de dispersión (P para u, Q para v).
        d (float): Multiplicador de dispersión (d₁ o d₂).
        r_mult (float): Multiplicador de crecimiento (r₁ o r₂).
        a (spatial_field | None): Perfil a propio de la especie; si es None se usa el del escenario.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    strategy: spatial_field
    d: float = Field(1.0, gt=0.0)
    r_mult: float = Field(1.0, gt=0.0)
    a: Optional[spatial_field] = None

    @model_validator(mode="after")
    def check_positive(self) -> "species_params":
        self.strategy.require_positive("estrategia")
        if self.a is not None:
            self.a.require_positive("a")
        return self

    def scaled(self, factor: float) -> "species_params":
        """Multiplica d y r_mult por el mismo factor."""
        return self.model_copy(update={"d": self.d * factor, "r_mult": self.r_mult * factor})


class stepper_config(BaseModel):
    """
    Configuración del integrador semi-implícito.

    Atributos:
        dt (float): Paso de tiempo.
        t_end (float): Tiempo final.
        tol_steady (float): Umbral relativo de la tasa ‖u_{n+1}−u_n‖∞/dt.
        record_every (int): Frecuencia de muestreo de la serie temporal.
    """
    model_config = ConfigDict(frozen=True)

    dt: float = Field(1e-3, gt=0.0)
    t_end: float = Field(5000.0, gt=0.0)
    tol_steady: float = Field(1e-9, gt=0.0)
    record_every: int = Field(100, ge=1)

    @model_validator(mode="after")
    def check_dt(self) -> "stepper_config":
        if self.dt > self.t_end:
            raise ValueError(f"dt ({self.dt}) no puede superar t_end ({self.t_end})")
        return self


class scenario(BaseModel):
    """
    Instancia completa del problema de competencia.

    Atributos:
        grid: Malla.
        K, r, a: Capacidad de carga, perfil de crecimiento y perfil de dispersión compartido.
        species_u, species_v: Parámetros de cada especie.
        u0, v0: Datos iniciales no negativos.
        stepper: Configuración del integrador.
        seed: Semilla usada para los datos iniciales aleatorios.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: grid_1d
    K: spatial_field
    r: spatial_field
    a: spatial_field
    species_u: species_params
    species_v: species_params
    u0: spatial_field
    v0: spatial_field
    stepper: stepper_config = stepper_config()
    seed: int = 0

    @model_validator(mode="after")
    def check_fields(self) -> "scenario":
        for label, field in (("K", self.K), ("r", self.r), ("a", self.a)):
            if field.grid != self.grid:
                raise field_mismatch_error(f"'{label}' no está definido sobre la malla del escenario")
            field.require_positive(label)
        for label, sp in (("u", self.species_u), ("v", self.species_v)):
            if sp.strategy.grid != self.grid or (sp.a is not None and sp.a.grid != self.grid):
                raise field_mismatch_error(f"la especie '{label}' no está definida sobre la malla del escenario")
        for label, field in (("u0", self.u0), ("v0", self.v0)):
            if field.grid != self.grid:
                raise field_mismatch_error(f"'{label}' no está definido sobre la malla del escenario")
            if np.any(field.values < 0.0):
                raise non_positive_field_error(f"el dato inicial '{label}' debe ser no negativo")
        return self

    @property
    def P(self) -> spatial_field:
        return self.species_u.strategy

    @property
    def Q(self) -> spatial_field:
        return self.species_v.strategy

    def species(self, label: species_label) -> species_params:
        return self.species_u if label == "u" else self.species_v

    def a_for(self, label: species_label) -> spatial_field:
        """Perfil a efectivo de la especie (a₁ o a₂)."""
        own = self.species(label).a
        return own if own is not None else self.a

    def swapped(self) -> "scenario":
        """Escenario con las especies intercambiadas (u↔v, P↔Q, d₁↔d₂, r₁↔r₂)."""
        return self.model_copy(update={
            "species_u": self.species_v,
            "species_v": self.species_u,
            "u0": self.v0,
            "v0": self.u0,
        })


class state(BaseModel):
    """
    Estado (t, u, v) del sistema.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float
    u: spatial_field
    v: spatial_field


class time_series(BaseModel):
    """
    Serie temporal muestreada de una corrida.

    Atributos:
        times: Tiempos de muestreo (estrictamente crecientes).
        mass_u, mass_v: ∫u dx y ∫v dx.
        sup_u, sup_v: Normas del supremo.
        rate_u, rate_v: ‖u_{n+1}−u_n‖∞/dt en el paso muestreado.
    """
    times: List[float] = []
    mass_u: List[float] = []
    mass_v: List[float] = []
    sup_u: List[float] = []
    sup_v: List[float] = []
    rate_u: List[float] = []
    rate_v: List[float] = []

    def append(self, t: float, mass_u: float, mass_v: float, sup_u: float, sup_v: float,
               rate_u: float, rate_v: float) -> None:
        if self.times and t <= self.times[-1]:
            return
        self.times.append(float(t))
        self.mass_u.append(float(mass_u))
        self.mass_v.append(float(mass_v))
        self.sup_u.append(float(sup_u))
        self.sup_v.append(float(sup_v))
        self.rate_u.append(float(rate_u))
        self.rate_v.append(float(rate_v))

    def __len__(self) -> int:
        return len(self.times)

    def rows(self):
        return zip(self.times, self.mass_u, self.mass_v, self.sup_u, self.sup_v, self.rate_u, self.rate_v)
