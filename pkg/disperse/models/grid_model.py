"""
Modelos de la malla 1-D y de los campos espaciales muestreados en centros de celda.
"""
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from disperse.core.errors import field_mismatch_error, invalid_grid_error, non_positive_field_error


class grid_1d(BaseModel):
    """
    Malla uniforme de volúmenes finitos sobre el intervalo [x_left, x_right].

    Atributos:
        n_cells (int): Número de celdas (>= 4).
        x_left (float): Extremo izquierdo.
        x_right (float): Extremo derecho (> x_left).

    Propiedades:
        h: Tamaño de celda.
        centers: Centros x_i = x_left + (i + 1/2) h.
    """
    model_config = ConfigDict(frozen=True)

    n_cells: int
    x_left: float = 0.0
    x_right: float = 1.0

    @model_validator(mode="after")
    def check_geometry(self) -> "grid_1d":
        if self.n_cells < 4:
            raise invalid_grid_error(f"n_cells debe ser >= 4 (recibido {self.n_cells})")
        if not (np.isfinite(self.x_left) and np.isfinite(self.x_right)) or self.x_right <= self.x_left:
            raise invalid_grid_error(
                f"se requiere x_right > x_left (recibido [{self.x_left}, {self.x_right}])"
            )
        return self

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.h

    def normalized(self) -> np.ndarray:
        """Coordenada ξ = (x - x_left)/longitud de los centros, en (0, 1)."""
        return (self.centers - self.x_left) / self.length


class spatial_field(BaseModel):
    """
    Valores de una función de x en los centros de celda de una malla.

    Es inmutable: el arreglo interno se marca como de solo lectura.

    Atributos:
        grid (grid_1d): Malla asociada.
        values (np.ndarray): Un valor finito por celda.
        name (str | None): Etiqueta opcional (K, P, Q, r, a, u, v...).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: grid_1d
    values: np.ndarray
    name: Optional[str] = None

    @field_validator("values", mode="before")
    @classmethod
    def to_readonly_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float, copy=True).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_shape(self) -> "spatial_field":
        if self.values.shape[0] != self.grid.n_cells:
            raise field_mismatch_error(
                f"el campo '{self.name}' tiene {self.values.shape[0]} valores para {self.grid.n_cells} celdas"
            )
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise non_positive_field_error(
                f"el campo '{self.name}' no es finito en x={self.grid.centers[bad]!r}"
            )
        return self

    @classmethod
    def constant(cls, grid: grid_1d, value: float, name: Optional[str] = None) -> "spatial_field":
        return cls(grid=grid, values=np.full(grid.n_cells, float(value)), name=name)

    def with_values(self, values: np.ndarray, name: Optional[str] = None) -> "spatial_field":
        """Crea un campo nuevo sobre la misma malla."""
        return spatial_field(grid=self.grid, values=values, name=name)

    def require_same_grid(self, other: "spatial_field") -> None:
        if self.grid != other.grid:
            raise field_mismatch_error(
                f"los campos '{self.name}' y '{other.name}' están definidos sobre mallas distintas"
            )

    def require_positive(self, label: Optional[str] = None) -> "spatial_field":
        """Verifica la positividad estricta exigida a los coeficientes."""
        if np.any(self.values <= 0.0):
            bad = int(np.flatnonzero(self.values <= 0.0)[0])
            raise non_positive_field_error(
                f"el coeficiente '{label or self.name}' debe ser estrictamente positivo; "
                f"vale {self.values[bad]!r} en x={self.grid.centers[bad]!r}"
            )
        return self

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _binary(self, other: Any, op) -> "spatial_field":
        if isinstance(other, spatial_field):
            self.require_same_grid(other)
            return self.with_values(op(self.values, other.values))
        return self.with_values(op(self.values, float(other)))

    def __add__(self, other: Any) -> "spatial_field":
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "spatial_field":
        return self._binary(other, np.subtract)

    def __rsub__(self, other: Any) -> "spatial_field":
        return self.with_values(float(other) - self.values)

    def __mul__(self, other: Any) -> "spatial_field":
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "spatial_field":
        return self._binary(other, np.divide)

    def __neg__(self) -> "spatial_field":
        return self.with_values(-self.values)
