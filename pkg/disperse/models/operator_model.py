"""
Modelo del operador de dispersión discretizado u ↦ ∇·[d·a∇(u/P)].
"""
import numpy as np
from pydantic import BaseModel, ConfigDict

from disperse.core.errors import field_mismatch_error
from disperse.models.grid_model import grid_1d, spatial_field


class dispersal_operator(BaseModel):
    """
    Discretización conservativa (volúmenes finitos) en la variable w = u/P,
    con flujo nulo en la frontera.

    Flujo en la interfaz i+1/2: F = d·ā·(w_{i+1} − w_i)/h, con ā la media aritmética de a.
    (L u)_i = (F_{i+1/2} − F_{i−1/2})/h y F_{−1/2} = F_{n−1/2} = 0.

    Atributos:
        grid: Malla.
        strategy: Estrategia P (o Q).
        a: Perfil de difusividad/advección.
        d: Multiplicador de la tasa de dispersión.
        face_coef: d·ā_{i+1/2}/h² en las n−1 interfaces interiores.
        sub, diag, sup: Diagonales de la matriz tridiagonal (sub y sup con n−1 entradas).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: grid_1d
    strategy: spatial_field
    a: spatial_field
    d: float
    face_coef: np.ndarray
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def _values(self, u) -> np.ndarray:
        if isinstance(u, spatial_field):
            if u.grid != self.grid:
                raise field_mismatch_error("el campo y el operador están definidos sobre mallas distintas")
            return u.values
        values = np.asarray(u, dtype=float)
        if values.shape != (self.grid.n_cells,):
            raise field_mismatch_error(
                f"se esperaban {self.grid.n_cells} valores, se recibieron {values.shape}"
            )
        return values

    def fluxes(self, u) -> np.ndarray:
        """Flujos en las n+1 interfaces (los extremos son cero)."""
        w = self._values(u) / self.strategy.values
        h = self.grid.h
        flux = np.zeros(self.grid.n_cells + 1)
        flux[1:-1] = self.face_coef * h * np.diff(w)
        return flux

    def apply_values(self, u) -> np.ndarray:
        """Acción L u en forma de flujos, sobre arreglos."""
        return np.diff(self.fluxes(u)) / self.grid.h

    def apply(self, u: spatial_field) -> spatial_field:
        """Devuelve L u como campo."""
        return spatial_field(grid=self.grid, values=self.apply_values(u), name="L u")

    def to_dense(self) -> np.ndarray:
        n = self.grid.n_cells
        matrix = np.diag(self.diag)
        matrix[np.arange(n - 1), np.arange(1, n)] = self.sup
        matrix[np.arange(1, n), np.arange(n - 1)] = self.sub
        return matrix

    def norm_inf(self) -> float:
        """Norma infinito (máxima suma de filas en valor absoluto)."""
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.sup)
        row[1:] += np.abs(self.sub)
        return float(np.max(row))

    def shifted_banded(self, shift: float, scale: float) -> np.ndarray:
        """
        Forma en bandas (formato de scipy.linalg.solve_banded con (1, 1))
        de la matriz shift·I − scale·L.
        """
        n = self.grid.n_cells
        ab = np.zeros((3, n))
        ab[0, 1:] = -scale * self.sup
        ab[1, :] = shift - scale * self.diag
        ab[2, :-1] = -scale * self.sub
        return ab

    def triplets(self):
        """Entradas no nulas como (fila, columna, valor), por filas."""
        n = self.grid.n_cells
        for i in range(n):
            if i > 0:
                yield i, i - 1, float(self.sub[i - 1])
            yield i, i, float(self.diag[i])
            if i < n - 1:
                yield i, i + 1, float(self.sup[i])
