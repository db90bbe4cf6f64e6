"""
Jerarquía de errores del proyecto.
El CLI traduce estas excepciones a códigos de salida (ver disperse/cli/commands.py).
"""


class disperse_error(Exception):
    """Error base de disperse."""


class invalid_grid_error(disperse_error):
    """Malla 1-D inválida (n_cells < 4 o extremos mal ordenados)."""


class profile_syntax_error(disperse_error):
    """
    Error de sintaxis en una expresión de perfil.

    Atributos:
        position (int): Offset (0-based) del carácter donde se detectó el error.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (posición {position})")
        self.position = position


class unknown_identifier_error(profile_syntax_error):
    """Identificador fuera de la gramática cerrada (x, pi, sin, cos, exp, log, sqrt, abs)."""

    def __init__(self, name: str, position: int):
        super().__init__(f"identificador desconocido '{name}'", position)
        self.name = name


class profile_evaluation_error(disperse_error):
    """
    Evaluación no definida (división por cero, log o sqrt de valor no válido).

    Atributos:
        index (int): Índice del punto de evaluación.
        x (float | None): Coordenada del punto, si se conoce.
    """

    def __init__(self, message: str, index: int, x: float | None = None):
        where = f"x={x!r}" if x is not None else f"índice {index}"
        super().__init__(f"{message} en {where}")
        self.reason = message
        self.index = index
        self.x = x


class field_mismatch_error(disperse_error):
    """Campos o operadores definidos sobre mallas distintas."""


class non_positive_field_error(disperse_error):
    """Un coeficiente (K, P, Q, r, a) o un estado que debe ser positivo no lo es."""


class zero_field_error(disperse_error):
    """Campo idénticamente nulo donde se exige uno no nulo."""


class ill_conditioned_error(disperse_error):
    """Ecuaciones normales mal condicionadas (P y Q casi dependientes)."""


class timestep_error(disperse_error):
    """El paso de tiempo viola la cota de reacción o produjo valores negativos."""


class linear_solve_error(disperse_error):
    """Fallo del solver tridiagonal."""


class convergence_error(disperse_error):
    """
    No se alcanzó convergencia.

    Atributos:
        residual (float): Residuo alcanzado.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residuo alcanzado {residual:.3e})")
        self.residual = residual


class hypothesis_error(disperse_error):
    """Las hipótesis necesarias para una fórmula no se cumplen (p. ej. M ≤ 0)."""


class scenario_file_error(disperse_error):
    """
    Error en un archivo de escenario.

    Atributos:
        key (str | None): Clave ofensiva, en formato 'seccion.clave'.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
