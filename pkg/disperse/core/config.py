from functools import lru_cache
import json
import logging
import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field


DEFAULT_SETTINGS_FILE = Path(__file__).resolve().parent.parent.parent / "settingsApp.json"
LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


class app_settings(BaseModel):
    """
    Datos generales de la aplicación.

    Atributos:
        app_name (str): Nombre de la herramienta.
        app_version (str): Versión.
        app_description (str): Descripción breve usada en la ayuda del CLI.
    """
    app_name: str = "disperse"
    app_version: str = "1.0.0"
    app_description: str = "simulador_y_verificador_de_competencia_con_estrategias_de_dispersion"


class numerics_settings(BaseModel):
    """
    Tolerancias numéricas de los predicados, el operador, los autovalores y las identidades.
    """
    independence_tol: float = Field(1e-8, gt=0.0)
    hull_tol: float = Field(1e-8, gt=0.0)
    hull_max_condition: float = Field(1e8, gt=1.0)
    kernel_tol: float = Field(1e-13, gt=0.0)
    conservation_tol: float = Field(1e-13, gt=0.0)
    eigen_dense_max_cells: int = Field(1024, ge=4)
    eigen_max_iterations: int = Field(10000, ge=1)
    eigen_residual_tol: float = Field(1e-8, gt=0.0)
    invasion_amplitude: float = Field(1e-6, gt=0.0)
    invasion_window: float = Field(1.0, gt=0.0)
    invasion_sigma_floor: float = Field(1e-4, gt=0.0)
    identity_rtol: float = Field(0.01, gt=0.0)
    identity_atol: float = Field(1e-10, gt=0.0)
    coexistence_identity_tol: float = Field(1e-8, gt=0.0)
    noncorrespondence_tol: float = Field(1e-10, gt=0.0)


class stepper_settings(BaseModel):
    """
    Valores por defecto del integrador temporal.
    """
    dt: float = Field(1e-3, gt=0.0)
    t_end: float = Field(5000.0, gt=0.0)
    tol_steady: float = Field(1e-9, gt=0.0)
    record_every: int = Field(100, ge=1)
    steady_window: int = Field(10, ge=1)
    negativity_tol: float = Field(1e-10, gt=0.0)
    steady_residual_rtol: float = Field(1e-8, gt=0.0)


class classification_settings(BaseModel):
    """
    Umbrales (relativos a ‖K‖∞) para clasificar el resultado observado de una simulación.
    """
    extinction_threshold: float = Field(1e-6, gt=0.0)
    coexistence_threshold: float = Field(1e-3, gt=0.0)
    fit_tol: float = Field(1e-3, gt=0.0)
    monotone_tail_fraction: float = Field(0.1, gt=0.0, le=1.0)
    ideal_free_tol: float = Field(1e-3, gt=0.0)


class logging_settings(BaseModel):
    level: str = "WARNING"


class settings(BaseModel):
    """
    Configuración completa, tal como se lee de settingsApp.json.
    """
    app: app_settings = app_settings()
    numerics: numerics_settings = numerics_settings()
    stepper: stepper_settings = stepper_settings()
    classification: classification_settings = classification_settings()
    logging: logging_settings = logging_settings()


def settings_file_path() -> Path:
    """
    Devuelve la ruta del archivo de configuración.
    La variable DISPERSE_SETTINGS_FILE (también desde .env) tiene prioridad.
    """
    load_dotenv()
    override = os.getenv("DISPERSE_SETTINGS_FILE")
    return Path(override) if override else DEFAULT_SETTINGS_FILE


def load_app_settings_from_file() -> settings:
    """
    Carga la configuración desde settingsApp.json.
    Si el archivo no existe o no es válido, usa valores por defecto.

    Returns:
        settings: Configuración de la aplicación.
    """
    config = {}
    try:
        config_file = settings_file_path()
        if config_file.exists():
            with open(config_file, "r", encoding="utf-8") as f:
                config = json.load(f)
    except (OSError, json.JSONDecodeError):
        config = {}
    try:
        loaded = settings(
            app=app_settings(
                app_name=config.get("app", {}).get("name", "disperse"),
                app_version=config.get("app", {}).get("version", "1.0.0"),
                app_description=config.get("app", {}).get(
                    "description", app_settings().app_description
                ),
            ),
            numerics=numerics_settings(**config.get("numerics", {})),
            stepper=stepper_settings(**config.get("stepper", {})),
            classification=classification_settings(**config.get("classification", {})),
            logging=logging_settings(**config.get("logging", {})),
        )
    except Exception:
        loaded = settings()
    level = os.getenv("DISPERSE_LOG_LEVEL")
    if level:
        loaded.logging.level = level.upper()
    return loaded


@lru_cache
def get_settings() -> settings:
    """
    Devuelve la configuración como singleton (con cache).
    Returns:
        settings: Instancia única de configuración.
    """
    return load_app_settings_from_file()


def configure_logging(level: str | None = None) -> None:
    """
    Configura el logging raíz con el formato del proyecto. Los logs van a stderr.
    """
    chosen = (level or get_settings().logging.level).upper()
    logging.basicConfig(level=getattr(logging, chosen, logging.WARNING), format=LOG_FORMAT, force=True)
