"""
Lectura de archivos de escenario (texto plano con secciones clave = valor).

Gramática (ver docs/ESCENARIOS.md):

    [grid]       n_cells, x_left, x_right
    [profiles]   K, P, Q, r, a            (expresiones en x)
    [species_u]  d, r_mult, a (opcional)
    [species_v]  d, r_mult, a (opcional)
    [init]       u0, v0                   (expresión, "default" o "random")
    [stepper]    dt, t_end, tol_steady, record_every
    [run]        seed, outputs
"""
import configparser
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from disperse.core.config import get_settings
from disperse.core.errors import (
    disperse_error,
    profile_evaluation_error,
    profile_syntax_error,
    scenario_file_error,
)
from disperse.models.grid_model import grid_1d, spatial_field
from disperse.models.scenario_schema import scenario, species_params, stepper_config
from disperse.services.dynamics_service import dynamics_service
from disperse.services.grid_service import grid_service

logger = logging.getLogger(__name__)

REQUIRED_PROFILES = ("K", "P", "Q", "r", "a")
PRESETS = ("default", "random")
OUTPUT_KINDS = ("timeseries", "profiles", "fields", "matrix", "steady", "eigen", "verify", "sweep")
KNOWN_KEYS = {
    "grid": {"n_cells", "x_left", "x_right"},
    "profiles": set(REQUIRED_PROFILES),
    "species_u": {"d", "r_mult", "a"},
    "species_v": {"d", "r_mult", "a"},
    "init": {"u0", "v0"},
    "stepper": {"dt", "t_end", "tol_steady", "record_every"},
    "run": {"seed", "outputs"},
}


class scenario_overrides(BaseModel):
    """Opciones del CLI que reemplazan valores del archivo."""
    model_config = ConfigDict(frozen=True)

    seed: Optional[int] = None
    n_cells: Optional[int] = None
    dt: Optional[float] = None


class loaded_scenario(BaseModel):
    """
    Escenario resuelto junto con su texto canónico y sus salidas pedidas.

    Atributos:
        scenario: Escenario validado.
        resolved: Pares sección.clave → valor tras aplicar las opciones del CLI.
        outputs: Salidas pedidas en [run] outputs.
        digest: SHA-256 del escenario resuelto.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: scenario
    resolved: Dict[str, str]
    outputs: List[str]
    digest: str


def _read_document(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as exc:
        raise scenario_file_error(f"no se pudo leer el archivo de escenario: {exc}") from exc
    except configparser.Error as exc:
        raise scenario_file_error(f"formato inválido: {exc}") from exc
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise scenario_file_error(f"sección desconocida [{section}]", key=section)
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise scenario_file_error("clave desconocida", key=f"{section}.{key}")
    return parser


def _get(doc: configparser.ConfigParser, section: str, key: str, default: Optional[str] = None) -> str:
    if doc.has_option(section, key):
        value = doc.get(section, key).strip()
        if value:
            return value
    if default is None:
        raise scenario_file_error("clave requerida ausente", key=f"{section}.{key}")
    return default


def _number(text: str, key: str, kind=float):
    try:
        return kind(text)
    except ValueError as exc:
        raise scenario_file_error(f"valor numérico inválido '{text}'", key=key) from exc


def _profile(text: str, grid: grid_1d, key: str, name: str) -> spatial_field:
    try:
        return grid_service.sample_text(text, grid, name=name)
    except (profile_syntax_error, profile_evaluation_error) as exc:
        raise scenario_file_error(str(exc), key=key) from exc


def _initial(
    doc: configparser.ConfigParser, K: spatial_field, seed: int, resolved: Dict[str, str]
) -> Tuple[spatial_field, spatial_field]:
    texts = {label: _get(doc, "init", label, "default") for label in ("u0", "v0")}
    resolved.update({f"init.{label}": text for label, text in texts.items()})
    presets = {
        "default": dynamics_service.default_initial_data(K),
        "random": dynamics_service.random_initial_data(K, seed),
    }
    fields = []
    for index, label in enumerate(("u0", "v0")):
        text = texts[label]
        if text in PRESETS:
            fields.append(presets[text][index])
        else:
            fields.append(_profile(text, K.grid, f"init.{label}", label))
    return fields[0], fields[1]


def _species(
    doc: configparser.ConfigParser, section: str, strategy: spatial_field, resolved: Dict[str, str]
) -> species_params:
    d_text = _get(doc, section, "d", "1")
    r_text = _get(doc, section, "r_mult", "1")
    resolved[f"{section}.d"] = d_text
    resolved[f"{section}.r_mult"] = r_text
    a = None
    if doc.has_option(section, "a"):
        a_text = _get(doc, section, "a")
        resolved[f"{section}.a"] = a_text
        a = _profile(a_text, strategy.grid, f"{section}.a", f"a_{section[-1]}")
    try:
        return species_params(
            strategy=strategy,
            d=_number(d_text, f"{section}.d"),
            r_mult=_number(r_text, f"{section}.r_mult"),
            a=a,
        )
    except ValidationError as exc:
        raise _validation(exc, section) from exc


def _validation(exc: ValidationError, section: str) -> scenario_file_error:
    error = exc.errors()[0]
    loc = ".".join(str(part) for part in error.get("loc", ()))
    key = f"{section}.{loc}" if loc else section
    return scenario_file_error(error.get("msg", str(exc)), key=key)


def digest_of(resolved: Dict[str, str], sc: scenario) -> str:
    """SHA-256 del texto canónico resuelto y de los datos iniciales muestreados."""
    sha = hashlib.sha256()
    sha.update(json.dumps(resolved, sort_keys=True).encode("utf-8"))
    for field in (sc.u0, sc.v0):
        sha.update(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return sha.hexdigest()


def load_scenario(path: Path, overrides: Optional[scenario_overrides] = None) -> loaded_scenario:
    """
    Lee, muestrea y valida un archivo de escenario.

    Args:
        path: Ruta del archivo.
        overrides: Opciones del CLI (--seed, --n-cells, --dt).

    Returns:
        loaded_scenario: Escenario resuelto.

    Raises:
        scenario_file_error: Claves ausentes o desconocidas, expresiones inválidas,
            coeficientes no positivos o parámetros fuera de rango (con la clave ofensiva).
        timestep_error: Si dt viola la cota de reacción con los datos iniciales.
    """
    overrides = overrides or scenario_overrides()
    defaults = get_settings().stepper
    doc = _read_document(Path(path))
    resolved: Dict[str, str] = {}

    n_text = str(overrides.n_cells) if overrides.n_cells is not None else _get(doc, "grid", "n_cells")
    left_text = _get(doc, "grid", "x_left", "0")
    right_text = _get(doc, "grid", "x_right", "1")
    resolved.update({"grid.n_cells": n_text, "grid.x_left": left_text, "grid.x_right": right_text})
    try:
        grid = grid_1d(
            n_cells=_number(n_text, "grid.n_cells", int),
            x_left=_number(left_text, "grid.x_left"),
            x_right=_number(right_text, "grid.x_right"),
        )
    except disperse_error as exc:
        if isinstance(exc, scenario_file_error):
            raise
        raise scenario_file_error(str(exc), key="grid") from exc

    profiles = {}
    for name in REQUIRED_PROFILES:
        text = _get(doc, "profiles", name)
        resolved[f"profiles.{name}"] = text
        field = _profile(text, grid, f"profiles.{name}", name)
        try:
            field.require_positive(name)
        except disperse_error as exc:
            raise scenario_file_error(str(exc), key=f"profiles.{name}") from exc
        profiles[name] = field

    seed_text = str(overrides.seed) if overrides.seed is not None else _get(doc, "run", "seed", "0")
    seed = _number(seed_text, "run.seed", int)
    resolved["run.seed"] = seed_text

    try:
        species_u = _species(doc, "species_u", profiles["P"], resolved)
        species_v = _species(doc, "species_v", profiles["Q"], resolved)
    except scenario_file_error:
        raise
    except disperse_error as exc:
        raise scenario_file_error(str(exc), key="species") from exc

    u0, v0 = _initial(doc, profiles["K"], seed, resolved)

    dt_text = repr(overrides.dt) if overrides.dt is not None else _get(doc, "stepper", "dt", repr(defaults.dt))
    stepper_texts = {
        "dt": dt_text,
        "t_end": _get(doc, "stepper", "t_end", repr(defaults.t_end)),
        "tol_steady": _get(doc, "stepper", "tol_steady", repr(defaults.tol_steady)),
        "record_every": _get(doc, "stepper", "record_every", str(defaults.record_every)),
    }
    resolved.update({f"stepper.{k}": v for k, v in stepper_texts.items()})
    dt = _number(dt_text, "stepper.dt")

    outputs_text = _get(doc, "run", "outputs", ",".join(OUTPUT_KINDS))
    outputs = [item.strip() for item in outputs_text.split(",") if item.strip()]
    for item in outputs:
        if item not in OUTPUT_KINDS:
            raise scenario_file_error(f"salida desconocida '{item}'", key="run.outputs")
    resolved["run.outputs"] = ",".join(outputs)

    try:
        stepper = stepper_config(
            dt=dt,
            t_end=_number(stepper_texts["t_end"], "stepper.t_end"),
            tol_steady=_number(stepper_texts["tol_steady"], "stepper.tol_steady"),
            record_every=_number(stepper_texts["record_every"], "stepper.record_every", int),
        )
        sc = scenario(
            grid=grid, K=profiles["K"], r=profiles["r"], a=profiles["a"],
            species_u=species_u, species_v=species_v, u0=u0, v0=v0,
            stepper=stepper, seed=seed,
        )
    except ValidationError as exc:
        if dt > 0.0 and np.isfinite(dt):
            _check_reaction_bound(profiles, species_u, species_v, u0, v0, dt)
        raise _validation(exc, "stepper") from exc
    except scenario_file_error:
        raise
    except disperse_error as exc:
        raise scenario_file_error(str(exc), key="init") from exc
    dynamics_service.check_timestep(sc, sc.u0.values, sc.v0.values, sc.stepper.dt)

    digest = digest_of(resolved, sc)
    logger.info("escenario %s cargado (sha256 %s)", path, digest[:12])
    return loaded_scenario(scenario=sc, resolved=resolved, outputs=outputs, digest=digest)


def _check_reaction_bound(profiles, species_u, species_v, u0, v0, dt: float) -> None:
    """Diagnóstico de paso de tiempo antes de informar otros errores del integrador."""
    number = dynamics_service.bound_number(
        profiles["r"].values, profiles["K"].values, max(species_u.r_mult, species_v.r_mult),
        u0.values, v0.values, dt,
    )
    dynamics_service.raise_timestep(dt, number)
