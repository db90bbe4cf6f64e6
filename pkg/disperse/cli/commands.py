"""
Comandos del CLI: simulate, steady, eigen, verify y sweep.

Contrato de salida: 0 correcto, 1 error de entrada/validación/paso de tiempo,
2 expectativa no cumplida (--expect o chequeos de verify que fallan).
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict

from pydantic import ValidationError

from disperse.cli.output_writer import fmt, output_writer, report_lines
from disperse.cli.scenario_file import loaded_scenario, load_scenario, scenario_overrides
from disperse.core.errors import disperse_error, scenario_file_error
from disperse.models.report_schema import check_result, run_manifest
from disperse.services.analysis_service import analysis_service
from disperse.services.dynamics_service import dynamics_service
from disperse.services.spectra_service import spectra_service
from disperse.services.sweep_service import sweep_service
from disperse.services.verification_service import verification_service

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EXPECTATION = 2

OUTCOME_CHOICES = ("coexistence", "exclusion_u_wins", "exclusion_v_wins", "extinction", "undetermined")


def _load(args: argparse.Namespace) -> loaded_scenario:
    overrides = scenario_overrides(seed=args.seed, n_cells=args.n_cells, dt=args.dt)
    return load_scenario(Path(args.file), overrides)


def _finish(args: argparse.Namespace, loaded: loaded_scenario, writer: output_writer,
            summary: str, code: int, started: float) -> int:
    manifest = run_manifest(
        scenario_hash=loaded.digest,
        command=args.command,
        outputs=list(writer.written),
        wall_clock_seconds=round(time.perf_counter() - started, 6),
        summary=summary,
        exit_code=code,
    )
    writer.manifest(manifest)
    return code


def cmd_simulate(args: argparse.Namespace) -> int:
    """
    Integra el sistema, escribe la serie temporal y los perfiles finales e imprime
    la línea de resultado (classify_outcome).
    """
    started = time.perf_counter()
    loaded = _load(args)
    sc = loaded.scenario
    writer = output_writer(args.out)
    series, final, steady = dynamics_service.run(sc)
    observed = analysis_service.classify_outcome(final, series, sc.K, sc.P, sc.Q, steady)

    if "timeseries" in loaded.outputs:
        writer.timeseries(series)
    if "profiles" in loaded.outputs:
        writer.profiles(final.u, final.v)
    if "fields" in loaded.outputs:
        for name, field in (("K", sc.K), ("P", sc.P), ("Q", sc.Q), ("r", sc.r), ("a", sc.a)):
            writer.field(field, f"field_{name}.csv")
    if "matrix" in loaded.outputs:
        op_u, op_v = dynamics_service.operators(sc)
        writer.matrix(op_u, "matrix_u.csv")
        writer.matrix(op_v, "matrix_v.csv")

    print(f"outcome,{observed.label()},t={fmt(final.t)} steady={str(steady).lower()}")
    for note in observed.diagnostics:
        logger.info("clasificación: %s", note)
    code = EXIT_OK
    if args.expect is not None and observed.kind != args.expect:
        print(f"expectativa no cumplida: se esperaba {args.expect}, se observó {observed.kind}", file=sys.stderr)
        code = EXIT_EXPECTATION
    return _finish(args, loaded, writer, observed.label(), code, started)


def cmd_steady(args: argparse.Namespace) -> int:
    """Estados estacionarios de una sola especie u* y v* con sus residuos."""
    started = time.perf_counter()
    loaded = _load(args)
    sc = loaded.scenario
    writer = output_writer(args.out)
    u_star = dynamics_service.solve_single_steady(sc, "u")
    v_star = dynamics_service.solve_single_steady(sc, "v")
    writer.profiles(u_star, v_star, "steady.csv", header=("x", "u_star", "v_star"))
    results = [
        check_result(name=f"steady_state_{label}", status="pass",
                     detail=f"residuo {fmt(dynamics_service.stationary_residual(sc, label, star))}")
        for label, star in (("u", u_star), ("v", v_star))
    ]
    sys.stdout.write(report_lines(results))
    return _finish(args, loaded, writer, "steady states converged", EXIT_OK, started)


def cmd_eigen(args: argparse.Namespace) -> int:
    """Autopares principales en (0, 0) y en ambos estados semi-triviales."""
    started = time.perf_counter()
    loaded = _load(args)
    sc = loaded.scenario
    writer = output_writer(args.out)
    u_star = dynamics_service.solve_single_steady(sc, "u")
    v_star = dynamics_service.solve_single_steady(sc, "v")
    problems = {**spectra_service.zero_problems(sc), **spectra_service.invasion_problems(sc, u_star, v_star)}
    print("problem,sigma1,residual,iterations")
    for name, problem in problems.items():
        result = spectra_service.principal_eigen(problem)
        writer.eigen(result, f"eigen_{name}.csv")
        print(f"{name},{fmt(result.sigma1)},{fmt(result.residual)},{result.iterations}")
    return _finish(args, loaded, writer, "eigenpairs computed", EXIT_OK, started)


def cmd_verify(args: argparse.Namespace) -> int:
    """Batería completa de chequeos; sale con 0 solo si ningún chequeo aplicable falla."""
    started = time.perf_counter()
    loaded = _load(args)
    writer = output_writer(args.out)
    results = verification_service.run_checks(loaded.scenario)
    writer.checks(results)
    sys.stdout.write(report_lines(results))
    counts = {status: sum(1 for r in results if r.status == status) for status in ("pass", "fail", "skipped")}
    summary = f"pass={counts['pass']} fail={counts['fail']} skipped={counts['skipped']}"
    code = EXIT_OK if verification_service.all_passed(results) else EXIT_EXPECTATION
    return _finish(args, loaded, writer, summary, code, started)


def cmd_sweep(args: argparse.Namespace) -> int:
    """Barrido de d1, d2, r1 o r2; una fila por valor, en orden."""
    started = time.perf_counter()
    loaded = _load(args)
    writer = output_writer(args.out)
    values = sweep_service.values(args.start, args.stop, args.count)
    rows = sweep_service.sweep(loaded.scenario, args.axis, values, workers=args.workers, simulate=args.simulate)
    writer.sweep(rows)
    print("param,value,outcome,sigma1_at_(0,v*),sigma1_at_(u*,0)")
    for row in rows:
        print(f"{row.param},{fmt(row.value)},{row.outcome},{fmt(row.sigma_u_at_v_star)},{fmt(row.sigma_v_at_u_star)}")
    return _finish(args, loaded, writer, f"{len(rows)} puntos", EXIT_OK, started)


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "eigen": cmd_eigen,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def dispatch(args: argparse.Namespace) -> int:
    """
    Ejecuta el comando y traduce los errores a códigos de salida.
    """
    try:
        return COMMANDS[args.command](args)
    except scenario_file_error as exc:
        print(f"error en el escenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except disperse_error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValidationError, ValueError) as exc:
        print(f"error de validación: {exc}", file=sys.stderr)
        return EXIT_INPUT
