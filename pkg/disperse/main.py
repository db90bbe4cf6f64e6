import argparse
import sys
from typing import List, Optional

from disperse.cli.commands import COMMANDS, EXIT_INPUT, OUTCOME_CHOICES, dispatch
from disperse.core.config import configure_logging, get_settings
from disperse.services.sweep_service import SWEEP_AXES


class cli_parser(argparse.ArgumentParser):
    """ArgumentParser cuyos errores de uso salen con el código de error de entrada (1), no con 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> cli_parser:
    """
    Construye el parser: `disperse simulate|steady|eigen|verify|sweep <archivo> [opciones]`.
    """
    settings = get_settings()
    parser = cli_parser(
        prog=settings.app.app_name,
        description=settings.app.app_description.replace("_", " "),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"comando {name}")
        cmd.add_argument("file", help="archivo de escenario")
        cmd.add_argument("--out", default="out", help="directorio de salida (por defecto ./out)")
        cmd.add_argument("--seed", type=int, default=None, help="semilla (reemplaza [run] seed)")
        cmd.add_argument("--n-cells", dest="n_cells", type=int, default=None, help="número de celdas")
        cmd.add_argument("--dt", type=float, default=None, help="paso de tiempo")
        cmd.add_argument("--expect", choices=OUTCOME_CHOICES, default=None,
                         help="resultado esperado (sale con 2 si no se cumple)")
        cmd.add_argument("--log-level", dest="log_level", default=None, help="nivel de logging")
        if name == "sweep":
            cmd.add_argument("--axis", choices=SWEEP_AXES, required=True, help="parámetro barrido")
            cmd.add_argument("--from", dest="start", type=float, required=True, help="valor inicial")
            cmd.add_argument("--to", dest="stop", type=float, required=True, help="valor final")
            cmd.add_argument("--count", type=int, default=11, help="número de valores")
            cmd.add_argument("--workers", type=int, default=1, help="hilos para evaluar los puntos")
            cmd.add_argument("--simulate", action="store_true",
                             help="clasificar cada punto con una corrida en lugar de la predicción")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Punto de entrada del CLI.

    Returns:
        int: Código de salida (0 correcto, 1 error de entrada, 2 expectativa no cumplida).
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    configure_logging(args.log_level)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
