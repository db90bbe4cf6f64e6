"""
Escritura determinista de CSV y del manifiesto de ejecución.

Todos los reales se escriben con 17 dígitos significativos (".17g") para que
el mismo escenario y semilla produzcan archivos idénticos byte a byte.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from disperse.models.grid_model import spatial_field
from disperse.models.operator_model import dispersal_operator
from disperse.models.report_schema import check_result, eigen_result, run_manifest
from disperse.models.scenario_schema import time_series
from disperse.services.sweep_service import sweep_row

logger = logging.getLogger(__name__)


def fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


class output_writer:
    """
    Escribe los archivos de salida en un directorio y lleva la lista de lo escrito.
    """

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.written: List[str] = []

    def _write(self, filename: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / filename
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        self.written.append(filename)
        logger.debug("escrito %s", path)
        return path

    def timeseries(self, series: time_series, filename: str = "timeseries.csv") -> Path:
        rows = ([fmt(v) for v in row] for row in series.rows())
        return self._write(filename, ["t", "mass_u", "mass_v", "sup_u", "sup_v", "rate_u", "rate_v"], rows)

    def profiles(self, u: spatial_field, v: spatial_field, filename: str = "profiles.csv",
                 header: Sequence[str] = ("x", "u", "v")) -> Path:
        rows = ([fmt(x), fmt(a), fmt(b)] for x, a, b in zip(u.grid.centers, u.values, v.values))
        return self._write(filename, list(header), rows)

    def field(self, f: spatial_field, filename: str) -> Path:
        """CSV `x,value`."""
        rows = ([fmt(x), fmt(value)] for x, value in zip(f.grid.centers, f.values))
        return self._write(filename, ["x", "value"], rows)

    def matrix(self, op: dispersal_operator, filename: str = "matrix.csv") -> Path:
        """Entradas no nulas `row,col,value`."""
        rows = ([str(i), str(j), fmt(value)] for i, j, value in op.triplets())
        return self._write(filename, ["row", "col", "value"], rows)

    def eigen(self, result: eigen_result, filename: str) -> Path:
        """Autofunción `x,psi` más la línea escalar `sigma1,residual,iterations` en otro archivo."""
        rows = ([fmt(x), fmt(value)] for x, value in zip(result.psi.grid.centers, result.psi.values))
        path = self._write(filename, ["x", "psi"], rows)
        summary = filename.replace(".csv", "_summary.csv")
        self._write(summary, ["sigma1", "residual", "iterations"],
                    [[fmt(result.sigma1), fmt(result.residual), str(result.iterations)]])
        return path

    def checks(self, results: Sequence[check_result], filename: str = "verify.csv") -> Path:
        rows = ([r.name, fmt(r.lhs), fmt(r.rhs), fmt(r.rel_err), "true" if r.status == "pass" else
                 ("skipped" if r.status == "skipped" else "false")] for r in results)
        return self._write(filename, ["check_name", "lhs", "rhs", "rel_err", "satisfied"], rows)

    def sweep(self, rows: Sequence[sweep_row], filename: str = "sweep.csv") -> Path:
        body = ([row.param, fmt(row.value), row.outcome, fmt(row.sigma_u_at_v_star), fmt(row.sigma_v_at_u_star)]
                for row in rows)
        return self._write(filename, ["param", "value", "outcome", "sigma1_at_(0,v*)", "sigma1_at_(u*,0)"], body)

    def manifest(self, manifest: run_manifest, filename: str = "manifest.json") -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / filename
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(), f, indent=2, ensure_ascii=False)
            f.write("\n")
        return path


def report_lines(results: Sequence[check_result]) -> str:
    """Líneas `name,status,detail` para stdout."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "status", "detail"])
    for r in results:
        writer.writerow([r.name, r.status, r.detail])
    return buffer.getvalue()
