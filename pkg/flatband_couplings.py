#!/usr/bin/env python3
"""Flatband Couplings: acoplamientos de intercambio en cadenas Sb[n] y Dd[n] con bandas planas."""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from rich.console import Console
from rich.table import Table

from core.analysis import amplification_scan, fit_decay
from core.asymptotics import asymptotic_curve
from core.check_engine import CheckEngine
from core.config_loader import ConfigLoader
from core.couplings import coupling_curve
from core.errors import NumericalError, ValidationError
from core.figure_registry import FIGURE_REGISTRY, FigureRegistry
from core.lattice import allowed_separations
from core.qmetric import quantum_metric
from core.report_builder import ReportBuilder, output_format, read_coupling_table
from core.spectrum import bands_frame, cls_translates_rank, construct_cls, diagonalize_bands, gap_delta
from models.asymptotic_prediction import Regime
from models.chain_spec import Family, SpinSector
from models.check_result import CHECK_COLUMNS
from models.coupling_table import pair_label, parse_pair
from models.fit_result import FitModel
from models.run_config import RunConfig

logger = logging.getLogger(__name__)

OUTPUTS_DIR = "resultado"
DEFAULT_RMAX = 20.0
CLS_RANK_CELLS = 6

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

console = Console()


def _setup_logging(quiet: bool = False) -> None:
    """Configura logging para la aplicación."""
    level = logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def _parse_grid(text: Optional[str], cast=float) -> Optional[List]:
    if text is None:
        return None
    try:
        return [cast(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"Lista inválida: {text!r} (se espera p.ej. 0.1,0.3,1)")


# ── Contexto de una corrida ──

class RunContext:
    """Resuelve flags + config YAML en ChainSpec, ComputeConfig y rutas de salida."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = ConfigLoader.load(args.config) if args.config else None
        self.compute = ConfigLoader.compute_config(self.config, {"num_k": args.num_k, "eta": args.eta})
        fmt = ConfigLoader.run_option(self.config, "format", args.format)
        if fmt is None:
            out = self.option("out", args.out)
            fmt = output_format(out) if out else "csv"
        self.output_format = str(fmt).lower()
        if self.output_format not in ("csv", "json"):
            raise ValidationError(f"Formato inválido: {fmt!r} (válidos: csv, json)")

    def option(self, key: str, flag_value: Any = None) -> Any:
        return ConfigLoader.run_option(self.config, key, flag_value)

    def spec(self):
        a = self.args
        flags = {"family": a.family, "n": a.n, "alpha": a.alpha, "t": a.t, "JS": a.js, "a": a.a}
        return ConfigLoader.chain_spec(self.config, flags)

    def out(self, default_name: str, ext: Optional[str] = None) -> str:
        out = self.option("out", self.args.out)
        if out:
            return out
        return os.path.join(OUTPUTS_DIR, f"{default_name}.{ext or self.output_format}")

    def builder(self, command: str, out: str, spec=None, options: Optional[Dict[str, Any]] = None,
                output_format: Optional[str] = None) -> ReportBuilder:
        return ReportBuilder(RunConfig(
            command=command,
            out=out,
            output_format=output_format or self.output_format,
            spec=spec,
            compute=self.compute,
            options=options or {},
        ))


def _print_table(title: str, columns: List[str], rows: List[List[Any]]) -> None:
    table = Table(title=title)
    for col in columns:
        table.add_column(col)
    for row in rows:
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)


# ── Subcomandos ──

def cmd_bands(ctx: RunContext) -> int:
    spec = ctx.spec()
    num_k = ctx.compute.num_k
    bands = [diagonalize_bands(spec, sector, num_k) for sector in (SpinSector.UP, SpinSector.DOWN)]
    gap = gap_delta(spec, num_k)
    out = ctx.out(f"bands_{spec.label}")
    ctx.builder("bands", out, spec).write_frame(bands_frame(bands), metadata={
        "num_k": num_k,
        "flat_band": {b.sector.value: b.flat_band for b in bands},
        "flat_band_deviation": {b.sector.value: b.flat_band_deviation() for b in bands},
        "gap": gap.to_dict(),
    })
    if not ctx.args.quiet:
        _print_table(f"Bandas {spec.description}", ["sector", "banda plana", "desviación", "δ"],
                     [[b.sector.value, b.flat_band, b.flat_band_deviation(), gap.delta] for b in bands])
    return EXIT_OK


def cmd_cls(ctx: RunContext) -> int:
    spec = ctx.spec()
    cls = construct_cls(spec)
    rank = cls_translates_rank(spec, CLS_RANK_CELLS)
    out = ctx.out(f"cls_{spec.label}")
    summary = {k: v for k, v in cls.to_dict().items() if k != "amplitudes"}
    summary["translates_rank"] = {"num_cells": CLS_RANK_CELLS, "rank": rank}
    ctx.builder("cls", out, spec).write_frame(cls.to_frame(), metadata=summary)
    if not ctx.args.quiet:
        _print_table(f"CLS {spec.label}", ["soporte", "normalización", "‖H·cls‖", "rango"],
                     [[len(cls.orbitals), cls.normalization, cls.residual, rank]])
    return EXIT_OK


def cmd_couplings(ctx: RunContext) -> int:
    spec = ctx.spec()
    pair = parse_pair(ctx.option("pair", ctx.args.pair))
    rmax = ctx.option("rmax", ctx.args.rmax)
    rmax = float(rmax) if rmax is not None else max(DEFAULT_RMAX, 3.0 * spec.n)
    table = coupling_curve(spec, pair, rmax, ctx.compute, with_contributions=ctx.args.contributions)

    out = ctx.out(f"couplings_{spec.label}_{pair_label(pair)}")
    builder = ctx.builder("couplings", out, spec, {"pair": pair_label(pair), "rmax": rmax})
    metadata = {
        "num_k": table.metadata["num_k"],
        "num_k_reported": table.metadata["num_k_reported"],
        "converged": bool(table.converged.all()),
        "unconverged_R": [float(R) for R, ok in zip(table.distances, table.converged) if not ok],
        "unresolved_R": [float(R) for R, ok in zip(table.distances, table.resolved) if not ok],
    }
    builder.write_frame(table.to_frame(), metadata=metadata)
    if ctx.args.contributions:
        stem, ext = os.path.splitext(out)
        builder.write_frame(table.contributions_frame(), f"{stem}.contributions{ext}", metadata)
    if not ctx.args.quiet:
        rows = [[float(R), float(J), bool(ok)] for R, J, ok in zip(table.distances, table.values, table.converged)]
        _print_table(f"J_{pair_label(pair)}(R) {spec.description}", ["R/a", "J/t", "convergido"], rows[:12])
    return EXIT_OK


def cmd_qmetric(ctx: RunContext) -> int:
    spec = ctx.spec()
    result = quantum_metric(spec, ctx.compute.num_k)
    out = ctx.out(f"qmetric_{spec.label}")
    ctx.builder("qmetric", out, spec).write_frame(result.to_frame(), metadata=result.to_dict())
    if not ctx.args.quiet:
        _print_table(f"Métrica cuántica {spec.label}", ["⟨g⟩/a²", "N", "2N", "error"],
                     [[result.g_avg_over_a2, result.g_avg_coarse, result.g_avg_fine, result.error_estimate]])
    return EXIT_OK


def cmd_fit(ctx: RunContext) -> int:
    args = ctx.args
    if not args.input:
        raise ValidationError("fit requiere --input con un CSV/JSON de acoplamientos")
    table = read_coupling_table(args.input, pair=args.pair, n=args.n, alpha=args.alpha, family=args.family)
    model = FitModel.parse(ctx.option("model", args.model))
    fit = fit_decay(table, model, r_min=args.rmin, r_max=args.rmax)

    out = ctx.out(f"fit_{table.spec.label}_{model.value}", "json")
    options = {"input": args.input, "model": model.value, "rmin": args.rmin, "rmax": args.rmax}
    ctx.builder("fit", out, table.spec, options, "json").write_json(
        fit.to_dict(), metadata={"accepted": fit.accepted, "points_used": fit.points_used})
    if not args.quiet:
        params = ", ".join(f"{k}={v:.6g}±{fit.stderr[k]:.2g}" for k, v in fit.parameters.items())
        _print_table(f"Ajuste {model.value} {table.spec.description}", ["parámetros", "R²", "ventana", "aceptado"],
                     [[params, fit.r_squared, f"[{fit.window[0]:g}, {fit.window[1]:g}]", fit.accepted]])
    return EXIT_OK


def cmd_scan(ctx: RunContext) -> int:
    args = ctx.args
    alpha_grid = ctx.option("alpha_grid", _parse_grid(args.alpha_grid))
    js_grid = ctx.option("JS_grid", _parse_grid(args.js_grid))
    if not alpha_grid or not js_grid:
        raise ValidationError("scan requiere --alpha-grid y --js-grid")
    t_ev = ctx.option("t_ev", args.t_ev)
    scan = amplification_scan(alpha_grid, js_grid, ctx.compute, t_ev=t_ev)

    out = ctx.out("scan")
    options = {"alpha_grid": scan.alpha_grid, "JS_grid": scan.JS_grid, "t_ev": t_ev}
    metadata = dict(scan.grid_metadata(), **scan.metadata)
    metadata["converged"] = bool(scan.cells["converged_flag"].all())
    ctx.builder("scan", out, None, options).write_frame(scan.to_frame(), metadata=metadata)
    if not args.quiet:
        frame = scan.to_frame()
        _print_table("Barrido de amplificación", ["alpha", "JS", "r", "amplificación"],
                     frame.loc[:, ["alpha", "JS", "ratio_r", "amplification"]].values.tolist())
    return EXIT_OK


def cmd_reproduce(ctx: RunContext) -> int:
    args = ctx.args
    registry = FigureRegistry()
    registry.get(args.figure)
    tag = args.figure.strip().lower()
    out_dir = args.out_dir or os.path.join(OUTPUTS_DIR, tag)

    options = {
        key: value for key, value in {
            "alpha_grid": ctx.option("alpha_grid", _parse_grid(args.alpha_grid)),
            "JS_grid": ctx.option("JS_grid", _parse_grid(args.js_grid)),
            "n_list": ctx.option("n_list", _parse_grid(args.n_list, int)),
            "t_ev": ctx.option("t_ev", args.t_ev),
            "rmax": ctx.option("rmax", args.rmax),
        }.items() if value is not None
    }
    artifacts = registry.reproduce(tag, ctx.compute, options)

    written = []
    for artifact in artifacts:
        fmt = ctx.output_format if artifact.is_table else "json"
        path = os.path.join(out_dir, f"{artifact.name}.{fmt}")
        builder = ctx.builder("reproduce", path, None, dict(options, figure=tag), fmt)
        metadata = dict(artifact.metadata, figure=tag, schema=artifact.schema)
        if artifact.is_table:
            builder.write_frame(artifact.data, metadata=metadata)
        else:
            builder.write_json(artifact.data, metadata=metadata)
        written.append([artifact.name, artifact.schema or "json", path])
    if not args.quiet:
        _print_table(f"Bundle {tag}", ["artefacto", "esquema", "archivo"], written)
    return EXIT_OK


def cmd_asymptotic(ctx: RunContext) -> int:
    spec = ctx.spec()
    regime = ctx.args.regime
    if regime is None:
        regime = Regime.STUB_FBFB if spec.family is Family.STUB else Regime.DIAMOND_POWER_LAW
    else:
        try:
            regime = Regime(regime)
        except ValueError:
            raise ValidationError(f"Régimen desconocido: {regime!r} (válidos: {[r.value for r in Regime]})")
    rmax = ctx.option("rmax", ctx.args.rmax)
    rmax = float(rmax) if rmax is not None else DEFAULT_RMAX
    distances = [R for R, _, _ in allowed_separations(spec, "BB", rmax) if R > 0]
    table = asymptotic_curve(spec, regime, distances, ctx.compute.coupling_floor)

    out = ctx.out(f"asymptotic_{spec.label}_{regime.value}")
    frame = table.to_frame()
    frame["valid"] = table.metadata["valid"]
    ctx.builder("asymptotic", out, spec, {"regime": regime.value, "rmax": rmax}).write_frame(
        frame, metadata={"regime": regime.value, "source": table.source})
    if not ctx.args.quiet:
        rows = [[float(R), float(J), ok] for R, J, ok in zip(table.distances, table.values, table.metadata["valid"])]
        _print_table(f"{regime.value} {spec.description}", ["R/a", "J/t", "válido"], rows[:12])
    return EXIT_OK


def cmd_validate(ctx: RunContext) -> int:
    spec = ctx.spec()
    results = CheckEngine(ctx.config).run_all(spec, ctx.compute)
    failed = [r for r in results if not r.passed or r.metadata.get("error")]
    failed_ids = {id(r) for r in failed}

    if ctx.args.out or ctx.option("out"):
        frame = pd.DataFrame([r.to_dict() for r in results], columns=CHECK_COLUMNS)
        ctx.builder("validate", ctx.out("checks"), spec).write_frame(
            frame, metadata={"failed": [r.check_id for r in failed]})
    if not ctx.args.quiet:
        _print_table(f"Checks {spec.description}", ["check", "resultado", "severidad", "valor", "umbral", "detalle"],
                     [[r.check_id, "FALLA" if id(r) in failed_ids else "ok", r.severity, r.value, r.threshold, r.message]
                      for r in results])
    if failed:
        logger.warning("%d de %d checks fallaron: %s", len(failed), len(results), [r.check_id for r in failed])
        return EXIT_CHECKS_FAILED
    return EXIT_OK


COMMANDS = {
    "bands": cmd_bands,
    "cls": cmd_cls,
    "couplings": cmd_couplings,
    "qmetric": cmd_qmetric,
    "fit": cmd_fit,
    "scan": cmd_scan,
    "reproduce": cmd_reproduce,
    "asymptotic": cmd_asymptotic,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Ruta a archivo YAML de configuración (pisa los flags)")
    common.add_argument("--out", help="Archivo de salida (por defecto en resultado/)")
    common.add_argument("--format", choices=["csv", "json"], default=None, help="Formato de salida")
    common.add_argument("--num-k", type=int, default=None, help="Tamaño de la malla k N_c")
    common.add_argument("--eta", type=float, default=None, help="Ensanchamiento del oráculo")
    common.add_argument("--quiet", action="store_true", help="Modo silencioso (solo warnings y exit code)")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--family", help="Stub | Diamond")
    chain.add_argument("--n", type=int, default=None, help="Índice de dilución n")
    chain.add_argument("--alpha", type=float, default=None, help="α (solo Stub)")
    chain.add_argument("--js", type=float, default=None, help="JS en unidades de t")
    chain.add_argument("--t", type=float, default=None, help="Hopping t")
    chain.add_argument("--a", type=float, default=None, help="Constante de red a")

    grids = argparse.ArgumentParser(add_help=False)
    grids.add_argument("--alpha-grid", help="Valores de α separados por coma")
    grids.add_argument("--js-grid", help="Valores de JS separados por coma")
    grids.add_argument("--t-ev", type=float, default=None, help="t en eV para convertir a Kelvin")

    parser = argparse.ArgumentParser(
        description="Flatband Couplings: acoplamientos de intercambio en cadenas Sb[n] y Dd[n]"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("bands", parents=[common, chain], help="Bandas de ambos sectores de espín")
    sub.add_parser("cls", parents=[common, chain], help="Estado compacto localizado")
    p = sub.add_parser("couplings", parents=[common, chain], help="Curva J_ab(R)")
    p.add_argument("--pair", default="BB", help="Par de subredes: BB, BC, CB o CC")
    p.add_argument("--rmax", type=float, default=None, help="R máximo en unidades de a")
    p.add_argument("--contributions", action="store_true", help="Escribe también I^pq(R)")
    sub.add_parser("qmetric", parents=[common, chain], help="Métrica cuántica de la banda plana")
    p = sub.add_parser("fit", parents=[common, chain], help="Ajuste de decaimiento sobre un CSV de acoplamientos")
    p.add_argument("--input", help="CSV/JSON de acoplamientos")
    p.add_argument("--model", default="Exponential", help="Exponential | PowerLaw | ExponentialSqrtR")
    p.add_argument("--pair", default=None, help="Selecciona el par si el archivo tiene varias curvas")
    p.add_argument("--rmin", type=float, default=None, help="Inicio de la ventana (por defecto 3·a_n)")
    p.add_argument("--rmax", type=float, default=None, help="Fin de la ventana")
    sub.add_parser("scan", parents=[common, grids], help="Barrido (α, JS) de la amplificación")
    p = sub.add_parser("reproduce", parents=[common, grids], help="Bundle de datos de una figura")
    p.add_argument("figure", help=f"Etiqueta de figura: {', '.join(FIGURE_REGISTRY)}")
    p.add_argument("--out-dir", help="Directorio del bundle (por defecto resultado/<figura>)")
    p.add_argument("--n-list", help="Valores de n separados por coma")
    p.add_argument("--rmax", type=float, default=None, help="R máximo en unidades de a")
    p = sub.add_parser("asymptotic", parents=[common, chain], help="Curva de referencia analítica")
    p.add_argument("--regime", default=None, help="StubFBFB | StubDispersive | DiamondPowerLaw")
    p.add_argument("--rmax", type=float, default=None, help="R máximo en unidades de a")
    sub.add_parser("validate", parents=[common, chain], help="Ejecuta los checks registrados")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(quiet=args.quiet)

    try:
        ctx = RunContext(args)
        return COMMANDS[args.command](ctx)
    except ValidationError as e:
        logger.error("Error de validación: %s", e)
        return EXIT_VALIDATION
    except NumericalError as e:
        logger.error("Fallo numérico: %s", e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
