"""
Capa 7: Escritura y lectura de los artefactos de una corrida.

Cada salida (CSV o JSON) va acompañada de un sidecar <out>.meta.json con la configuración completa,
tamaños de malla, banderas de convergencia y versión de la herramienta. No se escriben marcas de
tiempo: dos corridas con la misma configuración producen archivos idénticos byte a byte.

Los parsers (read_*) validan el esquema de columnas documentado y reconstruyen los objetos de modelo.
"""

import json
import logging
import math
import os
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from core.errors import ValidationError
from models.asymptotic_prediction import XI_REFERENCE_COLUMNS
from models.band_structure import BAND_COLUMNS, CLS_COLUMNS
from models.chain_spec import ChainSpec, Family
from models.check_result import CHECK_COLUMNS
from models.coupling_table import (
    COUPLING_COLUMNS,
    CONTRIBUTION_COLUMNS,
    ComputeConfig,
    CouplingTable,
    parse_pair,
    pair_label,
)
from models.fit_result import NEAREST_NEIGHBOUR_COLUMNS, XI_VS_G_COLUMNS, FitResult
from models.qmetric_result import QMETRIC_COLUMNS
from models.run_config import RunConfig
from models.scan_result import SCAN_COLUMNS, ScanResult

logger = logging.getLogger(__name__)

TOOL_NAME = "flatband-couplings"
TOOL_VERSION = "1.0.0"
FLOAT_FORMAT = "%.17g"
SIDECAR_SUFFIX = ".meta.json"
VALID_FORMATS = ("csv", "json")

# Columnas mínimas por esquema; se admiten columnas extra (p.ej. superposiciones analíticas).
SCHEMAS: Dict[str, List[str]] = {
    "bands": BAND_COLUMNS,
    "cls": CLS_COLUMNS,
    "couplings": COUPLING_COLUMNS,
    "contributions": CONTRIBUTION_COLUMNS,
    "qmetric": QMETRIC_COLUMNS,
    "scan": SCAN_COLUMNS,
    "xi_vs_g": XI_VS_G_COLUMNS,
    "nearest_neighbour": NEAREST_NEIGHBOUR_COLUMNS,
    "xi_reference": XI_REFERENCE_COLUMNS,
    "checks": CHECK_COLUMNS,
}


def _jsonable(value: Any) -> Any:
    """Convierte tipos numpy/Enum/NaN a JSON estándar (NaN → null, ±inf → "inf"/"-inf")."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_jsonable(v) for v in value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


def output_format(path: str, default: str = "csv") -> str:
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    return ext if ext in VALID_FORMATS else default


def sidecar_path(path: str) -> str:
    return path + SIDECAR_SUFFIX


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def frame_to_json(frame: pd.DataFrame) -> str:
    records = [_jsonable(r) for r in frame.to_dict(orient="records")]
    return json.dumps({"columns": list(frame.columns), "rows": records}, indent=2, sort_keys=True) + "\n"


def write_frame(frame: pd.DataFrame, path: str, fmt: Optional[str] = None) -> str:
    fmt = (fmt or output_format(path)).lower()
    if fmt not in VALID_FORMATS:
        raise ValidationError(f"Formato de salida inválido: {fmt!r} (válidos: {list(VALID_FORMATS)})")
    _atomic_write(path, frame_to_csv(frame) if fmt == "csv" else frame_to_json(frame))
    logger.info("Escrito %s (%d filas)", path, len(frame))
    return path


def write_json(data: Any, path: str) -> str:
    _atomic_write(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    logger.info("Escrito %s", path)
    return path


class ReportBuilder:
    """Escribe las salidas de una corrida y su sidecar de metadatos."""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.outputs: List[str] = []

    def _path(self, path: Optional[str]) -> str:
        return path if path is not None else self.run_config.out

    def write_frame(self, frame: pd.DataFrame, path: Optional[str] = None,
                    metadata: Optional[Dict[str, Any]] = None) -> str:
        path = self._path(path)
        write_frame(frame, path, self.run_config.output_format)
        self.outputs.append(path)
        self.write_sidecar(path, metadata)
        return path

    def write_json(self, data: Any, path: Optional[str] = None,
                   metadata: Optional[Dict[str, Any]] = None) -> str:
        path = self._path(path)
        write_json(data, path)
        self.outputs.append(path)
        self.write_sidecar(path, metadata)
        return path

    def sidecar(self, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        return {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "run": self.run_config.to_dict(),
            "metadata": metadata or {},
        }

    def write_sidecar(self, path: str, metadata: Optional[Dict[str, Any]] = None) -> str:
        return write_json(self.sidecar(metadata), sidecar_path(path))


# ── Parsers ──

def read_frame(path: str, schema: Optional[str] = None) -> pd.DataFrame:
    """Lee un CSV o JSON escrito por write_frame y valida las columnas del esquema."""
    if not os.path.exists(path):
        raise ValidationError(f"No existe el archivo: {path}")
    if output_format(path) == "json":
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        if not isinstance(payload, dict) or "rows" not in payload:
            raise ValidationError(f"{path}: JSON sin la clave 'rows'")
        frame = pd.DataFrame(payload["rows"], columns=payload.get("columns"))
        frame = frame.replace({"inf": math.inf, "-inf": -math.inf})
    else:
        frame = pd.read_csv(path)

    if schema is not None:
        if schema not in SCHEMAS:
            raise ValidationError(f"Esquema desconocido: {schema!r} (válidos: {sorted(SCHEMAS)})")
        missing = [c for c in SCHEMAS[schema] if c not in frame.columns]
        if missing:
            raise ValidationError(f"{path}: faltan columnas del esquema '{schema}': {missing}")
    return frame


def read_sidecar(path: str) -> Optional[Dict[str, Any]]:
    meta = sidecar_path(path)
    if not os.path.exists(meta):
        return None
    with open(meta, "r", encoding="utf-8") as f:
        return json.load(f)


def _coupling_floor(path: str) -> float:
    sidecar = read_sidecar(path)
    try:
        return float(sidecar["run"]["compute"]["coupling_floor"])
    except (TypeError, KeyError, ValueError):
        return ComputeConfig().coupling_floor


def read_coupling_table(path: str, pair=None, n: Optional[int] = None, alpha: Optional[float] = None,
                        family=None) -> CouplingTable:
    """CouplingTable de un CSV/JSON de acoplamientos.

    Si el archivo contiene varias curvas (bundles de reproduce), los filtros deben dejar exactamente una.
    """
    frame = read_frame(path, "couplings")
    if pair is not None:
        frame = frame[frame["pair"] == pair_label(parse_pair(pair))]
    if n is not None:
        frame = frame[frame["n"] == int(n)]
    if alpha is not None:
        frame = frame[np.isclose(frame["alpha"].astype(float), float(alpha))]
    if family is not None:
        frame = frame[frame["family"] == Family.parse(family).value]

    keys = ["family", "n", "alpha", "JS", "pair"]
    groups = frame.groupby(keys, dropna=False, sort=True)
    if groups.ngroups == 0:
        raise ValidationError(f"{path}: ninguna curva coincide con los filtros")
    if groups.ngroups > 1:
        labels = [f"{f} n={nn} alpha={a} JS={js} {p}" for f, nn, a, js, p in groups.groups.keys()]
        raise ValidationError(f"{path}: {groups.ngroups} curvas; seleccione con --pair/--n/--alpha: {labels}")

    (fam, nn, a, js, p), curve = next(iter(groups))
    curve = curve.sort_values("R_over_a", kind="mergesort")
    alpha_value = None if a is None or (isinstance(a, float) and math.isnan(a)) else float(a)
    spec = ChainSpec(family=Family.parse(fam), n=int(nn), alpha=alpha_value, JS=float(js))
    return CouplingTable(
        spec=spec,
        pair=parse_pair(p),
        distances=curve["R_over_a"].to_numpy(dtype=float),
        values=curve["J_over_t"].to_numpy(dtype=float),
        converged=curve["converged_flag"].astype(bool).to_numpy(),
        coupling_floor=_coupling_floor(path),
        source=f"file:{os.path.basename(path)}",
    )


def read_fit(path: str) -> FitResult:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    try:
        return FitResult.from_dict(data)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{path}: JSON de ajuste inválido: {e}")


def read_qmetric(path: str) -> Dict[str, Any]:
    """{"samples": DataFrame (k, g_over_a2), "n", "alpha", "g_avg_over_a2"}."""
    frame = read_frame(path, "qmetric")
    summary = frame[frame["row_type"] == "summary"]
    if len(summary) != 1:
        raise ValidationError(f"{path}: se esperaba una fila summary, hay {len(summary)}")
    row = summary.iloc[0]
    samples = frame[frame["row_type"] == "sample"].loc[:, ["k", "g_over_a2"]].reset_index(drop=True)
    return {
        "samples": samples,
        "n": int(row["n"]),
        "alpha": float(row["alpha"]),
        "g_avg_over_a2": float(row["g_avg_over_a2"]),
    }


def read_scan(path: str) -> ScanResult:
    frame = read_frame(path, "scan")
    sidecar = read_sidecar(path) or {}
    t_ev = (sidecar.get("metadata") or {}).get("t_ev")
    return ScanResult(
        alpha_grid=sorted(frame["alpha"].astype(float).unique().tolist()),
        JS_grid=sorted(frame["JS"].astype(float).unique().tolist()),
        cells=frame,
        t_ev=t_ev,
    )
