"""
Mapa declarativo de las figuras reproducibles: cada etiqueta (fig2 … fig5) apunta a un pipeline que
devuelve los artefactos de datos (tablas con los ejes de la figura), sin imágenes.

Parámetros por defecto:
  fig2   Sb[1] α ∈ {0.1, 0.3, 1} y Dd[1], JS = 1, pares BB/BC/CC, R ≤ 20a
  fig3a  Sb[n], JS = 0.1, α = 0.3, n ∈ {1, 2, 3, 4, 5, 10, 20}; ajustes exponenciales y serie n-n
  fig3b  Dd[n], JS = 0.5, n ∈ {1, 2, 4}, R ≤ 600a, N ≥ 2048; superposición −C₁/R⁴ y ajustes de ley de
         potencia desde R = 100·t/|JS|·a
  fig4   barrido (α, JS) de Sb[10] frente a Sb[1], t = 1 eV
  fig5   ξ frente a ⟨g⟩ en Sb[n] para α ∈ {0.3, 0.5, 1, 2}, JS = 0.1, y la referencia analítica de Sb[1]
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from core.analysis import (
    XI_STUDY_CELLS,
    amplification_scan,
    detect_nc,
    fit_decay,
    nearest_neighbour_series,
    xi_vs_g_study,
)
from core.asymptotics import diamond_powerlaw, xi_vs_g_reference
from core.couplings import coupling_curve
from core.errors import FlatbandError, ValidationError
from models.chain_spec import ChainSpec, Family, Sublattice
from models.coupling_table import ComputeConfig
from models.fit_result import FitModel

logger = logging.getLogger(__name__)

FIG2_ALPHAS = [0.1, 0.3, 1.0]
FIG2_RMAX = 20.0
FIG3A_N = [1, 2, 3, 4, 5, 10, 20]
FIG3A_CELLS = 12
FIG3B_N = [1, 2, 4]
FIG3B_RMAX = 600.0
FIG3B_NUM_K = 2048  # reportado en 2N = 4096
FIG4_ALPHAS = [0.1, 0.2, 0.3, 0.5, 1.0, 2.0]
FIG4_JS = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0]
FIG5_ALPHAS = [0.3, 0.5, 1.0, 2.0]
FIG5_N = [1, 2, 3, 4, 6, 8, 10, 13, 16, 20]
XI_REFERENCE_ALPHAS = np.round(np.logspace(-1.3, 0.7, 41), 6)

BB = (Sublattice.B, Sublattice.B)


@dataclass
class FigureArtifact:
    """Un archivo del bundle: tabla (CSV/JSON según formato) o documento JSON."""

    name: str
    data: Union[pd.DataFrame, Dict[str, Any]]
    schema: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_table(self) -> bool:
        return isinstance(self.data, pd.DataFrame)


def _fit_or_error(table, model: FitModel) -> Dict[str, Any]:
    try:
        return fit_decay(table, model).to_dict()
    except FlatbandError as e:
        logger.warning("Ajuste %s de %s no disponible: %s", model.value, table.spec.label, e)
        return {"model": model.value, "error": str(e)}


def reproduce_fig2(config: ComputeConfig, options: Dict[str, Any]) -> List[FigureArtifact]:
    JS = options.get("JS", 1.0)
    specs = [ChainSpec(family=Family.STUB, n=1, alpha=alpha, JS=JS) for alpha in options.get("alphas", FIG2_ALPHAS)]
    specs.append(ChainSpec(family=Family.DIAMOND, n=1, JS=JS))

    frames = []
    converged = {}
    for spec in specs:
        for pair in ("BB", "BC", "CC"):
            table = coupling_curve(spec, pair, options.get("rmax", FIG2_RMAX), config)
            frames.append(table.to_frame())
            converged[f"{spec.description} {pair}"] = bool(np.all(table.converged))
    return [FigureArtifact("couplings", pd.concat(frames, ignore_index=True), "couplings",
                           {"converged": converged})]


def reproduce_fig3a(config: ComputeConfig, options: Dict[str, Any]) -> List[FigureArtifact]:
    alpha = options.get("alpha", 0.3)
    JS = options.get("JS", 0.1)
    n_list = options.get("n_list", FIG3A_N)

    frames, fits = [], {}
    for n in n_list:
        spec = ChainSpec(family=Family.STUB, n=n, alpha=alpha, JS=JS)
        table = coupling_curve(spec, BB, FIG3A_CELLS * n, config)
        frames.append(table.to_frame())
        fits[str(n)] = _fit_or_error(table, FitModel.EXPONENTIAL)
    series = nearest_neighbour_series(alpha, JS, n_list, config)
    return [
        FigureArtifact("couplings", pd.concat(frames, ignore_index=True), "couplings"),
        FigureArtifact("fits", {"alpha": alpha, "JS": JS, "fits": fits}),
        FigureArtifact("nearest_neighbour", series, "nearest_neighbour"),
    ]


def _threshold(overlay) -> float:
    """Primer R dentro de la región de validez de la ley R⁻⁴."""
    valid = [p.R for p in overlay if p.valid]
    return valid[0] if valid else overlay[-1].R


def reproduce_fig3b(config: ComputeConfig, options: Dict[str, Any]) -> List[FigureArtifact]:
    JS = options.get("JS", 0.5)
    rmax = options.get("rmax", FIG3B_RMAX)
    config = replace(config, num_k=options.get("num_k", max(config.num_k, FIG3B_NUM_K)))

    frames, fits, fit_start = [], {}, {}
    for n in options.get("n_list", FIG3B_N):
        spec = ChainSpec(family=Family.DIAMOND, n=n, JS=JS)
        table = coupling_curve(spec, BB, rmax, config)
        frame = table.to_frame()
        overlay = [diamond_powerlaw(JS, R * spec.a, spec.t, spec.a) for R in table.distances]
        frame["J_asymptotic_over_t"] = [p.value for p in overlay]
        frame["asymptotic_valid"] = [p.valid for p in overlay]
        frames.append(frame)
        r_min = _threshold(overlay) / spec.a
        fit_start[str(n)] = r_min
        try:
            fits[str(n)] = fit_decay(table, FitModel.POWER_LAW, r_min=r_min).to_dict()
        except FlatbandError as e:
            logger.warning("Ajuste PowerLaw de %s no disponible: %s", spec.label, e)
            fits[str(n)] = {"model": FitModel.POWER_LAW.value, "error": str(e)}
    return [
        FigureArtifact("couplings", pd.concat(frames, ignore_index=True), "couplings"),
        FigureArtifact("fits", {"JS": JS, "num_k": config.num_k, "fit_start": fit_start, "fits": fits}),
    ]


def reproduce_fig4(config: ComputeConfig, options: Dict[str, Any]) -> List[FigureArtifact]:
    scan = amplification_scan(
        options.get("alpha_grid", FIG4_ALPHAS),
        options.get("JS_grid", FIG4_JS),
        config,
        t_ev=options.get("t_ev", 1.0),
    )
    return [FigureArtifact("scan", scan.to_frame(), "scan", scan.grid_metadata())]


def reproduce_fig5(config: ComputeConfig, options: Dict[str, Any]) -> List[FigureArtifact]:
    JS = options.get("JS", 0.1)
    n_list = options.get("n_list", FIG5_N)
    r_max_cells = options.get("r_max_cells", XI_STUDY_CELLS)

    frames, nc = [], {}
    for alpha in options.get("alphas", FIG5_ALPHAS):
        study = xi_vs_g_study(alpha, n_list, JS, config, r_max_cells=r_max_cells)
        study.insert(0, "alpha", alpha)
        frames.append(study)
        nc[f"{alpha:g}"] = detect_nc(study).to_dict()
    reference = pd.DataFrame([xi_vs_g_reference(float(alpha)).to_dict() for alpha in XI_REFERENCE_ALPHAS])
    return [
        FigureArtifact("xi_vs_g", pd.concat(frames, ignore_index=True), "xi_vs_g"),
        FigureArtifact("n_c", {"JS": JS, "r_max_cells": r_max_cells, "n_c": nc}),
        FigureArtifact("xi_reference", reference, "xi_reference"),
    ]


FIGURE_REGISTRY: Dict[str, Dict[str, Any]] = {
    "fig2": {"function": reproduce_fig2, "description": "J_ab(R) en Sb[1] y Dd[1], JS = 1"},
    "fig3a": {"function": reproduce_fig3a, "description": "J_BB(R) en Sb[n], α = 0.3, JS = 0.1, con ajustes"},
    "fig3b": {"function": reproduce_fig3b, "description": "J_BB(R) en Dd[n], JS = 0.5, con −C₁/R⁴"},
    "fig4": {"function": reproduce_fig4, "description": "Barrido (α, JS) del cociente Sb[10]/Sb[1]"},
    "fig5": {"function": reproduce_fig5, "description": "ξ frente a ⟨g⟩ en Sb[n], JS = 0.1"},
}


class FigureRegistry:
    """Mapa declarativo de etiquetas de figura a pipelines."""

    def tags(self) -> List[str]:
        return list(FIGURE_REGISTRY)

    def get(self, tag: str) -> Callable[[ComputeConfig, Dict[str, Any]], List[FigureArtifact]]:
        entry = FIGURE_REGISTRY.get(str(tag).strip().lower())
        if entry is None:
            raise ValidationError(f"Figura desconocida: {tag!r} (válidas: {self.tags()})")
        return entry["function"]

    def reproduce(self, tag: str, config: ComputeConfig = ComputeConfig(),
                  options: Optional[Dict[str, Any]] = None) -> List[FigureArtifact]:
        pipeline = self.get(tag)
        logger.info("Reproduciendo %s: %s", tag, FIGURE_REGISTRY[tag.strip().lower()]["description"])
        return pipeline(config, options or {})
