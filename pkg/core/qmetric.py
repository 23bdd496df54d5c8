"""
Capa 4: Métrica cuántica de la banda plana a JS = 0.

g(k) ≈ (1 − |⟨u_k|u_{k+δ}⟩|²)/δ² en el gauge periódico (posiciones reales en las fases), invariante
ante fases arbitrarias por k. En el gauge de Bloch convencional (sin posiciones) ⟨g⟩ es otro número y
no sirve para comparar con la longitud de decaimiento.

⟨g⟩ = (1/2π)∫ g(k) dk = media de g sobre los intervalos de la malla; se extrapola con (N, 2N).
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from core.errors import ValidationError
from core.lattice import kmesh
from core.spectrum import solve_mesh
from models.chain_spec import ChainSpec, SpinSector
from models.qmetric_result import QuantumMetricResult

logger = logging.getLogger(__name__)

MIN_NUM_K = 64
WEAK_OVERLAP = 0.5
REFINE_STEPS = 16
RICHARDSON_TOL = 0.01


def flat_band_states(spec: ChainSpec, ks: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    """Vectores de la banda plana (JS = 0) en cada k de `ks`; forma (len(ks), 2n+1)."""
    _, states, fb = solve_mesh(spec.with_js(0.0), ks, SpinSector.UP, workers)
    return states[:, :, fb]


def metric_from_states(states: np.ndarray, dk: float) -> np.ndarray:
    """g por intervalo entre vectores consecutivos: (1 − |⟨u_j|u_{j+1}⟩|²)/dk²."""
    overlaps = np.abs(np.sum(np.conj(states[:-1]) * states[1:], axis=1)) ** 2
    return np.maximum(1.0 - overlaps, 0.0) / dk ** 2


def _interval_metric(spec: ChainSpec, num_k: int, refine: bool,
                     workers: Optional[int]) -> Tuple[np.ndarray, np.ndarray, int]:
    ks = kmesh(spec, num_k)
    G = 2.0 * math.pi / spec.cell_size
    dk = G / num_k
    closed = np.append(ks, ks[0] + G)  # H(k+G) ≠ H(k) en el gauge periódico: se diagonaliza k_0 + G
    states = flat_band_states(spec, closed, workers)
    g_int = metric_from_states(states, dk)

    refined = 0
    if refine:
        overlaps = np.abs(np.sum(np.conj(states[:-1]) * states[1:], axis=1))
        for j in np.flatnonzero(overlaps < WEAK_OVERLAP):
            sub = np.linspace(closed[j], closed[j + 1], REFINE_STEPS + 1)
            sub_states = flat_band_states(spec, sub, workers)
            g_int[j] = float(np.mean(metric_from_states(sub_states, dk / REFINE_STEPS)))
            refined += 1
        if refined:
            logger.info("%s: %d intervalos refinados (solapamiento < %.1f)", spec.label, refined, WEAK_OVERLAP)
    return ks, g_int, refined


def quantum_metric(spec: ChainSpec, num_k: int = 512, refine: bool = True,
                   workers: Optional[int] = None) -> QuantumMetricResult:
    if num_k < MIN_NUM_K:
        raise ValidationError(f"num_k debe ser >= {MIN_NUM_K} para la métrica cuántica, recibido: {num_k}")
    spec0 = spec.with_js(0.0)
    if spec.JS != 0.0:
        logger.info("Métrica cuántica evaluada a JS = 0 (JS=%g ignorado)", spec.JS)

    ks, g_coarse, refined = _interval_metric(spec0, num_k, refine, workers)
    _, g_fine, refined_fine = _interval_metric(spec0, 2 * num_k, refine, workers)

    avg_coarse = float(np.mean(g_coarse))
    avg_fine = float(np.mean(g_fine))
    g_avg = max((4.0 * avg_fine - avg_coarse) / 3.0, 0.0)
    error = abs(avg_fine - avg_coarse) / 3.0
    if error > RICHARDSON_TOL * g_avg and error > 1e-12:
        logger.warning("%s: error de discretización de ⟨g⟩ %.3e supera el 1%% de %.6g", spec0.label, error, g_avg)

    samples = 0.5 * (g_coarse + np.roll(g_coarse, 1))
    logger.debug("%s: ⟨g⟩ = %.10g a² (N=%d: %.10g, 2N: %.10g)", spec0.label, g_avg / spec0.a ** 2,
                 num_k, avg_coarse, avg_fine)
    return QuantumMetricResult(
        spec=spec0,
        kmesh=ks,
        g_samples=samples,
        g_avg=g_avg,
        g_avg_coarse=avg_coarse,
        g_avg_fine=avg_fine,
        error_estimate=error,
        refined_intervals=refined + refined_fine,
        metadata={"num_k": num_k, "num_k_fine": 2 * num_k},
    )
