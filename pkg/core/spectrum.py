"""
Capa 2: Diagonalización de H_σ(k), identificación de la banda plana, estados compactos localizados (CLS)
y gap espectral δ.

Las matrices de Bloch son complejas Hermíticas en el gauge periódico (reales para n = 1); se usa el
solver Hermítico de LAPACK (numpy.linalg.eigh, por lotes sobre la malla k).
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from core.errors import NumericalError
from core.lattice import (
    Boundary,
    build_unit_cell,
    bloch_hamiltonians,
    kmesh,
    orbital_index,
    real_space_hamiltonian,
)
from core.parallel import ordered_map
from core.report_builder import write_frame
from models.band_structure import BandStructure, CLSVector, GapResult
from models.chain_spec import ChainSpec, Family, Orbital, SpinSector, Sublattice

logger = logging.getLogger(__name__)

FLATNESS_TOL = 1e-9
ORTHONORMALITY_TOL = 1e-10
DEGENERACY_TOL = 1e-9
GAPLESS_TOL = 1e-9


def _eigh_block(spec: ChainSpec, ks: np.ndarray, sector: SpinSector) -> Tuple[np.ndarray, np.ndarray]:
    H = bloch_hamiltonians(spec, ks, sector)
    try:
        return np.linalg.eigh(H)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"eigh no convergió en el bloque k ∈ [{ks[0]:.6g}, {ks[-1]:.6g}]: {e}")


def _degenerate_clusters(energies: np.ndarray, tol: float) -> List[List[int]]:
    clusters, current = [], [0]
    for idx in range(1, len(energies)):
        if energies[idx] - energies[idx - 1] < tol:
            current.append(idx)
        else:
            if len(current) > 1:
                clusters.append(current)
            current = [idx]
    if len(current) > 1:
        clusters.append(current)
    return clusters


def _polar(X: np.ndarray) -> np.ndarray:
    U, _, Wh = np.linalg.svd(X, full_matrices=False)
    return U @ Wh


def align_degenerate(energies: np.ndarray, states: np.ndarray, flat_band: Optional[int] = None,
                     tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Desempate en degeneraciones por continuidad con el punto k anterior.

    energies: (N, nb); states: (N, norb, nb). Dentro de cada grupo degenerado los vectores se rotan
    (Procrustes) hacia los del k previo. Si la banda plana cae en el grupo, su vector es la proyección
    del vector plano previo sobre el subespacio degenerado y el resto se ortonormaliza en el complemento.
    """
    states = states.copy()
    for j in range(1, len(energies)):
        for cluster in _degenerate_clusters(energies[j], tol):
            Vc = states[j][:, cluster]
            Vp = states[j - 1][:, cluster]
            U, _, Wh = np.linalg.svd(Vc.conj().T @ Vp)
            Vc = Vc @ (U @ Wh)

            if flat_band is not None and flat_band in cluster:
                pos = cluster.index(flat_band)
                fb = Vc @ (Vc.conj().T @ states[j - 1][:, flat_band])
                norm = np.linalg.norm(fb)
                if norm > 1e-8:
                    fb = fb / norm
                    others = [i for i in range(len(cluster)) if i != pos]
                    rest = Vc[:, others] - np.outer(fb, fb.conj() @ Vc[:, others])
                    Vc[:, others] = _polar(rest)
                    Vc[:, pos] = fb
            states[j][:, cluster] = Vc
    return states


def identify_flat_band(energies: np.ndarray, target: float, t: float = 1.0) -> int:
    """Banda l (energies[l, k]) con mínima desviación máxima respecto a `target`; exige planitud."""
    deviations = np.max(np.abs(energies - target), axis=1)
    idx = int(np.argmin(deviations))
    if deviations[idx] > FLATNESS_TOL * t:
        raise NumericalError(
            f"Banda plana no encontrada en E = {target:.6g}: desviación mínima {deviations[idx]:.3e}"
        )
    return idx


def solve_mesh(spec: ChainSpec, ks: np.ndarray, sector: SpinSector,
               workers: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, int]:
    """(energies (nb, N), states (N, norb, nb), índice de banda plana) sobre una malla arbitraria."""
    ks = np.asarray(ks, dtype=float)
    num_blocks = max(1, min(len(ks), 8))
    blocks = np.array_split(ks, num_blocks)
    results = ordered_map(lambda block: _eigh_block(spec, block, sector), blocks, workers)
    E = np.concatenate([r[0] for r in results], axis=0)
    V = np.concatenate([r[1] for r in results], axis=0)

    bad = ~np.all(np.isfinite(E), axis=1)
    if bad.any():
        raise NumericalError(f"Autovalores no finitos en k = {ks[np.argmax(bad)]:.6g}")

    target = sector.z_sigma * spec.JS / 2.0
    fb = identify_flat_band(E.T, target, spec.t)
    V = align_degenerate(E, V, flat_band=fb)

    eye = np.eye(V.shape[2])
    overlap = np.einsum("kai,kaj->kij", V.conj(), V)
    residual = np.max(np.abs(overlap - eye), axis=(1, 2))
    if residual.max() > ORTHONORMALITY_TOL:
        worst = int(np.argmax(residual))
        raise NumericalError(
            f"Autovectores no ortonormales en k = {ks[worst]:.6g} (residuo {residual[worst]:.3e})"
        )
    return E.T.copy(), V, fb


def diagonalize_bands(spec: ChainSpec, sector: SpinSector, num_k: int,
                      workers: Optional[int] = None) -> BandStructure:
    ks = kmesh(spec, num_k)
    energies, states, fb = solve_mesh(spec, ks, sector, workers)
    logger.debug("%s %s: %d puntos k, banda plana l=%d", spec.label, sector.value, num_k, fb)
    return BandStructure(spec=spec, sector=sector, kmesh=ks, energies=energies, states=states, flat_band=fb)


def bands_frame(bands: List[BandStructure]) -> pd.DataFrame:
    return pd.concat([b.to_frame() for b in bands], ignore_index=True)


def export_bands_csv(bands: List[BandStructure], path: str) -> str:
    return write_frame(bands_frame(bands), path, "csv")


# ── Estados compactos localizados ──

def construct_cls(spec: ChainSpec) -> CLSVector:
    """CLS a JS = 0.

    Sb[n]: |B,0⟩ + Σ_j (−1)^{j+1} α |C_j,0⟩ + (−1)^{n+1} |B,1⟩, normalizado por 1/√(nα² + 2).
    Dd[n]: (|B,0⟩ − |C_0,0⟩)/√2.
    """
    spec0 = spec.with_js(0.0)
    cell = build_unit_cell(spec0)
    b = cell.orbitals[orbital_index(spec0, Sublattice.B)]

    if spec0.family is Family.STUB:
        n, alpha = spec0.n, spec0.alpha
        orbitals = [b]
        weights = [1.0]
        for j in range(n):
            c = cell.orbitals[orbital_index(spec0, Sublattice.C, j)]
            orbitals.append(c)
            weights.append((-1.0) ** (j + 1) * alpha)
        orbitals.append(Orbital(b.sublattice, 1, b.slot, b.position))
        weights.append((-1.0) ** (n + 1))
        normalization = 1.0 / math.sqrt(n * alpha ** 2 + 2.0)
    else:
        c0 = cell.orbitals[orbital_index(spec0, Sublattice.C, 0)]
        orbitals = [b, c0]
        weights = [1.0, -1.0]
        normalization = 1.0 / math.sqrt(2.0)

    amplitudes = np.asarray(weights) * normalization
    cls = CLSVector(spec=spec0, orbitals=orbitals, amplitudes=amplitudes, normalization=normalization)
    residual = cls_residual(cls)
    if residual > 1e-10 * spec0.t:
        raise NumericalError(f"CLS de {spec0.label} no aniquilado por H: residuo {residual:.3e}")
    return CLSVector(spec=spec0, orbitals=orbitals, amplitudes=amplitudes,
                     normalization=normalization, residual=residual)


def embed_cls(cls: CLSVector, num_cells: int, shift: int = 0) -> np.ndarray:
    """Vector denso del CLS trasladado `shift` celdas en un anillo de num_cells celdas."""
    size = cls.spec.num_orbitals
    vec = np.zeros(num_cells * size)
    for orb, amp in zip(cls.orbitals, cls.amplitudes):
        vec[((orb.cell + shift) % num_cells) * size + orb.slot] += amp
    return vec


def cls_residual(cls: CLSVector, num_cells: int = 4) -> float:
    """‖H·cls‖ con H el Hamiltoniano real (JS = 0) de un anillo periódico."""
    H = real_space_hamiltonian(cls.spec, num_cells, Boundary.PERIODIC, SpinSector.UP)
    return float(np.linalg.norm(H @ embed_cls(cls, num_cells)))


def cls_translates_rank(spec: ChainSpec, num_cells: int) -> int:
    """Rango del conjunto de los num_cells CLS trasladados en un anillo periódico."""
    cls = construct_cls(spec)
    stack = np.stack([embed_cls(cls, num_cells, shift) for shift in range(num_cells)])
    return int(np.linalg.matrix_rank(stack))


# ── Gap ──

def gap_closed_form(spec: ChainSpec) -> float:
    """δ de Sb[1]: |JS| si α ≥ |JS|/(√2 t); si no, √(J²S²/4 + 4α²t²) − |JS|/2."""
    js, t, alpha = abs(spec.JS), spec.t, spec.alpha
    if alpha >= js / (math.sqrt(2.0) * t):
        return js
    return math.sqrt(js ** 2 / 4.0 + 4.0 * alpha ** 2 * t ** 2) - js / 2.0


def gap_delta(spec: ChainSpec, num_k: int = 512, workers: Optional[int] = None) -> GapResult:
    """Gap entre la última banda llena y la primera vacía alrededor de μ = 0 (ambos sectores)."""
    energies = np.concatenate([
        diagonalize_bands(spec, sector, num_k, workers).energies.reshape(-1)
        for sector in (SpinSector.UP, SpinSector.DOWN)
    ])
    tol = GAPLESS_TOL * spec.t
    at_mu = np.abs(energies) <= tol
    if at_mu.any():
        numerical = 0.0
    else:
        empty = energies[energies > tol]
        filled = energies[energies < -tol]
        numerical = float(empty.min() - filled.max())
    gapless = numerical <= tol

    closed = None
    method = "numerical"
    if spec.family is Family.STUB and spec.n == 1:
        closed = gap_closed_form(spec)
        method = "closed_form+numerical"
        if abs(closed - numerical) > 1e-8 * spec.t:
            logger.warning("Gap de %s: forma cerrada %.12g vs numérico %.12g", spec.label, closed, numerical)

    if gapless:
        logger.warning("%s JS=%g es un sistema sin gap (bandas tocan μ = 0)", spec.label, spec.JS)

    delta = closed if closed is not None else numerical
    return GapResult(
        delta=max(delta, 0.0),
        gapless=gapless,
        method=method,
        closed_form=closed,
        numerical=numerical,
        metadata={"num_k": num_k},
    )
