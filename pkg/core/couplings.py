"""
Capa 3: Acoplamientos de intercambio J_{λλ'}(R) a semillenado y T = 0.

Suma en bandas:
  I^{pq}(R) = (JS)²/(2N²) Σ_{k,k'} W↑_p(k) K_pq(k, k') W↓_q(k')
  W↑_p(k)  = e^{ikΔ} ψ↑_p(k)[s] ψ↑_p(k)[t]*      W↓_q(k') = e^{−ik'Δ} ψ↓_q(k')[t] ψ↓_q(k')[s]*
  K(x, y)  = (f(x) − f(y))/(x − y),  f = escalón(μ − E), f = 1/2 si |E − μ| < degenerate_eps
con Δ = x_s − x_t. J(R) = Σ_{pq} I^{pq}(R).

Oráculo en espacio real: diagonalización completa de los Hamiltonianos finitos y la doble suma de Lehmann
sobre autoestados, que es el límite η → 0⁺ de la integral en frecuencia.
"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from core.errors import NumericalError, ValidationError
from core.lattice import Boundary, allowed_separations, real_space_hamiltonian, resolve_separation
from core.parallel import ordered_map
from core.spectrum import diagonalize_bands
from models.band_structure import BandStructure
from models.chain_spec import ChainSpec, SpinSector
from models.coupling_table import ComputeConfig, CouplingResult, CouplingTable, parse_pair, pair_label

logger = logging.getLogger(__name__)

KERNEL_BLOCK = 1024
IMAG_GROSS_TOL = 1e-6
SIZE_CHANGE_TOL = 0.01


def occupation(energies: np.ndarray, eps: float, mu: float = 0.0) -> np.ndarray:
    """f(E) a T = 0; 1/2 para |E − μ| < eps."""
    f = np.where(energies < mu, 1.0, 0.0)
    return np.where(np.abs(energies - mu) < eps, 0.5, f)


def transition_kernel(x: np.ndarray, y: np.ndarray, eps: float) -> Tuple[np.ndarray, int]:
    """K[i, j] = (f(x_i) − f(y_j))/(x_i − y_j).

    Denominador |x − y| < eps: término 0 si las ocupaciones coinciden; si difieren es un cruce en μ,
    se excluye (0) y se cuenta.
    """
    fx, fy = occupation(x, eps), occupation(y, eps)
    diff = x[:, None] - y[None, :]
    dfo = fx[:, None] - fy[None, :]
    degenerate = np.abs(diff) < eps
    excluded = int(np.count_nonzero(degenerate & (dfo != 0.0)))
    K = np.where(degenerate, 0.0, dfo / np.where(degenerate, 1.0, diff))
    return K, excluded


def _resolve_targets(spec: ChainSpec, pair, distances: Sequence[float]) -> Tuple[int, np.ndarray, np.ndarray]:
    """Slot fuente, slots destino y Δ = x_s − x_t (unidades físicas) para cada R."""
    slots, deltas = [], []
    source_slot = None
    for R in distances:
        source, target = resolve_separation(spec, pair, float(R))
        source_slot = source.slot
        slots.append(target.slot)
        x_s = source.absolute_position(spec.n) * spec.a
        x_t = target.absolute_position(spec.n) * spec.a
        deltas.append(x_s - x_t)
    return source_slot, np.asarray(slots, dtype=int), np.asarray(deltas, dtype=float)


def _band_weights(bands: BandStructure, source_slot: int, target_slots: np.ndarray,
                  deltas: np.ndarray, up: bool) -> np.ndarray:
    """W[l, r, k] para todas las bandas l y distancias r."""
    states = bands.states  # (N, norb, nb)
    psi_s = states[:, source_slot, :].T[:, None, :]  # (nb, 1, N)
    psi_t = states[:, target_slots, :].transpose(2, 1, 0)  # (nb, nR, N)
    phase = np.exp(1j * np.outer(deltas, bands.kmesh))  # (nR, N)
    if up:
        return phase[None] * psi_s * np.conj(psi_t)
    return np.conj(phase)[None] * psi_t * np.conj(psi_s)


def _pair_sum(w_up: np.ndarray, w_down: np.ndarray, e_up: np.ndarray, e_down: np.ndarray,
              eps: float) -> Tuple[np.ndarray, int]:
    """Σ_{k,k'} W↑(k) K(k,k') W↓(k') para un par de bandas, por bloques de filas de K."""
    num_r, num_k = w_up.shape
    stacked = np.concatenate([w_up.real, w_up.imag], axis=0)  # (2nR, N)
    acc = np.zeros((2 * num_r, num_k))
    excluded = 0
    for start in range(0, num_k, KERNEL_BLOCK):
        block = slice(start, start + KERNEL_BLOCK)
        K, n_excl = transition_kernel(e_up[block], e_down, eps)
        excluded += n_excl
        acc += stacked[:, block] @ K
    partial = acc[:num_r] + 1j * acc[num_r:]
    return np.sum(partial * w_down, axis=1), excluded


def band_sum_many(up: BandStructure, down: BandStructure, pair, distances: Sequence[float],
                  config: ComputeConfig, workers: Optional[int] = None
                  ) -> Tuple[np.ndarray, Dict[Tuple[int, int], np.ndarray], int, float]:
    """J(R) sobre varias distancias con bandas ya diagonalizadas en la misma malla.

    Devuelve (J, contribuciones {(p, q): I^{pq}(R)}, pares excluidos, residuo imaginario máximo).
    """
    spec = up.spec
    if up.num_k != down.num_k or not np.array_equal(up.kmesh, down.kmesh):
        raise ValidationError("Las bandas ↑ y ↓ deben compartir la malla k")
    distances = np.asarray(distances, dtype=float)
    num_r = len(distances)
    if spec.JS == 0.0 or num_r == 0:
        return np.zeros(num_r), {}, 0, 0.0

    source_slot, target_slots, deltas = _resolve_targets(spec, pair, distances)
    w_up = _band_weights(up, source_slot, target_slots, deltas, up=True)
    w_down = _band_weights(down, source_slot, target_slots, deltas, up=False)

    eps = config.degenerate_eps * spec.t
    occ_up = [occupation(e, eps) for e in up.energies]
    occ_down = [occupation(e, eps) for e in down.energies]

    tasks = []
    for p in range(up.num_bands):
        for q in range(down.num_bands):
            fu, fd = occ_up[p], occ_down[q]
            if np.all(fu == fu[0]) and np.all(fd == fu[0]):
                continue
            tasks.append((p, q))
    logger.debug("%s %s: %d pares de bandas contribuyen (N=%d, %d distancias)",
                 spec.label, pair_label(parse_pair(pair)), len(tasks), up.num_k, num_r)

    def _task(pq):
        p, q = pq
        return _pair_sum(w_up[p], w_down[q], up.energies[p], down.energies[q], eps)

    results = ordered_map(_task, tasks, workers)

    prefactor = spec.JS ** 2 / (2.0 * up.num_k ** 2)
    total = np.zeros(num_r, dtype=complex)
    contributions: Dict[Tuple[int, int], np.ndarray] = {}
    excluded = 0
    for (p, q), (values, n_excl) in zip(tasks, results):
        values = prefactor * values
        total += values
        contributions[(p, q)] = values.real
        excluded += n_excl

    imag = np.abs(total.imag)
    J = total.real
    tol = np.maximum(1e-12 * np.abs(J), config.coupling_floor)
    if np.any(imag > tol):
        worst = int(np.argmax(imag - tol))
        logger.warning("Residuo imaginario %.3e en R=%g supera la tolerancia (|J|=%.3e)",
                       imag[worst], distances[worst], abs(J[worst]))
        gross = imag > IMAG_GROSS_TOL * np.maximum(np.abs(J), 1e-8 * spec.t)
        if np.any(gross):
            raise NumericalError(
                f"Residuo imaginario {imag[gross].max():.3e} inaceptable: la suma en k no es real"
            )
    if excluded:
        logger.warning("%d pares (k, k') excluidos por cruce de niveles en μ", excluded)
    return J, contributions, excluded, float(imag.max()) if num_r else 0.0


def _bands_pair(spec: ChainSpec, num_k: int, workers: Optional[int]) -> Tuple[BandStructure, BandStructure]:
    return (diagonalize_bands(spec, SpinSector.UP, num_k, workers),
            diagonalize_bands(spec, SpinSector.DOWN, num_k, workers))


def coupling_band_sum(spec: ChainSpec, pair, R: float, config: ComputeConfig = ComputeConfig(),
                      bands: Optional[Tuple[BandStructure, BandStructure]] = None,
                      workers: Optional[int] = None) -> CouplingResult:
    """J_{ab}(R) y su descomposición I^{pq} por la suma en bandas (malla config.num_k)."""
    resolve_separation(spec, pair, R)
    if spec.JS == 0.0:
        logger.warning("JS = 0: todos los acoplamientos son nulos")
        return CouplingResult(J=0.0, R=float(R), contributions={}, num_k=config.num_k)
    up, down = bands if bands is not None else _bands_pair(spec, config.num_k, workers)
    J, contributions, excluded, imag = band_sum_many(up, down, pair, [R], config, workers)
    return CouplingResult(
        J=float(J[0]),
        R=float(R),
        contributions={pq: float(v[0]) for pq, v in contributions.items()},
        excluded_pairs=excluded,
        imag_residual=imag,
        num_k=up.num_k,
    )


# ── Oráculo en espacio real ──

def _lehmann_coupling(spec: ChainSpec, num_cells: int, boundary: Boundary, i: int, j: int,
                      config: ComputeConfig) -> float:
    H_up = real_space_hamiltonian(spec, num_cells, boundary, SpinSector.UP).toarray()
    H_down = real_space_hamiltonian(spec, num_cells, boundary, SpinSector.DOWN).toarray()
    try:
        e_up, v_up = scipy.linalg.eigh(H_up)
        e_down, v_down = scipy.linalg.eigh(H_down)
    except scipy.linalg.LinAlgError as e:
        raise NumericalError(f"Diagonalización en espacio real falló ({num_cells} celdas): {e}")
    a = v_up[i] * v_up[j]
    b = v_down[j] * v_down[i]
    K, excluded = transition_kernel(e_up, e_down, config.degenerate_eps * spec.t)
    if excluded:
        logger.warning("Oráculo: %d pares de autoestados excluidos por cruce en μ", excluded)
    return float(spec.JS ** 2 / 2.0 * (a @ K @ b))


def coupling_oracle_realspace(spec: ChainSpec, pair, R: float, num_cells: int,
                              boundary=Boundary.PERIODIC, config: ComputeConfig = ComputeConfig(),
                              verify_size: bool = False) -> float:
    """J_{ab}(R) por diagonalización completa de la cadena finita.

    Con contorno abierto los sitios se centran en la cadena. verify_size repite con 2·num_cells
    y falla si J cambia más de un 1 %.
    """
    boundary = Boundary.parse(boundary)
    source, target = resolve_separation(spec, pair, R)
    if spec.JS == 0.0:
        return 0.0
    size = spec.num_orbitals
    span = target.cell - source.cell
    if boundary is Boundary.PERIODIC:
        if span >= num_cells:
            raise ValidationError(f"R = {R} no cabe en un anillo de {num_cells} celdas")
        base = 0
    else:
        base = (num_cells - span) // 2
        if base < 1 or base + span > num_cells - 2:
            raise ValidationError(f"{num_cells} celdas abiertas no alcanzan para R = {R} lejos de los bordes")
    i = base * size + source.slot
    j = ((base + span) % num_cells) * size + target.slot

    value = _lehmann_coupling(spec, num_cells, boundary, i, j, config)
    if verify_size:
        doubled = coupling_oracle_realspace(spec, pair, R, 2 * num_cells, boundary, config, verify_size=False)
        change = abs(doubled - value)
        if change > SIZE_CHANGE_TOL * max(abs(doubled), config.coupling_floor):
            raise NumericalError(
                f"Sistema insuficiente: J pasa de {value:.6e} a {doubled:.6e} al duplicar {num_cells} celdas"
            )
        logger.info("Oráculo estable al duplicar celdas (%d → %d): ΔJ = %.3e", num_cells, 2 * num_cells, change)
    return value


# ── Curvas J(R) con convergencia en N ──

def converge_coupling(spec: ChainSpec, pair, distances: Sequence[float], config: ComputeConfig,
                      workers: Optional[int] = None):
    """J en N y 2N; reporta el valor en 2N y la bandera |ΔJ| ≤ tol·|J| (o ≤ coupling_floor).

    Devuelve (valores 2N, convergido, contribuciones 2N, valores N).
    """
    distances = np.asarray(distances, dtype=float)
    if spec.JS == 0.0:
        logger.warning("JS = 0: todos los acoplamientos son nulos")
        zeros = np.zeros(len(distances))
        return zeros, np.ones(len(distances), dtype=bool), {}, zeros
    n_coarse = config.num_k
    n_fine = 2 * config.num_k
    logger.info("%s %s: suma en bandas con N=%d y N=%d", spec.label, pair_label(parse_pair(pair)),
                n_coarse, n_fine)
    coarse, _, _, _ = band_sum_many(*_bands_pair(spec, n_coarse, workers), pair, distances, config, workers)
    fine, contributions, _, _ = band_sum_many(*_bands_pair(spec, n_fine, workers), pair, distances, config,
                                              workers)
    change = np.abs(fine - coarse)
    converged = (change <= config.convergence_tol * np.abs(fine)) | (change <= config.coupling_floor)
    if not converged.all():
        logger.warning("%d de %d distancias sin converger al duplicar N", int((~converged).sum()), len(fine))
    return fine, converged, contributions, coarse


def coupling_curve(spec: ChainSpec, pair, R_max: float, config: ComputeConfig = ComputeConfig(),
                   with_contributions: bool = False, workers: Optional[int] = None) -> CouplingTable:
    """J_{ab}(R) para todas las distancias permitidas R ≤ R_max (unidades de a)."""
    pair = parse_pair(pair)
    if R_max < 3 * spec.n:
        raise ValidationError(f"R_max = {R_max} debe cubrir al menos 3 celdas (3·a_n = {3 * spec.n})")
    distances = np.array([R for R, _, _ in allowed_separations(spec, pair, R_max)], dtype=float)
    values, converged, contributions, coarse = converge_coupling(spec, pair, distances, config, workers)

    unresolved = int(np.count_nonzero(np.abs(values) < config.coupling_floor))
    if unresolved and spec.JS != 0.0:
        logger.warning("%d valores de J bajo coupling_floor=%.1e quedan marcados como no resueltos",
                       unresolved, config.coupling_floor)
    return CouplingTable(
        spec=spec,
        pair=pair,
        distances=distances,
        values=values,
        converged=converged,
        coupling_floor=config.coupling_floor,
        contributions=contributions if with_contributions else None,
        metadata={
            "num_k": config.num_k,
            "num_k_reported": 2 * config.num_k,
            "coarse_values": coarse.tolist(),
        },
    )


def nearest_pair_coupling(spec: ChainSpec, pair, R: float, config: ComputeConfig,
                          workers: Optional[int] = None) -> Tuple[float, bool]:
    """J(R) convergido para una sola distancia (usado por barridos)."""
    values, converged, _, _ = converge_coupling(spec, pair, [R], config, workers)
    return float(values[0]), bool(converged[0])
