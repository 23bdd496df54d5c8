"""
Capa 1: Geometría de las cadenas Sb[n] / Dd[n] y ensamblado de Hamiltonianos.

Base de la celda (2n+1 orbitales): A_0..A_{n-1}, B, C_0..C_{n-1}.
Posiciones sobre el eje (unidades de a, relativas al origen de la celda):
  A_j → j        C_j → j + 1/2
  B   → 0 (Stub, colgando de A_0)   |   1/2 (Diamond, plaqueta 0, enlazado a A_0 y A_1)
La cadena A–C–A–C lleva saltos −t; el enlace A_0–B es −αt (Stub) o −t (Diamond).

Gauge periódico: H(k)[s, τ] = Σ_d t_{sτd} · exp(i k (x_τ + d·a_n − x_s)).
"""

import logging
from enum import Enum
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from core.errors import ValidationError
from models.chain_spec import ChainSpec, Family, Hopping, Orbital, SpinSector, Sublattice, UnitCell
from models.coupling_table import parse_pair

logger = logging.getLogger(__name__)

POSITION_DECIMALS = 12


class Boundary(Enum):
    OPEN = "Open"
    PERIODIC = "Periodic"

    @classmethod
    def parse(cls, value) -> "Boundary":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == text:
                return member
        raise ValidationError(f"Condición de contorno desconocida: {value!r} (válidas: Open, Periodic)")


def orbital_index(spec: ChainSpec, sublattice: Sublattice, slot: int = 0) -> int:
    """Índice en la base de la celda del orbital `slot` de una subred."""
    n = spec.n
    if sublattice is Sublattice.B:
        if slot != 0:
            raise ValidationError(f"{spec.label} tiene un único orbital B por celda (slot={slot})")
        return n
    if not 0 <= slot < n:
        raise ValidationError(f"slot {slot} fuera de rango para la subred {sublattice.value} de {spec.label}")
    return slot if sublattice is Sublattice.A else n + 1 + slot


def build_unit_cell(spec: ChainSpec) -> UnitCell:
    n = spec.n
    t = spec.t
    b_position = 0.0 if spec.family is Family.STUB else 0.5

    orbitals = [Orbital(Sublattice.A, 0, j, float(j)) for j in range(n)]
    orbitals.append(Orbital(Sublattice.B, 0, n, b_position))
    orbitals.extend(Orbital(Sublattice.C, 0, n + 1 + j, j + 0.5) for j in range(n))

    def _at(slot: int, cell: int) -> Orbital:
        base = orbitals[slot]
        return Orbital(base.sublattice, cell, base.slot, base.position)

    hoppings: List[Hopping] = []
    for j in range(n):
        a_j, c_j = j, n + 1 + j
        hoppings.append(Hopping(_at(a_j, 0), _at(c_j, 0), -t))
        if j < n - 1:
            hoppings.append(Hopping(_at(c_j, 0), _at(j + 1, 0), -t))
        else:
            hoppings.append(Hopping(_at(c_j, 0), _at(0, 1), -t))

    b = n
    if spec.family is Family.STUB:
        hoppings.append(Hopping(_at(0, 0), _at(b, 0), -spec.alpha * t))
    else:
        hoppings.append(Hopping(_at(b, 0), _at(0, 0), -t))
        hoppings.append(Hopping(_at(b, 0), _at(1, 0) if n > 1 else _at(0, 1), -t))

    return UnitCell(orbitals=orbitals, hoppings=hoppings)


def onsite_energies(spec: ChainSpec, sector: SpinSector) -> np.ndarray:
    """z_σ·JS/2 sobre los orbitales magnéticos (B, C); 0 sobre A."""
    cell = build_unit_cell(spec)
    shift = sector.z_sigma * spec.JS / 2.0
    return np.array([shift if o.sublattice.magnetic else 0.0 for o in cell.orbitals])


def kmesh(spec: ChainSpec, num_k: int) -> np.ndarray:
    """k_j = 2πj/(N·a_n), j = −N/2+1 … N/2 (incluye k = 0 y k = π/a_n)."""
    if num_k < 4 or num_k % 2:
        raise ValidationError(f"num_k debe ser par y >= 4, recibido: {num_k}")
    j = np.arange(-num_k // 2 + 1, num_k // 2 + 1)
    return 2.0 * np.pi * j / (num_k * spec.cell_size)


def bloch_hamiltonians(spec: ChainSpec, ks, sector: SpinSector) -> np.ndarray:
    """H(k) para un arreglo de momentos; forma (len(ks), 2n+1, 2n+1), complejo Hermítico."""
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    cell = build_unit_cell(spec)
    size = spec.num_orbitals
    H = np.zeros((len(ks), size, size), dtype=complex)
    H[:, np.arange(size), np.arange(size)] = onsite_energies(spec, sector)
    for hop in cell.hoppings:
        s, tau = hop.source.slot, hop.target.slot
        dx = (hop.target.position + hop.target.cell * spec.n - hop.source.position) * spec.a
        phase = hop.amplitude * np.exp(1j * ks * dx)
        H[:, s, tau] += phase
        H[:, tau, s] += np.conj(phase)
    return H


def bloch_hamiltonian(spec: ChainSpec, k: float, sector: SpinSector) -> np.ndarray:
    """Matriz de Bloch (2n+1)×(2n+1) en k (unidades físicas 1/a)."""
    return bloch_hamiltonians(spec, [k], sector)[0]


def real_space_hamiltonian(spec: ChainSpec, num_cells: int, boundary=Boundary.PERIODIC,
                           sector: SpinSector = SpinSector.UP) -> sp.csr_matrix:
    """Hamiltoniano real disperso de num_cells celdas; índice = celda·(2n+1) + slot."""
    if num_cells < 2:
        raise ValidationError(f"num_cells debe ser >= 2, recibido: {num_cells}")
    boundary = Boundary.parse(boundary)
    cell = build_unit_cell(spec)
    size = spec.num_orbitals
    dim = num_cells * size

    rows, cols, vals = [], [], []
    onsite = onsite_energies(spec, sector)
    for c in range(num_cells):
        for slot in range(size):
            if onsite[slot] != 0.0:
                rows.append(c * size + slot)
                cols.append(c * size + slot)
                vals.append(onsite[slot])
        for hop in cell.hoppings:
            target_cell = c + hop.target.cell
            if boundary is Boundary.PERIODIC:
                target_cell %= num_cells
            elif not 0 <= target_cell < num_cells:
                continue
            i = c * size + hop.source.slot
            j = target_cell * size + hop.target.slot
            rows.extend([i, j])
            cols.extend([j, i])
            vals.extend([hop.amplitude, hop.amplitude])

    H = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    return H


def allowed_separations(spec: ChainSpec, pair, r_max: float) -> List[Tuple[float, int, int]]:
    """Distancias permitidas R ∈ [0, r_max] (unidades de a) para el par (a, b).

    Referencia: primer orbital de la subred a en la celda 0. Devuelve (R, slot destino, celda destino)
    ordenado por R; R = 0 con el mismo orbital queda excluido.
    """
    sub_a, sub_b = parse_pair(pair)
    source_slot = orbital_index(spec, sub_a, 0)
    cell = build_unit_cell(spec)
    x_source = cell.orbitals[source_slot].position
    targets = [o for o in cell.orbitals if o.sublattice is sub_b]

    out = []
    max_cell = int(np.ceil(r_max / spec.n)) + 1
    for c in range(0, max_cell + 1):
        for orb in targets:
            R = round(orb.position + c * spec.n - x_source, POSITION_DECIMALS)
            if R < 0 or R > r_max + 10 ** -POSITION_DECIMALS:
                continue
            if R == 0 and orb.slot == source_slot and c == 0:
                continue
            out.append((R, orb.slot, c))
    out.sort()
    return out


def resolve_separation(spec: ChainSpec, pair, R: float) -> Tuple[Orbital, Orbital]:
    """(orbital fuente, orbital destino) para una distancia R permitida."""
    sub_a, _ = parse_pair(pair)
    if R < 0:
        R = -R
    for sep, slot, c in allowed_separations(spec, pair, R):
        if abs(sep - R) <= 1e-9:
            cell = build_unit_cell(spec)
            source = cell.orbitals[orbital_index(spec, sub_a, 0)]
            base = cell.orbitals[slot]
            return source, Orbital(base.sublattice, c, base.slot, base.position)
    raise ValidationError(
        f"R = {R} no es una separación permitida para el par {pair!r} en {spec.label}"
        + (" (auto-acoplamiento no definido)" if R == 0 else "")
    )
