"""Tests para core/lattice.py"""

import numpy as np
import pytest

from core.errors import ValidationError
from core.lattice import (
    Boundary,
    allowed_separations,
    bloch_hamiltonian,
    bloch_hamiltonians,
    build_unit_cell,
    kmesh,
    orbital_index,
    real_space_hamiltonian,
    resolve_separation,
)
from models.chain_spec import ChainSpec, Family, SpinSector, Sublattice


def test_orbital_order():
    spec = ChainSpec(family=Family.STUB, n=3, alpha=0.5)
    assert orbital_index(spec, Sublattice.A, 2) == 2
    assert orbital_index(spec, Sublattice.B) == 3
    assert orbital_index(spec, Sublattice.C, 0) == 4
    assert orbital_index(spec, Sublattice.C, 2) == 6


def test_orbital_index_out_of_range():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.5)
    with pytest.raises(ValidationError):
        orbital_index(spec, Sublattice.C, 2)
    with pytest.raises(ValidationError):
        orbital_index(spec, Sublattice.B, 1)


def test_unit_cell_positions():
    stub = build_unit_cell(ChainSpec(family=Family.STUB, n=2, alpha=0.5))
    assert [o.position for o in stub.orbitals] == [0.0, 1.0, 0.0, 0.5, 1.5]
    diamond = build_unit_cell(ChainSpec(family=Family.DIAMOND, n=2))
    assert diamond.orbitals[2].position == 0.5


def test_unit_cell_hopping_count():
    """Sb[n]: 2n saltos de la cadena + el stub; Dd[n]: 2n + 2."""
    assert len(build_unit_cell(ChainSpec(family=Family.STUB, n=3, alpha=0.5)).hoppings) == 7
    assert len(build_unit_cell(ChainSpec(family=Family.DIAMOND, n=3)).hoppings) == 8


def test_kmesh_includes_zero_and_zone_edge():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=1.0)
    ks = kmesh(spec, 8)
    assert len(ks) == 8
    assert np.any(np.isclose(ks, 0.0))
    assert np.isclose(ks[-1], np.pi / 2)
    assert ks[0] > -np.pi / 2


def test_kmesh_rejects_odd():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0)
    with pytest.raises(ValidationError):
        kmesh(spec, 7)


def test_bloch_stub_at_gamma():
    """Sb[1], α = 1, JS = 1, ↑, k = 0."""
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0, JS=1.0)
    H = bloch_hamiltonian(spec, 0.0, SpinSector.UP)
    expected = np.array([[0.0, -1.0, -2.0], [-1.0, 0.5, 0.0], [-2.0, 0.0, 0.5]])
    assert np.allclose(H, expected, atol=1e-12)


def test_bloch_diamond_zone_edge():
    """Dd[1], JS = 1, ↓, k = π: A desacoplado."""
    spec = ChainSpec(family=Family.DIAMOND, n=1, JS=1.0)
    H = bloch_hamiltonian(spec, np.pi, SpinSector.DOWN)
    assert np.allclose(H, np.diag([0.0, -0.5, -0.5]), atol=1e-12)


@pytest.mark.parametrize("family,alpha", [(Family.STUB, 0.3), (Family.DIAMOND, None)])
def test_bloch_hermitian(family, alpha):
    spec = ChainSpec(family=family, n=3, alpha=alpha, JS=0.7)
    ks = kmesh(spec, 16)
    for sector in (SpinSector.UP, SpinSector.DOWN):
        H = bloch_hamiltonians(spec, ks, sector)
        assert np.allclose(H, np.conj(np.swapaxes(H, 1, 2)), atol=1e-14)


def test_spin_mirror():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.4, JS=0.6)
    ks = kmesh(spec, 12)
    down = bloch_hamiltonians(spec, ks, SpinSector.DOWN)
    up_mirror = bloch_hamiltonians(spec.with_js(-0.6), ks, SpinSector.UP)
    assert np.allclose(down, up_mirror)


def test_periodic_ring_matches_bloch_spectrum():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.7, JS=0.4)
    num_cells = 4
    H = real_space_hamiltonian(spec, num_cells, Boundary.PERIODIC, SpinSector.UP).toarray()
    ring = np.sort(np.linalg.eigvalsh(H))
    ks = kmesh(spec, num_cells)
    bloch = np.sort(np.linalg.eigvalsh(bloch_hamiltonians(spec, ks, SpinSector.UP)).reshape(-1))
    assert np.allclose(ring, bloch, atol=1e-10)


def test_open_chain_size():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0)
    H = real_space_hamiltonian(spec, 2, Boundary.OPEN)
    assert H.shape == (6, 6)
    assert np.allclose(H.toarray(), H.toarray().T)


def test_real_space_rejects_single_cell():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0)
    with pytest.raises(ValidationError):
        real_space_hamiltonian(spec, 1)


def test_boundary_parse():
    assert Boundary.parse("open") is Boundary.OPEN
    with pytest.raises(ValidationError):
        Boundary.parse("twisted")


def test_allowed_separations_bb():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=1.0)
    distances = [R for R, _, _ in allowed_separations(spec, "BB", 6)]
    assert distances == [2.0, 4.0, 6.0]


def test_allowed_separations_bc_half_integer():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0)
    distances = [R for R, _, _ in allowed_separations(spec, "BC", 3)]
    assert distances == [0.5, 1.5, 2.5]


def test_resolve_separation_rejects_self():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0)
    with pytest.raises(ValidationError):
        resolve_separation(spec, "BB", 0.0)
    with pytest.raises(ValidationError):
        resolve_separation(spec, "BB", 1.5)


def test_resolve_separation_target_cell():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=1.0)
    source, target = resolve_separation(spec, "BC", 3.5)
    assert source.sublattice is Sublattice.B
    assert target.sublattice is Sublattice.C
    assert target.absolute_position(spec.n) - source.absolute_position(spec.n) == pytest.approx(3.5)
