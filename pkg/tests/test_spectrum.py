"""Tests para core/spectrum.py"""

import math

import numpy as np
import pytest

from core.errors import NumericalError
from core.report_builder import read_frame
from core.spectrum import (
    bands_frame,
    cls_residual,
    cls_translates_rank,
    construct_cls,
    diagonalize_bands,
    export_bands_csv,
    gap_closed_form,
    gap_delta,
    identify_flat_band,
    solve_mesh,
)
from models.band_structure import BAND_COLUMNS
from models.chain_spec import ChainSpec, Family, SpinSector, Sublattice


@pytest.mark.parametrize("family,n,alpha", [
    (Family.STUB, 1, 0.3),
    (Family.STUB, 4, 0.3),
    (Family.DIAMOND, 1, None),
    (Family.DIAMOND, 4, None),
])
def test_flat_band_placement(family, n, alpha):
    spec = ChainSpec(family=family, n=n, alpha=alpha, JS=1.0)
    for sector in (SpinSector.UP, SpinSector.DOWN):
        bands = diagonalize_bands(spec, sector, 16)
        assert bands.num_bands == 2 * n + 1
        assert bands.flat_band_energy == pytest.approx(sector.z_sigma * 0.5)
        assert bands.flat_band_deviation() <= 1e-9


def test_stub_energies_at_gamma():
    """Sb[1], α = 1, JS = 1: E² − E/2 − 5 = 0 más la banda plana en 1/2."""
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0, JS=1.0)
    energies, _, fb = solve_mesh(spec, np.array([0.0]), SpinSector.UP)
    assert np.allclose(energies[:, 0], [-2.0, 0.5, 2.5], atol=1e-12)
    assert fb == 1


def test_states_orthonormal(stub1):
    bands = diagonalize_bands(stub1, SpinSector.UP, 16)
    overlap = np.einsum("kai,kaj->kij", bands.states.conj(), bands.states)
    assert np.allclose(overlap, np.eye(3)[None], atol=1e-10)


def test_identify_flat_band_missing():
    energies = np.array([[0.0, 1.0], [2.0, 3.0]])
    with pytest.raises(NumericalError):
        identify_flat_band(energies, 5.0)


def test_bands_frame_layout(stub1):
    bands = [diagonalize_bands(stub1, sector, 8) for sector in (SpinSector.UP, SpinSector.DOWN)]
    frame = bands_frame(bands)
    assert list(frame.columns) == BAND_COLUMNS
    assert len(frame) == 2 * 3 * 8
    assert set(frame["sector"]) == {"Up", "Down"}


def test_export_bands_csv(tmp_path, stub1):
    bands = [diagonalize_bands(stub1, SpinSector.UP, 8)]
    path = export_bands_csv(bands, str(tmp_path / "bands.csv"))
    frame = read_frame(path, "bands")
    assert len(frame) == 24


@pytest.mark.parametrize("family,n,alpha", [
    (Family.STUB, 1, 0.3),
    (Family.STUB, 3, 2.0),
    (Family.DIAMOND, 1, None),
    (Family.DIAMOND, 3, None),
])
def test_cls_annihilated(family, n, alpha):
    spec = ChainSpec(family=family, n=n, alpha=alpha, JS=0.5)
    cls = construct_cls(spec)
    assert cls.spec.JS == 0.0
    assert cls.residual <= 1e-10
    assert cls_residual(cls, num_cells=6) <= 1e-10
    assert np.linalg.norm(cls.amplitudes) == pytest.approx(1.0)


def test_cls_stub_amplitudes():
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.5)
    cls = construct_cls(spec)
    norm = 1.0 / math.sqrt(2 * 0.25 + 2.0)
    assert cls.normalization == pytest.approx(norm)
    assert [o.sublattice for o in cls.orbitals] == [Sublattice.B, Sublattice.C, Sublattice.C, Sublattice.B]
    assert np.allclose(cls.amplitudes, np.array([1.0, -0.5, 0.5, -1.0]) * norm)


def test_cls_diamond_amplitudes():
    cls = construct_cls(ChainSpec(family=Family.DIAMOND, n=1))
    assert np.allclose(cls.amplitudes, [1 / math.sqrt(2), -1 / math.sqrt(2)])


@pytest.mark.parametrize("family,alpha", [(Family.STUB, 0.3), (Family.DIAMOND, None)])
def test_cls_translates_full_rank(family, alpha):
    spec = ChainSpec(family=family, n=2, alpha=alpha)
    assert cls_translates_rank(spec, 6) == 6


def test_gap_large_alpha():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=1.0, JS=0.1)
    assert gap_closed_form(spec) == pytest.approx(0.1)
    gap = gap_delta(spec, 32)
    assert not gap.gapless
    assert gap.delta == pytest.approx(0.1)
    assert gap.numerical == pytest.approx(0.1, abs=1e-10)


def test_gap_small_alpha():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.01, JS=1.0)
    expected = math.sqrt(0.25 + 4e-4) - 0.5
    assert gap_closed_form(spec) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(4e-4, rel=1e-3)
    gap = gap_delta(spec, 32)
    assert gap.method == "closed_form+numerical"
    assert gap.numerical == pytest.approx(expected, abs=1e-10)


def test_diamond_gapless():
    gap = gap_delta(ChainSpec(family=Family.DIAMOND, n=1, JS=1.0), 32)
    assert gap.gapless
    assert gap.closed_form is None
    assert gap.delta == pytest.approx(0.0, abs=1e-9)
