"""Tests para core/couplings.py"""

import numpy as np
import pytest

from core.couplings import (
    band_sum_many,
    coupling_band_sum,
    coupling_curve,
    coupling_oracle_realspace,
    occupation,
    transition_kernel,
)
from core.errors import ValidationError
from core.lattice import Boundary, allowed_separations
from core.spectrum import diagonalize_bands
from models.chain_spec import ChainSpec, Family, SpinSector
from models.coupling_table import ComputeConfig


def _bands(spec, num_k):
    return (diagonalize_bands(spec, SpinSector.UP, num_k),
            diagonalize_bands(spec, SpinSector.DOWN, num_k))


def test_occupation_half_at_mu():
    f = occupation(np.array([-1.0, 0.0, 1.0]), 1e-10)
    assert f.tolist() == [1.0, 0.5, 0.0]


def test_transition_kernel_regular():
    K, excluded = transition_kernel(np.array([-1.0]), np.array([2.0]), 1e-10)
    assert K[0, 0] == pytest.approx(-1.0 / 3.0)
    assert excluded == 0


def test_transition_kernel_excludes_crossing():
    K, excluded = transition_kernel(np.array([-1.5e-10]), np.array([-0.8e-10]), 1e-10)
    assert excluded == 1
    assert K[0, 0] == 0.0


def test_zero_js_gives_zero():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.5, JS=0.0)
    result = coupling_band_sum(spec, "BB", 1.0, ComputeConfig(num_k=16))
    assert result.J == 0.0
    table = coupling_curve(spec, "BC", 4.0, ComputeConfig(num_k=16))
    assert np.all(table.values == 0.0)
    assert table.converged.all()


def test_sum_rule(stub1, small_config):
    result = coupling_band_sum(stub1, "BB", 2.0, small_config)
    assert result.contributions
    assert sum(result.contributions.values()) == pytest.approx(result.J, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("alpha,JS", [(0.3, 0.1), (1.0, 1.0), (2.0, 0.5)])
def test_ferromagnetic_sign(alpha, JS, small_config):
    spec = ChainSpec(family=Family.STUB, n=2, alpha=alpha, JS=JS)
    up, down = _bands(spec, small_config.num_k)
    for pair in ("BB", "BC", "CC"):
        distances = [R for R, _, _ in allowed_separations(spec, pair, 6.0) if R > 0]
        J, _, _, _ = band_sum_many(up, down, pair, distances, small_config)
        assert np.all(J <= small_config.coupling_floor)


def test_band_sum_matches_realspace_oracle(stub1):
    config = ComputeConfig(num_k=16)
    band = coupling_band_sum(stub1, "BB", 2.0, config).J
    oracle = coupling_oracle_realspace(stub1, "BB", 2.0, 16, Boundary.PERIODIC, config)
    assert band == pytest.approx(oracle, rel=1e-8)


def test_bc_cb_symmetry(small_config):
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.7, JS=0.4)
    bands = _bands(spec, small_config.num_k)
    bc = coupling_band_sum(spec, "BC", 0.5, small_config, bands=bands).J
    cb = coupling_band_sum(spec, "CB", 0.5, small_config, bands=bands).J
    assert bc == pytest.approx(cb, rel=1e-9)


def test_self_coupling_rejected(stub1, small_config):
    with pytest.raises(ValidationError):
        coupling_band_sum(stub1, "BB", 0.0, small_config)


def test_pair_with_a_rejected(stub1, small_config):
    with pytest.raises(ValidationError):
        coupling_band_sum(stub1, "AB", 1.0, small_config)


def test_curve_requires_three_cells(small_config):
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.5, JS=0.5)
    with pytest.raises(ValidationError):
        coupling_curve(spec, "BB", 5.0, small_config)


def test_curve_layout(stub1):
    config = ComputeConfig(num_k=16)
    table = coupling_curve(stub1, "BB", 4.0, config, with_contributions=True)
    assert table.distances.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert len(table.values) == len(table.converged) == 4
    assert table.metadata["num_k_reported"] == 32
    frame = table.to_frame()
    assert frame["pair"].unique().tolist() == ["BB"]
    contributions = table.contributions_frame()
    assert set(contributions.columns) == {"R_over_a", "p", "q", "I_pq"}


def test_oracle_ring_too_small(stub1, small_config):
    with pytest.raises(ValidationError):
        coupling_oracle_realspace(stub1, "BB", 20.0, 8, Boundary.PERIODIC, small_config)
