"""Tests para los regímenes de decaimiento: curvas J(R) numéricas frente a las formas cerradas"""

import numpy as np
import pytest

from core.analysis import NC_THRESHOLD, amplification_scan, detect_nc, fit_decay, xi_vs_g_study
from core.asymptotics import (
    diamond_constant,
    diamond_fit_start,
    stub_dispersive_xi,
    stub_fbfb,
    stub_fbfb_xi,
)
from core.couplings import band_sum_many, coupling_band_sum, coupling_curve
from core.spectrum import diagonalize_bands
from models.chain_spec import ChainSpec, Family, SpinSector
from models.coupling_table import ComputeConfig, CouplingTable, parse_pair
from models.fit_result import FitModel

MESH_1024 = ComputeConfig(num_k=512)
DIAMOND_MESH = 4096


def test_stub_fbfb_decay_length_and_amplitude():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.3, JS=0.01)
    table = coupling_curve(spec, "BB", 40.0, MESH_1024)
    fit = fit_decay(table, FitModel.EXPONENTIAL, r_max=25.0)
    assert fit.sign == -1
    assert fit.parameters["xi"] == pytest.approx(stub_fbfb_xi(0.3), rel=0.03)
    assert fit.parameters["A"] == pytest.approx(-stub_fbfb(0.3, 0.01, 0.0).value, rel=0.10)


def test_stub_fbfb_linear_in_js():
    config = ComputeConfig(num_k=256)
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.3, JS=0.005)
    for R in (3.0, 5.0):
        weak = coupling_band_sum(spec, "BB", R, config).J
        strong = coupling_band_sum(spec.with_js(0.01), "BB", R, config).J
        assert strong / weak == pytest.approx(2.0, rel=0.05)


def test_stub_dispersive_decay_length():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.1, JS=1.0)
    table = coupling_curve(spec, "BB", 40.0, MESH_1024)
    fit = fit_decay(table, FitModel.EXPONENTIAL, r_min=15.0, r_max=40.0)
    assert fit.sign == -1
    assert fit.parameters["xi"] == pytest.approx(stub_dispersive_xi(0.1), rel=0.05)


def _diamond_curve(JS, distances):
    spec = ChainSpec(family=Family.DIAMOND, n=1, JS=JS)
    up = diagonalize_bands(spec, SpinSector.UP, DIAMOND_MESH)
    down = diagonalize_bands(spec, SpinSector.DOWN, DIAMOND_MESH)
    J, contributions, _, _ = band_sum_many(up, down, "BB", distances, ComputeConfig(num_k=DIAMOND_MESH))
    return spec, up, down, J, contributions


@pytest.mark.parametrize("JS", [0.5, 1.0])
def test_diamond_power_law_beyond_fit_start(JS):
    start = diamond_fit_start(JS)
    distances = np.arange(start, start + 301.0, 10.0)
    spec, _, _, J, _ = _diamond_curve(JS, distances)
    C1 = diamond_constant(JS)
    assert J[0] * start ** 4 / C1 == pytest.approx(-1.0, abs=0.1)

    table = CouplingTable(spec=spec, pair=parse_pair("BB"), distances=distances, values=J,
                          converged=np.ones(len(distances), dtype=bool))
    fit = fit_decay(table, FitModel.POWER_LAW)
    assert 3.9 <= fit.parameters["p"] <= 4.1
    assert fit.parameters["C"] == pytest.approx(C1, rel=0.10)


def test_diamond_coupling_scales_as_inverse_js():
    R = 400.0
    config = ComputeConfig(num_k=DIAMOND_MESH)
    weak = coupling_band_sum(ChainSpec(family=Family.DIAMOND, n=1, JS=0.5), "BB", R, config).J
    strong = coupling_band_sum(ChainSpec(family=Family.DIAMOND, n=1, JS=1.0), "BB", R, config).J
    assert weak * 0.5 == pytest.approx(strong * 1.0, rel=0.05)


def test_diamond_flat_band_terms_vanish(diamond1):
    distances = np.arange(1.0, 11.0)
    _, up, down, J, contributions = _diamond_curve(diamond1.JS, distances)
    scale = max(np.max(np.abs(v)) for v in contributions.values())
    for (p, q), values in contributions.items():
        if p == up.flat_band or q == down.flat_band:
            assert np.max(np.abs(values)) <= 1e-10 * scale
    assert np.all(J < 0)


def test_amplification_about_three_orders():
    scan = amplification_scan([0.3], [0.1], ComputeConfig(num_k=64))
    amplification = float(scan.cells["amplification"].iloc[0])
    assert 1e3 / 3.0 <= amplification <= 3e3


def test_xi_tracks_cube_root_of_metric_for_small_n():
    study = xi_vs_g_study(0.3, [2, 3, 4], 0.1, ComputeConfig(num_k=256), qmetric_num_k=256)
    assert np.isfinite(study["xi"]).all()
    slopes = study["local_slope"].iloc[1:]
    assert np.all(np.abs(slopes - 1.0 / 3.0) <= 0.08)

    estimate = detect_nc(study)
    assert not estimate.defined
    assert estimate.slope_max < NC_THRESHOLD
    assert "todas las pendientes" in estimate.reason
