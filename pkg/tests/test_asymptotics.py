"""Tests para core/asymptotics.py"""

import math

import numpy as np
import pytest

from core.asymptotics import (
    asymptotic_curve,
    diamond_constant,
    diamond_fit_start,
    diamond_powerlaw,
    diamond_threshold,
    stub_dispersive,
    stub_dispersive_xi,
    stub_fbfb,
    stub_fbfb_xi,
    stub_pole,
    stub_quantum_metric,
    xi_vs_g_reference,
)
from core.errors import ValidationError
from models.asymptotic_prediction import Regime
from models.chain_spec import ChainSpec, Family


def test_pole_inside_unit_circle():
    for alpha in (0.05, 0.3, 1.0, 5.0):
        z = stub_pole(alpha)
        assert -1.0 < z < 0.0


def test_fbfb_reference_value():
    prediction = stub_fbfb(0.3, 0.1, 1.0)
    assert prediction.value == pytest.approx(-6.0517e-4, rel=1e-4)
    assert prediction.xi == pytest.approx(1.6729, rel=1e-4)
    assert prediction.regime is Regime.STUB_FBFB


def test_fbfb_validity():
    assert stub_fbfb(1.0, 0.1, 2.0).valid
    assert not stub_fbfb(0.3, 0.1, 2.0).valid


def test_fbfb_xi_limits():
    assert stub_fbfb_xi(0.01) == pytest.approx(1.0 / 0.02, rel=1e-2)
    assert stub_fbfb_xi(20.0) == pytest.approx(1.0 / (2.0 * math.log(400.0)), rel=1e-2)


def test_dispersive_is_ferromagnetic():
    prediction = stub_dispersive(0.01, 1.0, 100.0)
    assert prediction.value < 0
    assert prediction.xi == pytest.approx(math.sqrt(2.0) / 0.03)
    assert stub_dispersive_xi(0.01) == prediction.xi


def test_dispersive_requires_r():
    with pytest.raises(ValidationError):
        stub_dispersive(0.01, 1.0, 0.0)


def test_diamond_powerlaw_value():
    prediction = diamond_powerlaw(0.5, 20.0)
    assert diamond_constant(0.5) == pytest.approx(3.0 / math.pi)
    assert prediction.value == pytest.approx(-5.968e-6, rel=1e-3)
    assert prediction.exponent == 4.0


def test_diamond_validity_threshold():
    assert diamond_threshold(0.5) == pytest.approx(4.0 * math.sqrt(32.0))
    assert diamond_fit_start(0.5) == pytest.approx(200.0)
    assert diamond_fit_start(1.0) > diamond_threshold(1.0)
    assert not diamond_powerlaw(0.5, 20.0).valid
    assert not diamond_powerlaw(0.5, 30.0).valid
    assert diamond_powerlaw(0.5, 200.0).valid


def test_stub_quantum_metric():
    assert stub_quantum_metric(1.0) == pytest.approx(1.0 / (2.0 * math.sqrt(5.0)))
    with pytest.raises(ValidationError):
        stub_quantum_metric(0.0)


def test_xi_vs_g_branches():
    small = xi_vs_g_reference(0.3)
    assert small.branch == "small_alpha"
    assert small.xi_branch == pytest.approx(2.0 * small.g_avg)
    large = xi_vs_g_reference(2.0)
    assert large.branch == "large_alpha"
    assert math.isfinite(large.xi_large_alpha)


def test_asymptotic_curve_layout():
    spec = ChainSpec(family=Family.DIAMOND, n=1, JS=0.5)
    table = asymptotic_curve(spec, Regime.DIAMOND_POWER_LAW, [20.0, 30.0, 200.0])
    assert np.all(table.values < 0)
    assert table.metadata["valid"] == [False, False, True]
    assert table.source == "asymptotic:DiamondPowerLaw"


def test_asymptotic_curve_family_mismatch():
    spec = ChainSpec(family=Family.DIAMOND, n=1, JS=0.5)
    with pytest.raises(ValidationError):
        asymptotic_curve(spec, Regime.STUB_FBFB, [1.0])
    with pytest.raises(ValidationError):
        asymptotic_curve(ChainSpec(family=Family.STUB, n=2, alpha=1.0, JS=0.1), "StubFBFB", [2.0])
