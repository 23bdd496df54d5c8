"""Tests para core/qmetric.py"""

import numpy as np
import pytest

from core.asymptotics import stub_quantum_metric
from core.errors import ValidationError
from core.lattice import kmesh
from core.qmetric import flat_band_states, metric_from_states, quantum_metric
from models.chain_spec import ChainSpec, Family


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 2.0])
def test_stub_closed_form(alpha):
    spec = ChainSpec(family=Family.STUB, n=1, alpha=alpha)
    result = quantum_metric(spec, 256)
    assert result.g_avg == pytest.approx(stub_quantum_metric(alpha), rel=5e-3)
    assert result.converged


def test_diamond_vanishes():
    result = quantum_metric(ChainSpec(family=Family.DIAMOND, n=1), 64)
    assert result.g_avg <= 1e-10


def test_evaluated_at_zero_js():
    result = quantum_metric(ChainSpec(family=Family.STUB, n=1, alpha=1.0, JS=0.5), 64)
    assert result.spec.JS == 0.0


def test_metric_grows_with_dilution():
    g1 = quantum_metric(ChainSpec(family=Family.STUB, n=1, alpha=0.5), 64).g_avg
    g3 = quantum_metric(ChainSpec(family=Family.STUB, n=3, alpha=0.5), 64).g_avg
    assert g3 > g1


def test_gauge_invariance():
    """Fases arbitrarias por k no cambian g."""
    spec = ChainSpec(family=Family.STUB, n=2, alpha=0.7)
    ks = kmesh(spec, 16)
    states = flat_band_states(spec, ks)
    rng = np.random.default_rng(7)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, len(ks)))
    dk = ks[1] - ks[0]
    assert np.allclose(metric_from_states(states, dk), metric_from_states(states * phases[:, None], dk))


def test_requires_fine_mesh():
    with pytest.raises(ValidationError):
        quantum_metric(ChainSpec(family=Family.STUB, n=1, alpha=1.0), 32)


def test_frame_summary_row():
    result = quantum_metric(ChainSpec(family=Family.STUB, n=1, alpha=1.0), 64)
    frame = result.to_frame()
    summary = frame[frame["row_type"] == "summary"]
    assert len(summary) == 1
    assert summary["g_avg_over_a2"].iloc[0] == pytest.approx(result.g_avg_over_a2)
    assert (frame["row_type"] == "sample").sum() == 64


def test_stub_closed_form_small_alpha():
    spec = ChainSpec(family=Family.STUB, n=1, alpha=0.1)
    result = quantum_metric(spec, 1024)
    assert result.g_avg == pytest.approx(stub_quantum_metric(0.1), rel=5e-3)
