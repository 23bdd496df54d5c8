"""Tests para core/check_engine.py, core/check_registry.py y checks/"""

import pytest

from checks.coupling_checks import (
    check_diamond_power_law,
    check_ferromagnetic_sign,
    check_flat_band_decoupled,
    check_oracle_equivalence,
    check_sum_rule,
)
from checks.spectrum_checks import (
    check_bipartite,
    check_cls,
    check_flat_band_placement,
    check_gap_closed_form,
    check_gapless,
    check_hermiticity,
    check_spin_mirror,
)
from core.check_engine import CheckEngine
from core.check_registry import CheckRegistry
from core.config_loader import ConfigLoader
from core.errors import ValidationError
from models.chain_spec import ChainSpec, Family
from models.check_result import CheckResult


@pytest.mark.parametrize("check", [
    check_bipartite, check_hermiticity, check_spin_mirror, check_flat_band_placement, check_cls,
])
def test_spectrum_checks_pass(check, stub1, diamond1, small_config):
    for spec in (stub1, diamond1):
        result = check(spec, small_config, {})
        assert result.passed, result.message
        assert result.severity == "PASS"


def test_gap_checks(stub1, diamond1, small_config):
    assert check_gap_closed_form(stub1, small_config, {}).passed
    assert check_gapless(diamond1, small_config, {}).passed


@pytest.mark.parametrize("check", [check_ferromagnetic_sign, check_sum_rule, check_oracle_equivalence])
def test_coupling_checks_pass(check, stub1, small_config):
    result = check(stub1, small_config, {})
    assert result.passed, result.message


def test_flat_band_decoupled_diamond(diamond1, small_config):
    result = check_flat_band_decoupled(diamond1, small_config, {})
    assert result.passed, result.message


def test_diamond_power_law_check(small_config):
    result = check_diamond_power_law(ChainSpec(family=Family.DIAMOND, n=1, JS=1.0), small_config, {})
    assert result.passed, result.message
    assert result.severity == "PASS"
    assert result.metadata["R"] == 100.0
    assert result.metadata["num_k"] == 4096


def test_diamond_power_law_check_not_applicable(small_config):
    result = check_diamond_power_law(ChainSpec(family=Family.DIAMOND, n=2, JS=1.0), small_config, {})
    assert result.passed
    assert result.severity == "INFO"
    assert "DIAMOND_POWER_LAW" not in [c["check_id"] for c in CheckRegistry().get_checks_for_family("Stub")]


def test_shared_metadata_cache(stub1, small_config):
    metadata = {}
    check_flat_band_placement(stub1, small_config, metadata)
    check_sum_rule(stub1, small_config, metadata)
    assert len(metadata["_bands"]) == 1
    assert len(metadata["_curves"]) == 3


def test_registry_families():
    registry = CheckRegistry()
    stub_ids = [c["check_id"] for c in registry.get_checks_for_family(Family.STUB)]
    diamond_ids = [c["check_id"] for c in registry.get_checks_for_family("Diamond")]
    assert "GAP_CLOSED_FORM" in stub_ids and "GAP_CLOSED_FORM" not in diamond_ids
    assert "FLAT_BAND_DECOUPLED" in diamond_ids and "FLAT_BAND_DECOUPLED" not in stub_ids
    assert len(registry.get_all_check_ids()) == len(set(registry.get_all_check_ids()))


def test_unknown_disabled_check():
    config = ConfigLoader.default_config()
    config["disabled_checks"] = {"NOT_A_CHECK"}
    with pytest.raises(ValidationError):
        CheckEngine(config)


def test_disabled_checks_skipped(small_config):
    config = ConfigLoader.default_config()
    config["disabled_checks"] = {"ORACLE_EQUIVALENCE", "QMETRIC_CONVERGENCE", "QMETRIC_VANISHING",
                                 "FLAT_BAND_DECOUPLED", "DIAMOND_POWER_LAW"}
    spec = ChainSpec(family=Family.DIAMOND, n=1, JS=0.5)
    results = CheckEngine(config).run_all(spec, small_config)
    ids = [r.check_id for r in results]
    assert "ORACLE_EQUIVALENCE" not in ids
    assert "BIPARTITE" in ids
    assert all(r.target == spec.description for r in results)


def _failing(spec, config, metadata):
    return CheckResult(check_id="FAKE_FAIL", target=spec.description, passed=False, severity="HIGH",
                       value=1.0, threshold=0.0, message="falla")


def _crashing(spec, config, metadata):
    raise RuntimeError("boom")


def test_severity_override_and_safe_execute(stub1, small_config):
    config = ConfigLoader.default_config()
    config["severity_overrides"] = {"FAKE_FAIL": "LOW"}
    engine = CheckEngine(config)
    engine.registry.get_checks_for_family = lambda family: [
        {"check_id": "FAKE_FAIL", "function": _failing},
        {"check_id": "FAKE_CRASH", "function": _crashing},
    ]
    failed, crashed = engine.run_all(stub1, small_config)
    assert failed.severity == "LOW"
    assert crashed.check_id == "FAKE_CRASH"
    assert crashed.severity == "INFO"
    assert crashed.metadata["error"] is True
    assert crashed.metadata["error_type"] == "RuntimeError"
