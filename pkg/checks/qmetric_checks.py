from core.asymptotics import stub_quantum_metric
from core.qmetric import MIN_NUM_K, quantum_metric
from models.check_result import CheckResult

CLOSED_FORM_RTOL = 0.005
VANISHING_TOL = 1e-10
CONVERGENCE_RTOL = 0.01


def _metric(spec, config, metadata: dict):
    cache = metadata.setdefault("_qmetric", {})
    key = (spec.with_js(0.0), config.num_k)
    if key not in cache:
        cache[key] = quantum_metric(spec, max(config.num_k, MIN_NUM_K))
    return cache[key]


def check_qmetric_convergence(spec, config, metadata: dict) -> CheckResult:
    """QMETRIC_CONVERGENCE: error de Richardson ≤ 1 % de ⟨g⟩."""
    result = _metric(spec, config, metadata)
    threshold = CONVERGENCE_RTOL * result.g_avg
    passed = result.converged
    return CheckResult(
        check_id="QMETRIC_CONVERGENCE",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "LOW",
        value=result.error_estimate,
        threshold=threshold,
        message=f"⟨g⟩ = {result.g_avg_over_a2:.8g} a², error estimado {result.error_estimate:.3e}",
        metadata={"refined_intervals": result.refined_intervals},
    )


def check_qmetric_closed_form(spec, config, metadata: dict) -> CheckResult:
    """QMETRIC_CLOSED_FORM: ⟨g⟩ de Sb[1] frente a a²/(2α√(α² + 4))."""
    if spec.n != 1:
        return CheckResult(
            check_id="QMETRIC_CLOSED_FORM", target=spec.description, passed=True, severity="PASS",
            value=0.0, threshold=CLOSED_FORM_RTOL, message=f"Sin forma cerrada para {spec.label}",
        )
    result = _metric(spec, config, metadata)
    expected = stub_quantum_metric(spec.alpha, spec.a)
    rel = abs(result.g_avg - expected) / expected
    passed = rel <= CLOSED_FORM_RTOL
    return CheckResult(
        check_id="QMETRIC_CLOSED_FORM",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=rel,
        threshold=CLOSED_FORM_RTOL,
        message=f"⟨g⟩ = {result.g_avg:.8g} vs forma cerrada {expected:.8g}",
    )


def check_qmetric_vanishing(spec, config, metadata: dict) -> CheckResult:
    """QMETRIC_VANISHING: ⟨g⟩ = 0 en Dd[n]."""
    result = _metric(spec, config, metadata)
    threshold = VANISHING_TOL * spec.a ** 2
    passed = result.g_avg <= threshold
    return CheckResult(
        check_id="QMETRIC_VANISHING",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=result.g_avg,
        threshold=threshold,
        message=f"⟨g⟩ = {result.g_avg:.3e} a²",
    )


QMETRIC_CHECKS = [
    {"check_id": "QMETRIC_CONVERGENCE", "function": check_qmetric_convergence},
]

STUB_QMETRIC_CHECKS = [
    {"check_id": "QMETRIC_CLOSED_FORM", "function": check_qmetric_closed_form},
]

DIAMOND_QMETRIC_CHECKS = [
    {"check_id": "QMETRIC_VANISHING", "function": check_qmetric_vanishing},
]
