import math
from dataclasses import replace

import numpy as np

from checks.spectrum_checks import shared_bands
from core.asymptotics import diamond_constant, diamond_fit_start
from core.couplings import band_sum_many, coupling_band_sum, coupling_oracle_realspace
from core.lattice import Boundary, allowed_separations
from models.check_result import CheckResult

SIGN_CELLS = 3
SUM_RULE_TOL = 1e-12
ORACLE_CELLS = 32
ORACLE_TOL = 1e-8
FB_DECOUPLED_TOL = 1e-10
POWER_LAW_TOL = 0.1
POWER_LAW_MIN_K = 4096
POWER_LAW_K_PER_R = 16
POWER_LAW_MAX_K = 8192
PAIRS = ("BB", "BC", "CC")


def _curve(spec, config, metadata: dict, pair: str):
    """J y contribuciones para todas las R ≤ 3·a_n del par, con las bandas compartidas."""
    cache = metadata.setdefault("_curves", {})
    key = (spec, config, pair)
    if key not in cache:
        up, down = shared_bands(spec, config, metadata)
        distances = [R for R, _, _ in allowed_separations(spec, pair, SIGN_CELLS * spec.n)]
        J, contributions, _, _ = band_sum_many(up, down, pair, distances, config)
        cache[key] = (np.asarray(distances), J, contributions)
    return cache[key]


def check_ferromagnetic_sign(spec, config, metadata: dict) -> CheckResult:
    """FERROMAGNETIC_SIGN: J(R) ≤ 0 para R > 0 en los pares BB, BC y CC."""
    worst, where = -np.inf, None
    for pair in PAIRS:
        distances, J, _ = _curve(spec, config, metadata, pair)
        positive = distances > 0
        if positive.any():
            i = int(np.argmax(np.where(positive, J, -np.inf)))
            if J[i] > worst:
                worst, where = float(J[i]), (pair, float(distances[i]))
    passed = worst <= config.coupling_floor
    return CheckResult(
        check_id="FERROMAGNETIC_SIGN",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "HIGH",
        value=worst,
        threshold=config.coupling_floor,
        message=f"max J(R > 0) = {worst:.3e} ({where[0]}, R={where[1]:g}a)" if where else "Sin distancias",
    )


def check_sum_rule(spec, config, metadata: dict) -> CheckResult:
    """SUM_RULE: Σ_pq I^{pq}(R) = J(R)."""
    worst = 0.0
    threshold = 0.0
    for pair in PAIRS:
        _, J, contributions = _curve(spec, config, metadata, pair)
        if not contributions:
            continue
        stacked = np.stack(list(contributions.values()))
        scale = float(np.max(np.abs(stacked)))
        worst = max(worst, float(np.max(np.abs(stacked.sum(axis=0) - J))))
        threshold = max(threshold, SUM_RULE_TOL * scale)
    passed = worst <= threshold
    return CheckResult(
        check_id="SUM_RULE",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "HIGH",
        value=worst,
        threshold=threshold,
        message=f"max|Σ I^pq − J| = {worst:.3e}",
    )


def check_oracle_equivalence(spec, config, metadata: dict) -> CheckResult:
    """ORACLE_EQUIVALENCE: suma en bandas (N = M) frente a Lehmann en un anillo de M celdas."""
    small = replace(config, num_k=ORACLE_CELLS)
    R = float(spec.n)
    band = coupling_band_sum(spec, "BB", R, small, workers=1).J
    oracle = coupling_oracle_realspace(spec, "BB", R, ORACLE_CELLS, Boundary.PERIODIC, small)
    diff = abs(band - oracle)
    threshold = max(ORACLE_TOL * abs(oracle), config.coupling_floor)
    passed = diff <= threshold
    return CheckResult(
        check_id="ORACLE_EQUIVALENCE",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "HIGH",
        value=diff,
        threshold=threshold,
        message=f"J_BB(a_n): bandas {band:.12e} vs espacio real {oracle:.12e} ({ORACLE_CELLS} celdas)",
        metadata={"band_sum": band, "oracle": oracle, "num_cells": ORACLE_CELLS},
    )


def check_flat_band_decoupled(spec, config, metadata: dict) -> CheckResult:
    """FLAT_BAND_DECOUPLED: en Dd[n] los términos con la banda plana se anulan para R_BB ≥ a_n."""
    up, down = shared_bands(spec, config, metadata)
    distances, J, contributions = _curve(spec, config, metadata, "BB")
    far = distances >= spec.n - 1e-9
    fb_terms = [v[far] for (p, q), v in contributions.items() if p == up.flat_band or q == down.flat_band]
    worst = float(max((np.max(np.abs(v)) for v in fb_terms if v.size), default=0.0))
    scale = max((float(np.max(np.abs(v))) for v in contributions.values()), default=0.0)
    threshold = FB_DECOUPLED_TOL * max(scale, config.coupling_floor)
    passed = worst <= threshold
    return CheckResult(
        check_id="FLAT_BAND_DECOUPLED",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=worst,
        threshold=threshold,
        message=f"max|I^pq| con banda plana, R ≥ a_n: {worst:.3e}",
    )


def check_diamond_power_law(spec, config, metadata: dict) -> CheckResult:
    """DIAMOND_POWER_LAW: J_BB·R⁴/C₁ → −1 en Dd[1], evaluado en R = 100·t/|JS|·a."""
    if spec.n != 1 or spec.JS == 0.0:
        return CheckResult(
            check_id="DIAMOND_POWER_LAW",
            target=spec.description,
            passed=True,
            severity="INFO",
            value=0.0,
            threshold=POWER_LAW_TOL,
            message="Solo aplica a Dd[1] con JS ≠ 0",
        )
    R = float(math.ceil(diamond_fit_start(spec.JS, spec.t, spec.a) / spec.a))
    num_k = max(config.num_k, POWER_LAW_MIN_K, 2 * math.ceil(POWER_LAW_K_PER_R * R / 2))
    if num_k > POWER_LAW_MAX_K:
        return CheckResult(
            check_id="DIAMOND_POWER_LAW",
            target=spec.description,
            passed=True,
            severity="INFO",
            value=0.0,
            threshold=POWER_LAW_TOL,
            message=f"R = {R:g}a exige N = {num_k} > {POWER_LAW_MAX_K}; no evaluado",
        )
    J = coupling_band_sum(spec, "BB", R, replace(config, num_k=num_k)).J
    C1 = diamond_constant(spec.JS, spec.t)
    ratio = J * R ** 4 / C1
    deviation = abs(ratio + 1.0)
    passed = deviation <= POWER_LAW_TOL
    return CheckResult(
        check_id="DIAMOND_POWER_LAW",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=deviation,
        threshold=POWER_LAW_TOL,
        message=f"J_BB({R:g}a)·R⁴/C₁ = {ratio:.4f} (N = {num_k})",
        metadata={"R": R, "num_k": num_k, "ratio": ratio},
    )


COUPLING_CHECKS = [
    {"check_id": "FERROMAGNETIC_SIGN", "function": check_ferromagnetic_sign},
    {"check_id": "SUM_RULE", "function": check_sum_rule},
    {"check_id": "ORACLE_EQUIVALENCE", "function": check_oracle_equivalence},
]

DIAMOND_COUPLING_CHECKS = [
    {"check_id": "FLAT_BAND_DECOUPLED", "function": check_flat_band_decoupled},
    {"check_id": "DIAMOND_POWER_LAW", "function": check_diamond_power_law},
]
