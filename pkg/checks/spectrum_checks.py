import numpy as np

from core.lattice import bloch_hamiltonians, build_unit_cell, kmesh
from core.spectrum import (
    FLATNESS_TOL,
    cls_translates_rank,
    construct_cls,
    diagonalize_bands,
    gap_delta,
)
from models.chain_spec import Sublattice, SpinSector
from models.check_result import CheckResult

MACHINE_TOL = 1e-12
CLS_TOL = 1e-10
GAP_TOL = 1e-8
RANK_CELLS = 6


def shared_bands(spec, config, metadata: dict):
    """(↑, ↓) en la malla config.num_k, calculadas una vez por corrida de checks."""
    cache = metadata.setdefault("_bands", {})
    key = (spec, config.num_k)
    if key not in cache:
        cache[key] = (diagonalize_bands(spec, SpinSector.UP, config.num_k),
                      diagonalize_bands(spec, SpinSector.DOWN, config.num_k))
    return cache[key]


def check_flat_band_placement(spec, config, metadata: dict) -> CheckResult:
    """FLAT_BAND_PLACEMENT: una banda por sector plana en z_σ·JS/2."""
    up, down = shared_bands(spec, config, metadata)
    deviation = max(up.flat_band_deviation(), down.flat_band_deviation())
    threshold = FLATNESS_TOL * spec.t
    passed = deviation <= threshold
    return CheckResult(
        check_id="FLAT_BAND_PLACEMENT",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "CRITICAL",
        value=deviation,
        threshold=threshold,
        message=f"Desviación máxima de la banda plana respecto a ±JS/2: {deviation:.3e}",
        metadata={"flat_band_up": up.flat_band, "flat_band_down": down.flat_band},
    )


def check_hermiticity(spec, config, metadata: dict) -> CheckResult:
    """HERMITICITY: H_σ(k) = H_σ(k)† en toda la malla."""
    ks = kmesh(spec, config.num_k)
    worst = 0.0
    for sector in (SpinSector.UP, SpinSector.DOWN):
        H = bloch_hamiltonians(spec, ks, sector)
        worst = max(worst, float(np.max(np.abs(H - np.conj(np.swapaxes(H, 1, 2))))))
    passed = worst <= MACHINE_TOL * spec.t
    return CheckResult(
        check_id="HERMITICITY",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "CRITICAL",
        value=worst,
        threshold=MACHINE_TOL * spec.t,
        message=f"max|H − H†| = {worst:.3e}",
    )


def check_spin_mirror(spec, config, metadata: dict) -> CheckResult:
    """SPIN_MIRROR: H_↓(k; JS) = H_↑(k; −JS)."""
    ks = kmesh(spec, config.num_k)
    down = bloch_hamiltonians(spec, ks, SpinSector.DOWN)
    mirrored = bloch_hamiltonians(spec.with_js(-spec.JS), ks, SpinSector.UP)
    worst = float(np.max(np.abs(down - mirrored)))
    passed = worst <= MACHINE_TOL * spec.t
    return CheckResult(
        check_id="SPIN_MIRROR",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "HIGH",
        value=worst,
        threshold=MACHINE_TOL * spec.t,
        message=f"max|H↓(JS) − H↑(−JS)| = {worst:.3e}",
    )


def check_bipartite(spec, config, metadata: dict) -> CheckResult:
    """BIPARTITE: todo salto conecta A con B o C."""
    hoppings = build_unit_cell(spec).hoppings
    bad = [
        f"{h.source.label()}–{h.target.label()}" for h in hoppings
        if (h.source.sublattice is Sublattice.A) == (h.target.sublattice is Sublattice.A)
    ]
    passed = not bad
    return CheckResult(
        check_id="BIPARTITE",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "CRITICAL",
        value=float(len(bad)),
        threshold=0.0,
        message="Grafo bipartito A / (B ∪ C)" if passed else f"Saltos fuera de la bipartición: {bad}",
    )


def check_cls(spec, config, metadata: dict) -> CheckResult:
    """CLS_RESIDUAL: ‖H·cls‖ y rango de los CLS trasladados en un anillo."""
    cls = construct_cls(spec)
    rank = cls_translates_rank(spec, RANK_CELLS)
    passed = cls.residual <= CLS_TOL * spec.t and rank == RANK_CELLS
    return CheckResult(
        check_id="CLS_RESIDUAL",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "HIGH",
        value=cls.residual,
        threshold=CLS_TOL * spec.t,
        message=f"‖H·cls‖ = {cls.residual:.3e}; rango de {RANK_CELLS} traslados = {rank}",
        metadata={"support_size": len(cls.orbitals), "rank": rank},
    )


def check_gap_closed_form(spec, config, metadata: dict) -> CheckResult:
    """GAP_CLOSED_FORM: δ numérico frente a la forma cerrada de Sb[1]."""
    if spec.n != 1:
        return CheckResult(
            check_id="GAP_CLOSED_FORM", target=spec.description, passed=True, severity="PASS",
            value=0.0, threshold=GAP_TOL, message=f"Sin forma cerrada para {spec.label}",
        )
    gap = gap_delta(spec, config.num_k)
    diff = abs(gap.closed_form - gap.numerical)
    passed = diff <= GAP_TOL * spec.t
    return CheckResult(
        check_id="GAP_CLOSED_FORM",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=diff,
        threshold=GAP_TOL * spec.t,
        message=f"δ = {gap.closed_form:.10g} (forma cerrada) vs {gap.numerical:.10g} (numérico)",
        metadata=gap.to_dict(),
    )


def check_gapless(spec, config, metadata: dict) -> CheckResult:
    """GAPLESS: las bandas dispersivas de Dd[n] tocan μ = 0."""
    gap = gap_delta(spec, config.num_k)
    passed = gap.gapless
    return CheckResult(
        check_id="GAPLESS",
        target=spec.description,
        passed=passed,
        severity="PASS" if passed else "MEDIUM",
        value=gap.numerical,
        threshold=0.0,
        message=f"δ numérico = {gap.numerical:.3e}",
    )


SPECTRUM_CHECKS = [
    {"check_id": "BIPARTITE", "function": check_bipartite},
    {"check_id": "HERMITICITY", "function": check_hermiticity},
    {"check_id": "SPIN_MIRROR", "function": check_spin_mirror},
    {"check_id": "FLAT_BAND_PLACEMENT", "function": check_flat_band_placement},
    {"check_id": "CLS_RESIDUAL", "function": check_cls},
]

STUB_SPECTRUM_CHECKS = [
    {"check_id": "GAP_CLOSED_FORM", "function": check_gap_closed_form},
]

DIAMOND_SPECTRUM_CHECKS = [
    {"check_id": "GAPLESS", "function": check_gapless},
]
