"""
Capa 5: Formas cerradas de referencia para los acoplamientos.

Convención de signo: todo J devuelto es ≤ 0 (ferromagnético a semillenado).
Fuera de su región de validez el valor se devuelve igual, con valid = False.
"""

import logging
import math
from typing import Sequence

import numpy as np

from core.errors import ValidationError
from models.asymptotic_prediction import AsymptoticPrediction, Regime, XiReference
from models.chain_spec import ChainSpec, Family, Sublattice
from models.coupling_table import CouplingTable

logger = logging.getLogger(__name__)

FBFB_DOMINANCE = 10.0  # α ≥ 10·|JS|/t
DISPERSIVE_DOMINANCE = 10.0  # α ≤ |JS|/(10 t)
DIAMOND_THRESHOLD_FACTOR = 2.0  # R > 2·√32·t/|JS|·a
DIAMOND_AGREEMENT_FACTOR = 100.0  # |J·R⁴/C₁ + 1| ≤ 0.1 desde R ≈ 100·t/|JS|·a


def _require_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValidationError(f"{name} debe ser > 0, recibido: {value}")


def stub_pole(alpha: float) -> float:
    """z₊ = −1 − α²/2 + (α/2)√(α² + 4), con |z₊| < 1."""
    _require_positive("alpha", alpha)
    return -1.0 - alpha ** 2 / 2.0 + (alpha / 2.0) * math.sqrt(alpha ** 2 + 4.0)


def stub_fbfb_xi(alpha: float, a: float = 1.0) -> float:
    """ξ = −a/(2 ln|z₊|)."""
    return -a / (2.0 * math.log(abs(stub_pole(alpha))))


def stub_fbfb(alpha: float, JS: float, R: float, t: float = 1.0, a: float = 1.0) -> AsymptoticPrediction:
    """Régimen FB–FB de Sb[1]: J_BB = −(|JS|/2)·α²/(α² + 4)·|z₊|^{2R/a}."""
    z = abs(stub_pole(alpha))
    value = -(abs(JS) / 2.0) * (alpha ** 2 / (alpha ** 2 + 4.0)) * z ** (2.0 * R / a)
    valid = alpha >= FBFB_DOMINANCE * abs(JS) / t and R > 0
    return AsymptoticPrediction(
        regime=Regime.STUB_FBFB,
        value=value,
        R=R,
        valid=valid,
        condition=f"alpha >= {FBFB_DOMINANCE:g}·|JS|/t",
        xi=stub_fbfb_xi(alpha, a),
    )


def stub_fbfb_small_alpha(alpha: float, JS: float, R: float, a: float = 1.0) -> float:
    """α ≪ 1: −(|JS|/8)·α²·e^{−R/ξ}, ξ = a/(2α)."""
    return -(abs(JS) / 8.0) * alpha ** 2 * math.exp(-R * 2.0 * alpha / a)


def stub_fbfb_large_alpha(alpha: float, JS: float, R: float, a: float = 1.0) -> float:
    """α ≫ 1: −(|JS|/2)·e^{−R/ξ}, ξ = a/(2 ln α²)."""
    xi = a / (2.0 * math.log(alpha ** 2))
    return -(abs(JS) / 2.0) * math.exp(-R / xi)


def stub_dispersive_xi(alpha: float, a: float = 1.0) -> float:
    """ξ = √2·a/(3α)."""
    _require_positive("alpha", alpha)
    return math.sqrt(2.0) * a / (3.0 * alpha)


def stub_dispersive(alpha: float, JS: float, R: float, t: float = 1.0, a: float = 1.0) -> AsymptoticPrediction:
    """Régimen dispersivo de Sb[1] (α ≪ JS/t):
    J_BB = −(2α^{7/2}/√(2√2π))·(t²/|JS|)·e^{−R/ξ}/√(R/a)."""
    _require_positive("|JS|", abs(JS))
    _require_positive("R", R)
    xi = stub_dispersive_xi(alpha, a)
    amplitude = 2.0 * alpha ** 3.5 / math.sqrt(2.0 * math.sqrt(2.0) * math.pi)
    value = -amplitude * (t ** 2 / abs(JS)) * math.exp(-R / xi) / math.sqrt(R / a)
    valid = alpha <= abs(JS) / (DISPERSIVE_DOMINANCE * t) and R >= 2.0 * xi
    return AsymptoticPrediction(
        regime=Regime.STUB_DISPERSIVE,
        value=value,
        R=R,
        valid=valid,
        condition=f"alpha <= |JS|/({DISPERSIVE_DOMINANCE:g}·t) and R >= 2·xi",
        xi=xi,
    )


def diamond_constant(JS: float, t: float = 1.0) -> float:
    """C₁ = (3/2π)·t²/|JS|."""
    _require_positive("|JS|", abs(JS))
    return 3.0 / (2.0 * math.pi) * t ** 2 / abs(JS)


def diamond_threshold(JS: float, t: float = 1.0, a: float = 1.0) -> float:
    """Inicio del régimen R⁻⁴ (2·√32·t/|JS|·a); la amplitud aún no es C₁ a esa distancia."""
    return DIAMOND_THRESHOLD_FACTOR * math.sqrt(32.0) * t / abs(JS) * a


def diamond_fit_start(JS: float, t: float = 1.0, a: float = 1.0) -> float:
    """Primer R con J·R⁴/C₁ a menos de un 10 % de −1 (en R = 20a, JS = 0.5 el cociente es −0.375)."""
    return max(diamond_threshold(JS, t, a), DIAMOND_AGREEMENT_FACTOR * t / abs(JS) * a)


def diamond_powerlaw(JS: float, R: float, t: float = 1.0, a: float = 1.0) -> AsymptoticPrediction:
    """Dd[1] a gran distancia: J_BB = −C₁/(R/a)⁴."""
    _require_positive("R", R)
    value = -diamond_constant(JS, t) / (R / a) ** 4
    threshold = diamond_fit_start(JS, t, a)
    return AsymptoticPrediction(
        regime=Regime.DIAMOND_POWER_LAW,
        value=value,
        R=R,
        valid=R >= threshold,
        condition=f"R >= {threshold:.6g} ({DIAMOND_AGREEMENT_FACTOR:g}·t/|JS|·a)",
        exponent=4.0,
    )


def stub_quantum_metric(alpha: float, a: float = 1.0) -> float:
    """⟨g⟩ de Sb[1] = a²/(2α√(α² + 4))."""
    _require_positive("alpha", alpha)
    return a ** 2 / (2.0 * alpha * math.sqrt(alpha ** 2 + 4.0))


def xi_vs_g_reference(alpha: float, a: float = 1.0) -> XiReference:
    """ξ de Sb[1] frente a ⟨g⟩: ξ = 2⟨g⟩/a (α < 1), ξ = −a/(2 ln(2⟨g⟩/a²)) (α > 1), y el polo exacto."""
    g = stub_quantum_metric(alpha, a)
    ratio = 2.0 * g / a ** 2
    large = -a / (2.0 * math.log(ratio)) if ratio < 1.0 else math.inf
    return XiReference(
        alpha=alpha,
        g_avg=g,
        xi_exact=stub_fbfb_xi(alpha, a),
        xi_small_alpha=2.0 * g / a,
        xi_large_alpha=large,
        branch="small_alpha" if alpha < 1.0 else "large_alpha",
    )


def asymptotic_curve(spec: ChainSpec, regime, distances: Sequence[float],
                     coupling_floor: float = 1e-14) -> CouplingTable:
    """Curva de referencia con el mismo esquema que coupling_curve (par BB)."""
    regime = regime if isinstance(regime, Regime) else Regime(regime)
    if spec.n != 1:
        raise ValidationError(f"Solo hay formas cerradas para n = 1, recibido {spec.label}")
    if regime is Regime.DIAMOND_POWER_LAW:
        if spec.family is not Family.DIAMOND:
            raise ValidationError("DiamondPowerLaw requiere la familia Diamond")
        predictions = [diamond_powerlaw(spec.JS, R * spec.a, spec.t, spec.a) for R in distances]
    else:
        if spec.family is not Family.STUB:
            raise ValidationError(f"{regime.value} requiere la familia Stub")
        fn = stub_fbfb if regime is Regime.STUB_FBFB else stub_dispersive
        predictions = [fn(spec.alpha, spec.JS, R * spec.a, spec.t, spec.a) for R in distances]

    invalid = sum(1 for p in predictions if not p.valid)
    if invalid:
        logger.warning("%s: %d de %d puntos fuera de la región de validez", regime.value, invalid, len(predictions))
    return CouplingTable(
        spec=spec,
        pair=(Sublattice.B, Sublattice.B),
        distances=np.asarray(distances, dtype=float),
        values=np.array([p.value for p in predictions]),
        converged=np.array([p.valid for p in predictions], dtype=bool),
        coupling_floor=coupling_floor,
        source=f"asymptotic:{regime.value}",
        metadata={"regime": regime.value, "valid": [p.valid for p in predictions]},
    )
