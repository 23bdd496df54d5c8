from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

XI_REFERENCE_COLUMNS = ["alpha", "g_avg", "xi_exact", "xi_small_alpha", "xi_large_alpha", "branch", "xi_branch"]


class Regime(Enum):
    STUB_FBFB = "StubFBFB"
    STUB_DISPERSIVE = "StubDispersive"
    DIAMOND_POWER_LAW = "DiamondPowerLaw"


@dataclass(frozen=True)
class AsymptoticPrediction:
    regime: Regime
    value: float  # J(R) en unidades de t, siempre <= 0
    R: float
    valid: bool
    condition: str
    xi: Optional[float] = None
    exponent: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "regime": self.regime.value,
            "value": self.value,
            "R": self.R,
            "valid": self.valid,
            "condition": self.condition,
            "xi": self.xi,
            "exponent": self.exponent,
        }


@dataclass(frozen=True)
class XiReference:
    """ξ de Sb[1] frente a ⟨g⟩: polo exacto y las dos ramas límite."""

    alpha: float
    g_avg: float
    xi_exact: float
    xi_small_alpha: float
    xi_large_alpha: float
    branch: str  # "small_alpha" | "large_alpha"

    @property
    def xi_branch(self) -> float:
        return self.xi_small_alpha if self.branch == "small_alpha" else self.xi_large_alpha

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "g_avg": self.g_avg,
            "xi_exact": self.xi_exact,
            "xi_small_alpha": self.xi_small_alpha,
            "xi_large_alpha": self.xi_large_alpha,
            "branch": self.branch,
            "xi_branch": self.xi_branch,
        }
