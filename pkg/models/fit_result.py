import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from core.errors import ValidationError

XI_VS_G_COLUMNS = ["n", "g_avg", "xi", "xi_stderr", "amplitude", "r_squared", "local_slope", "fit_ok", "error"]
NEAREST_NEIGHBOUR_COLUMNS = ["n", "R_over_a", "J_over_t", "abs_J_over_t", "converged_flag"]


class FitModel(Enum):
    EXPONENTIAL = "Exponential"  # A·e^{-R/ξ}
    POWER_LAW = "PowerLaw"  # C/R^p
    EXPONENTIAL_SQRT_R = "ExponentialSqrtR"  # A·e^{-R/ξ}/√R

    @classmethod
    def parse(cls, value: Any) -> "FitModel":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value.lower() == text:
                return member
        raise ValidationError(f"Modelo de ajuste desconocido: {value!r} (válidos: {[m.value for m in cls]})")


def _json_float(value: float) -> Any:
    if value is None:
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return None
    return value


@dataclass(frozen=True)
class FitResult:
    """Ajuste lineal en espacio logarítmico.

    parameters: Exponential/ExponentialSqrtR → {"A", "xi"}; PowerLaw → {"C", "p"}.
    sign: signo común de J en la ventana (−1 ferromagnético).
    """

    model: FitModel
    parameters: Dict[str, float]
    stderr: Dict[str, float]
    window: List[float]
    r_squared: float
    residual_norm: float
    points_used: int
    sign: int = -1
    accepted: bool = True
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def xi(self) -> float:
        return self.parameters.get("xi", math.nan)

    def predict(self, R):
        R = np.asarray(R, dtype=float)
        if self.model is FitModel.POWER_LAW:
            magnitude = self.parameters["C"] / R ** self.parameters["p"]
        else:
            xi = self.parameters["xi"]
            decay = np.ones_like(R) if math.isinf(xi) else np.exp(-R / xi)
            magnitude = self.parameters["A"] * decay
            if self.model is FitModel.EXPONENTIAL_SQRT_R:
                magnitude = magnitude / np.sqrt(R)
        return self.sign * magnitude

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.value,
            "parameters": {k: _json_float(v) for k, v in self.parameters.items()},
            "stderr": {k: _json_float(v) for k, v in self.stderr.items()},
            "window": [float(self.window[0]), float(self.window[1])],
            "r_squared": _json_float(self.r_squared),
            "residual_norm": _json_float(self.residual_norm),
            "points_used": self.points_used,
            "sign": self.sign,
            "accepted": self.accepted,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FitResult":
        def _parse(value):
            if value is None:
                return math.nan
            return float(value)

        return cls(
            model=FitModel.parse(data["model"]),
            parameters={k: _parse(v) for k, v in data["parameters"].items()},
            stderr={k: _parse(v) for k, v in data["stderr"].items()},
            window=[float(v) for v in data["window"]],
            r_squared=_parse(data["r_squared"]),
            residual_norm=_parse(data["residual_norm"]),
            points_used=int(data["points_used"]),
            sign=int(data.get("sign", -1)),
            accepted=bool(data.get("accepted", True)),
            metadata=data.get("metadata", {}),
        )


@dataclass(frozen=True)
class NcEstimate:
    """Índice de dilución n_c donde la pendiente local de ln ξ frente a ln ⟨g⟩ cruza el umbral."""

    n_c: Optional[int]
    uncertainty: Optional[int]
    defined: bool
    threshold: float
    reason: str = ""
    slope_min: Optional[float] = None
    slope_max: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_c": self.n_c,
            "uncertainty": self.uncertainty,
            "defined": self.defined,
            "threshold": self.threshold,
            "reason": self.reason,
            "slope_min": self.slope_min,
            "slope_max": self.slope_max,
        }
