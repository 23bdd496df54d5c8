import math
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np
import pandas as pd

from models.chain_spec import ChainSpec

QMETRIC_COLUMNS = ["row_type", "k", "g_over_a2", "n", "alpha", "g_avg_over_a2"]


@dataclass(frozen=True)
class QuantumMetricResult:
    """Métrica cuántica g(k) de la banda plana a JS = 0 y su promedio en la zona de Brillouin.

    g_samples y g_avg en unidades de a²; g_avg es el valor extrapolado (Richardson N, 2N).
    """

    spec: ChainSpec
    kmesh: np.ndarray
    g_samples: np.ndarray
    g_avg: float
    g_avg_coarse: float
    g_avg_fine: float
    error_estimate: float
    refined_intervals: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def g_avg_over_a2(self) -> float:
        return self.g_avg / self.spec.a ** 2

    @property
    def converged(self) -> bool:
        return self.error_estimate <= 0.01 * max(abs(self.g_avg), 1e-300) or self.error_estimate < 1e-12

    def to_frame(self) -> pd.DataFrame:
        a2 = self.spec.a ** 2
        samples = pd.DataFrame({
            "row_type": "sample",
            "k": self.kmesh,
            "g_over_a2": self.g_samples / a2,
            "n": math.nan,
            "alpha": math.nan,
            "g_avg_over_a2": math.nan,
        }, columns=QMETRIC_COLUMNS)
        summary = pd.DataFrame([{
            "row_type": "summary",
            "k": math.nan,
            "g_over_a2": math.nan,
            "n": self.spec.n,
            "alpha": self.spec.alpha if self.spec.alpha is not None else math.nan,
            "g_avg_over_a2": self.g_avg_over_a2,
        }], columns=QMETRIC_COLUMNS)
        return pd.concat([samples, summary], ignore_index=True)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_record(),
            "num_k": len(self.kmesh),
            "g_avg_over_a2": self.g_avg_over_a2,
            "g_avg_coarse_over_a2": self.g_avg_coarse / self.spec.a ** 2,
            "g_avg_fine_over_a2": self.g_avg_fine / self.spec.a ** 2,
            "error_estimate": self.error_estimate,
            "converged": self.converged,
            "refined_intervals": self.refined_intervals,
        }
