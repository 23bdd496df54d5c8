import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from core.errors import ValidationError
from models.chain_spec import ChainSpec, Sublattice

Pair = Tuple[Sublattice, Sublattice]

COUPLING_COLUMNS = ["family", "n", "alpha", "JS", "pair", "R_over_a", "J_over_t", "converged_flag"]
CONTRIBUTION_COLUMNS = ["R_over_a", "p", "q", "I_pq"]


def parse_pair(value: Any) -> Pair:
    """'BC' | ('B', 'C') | (Sublattice.B, Sublattice.C) → (Sublattice.B, Sublattice.C)."""
    if isinstance(value, str):
        items = list(value.strip().upper())
    else:
        items = list(value)
    if len(items) != 2:
        raise ValidationError(f"Par de subredes inválido: {value!r}")
    pair = []
    for item in items:
        try:
            sub = item if isinstance(item, Sublattice) else Sublattice(str(item).upper())
        except ValueError:
            raise ValidationError(f"Subred desconocida en el par {value!r}: {item!r}")
        if not sub.magnetic:
            raise ValidationError(f"El par {value!r} incluye la subred A, que no es magnética")
        pair.append(sub)
    return pair[0], pair[1]


def pair_label(pair: Pair) -> str:
    return pair[0].value + pair[1].value


@dataclass(frozen=True)
class ComputeConfig:
    num_k: int = 512
    mu: float = 0.0
    temperature: float = 0.0
    eta: float = 1e-6
    degenerate_eps: float = 1e-10
    coupling_floor: float = 1e-14
    convergence_tol: float = 5e-3

    def __post_init__(self):
        errors = []
        if isinstance(self.num_k, bool) or not isinstance(self.num_k, numbers.Integral) or self.num_k < 4 or self.num_k % 2:
            errors.append(f"num_k debe ser entero par >= 4, recibido: {self.num_k!r}")
        if self.mu != 0.0:
            errors.append("solo se admite semillenado (mu = 0)")
        if self.temperature != 0.0:
            errors.append("solo se admite temperatura cero")
        if not self.eta > 0:
            errors.append(f"eta debe ser > 0, recibido: {self.eta}")
        if not 1e-12 <= self.degenerate_eps <= 1e-6:
            errors.append(f"degenerate_eps debe estar en [1e-12, 1e-6], recibido: {self.degenerate_eps}")
        if not self.coupling_floor > 0:
            errors.append(f"coupling_floor debe ser > 0, recibido: {self.coupling_floor}")
        if not 0 < self.convergence_tol < 1:
            errors.append(f"convergence_tol debe estar en (0, 1), recibido: {self.convergence_tol}")
        if errors:
            raise ValidationError("ComputeConfig inválido:\n  - " + "\n  - ".join(errors))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_k": self.num_k,
            "mu": self.mu,
            "temperature": self.temperature,
            "eta": self.eta,
            "degenerate_eps": self.degenerate_eps,
            "coupling_floor": self.coupling_floor,
            "convergence_tol": self.convergence_tol,
        }


@dataclass(frozen=True)
class CouplingResult:
    """J(R) de un par y su descomposición I^{pq} en pares de bandas (p en ↑, q en ↓)."""

    J: float
    R: float
    contributions: Dict[Tuple[int, int], float]
    excluded_pairs: int = 0
    imag_residual: float = 0.0
    num_k: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "J": self.J,
            "R": self.R,
            "contributions": {f"{p},{q}": v for (p, q), v in sorted(self.contributions.items())},
            "excluded_pairs": self.excluded_pairs,
            "imag_residual": self.imag_residual,
            "num_k": self.num_k,
        }


@dataclass(frozen=True)
class CouplingTable:
    spec: ChainSpec
    pair: Pair
    distances: np.ndarray  # unidades de a
    values: np.ndarray  # unidades de t
    converged: np.ndarray
    coupling_floor: float = 1e-14
    contributions: Optional[Dict[Tuple[int, int], np.ndarray]] = None
    source: str = "band_sum"
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def resolved(self) -> np.ndarray:
        return np.abs(self.values) >= self.coupling_floor

    def __len__(self) -> int:
        return len(self.distances)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "family": self.spec.family.value,
            "n": self.spec.n,
            "alpha": self.spec.alpha if self.spec.alpha is not None else math.nan,
            "JS": self.spec.JS,
            "pair": pair_label(self.pair),
            "R_over_a": np.asarray(self.distances, dtype=float),
            "J_over_t": np.asarray(self.values, dtype=float),
            "converged_flag": np.asarray(self.converged, dtype=bool),
        }, columns=COUPLING_COLUMNS)

    def contributions_frame(self) -> pd.DataFrame:
        if not self.contributions:
            return pd.DataFrame(columns=CONTRIBUTION_COLUMNS)
        rows = []
        for (p, q), values in sorted(self.contributions.items()):
            for R, value in zip(self.distances, values):
                rows.append({"R_over_a": float(R), "p": p, "q": q, "I_pq": float(value)})
        frame = pd.DataFrame(rows, columns=CONTRIBUTION_COLUMNS)
        return frame.sort_values(["R_over_a", "p", "q"], kind="mergesort").reset_index(drop=True)
