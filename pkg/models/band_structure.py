from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.chain_spec import ChainSpec, Orbital, SpinSector

BAND_COLUMNS = ["k", "band_index", "sector", "energy"]
CLS_COLUMNS = ["sublattice", "cell", "slot", "position_over_a", "amplitude"]


@dataclass(frozen=True)
class BandStructure:
    """Autovalores y autovectores de un sector de espín sobre la malla k.

    energies[l, j] es la banda l en k_j (orden ascendente en cada k);
    states[j, :, l] es el autovector correspondiente en el gauge periódico.
    """

    spec: ChainSpec
    sector: SpinSector
    kmesh: np.ndarray
    energies: np.ndarray
    states: np.ndarray
    flat_band: int

    @property
    def num_k(self) -> int:
        return len(self.kmesh)

    @property
    def num_bands(self) -> int:
        return self.energies.shape[0]

    @property
    def flat_band_energy(self) -> float:
        return self.sector.z_sigma * self.spec.JS / 2.0

    def flat_band_deviation(self) -> float:
        return float(np.max(np.abs(self.energies[self.flat_band] - self.flat_band_energy)))

    def to_frame(self) -> pd.DataFrame:
        num_bands, num_k = self.energies.shape
        return pd.DataFrame({
            "k": np.tile(self.kmesh, num_bands),
            "band_index": np.repeat(np.arange(num_bands), num_k),
            "sector": self.sector.value,
            "energy": self.energies.reshape(-1),
        }, columns=BAND_COLUMNS)


@dataclass(frozen=True)
class CLSVector:
    spec: ChainSpec
    orbitals: List[Orbital]
    amplitudes: np.ndarray
    normalization: float
    residual: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "sublattice": [o.sublattice.value for o in self.orbitals],
            "cell": [o.cell for o in self.orbitals],
            "slot": [o.slot for o in self.orbitals],
            "position_over_a": [o.absolute_position(self.spec.n) for o in self.orbitals],
            "amplitude": self.amplitudes,
        }, columns=CLS_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_record(),
            "normalization": self.normalization,
            "residual": self.residual,
            "support_size": len(self.orbitals),
            "amplitudes": self.to_frame().to_dict(orient="records"),
        }


@dataclass(frozen=True)
class GapResult:
    delta: float
    gapless: bool
    method: str  # "closed_form+numerical" | "numerical"
    closed_form: Optional[float] = None
    numerical: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "gapless": self.gapless,
            "method": self.method,
            "closed_form": self.closed_form,
            "numerical": self.numerical,
            "metadata": self.metadata,
        }
