from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

KELVIN_PER_EV = 11604.5

SCAN_COLUMNS = [
    "alpha", "JS",
    "J10_BB_a10", "J1_BB_a", "J1_BB_10a", "ln_abs_J1_BB_a",
    "ratio_r", "amplification",
    "J10_BB_a10_K", "J1_BB_a_K", "J1_BB_10a_K",
    "resolved_flag", "converged_flag",
]


@dataclass(frozen=True)
class ScanResult:
    """Barrido (α, JS): J^{[10]}_BB(a_10), J^{[1]}_BB(a), J^{[1]}_BB(10a) y sus cocientes por celda.

    ratio_r y amplification son NaN (nulos) donde algún acoplamiento queda bajo coupling_floor.
    """

    alpha_grid: List[float]
    JS_grid: List[float]
    cells: pd.DataFrame
    t_ev: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return self.cells.loc[:, SCAN_COLUMNS].reset_index(drop=True)

    def pivot(self, column: str = "ratio_r") -> pd.DataFrame:
        return self.cells.pivot(index="JS", columns="alpha", values=column)

    def grid_metadata(self) -> Dict[str, Any]:
        return {
            "alpha_grid": list(self.alpha_grid),
            "JS_grid": list(self.JS_grid),
            "t_ev": self.t_ev,
            "kelvin_per_ev": KELVIN_PER_EV,
        }
