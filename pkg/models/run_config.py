from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from models.chain_spec import ChainSpec
from models.coupling_table import ComputeConfig


@dataclass
class RunConfig:
    """Parámetros completos de una ejecución del CLI; se vuelcan al sidecar <out>.meta.json."""

    command: str
    out: str
    output_format: str = "csv"  # csv | json
    spec: Optional[ChainSpec] = None
    compute: ComputeConfig = field(default_factory=ComputeConfig)
    options: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "out": self.out,
            "format": self.output_format,
            "spec": self.spec.to_record() if self.spec is not None else None,
            "compute": self.compute.to_dict(),
            "options": self.options,
        }
