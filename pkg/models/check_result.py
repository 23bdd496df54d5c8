from dataclasses import dataclass, field
from typing import Any, Dict

CHECK_COLUMNS = ["check_id", "target", "passed", "severity", "value", "threshold", "message"]


@dataclass
class CheckResult:
    check_id: str
    target: str  # etiqueta de la cadena, p.ej. "Sb[1] alpha=0.3 JS=0.1"
    passed: bool
    severity: str  # CRITICAL | HIGH | MEDIUM | LOW | INFO | PASS
    value: float
    threshold: float
    message: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check_id": self.check_id,
            "target": self.target,
            "passed": self.passed,
            "severity": self.severity,
            "value": self.value,
            "threshold": self.threshold,
            "message": self.message,
            "metadata": self.metadata,
        }
