import logging
from typing import Dict, List, Optional

from core.check_registry import CheckRegistry
from core.config_loader import ConfigLoader
from models.chain_spec import ChainSpec
from models.check_result import CheckResult
from models.coupling_table import ComputeConfig

logger = logging.getLogger(__name__)


class CheckEngine:
    """Ejecuta todos los checks aplicables a una cadena de forma segura."""

    def __init__(self, config: Optional[Dict] = None):
        self.registry = CheckRegistry()
        self.config = config
        if config is not None:
            self.registry.validate_ids(config.get("disabled_checks", set()))

    def run_all(self, spec: ChainSpec, compute: ComputeConfig = ComputeConfig()) -> List[CheckResult]:
        """Ejecuta los checks registrados para la familia de `spec`, en orden de registro."""
        results = []
        # Bandas y curvas compartidas entre checks
        metadata: Dict = {}

        for check_def in self.registry.get_checks_for_family(spec.family):
            check_id = check_def["check_id"]
            func = check_def["function"]

            if not ConfigLoader.is_check_enabled(self.config, check_id):
                logger.info("Check %s deshabilitado por config", check_id)
                continue

            result = self._safe_execute(func, spec, compute, metadata, check_id)

            if result and not result.passed:
                override = ConfigLoader.get_severity_override(self.config, check_id)
                if override:
                    result.severity = override

            logger.debug("%s: %s (%s)", check_id, "ok" if result.passed else "FALLA", result.message)
            results.append(result)

        return results

    def _safe_execute(self, func, spec: ChainSpec, compute: ComputeConfig, metadata: dict,
                      check_id: str) -> CheckResult:
        """Ejecuta un check dentro de try/except. Errores generan INFO, nunca crash."""
        try:
            return func(spec, compute, metadata)
        except Exception as e:
            logger.warning("Check %s falló en %s: %s: %s",
                           check_id, spec.description, type(e).__name__, str(e)[:200])
            return CheckResult(
                check_id=check_id,
                target=spec.description,
                passed=True,
                severity="INFO",
                value=0.0,
                threshold=0.0,
                message=f"Error al ejecutar check: {type(e).__name__}: {str(e)[:200]}",
                metadata={"error": True, "error_type": type(e).__name__},
            )
