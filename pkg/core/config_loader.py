"""
Config loader: carga configuración YAML que define la cadena, los parámetros numéricos y la ejecución.

Formato del config YAML (todas las secciones son opcionales; los valores del archivo pisan los flags):
  chain:
    family: Stub
    n: 1
    alpha: 0.3
    t: 1.0
    JS: 0.1
    a: 1.0
  compute:
    num_k: 1024
    eta: 1.0e-6
    degenerate_eps: 1.0e-10
    coupling_floor: 1.0e-14
    convergence_tol: 5.0e-3
  run:
    pair: BB
    rmax: 40
    format: csv
    alpha_grid: [0.1, 0.3, 1.0]
    JS_grid: [0.05, 0.1, 0.5]
    n_list: [1, 2, 4]
    t_ev: 1.0
  disabled_checks:
    - ORACLE_EQUIVALENCE
  severity_overrides:
    SUM_RULE: HIGH
"""

import logging
from typing import Any, Dict, Optional

import yaml

from core.errors import ValidationError
from models.chain_spec import ChainSpec, Family
from models.coupling_table import ComputeConfig, parse_pair

logger = logging.getLogger(__name__)

VALID_SEVERITIES = {"CRITICAL", "HIGH", "MEDIUM", "LOW", "INFO", "PASS"}
VALID_FORMATS = {"csv", "json"}

CHAIN_KEYS = {"family", "n", "alpha", "t", "JS", "a"}
COMPUTE_KEYS = {"num_k", "eta", "degenerate_eps", "coupling_floor", "convergence_tol"}
RUN_KEYS = {"pair", "rmax", "format", "out", "alpha_grid", "JS_grid", "n_list", "t_ev", "model"}


class ConfigValidationError(ValidationError):
    """Error de validación de configuración YAML."""
    pass


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_section(config: Dict[str, Any], name: str, allowed: set, errors: list) -> Dict[str, Any]:
    section = config.get(name)
    if section is None:
        return {}
    if not isinstance(section, dict):
        errors.append(f"'{name}' debe ser un dict, recibido: {type(section).__name__}")
        return {}
    unknown = set(section) - allowed
    if unknown:
        errors.append(f"{name}: claves desconocidas {sorted(unknown)} (válidas: {sorted(allowed)})")
    return section


def _validate_config(config: Dict[str, Any]) -> None:
    """Valida la estructura y tipos del config YAML. Lanza ConfigValidationError si hay problemas."""
    errors = []

    # ── chain ──
    chain = _check_section(config, "chain", CHAIN_KEYS, errors)
    if "family" in chain:
        try:
            Family.parse(chain["family"])
        except ValidationError as e:
            errors.append(f"chain.family: {e}")
    if "n" in chain and (not isinstance(chain["n"], int) or isinstance(chain["n"], bool) or chain["n"] < 1):
        errors.append(f"chain.n debe ser entero >= 1, recibido: {chain['n']!r}")
    for key in ("alpha", "t", "JS", "a"):
        if key in chain and chain[key] is not None and not _is_number(chain[key]):
            errors.append(f"chain.{key}: valor debe ser numérico, recibido: {type(chain[key]).__name__}")
    for key in ("t", "a"):
        if _is_number(chain.get(key)) and chain[key] <= 0:
            errors.append(f"chain.{key} debe ser > 0, recibido: {chain[key]}")

    # ── compute ──
    compute = _check_section(config, "compute", COMPUTE_KEYS, errors)
    if "num_k" in compute:
        num_k = compute["num_k"]
        if not isinstance(num_k, int) or isinstance(num_k, bool) or num_k < 4 or num_k % 2:
            errors.append(f"compute.num_k debe ser entero par >= 4, recibido: {num_k!r}")
    for key in ("eta", "degenerate_eps", "coupling_floor", "convergence_tol"):
        if key in compute:
            if not _is_number(compute[key]):
                errors.append(f"compute.{key}: valor debe ser numérico, recibido: {type(compute[key]).__name__}")
            elif compute[key] <= 0:
                errors.append(f"compute.{key} debe ser > 0, recibido: {compute[key]}")
    if _is_number(compute.get("degenerate_eps")) and not 1e-12 <= compute["degenerate_eps"] <= 1e-6:
        errors.append(f"compute.degenerate_eps debe estar en [1e-12, 1e-6], recibido: {compute['degenerate_eps']}")

    # ── run ──
    run = _check_section(config, "run", RUN_KEYS, errors)
    if "pair" in run:
        try:
            parse_pair(run["pair"])
        except ValidationError as e:
            errors.append(f"run.pair: {e}")
    if "rmax" in run and (not _is_number(run["rmax"]) or run["rmax"] <= 0):
        errors.append(f"run.rmax debe ser numérico > 0, recibido: {run['rmax']!r}")
    if "format" in run and str(run["format"]).lower() not in VALID_FORMATS:
        errors.append(f"run.format: '{run['format']}' inválido (válidos: {sorted(VALID_FORMATS)})")
    for key in ("alpha_grid", "JS_grid"):
        if key in run:
            grid = run[key]
            if not isinstance(grid, list) or not grid or not all(_is_number(v) for v in grid):
                errors.append(f"run.{key} debe ser una lista no vacía de números")
            elif any(not 0 < v <= 2 for v in grid):
                errors.append(f"run.{key}: valores fuera de (0, 2]")
    if "n_list" in run:
        n_list = run["n_list"]
        if not isinstance(n_list, list) or not all(isinstance(v, int) and v >= 1 for v in n_list):
            errors.append("run.n_list debe ser una lista de enteros >= 1")
        elif n_list != sorted(n_list):
            errors.append("run.n_list debe ser ascendente")
    if "t_ev" in run and run["t_ev"] is not None and (not _is_number(run["t_ev"]) or run["t_ev"] <= 0):
        errors.append(f"run.t_ev debe ser numérico > 0, recibido: {run['t_ev']!r}")

    # ── disabled_checks ──
    disabled = config.get("disabled_checks")
    if disabled is not None:
        if not isinstance(disabled, list):
            errors.append(f"'disabled_checks' debe ser una lista, recibido: {type(disabled).__name__}")
        else:
            for item in disabled:
                if not isinstance(item, str):
                    errors.append(f"disabled_checks contiene valor no-string: {item!r}")

    # ── severity_overrides ──
    overrides = config.get("severity_overrides")
    if overrides is not None:
        if not isinstance(overrides, dict):
            errors.append(f"'severity_overrides' debe ser un dict, recibido: {type(overrides).__name__}")
        else:
            for check_id, sev in overrides.items():
                if not isinstance(sev, str) or sev not in VALID_SEVERITIES:
                    errors.append(
                        f"severity_overrides.{check_id}: '{sev}' no es severidad válida (válidas: {VALID_SEVERITIES})"
                    )

    unknown = set(config) - {"chain", "compute", "run", "disabled_checks", "severity_overrides"}
    if unknown:
        errors.append(f"Secciones desconocidas: {sorted(unknown)}")

    if errors:
        msg = "Errores de validación en configuración YAML:\n  - " + "\n  - ".join(errors)
        raise ConfigValidationError(msg)


class ConfigLoader:
    """Carga y aplica configuración desde YAML."""

    @staticmethod
    def load(config_path: str) -> Dict[str, Any]:
        """Carga un archivo YAML de configuración con validación."""
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigValidationError(f"No se pudo leer el archivo de configuración {config_path}: {e}")
        except yaml.YAMLError as e:
            raise ConfigValidationError(f"YAML mal formado en {config_path}: {e}")

        if not isinstance(config, dict):
            raise ConfigValidationError(
                f"El archivo de configuración debe contener un dict YAML, recibido: {type(config).__name__}"
            )

        _validate_config(config)
        logger.info("Configuración cargada y validada: %s", config_path)

        return {
            "chain": dict(config.get("chain") or {}),
            "compute": dict(config.get("compute") or {}),
            "run": dict(config.get("run") or {}),
            "disabled_checks": set(config.get("disabled_checks", [])),
            "severity_overrides": config.get("severity_overrides", {}),
        }

    @staticmethod
    def default_config() -> Dict[str, Any]:
        return {
            "chain": {},
            "compute": {},
            "run": {},
            "disabled_checks": set(),
            "severity_overrides": {},
        }

    @staticmethod
    def chain_spec(config: Optional[Dict], flags: Dict[str, Any]) -> ChainSpec:
        """ChainSpec a partir de los flags, con la sección chain del archivo por encima."""
        record = {k: v for k, v in flags.items() if v is not None}
        if config is not None:
            record.update({k: v for k, v in config.get("chain", {}).items() if v is not None})
        return ChainSpec.from_record(record)

    @staticmethod
    def compute_config(config: Optional[Dict], flags: Dict[str, Any]) -> ComputeConfig:
        values = {k: v for k, v in flags.items() if v is not None}
        if config is not None:
            values.update(config.get("compute", {}))
        return ComputeConfig(**values)

    @staticmethod
    def run_option(config: Optional[Dict], key: str, flag_value: Any) -> Any:
        if config is not None and config.get("run", {}).get(key) is not None:
            return config["run"][key]
        return flag_value

    @staticmethod
    def is_check_enabled(config: Optional[Dict], check_id: str) -> bool:
        if config is None:
            return True
        return check_id not in config.get("disabled_checks", set())

    @staticmethod
    def get_severity_override(config: Optional[Dict], check_id: str) -> Optional[str]:
        if config is None:
            return None
        return config.get("severity_overrides", {}).get(check_id)
