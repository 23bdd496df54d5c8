"""
Pool de trabajadores: mapa ordenado sobre tareas independientes (bloques de k, pares de bandas, celdas de barrido).

El número de trabajadores se toma solo de la variable de entorno FLATBAND_WORKERS (también desde .env).
La reducción siempre se hace en el orden de entrada, así el resultado no depende de la planificación.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv

from core.errors import ValidationError

logger = logging.getLogger(__name__)

WORKERS_ENV = "FLATBAND_WORKERS"

T = TypeVar("T")
R = TypeVar("R")

_dotenv_loaded = False


def resolve_workers(workers: Optional[int] = None) -> int:
    """Cantidad de trabajadores: argumento explícito, o FLATBAND_WORKERS, o 1."""
    global _dotenv_loaded
    if workers is not None:
        if workers < 1:
            raise ValidationError(f"workers debe ser >= 1, recibido: {workers}")
        return int(workers)
    if not _dotenv_loaded:
        load_dotenv()
        _dotenv_loaded = True
    raw = os.getenv(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} debe ser entero, recibido: {raw!r}")
    if value < 1:
        raise ValidationError(f"{WORKERS_ENV} debe ser >= 1, recibido: {value}")
    return value


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    items = list(items)
    workers = resolve_workers(workers)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("ordered_map: %d tareas con %d trabajadores", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
