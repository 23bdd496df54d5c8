"""
Jerarquía de errores del paquete.

ValidationError  → entradas inválidas (spec, par de subredes, config, figura desconocida).
NumericalError   → fallos numéricos (banda plana no encontrada, residuo imaginario,
                   sistema demasiado pequeño, puntos insuficientes para un ajuste).
"""


class FlatbandError(Exception):
    """Error base del paquete."""
    pass


class ValidationError(FlatbandError, ValueError):
    """Entrada inválida."""
    pass


class NumericalError(FlatbandError, RuntimeError):
    """Fallo numérico durante un cálculo."""
    pass
