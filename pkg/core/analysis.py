"""
Capa 6: Análisis de curvas J(R).

- Ajustes de decaimiento por mínimos cuadrados lineales en espacio logarítmico (statsmodels OLS):
    Exponential       log|J|      = log A − R/ξ
    PowerLaw          log|J|      = log C − p·log R
    ExponentialSqrtR  log(|J|√R)  = log A − R/ξ
- Estudio ξ frente a ⟨g⟩ en Sb[n] y detección de n_c (cruce de la pendiente local por 5/12).
- Barrido (α, JS) de la amplificación J^{[10]}_BB(a_10) frente a Sb[1].
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
import statsmodels.api as sm

from core.couplings import converge_coupling, coupling_curve
from core.errors import FlatbandError, NumericalError, ValidationError
from core.parallel import ordered_map
from core.qmetric import quantum_metric
from models.chain_spec import ChainSpec, Family, Sublattice
from models.coupling_table import ComputeConfig, CouplingTable
from models.fit_result import NEAREST_NEIGHBOUR_COLUMNS, XI_VS_G_COLUMNS, FitModel, FitResult, NcEstimate
from models.scan_result import KELVIN_PER_EV, ScanResult

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 5
ACCEPT_R_SQUARED = 0.999
WINDOW_START_CELLS = 3
FLOOR_MARGIN = 10.0
MONOTONE_RTOL = 1e-6
NC_THRESHOLD = 5.0 / 12.0
XI_STUDY_CELLS = 12


# ── Ajustes ──

def fit_window(table: CouplingTable, r_min: Optional[float] = None, r_max: Optional[float] = None) -> np.ndarray:
    """Máscara de puntos usables: R ≥ 3·a_n, convergidos y con |J| ≥ 10·coupling_floor."""
    R = np.asarray(table.distances, dtype=float)
    J = np.asarray(table.values, dtype=float)
    lower = WINDOW_START_CELLS * table.spec.n if r_min is None else r_min
    mask = (R >= lower - 1e-12) & np.asarray(table.converged, dtype=bool)
    mask &= np.abs(J) >= FLOOR_MARGIN * table.coupling_floor
    if r_max is not None:
        mask &= R <= r_max + 1e-12
    return mask


def _log_space(model: FitModel, R: np.ndarray, absJ: np.ndarray):
    if model is FitModel.POWER_LAW:
        return np.log(R), np.log(absJ)
    if model is FitModel.EXPONENTIAL_SQRT_R:
        return R, np.log(absJ * np.sqrt(R))
    return R, np.log(absJ)


def fit_decay(table: CouplingTable, model=FitModel.EXPONENTIAL, r_min: Optional[float] = None,
              r_max: Optional[float] = None) -> FitResult:
    """Ajuste log-lineal de |J(R)| en la ventana de fit_window.

    En el régimen dispersivo de Sb[1] el modelo Exponential sobre R ∈ [15a, 40a] reproduce ξ = √2a/(3α)
    (≈2.5 % por debajo para α = 0.1, JS = 1). ExponentialSqrtR sobrestima ξ en esa ventana (≈7 %); su
    corrección √R solo domina con r_min bastante mayor que ξ.
    """
    model = FitModel.parse(model)
    mask = fit_window(table, r_min, r_max)
    R = np.asarray(table.distances, dtype=float)[mask]
    J = np.asarray(table.values, dtype=float)[mask]
    if len(R) < MIN_FIT_POINTS:
        raise NumericalError(
            f"Puntos insuficientes para el ajuste {model.value}: {len(R)} < {MIN_FIT_POINTS}"
        )
    if model is not FitModel.EXPONENTIAL and np.any(R <= 0):
        raise ValidationError(f"El modelo {model.value} requiere R > 0 en la ventana")

    signs = np.sign(J)
    if not np.all(signs == signs[0]):
        raise NumericalError("Signo de J no uniforme dentro de la ventana de ajuste")
    order = np.argsort(R, kind="mergesort")
    R, absJ = R[order], np.abs(J[order])
    increases = np.diff(absJ) > MONOTONE_RTOL * absJ[:-1]
    if increases.any():
        first = int(np.argmax(increases))
        raise NumericalError(f"|J| no es monótono en la ventana (crece entre R={R[first]:g} y R={R[first + 1]:g})")

    x, y = _log_space(model, R, absJ)
    if np.ptp(y) == 0.0:
        slope, intercept = 0.0, float(y[0])
        se_slope, se_intercept, r_squared, resid = 0.0, 0.0, 1.0, 0.0
    else:
        ols = sm.OLS(y, sm.add_constant(x)).fit()
        intercept, slope = (float(v) for v in ols.params)
        se_intercept, se_slope = (float(v) for v in ols.bse)
        r_squared = float(ols.rsquared)
        resid = float(math.sqrt(ols.ssr))

    amplitude = math.exp(intercept)
    if model is FitModel.POWER_LAW:
        parameters = {"C": amplitude, "p": -slope}
        stderr = {"C": amplitude * se_intercept, "p": se_slope}
    else:
        if slope >= -1e-14:
            xi, xi_err = math.inf, math.inf
        else:
            xi, xi_err = -1.0 / slope, se_slope / slope ** 2
        parameters = {"A": amplitude, "xi": xi}
        stderr = {"A": amplitude * se_intercept, "xi": xi_err}

    accepted = r_squared >= ACCEPT_R_SQUARED
    if not accepted:
        logger.warning("Ajuste %s rechazado: R² = %.6f < %.3f", model.value, r_squared, ACCEPT_R_SQUARED)
    return FitResult(
        model=model,
        parameters=parameters,
        stderr=stderr,
        window=[float(R[0]), float(R[-1])],
        r_squared=r_squared,
        residual_norm=resid,
        points_used=int(len(R)),
        sign=int(signs[0]) if signs[0] != 0 else -1,
        accepted=accepted,
        metadata={"family": table.spec.family.value, "n": table.spec.n, "source": table.source},
    )


# ── ξ frente a ⟨g⟩ ──

def xi_vs_g_study(alpha: float, n_list: Sequence[int], JS: float, config: ComputeConfig = ComputeConfig(),
                  family=Family.STUB, qmetric_num_k: int = 512, r_max_cells: int = XI_STUDY_CELLS,
                  workers: Optional[int] = None) -> pd.DataFrame:
    """Por cada n: ⟨g⟩ (JS = 0), ξ_n del ajuste exponencial de J_BB y la pendiente local d ln ξ/d ln ⟨g⟩."""
    family = Family.parse(family)
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise ValidationError(f"n_list debe ser ascendente, recibido: {n_list}")

    rows = []
    for n in n_list:
        spec = ChainSpec(family=family, n=n, alpha=alpha if family is Family.STUB else None, JS=JS)
        row = {"n": n, "g_avg": math.nan, "xi": math.nan, "xi_stderr": math.nan, "amplitude": math.nan,
               "r_squared": math.nan, "fit_ok": False, "error": ""}
        try:
            row["g_avg"] = quantum_metric(spec, qmetric_num_k, workers=workers).g_avg
            table = coupling_curve(spec, (Sublattice.B, Sublattice.B), r_max_cells * spec.cell_size / spec.a,
                                   config, workers=workers)
            fit = fit_decay(table, FitModel.EXPONENTIAL)
            row.update(xi=fit.parameters["xi"], xi_stderr=fit.stderr["xi"], amplitude=fit.parameters["A"],
                       r_squared=fit.r_squared, fit_ok=fit.accepted)
        except FlatbandError as e:
            logger.warning("xi_vs_g_study: %s falló: %s", spec.label, e)
            row["error"] = str(e)
        rows.append(row)
        logger.info("%s: ⟨g⟩ = %.6g, ξ = %.6g", spec.label, row["g_avg"], row["xi"])

    frame = pd.DataFrame(rows)
    log_g = np.log(frame["g_avg"].astype(float).where(frame["g_avg"] > 0))
    log_xi = np.log(frame["xi"].astype(float).where(frame["xi"] > 0))
    frame["local_slope"] = log_xi.diff() / log_g.diff()
    return frame.loc[:, XI_VS_G_COLUMNS]


def detect_nc(study: pd.DataFrame, threshold: float = NC_THRESHOLD) -> NcEstimate:
    """n_c: extremo izquierdo del primer intervalo con pendiente ≥ 5/12 tras uno con pendiente < 5/12.

    Si no hay cruce, `reason` indica qué régimen falta y slope_min/slope_max el rango observado.
    """
    n_values = study["n"].tolist()
    slopes = study["local_slope"].tolist()
    finite = [s for s in slopes[1:] if s is not None and np.isfinite(s)]
    slope_min = float(min(finite)) if finite else None
    slope_max = float(max(finite)) if finite else None

    seen_low = False
    for i in range(1, len(n_values)):
        slope = slopes[i]
        if slope is None or not np.isfinite(slope):
            continue
        if slope < threshold:
            seen_low = True
        elif seen_low:
            return NcEstimate(n_c=int(n_values[i - 1]), uncertainty=int(n_values[i] - n_values[i - 1]),
                              defined=True, threshold=threshold,
                              reason=f"pendiente cruza {threshold:.4g} entre n={n_values[i - 1]} y n={n_values[i]}",
                              slope_min=slope_min, slope_max=slope_max)

    if not finite:
        reason = "sin pendientes locales finitas"
    elif slope_max < threshold:
        reason = (f"todas las pendientes < {threshold:.4g} (rango [{slope_min:.3g}, {slope_max:.3g}] "
                  f"hasta n={n_values[-1]}): sin régimen ⟨g⟩^(1/2)")
    else:
        reason = f"sin pendiente < {threshold:.4g} previa a una ≥ {threshold:.4g} (rango [{slope_min:.3g}, {slope_max:.3g}])"
    logger.warning("n_c indefinido: %s", reason)
    return NcEstimate(n_c=None, uncertainty=None, defined=False, threshold=threshold, reason=reason,
                      slope_min=slope_min, slope_max=slope_max)


# ── Series y barridos ──

def nearest_neighbour_series(alpha: float, JS: float, n_list: Sequence[int],
                             config: ComputeConfig = ComputeConfig(), workers: Optional[int] = None) -> pd.DataFrame:
    """|J^{[n]}_BB(a_n)| frente a n."""
    rows = []
    for n in n_list:
        spec = ChainSpec(family=Family.STUB, n=n, alpha=alpha, JS=JS)
        values, converged, _, _ = converge_coupling(spec, (Sublattice.B, Sublattice.B), [float(n)], config, workers)
        rows.append({"n": n, "R_over_a": float(n), "J_over_t": float(values[0]),
                     "abs_J_over_t": abs(float(values[0])), "converged_flag": bool(converged[0])})
    return pd.DataFrame(rows, columns=NEAREST_NEIGHBOUR_COLUMNS)


def _check_grid(name: str, grid: Sequence[float]) -> List[float]:
    grid = [float(v) for v in grid]
    if not grid:
        raise ValidationError(f"{name} vacío")
    bad = [v for v in grid if not 0 < v <= 2]
    if bad:
        raise ValidationError(f"{name} fuera de (0, 2]: {bad}")
    return grid


def _scan_cell(alpha: float, JS: float, config: ComputeConfig, t_ev: Optional[float]) -> dict:
    bb = (Sublattice.B, Sublattice.B)
    floor = config.coupling_floor
    spec10 = ChainSpec(family=Family.STUB, n=10, alpha=alpha, JS=JS)
    spec1 = ChainSpec(family=Family.STUB, n=1, alpha=alpha, JS=JS)
    j10, conv10, _, _ = converge_coupling(spec10, bb, [10.0], config, workers=1)
    j1, conv1, _, _ = converge_coupling(spec1, bb, [1.0, 10.0], config, workers=1)
    J10, J1a, J1_10a = float(j10[0]), float(j1[0]), float(j1[1])

    ok10, ok1a, ok1_10a = abs(J10) >= floor, abs(J1a) >= floor, abs(J1_10a) >= floor
    kelvin = (lambda J: J * t_ev * KELVIN_PER_EV) if t_ev else (lambda J: math.nan)
    return {
        "alpha": alpha,
        "JS": JS,
        "J10_BB_a10": J10,
        "J1_BB_a": J1a,
        "J1_BB_10a": J1_10a,
        "ln_abs_J1_BB_a": math.log(abs(J1a)) if ok1a else math.nan,
        "ratio_r": J10 / J1a if ok10 and ok1a else math.nan,
        "amplification": abs(J10) / abs(J1_10a) if ok10 and ok1_10a else math.nan,
        "J10_BB_a10_K": kelvin(J10),
        "J1_BB_a_K": kelvin(J1a),
        "J1_BB_10a_K": kelvin(J1_10a),
        "resolved_flag": bool(ok10 and ok1a and ok1_10a),
        "converged_flag": bool(conv10.all() and conv1.all()),
    }


def amplification_scan(alpha_grid: Sequence[float], JS_grid: Sequence[float],
                       config: ComputeConfig = ComputeConfig(), t_ev: Optional[float] = None,
                       workers: Optional[int] = None) -> ScanResult:
    """Barrido (α, JS): cada celda es independiente; el ensamblado sigue el orden (α, JS) de las grillas."""
    alpha_grid = _check_grid("alpha_grid", alpha_grid)
    JS_grid = _check_grid("JS_grid", JS_grid)
    if t_ev is not None and not t_ev > 0:
        raise ValidationError(f"t_ev debe ser > 0, recibido: {t_ev}")

    cells = [(alpha, JS) for alpha in alpha_grid for JS in JS_grid]
    logger.info("Barrido de amplificación: %d celdas", len(cells))
    rows = ordered_map(lambda cell: _scan_cell(cell[0], cell[1], config, t_ev), cells, workers)
    frame = pd.DataFrame(rows)

    unresolved = int((~frame["resolved_flag"]).sum())
    if unresolved:
        logger.warning("%d celdas con acoplamientos bajo coupling_floor: cociente nulo", unresolved)
    return ScanResult(
        alpha_grid=alpha_grid,
        JS_grid=JS_grid,
        cells=frame,
        t_ev=t_ev,
        metadata={"num_k": config.num_k, "num_k_reported": 2 * config.num_k},
    )
