"""Capas de cálculo: red, espectro, acoplamientos, métrica cuántica, asintóticas y análisis."""
