"""Tests para core/figure_registry.py"""

import pytest

from core.errors import ValidationError
from core.figure_registry import FigureRegistry
from models.coupling_table import ComputeConfig

TINY = ComputeConfig(num_k=16)


def test_tags():
    assert FigureRegistry().tags() == ["fig2", "fig3a", "fig3b", "fig4", "fig5"]


def test_unknown_tag():
    with pytest.raises(ValidationError):
        FigureRegistry().get("fig9")


def test_tag_is_case_insensitive():
    registry = FigureRegistry()
    assert registry.get(" FIG4 ") is registry.get("fig4")


def test_fig2_bundle():
    artifacts = FigureRegistry().reproduce("fig2", TINY, {"alphas": [1.0], "rmax": 3.0})
    assert [a.name for a in artifacts] == ["couplings"]
    frame = artifacts[0].data
    assert set(frame["pair"]) == {"BB", "BC", "CC"}
    assert set(frame["family"]) == {"Stub", "Diamond"}
    assert (frame["J_over_t"] <= TINY.coupling_floor).all()
    assert len(artifacts[0].metadata["converged"]) == 6


def test_fig4_bundle():
    artifacts = FigureRegistry().reproduce("fig4", TINY, {"alpha_grid": [1.0], "JS_grid": [0.5]})
    scan = artifacts[0]
    assert scan.is_table
    assert scan.schema == "scan"
    assert len(scan.data) == 1
    assert scan.metadata["alpha_grid"] == [1.0]


def test_fig3a_bundle():
    artifacts = FigureRegistry().reproduce("fig3a", TINY, {"n_list": [1, 2]})
    assert [a.name for a in artifacts] == ["couplings", "fits", "nearest_neighbour"]
    assert set(artifacts[0].data["n"]) == {1, 2}
    assert set(artifacts[1].data["fits"]) == {"1", "2"}
    series = artifacts[2].data
    assert series["n"].tolist() == [1, 2]
    assert (series["J_over_t"] <= TINY.coupling_floor).all()


def test_fig3b_fits_from_power_law_onset():
    artifacts = FigureRegistry().reproduce("fig3b", TINY, {"n_list": [1], "JS": 2.0, "rmax": 60.0, "num_k": 64})
    couplings, fits = artifacts
    assert fits.data["fit_start"] == {"1": pytest.approx(50.0)}
    assert fits.data["num_k"] == 64
    frame = couplings.data
    assert (frame.loc[frame["R_over_a"] >= 50.0, "asymptotic_valid"]).all()
    assert not (frame.loc[frame["R_over_a"] < 50.0, "asymptotic_valid"]).any()


def test_fig3b_default_mesh_floor():
    artifacts = FigureRegistry().reproduce("fig3b", TINY, {"n_list": [1], "JS": 2.0, "rmax": 3.0})
    assert artifacts[1].data["num_k"] == 2048


def test_fig5_bundle():
    artifacts = FigureRegistry().reproduce("fig5", TINY, {"alphas": [1.0], "n_list": [1, 2], "r_max_cells": 6})
    assert [a.name for a in artifacts] == ["xi_vs_g", "n_c", "xi_reference"]
    assert artifacts[0].data["n"].tolist() == [1, 2]
    nc = artifacts[1].data
    assert nc["r_max_cells"] == 6
    assert nc["n_c"]["1"]["reason"]
    assert len(artifacts[2].data) == 41
