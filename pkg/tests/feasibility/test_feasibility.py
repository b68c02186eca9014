from __future__ import annotations

import pytest  # type: ignore[import-not-found]
from hypothesis import given, settings  # type: ignore[import-not-found]
from hypothesis import strategies as st  # type: ignore[import-not-found]
from pydantic import ValidationError

from sddsim.channel.schemas import PathLossConfig
from sddsim.channel.service import link_budget
from sddsim.feasibility.exceptions import FeasibilityException
from sddsim.feasibility.schemas import (
    DirectionalRates,
    EfficiencyModel,
    FeasibilityPoint,
    RegionBoundary,
)
from sddsim.feasibility.service import (
    awgn_capacity,
    dominates,
    empirical_efficiency,
    feasibility_point,
    feasible_region,
    rate_region,
)


@pytest.fixture(scope="module")
def budgets():
    cfg = PathLossConfig()
    return link_budget(cfg, 25.0, 10.0, -90.0), link_budget(cfg, 50.0, 10.0, -90.0)


def _region(paradigm, budgets, em=None, src=(1.0, 1.0), n=11):
    return feasible_region(paradigm, *budgets, em or EfficiencyModel(), *src, n)


def _boundary(*points: tuple[float, float]) -> RegionBoundary:
    return RegionBoundary("IBFD", tuple(FeasibilityPoint(a, b) for a, b in points))


# ---- capacity ----------------------------------------------------------------


def test_awgn_capacity_examples() -> None:
    assert awgn_capacity(0.0) == pytest.approx(1.0, abs=1e-15)
    assert awgn_capacity(-300.0) < 1e-9
    assert awgn_capacity(15.0) == pytest.approx(5.0278, abs=1e-3)


def test_awgn_capacity_rejects_non_finite() -> None:
    with pytest.raises(FeasibilityException):
        awgn_capacity(float("nan"))


# ---- rate regions ------------------------------------------------------------


def test_time_sharing_midpoint() -> None:
    b = link_budget(PathLossConfig(), 25.0, 10.0, -90.0)
    region = rate_region("FDD_TDD", b, b, EfficiencyModel(), 3)
    c0 = awgn_capacity(b.snr_db)
    mid = region.vertices[1]
    assert mid.f_ab == pytest.approx(c0 / 2)
    assert mid.f_ba == pytest.approx(c0 / 2)


def test_residual_si_shrinks_ibfd_corner(budgets) -> None:
    region = rate_region("IBFD", *budgets, EfficiencyModel(), 11)
    corner = region.vertices[5]
    assert corner.f_ab < awgn_capacity(budgets[0].snr_db)
    assert corner.f_ba < awgn_capacity(budgets[1].snr_db)


def test_perfect_sic_gives_outer_rectangle(budgets) -> None:
    em = EfficiencyModel(residual_si_db=-300.0)
    region = rate_region("IBFD", *budgets, em, 11)
    corner = region.vertices[5]
    assert corner.f_ab == pytest.approx(awgn_capacity(budgets[0].snr_db))
    assert corner.f_ba == pytest.approx(awgn_capacity(budgets[1].snr_db))


def test_heavy_residual_si_falls_back_to_time_sharing(budgets) -> None:
    em = EfficiencyModel(residual_si_db=80.0)
    ibfd = rate_region("IBFD", *budgets, em, 11)
    fdd = rate_region("FDD_TDD", *budgets, em, 11)
    c0 = [awgn_capacity(b.snr_db) for b in budgets]
    corner = ibfd.vertices[5]
    assert corner.f_ab / c0[0] + corner.f_ba / c0[1] == pytest.approx(1.0)
    assert dominates(ibfd, fdd)


def test_rate_region_needs_two_points(budgets) -> None:
    with pytest.raises(FeasibilityException):
        rate_region("IBFD", *budgets, EfficiencyModel(), 1)


# ---- feasibility -------------------------------------------------------------


def test_feasibility_point_examples() -> None:
    assert feasibility_point(DirectionalRates(2, 2, 1, 3)) == FeasibilityPoint(2, 2)
    assert feasibility_point(DirectionalRates(0, 2, 1, 1)).f_ab == 0.0


def test_feasibility_point_zero_source_rate() -> None:
    with pytest.raises(FeasibilityException):
        feasibility_point(DirectionalRates(1, 1, 0, 1))


def test_doubling_source_rates_halves_feasibility(budgets) -> None:
    one = _region("SDD", budgets, src=(1.0, 1.0))
    two = _region("SDD", budgets, src=(2.0, 2.0))
    for a, b in zip(one.vertices, two.vertices):
        assert b.f_ab == pytest.approx(a.f_ab / 2)
        assert b.f_ba == pytest.approx(a.f_ba / 2)


def test_equal_efficiency_makes_sdd_equal_ibfd(budgets) -> None:
    em = EfficiencyModel(eta_sep=0.8, eta_jscc=0.8)
    assert _region("SDD", budgets, em).vertices == _region("IBFD", budgets, em).vertices


def test_higher_jscc_efficiency_lifts_every_vertex(budgets) -> None:
    sdd, ibfd = _region("SDD", budgets), _region("IBFD", budgets)
    for s, i in zip(sdd.vertices, ibfd.vertices):
        assert s.f_ab >= i.f_ab and s.f_ba >= i.f_ba


def test_default_regions_are_nested(budgets) -> None:
    fdd, ibfd, sdd = (_region(p, budgets) for p in ("FDD_TDD", "IBFD", "SDD"))
    assert dominates(sdd, ibfd)
    assert dominates(ibfd, fdd)
    assert not dominates(fdd, ibfd)


def test_eta_override(budgets) -> None:
    region = feasible_region("SDD", *budgets, EfficiencyModel(), 1.0, 1.0, 5, eta=0.0)
    assert region.max_f_ab == 0.0
    with pytest.raises(FeasibilityException):
        feasible_region("SDD", *budgets, EfficiencyModel(), 1.0, 1.0, 5, eta=1.5)


def test_efficiency_model_ordering() -> None:
    with pytest.raises(ValidationError):
        EfficiencyModel(eta_sep=0.9, eta_jscc=0.8)


# ---- dominance ---------------------------------------------------------------


def test_dominates_is_reflexive() -> None:
    b = _boundary((2, 0), (1.5, 1), (0, 1.2))
    assert dominates(b, b)


def test_scaled_boundary_dominates() -> None:
    b = _boundary((2, 0), (1.5, 1), (0, 1.2))
    doubled = RegionBoundary("SDD", tuple(v.scaled(2.0) for v in b.vertices))
    assert dominates(doubled, b)
    assert not dominates(b, doubled)


def test_crossing_boundaries_do_not_dominate() -> None:
    wide = _boundary((3, 0), (0, 1))
    tall = _boundary((1, 0), (0, 3))
    assert not dominates(wide, tall)
    assert not dominates(tall, wide)


def test_boundary_must_be_monotone() -> None:
    with pytest.raises(FeasibilityException):
        _boundary((1, 0), (2, 1))


# ---- empirical efficiency ----------------------------------------------------


def _row(paradigm: str, sic_mode: str, failure_rate: float) -> dict[str, str]:
    return {
        "paradigm": paradigm,
        "sic_mode": sic_mode,
        "failure_rate": str(failure_rate),
    }


def test_empirical_efficiency_means_success() -> None:
    rows = [
        _row("SDD", "nonlinear", 0.0),
        _row("SDD", "nonlinear", 0.2),
        _row("IBFD", "linear", 1.0),
        _row("IBFD", "linear", 0.5),
        _row("IBFD", "perfect", 0.0),
    ]
    eta = empirical_efficiency(rows)
    assert eta == {"FDD_TDD": 1.0, "IBFD": 0.25, "SDD": pytest.approx(0.9)}


def test_empirical_efficiency_prefers_swept_fdd() -> None:
    rows = [_row("SDD", "nonlinear", 0.0), _row("IBFD", "linear", 0.5)]
    assert empirical_efficiency(rows)["FDD_TDD"] == 0.5
    rows.append(_row("FDD_TDD", "none", 0.1))
    assert empirical_efficiency(rows)["FDD_TDD"] == pytest.approx(0.9)


def test_empirical_efficiency_needs_sdd_and_ibfd() -> None:
    with pytest.raises(FeasibilityException):
        empirical_efficiency([_row("SDD", "nonlinear", 0.0)])


# ---- properties --------------------------------------------------------------

_rate = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)
_src = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@settings(max_examples=100)
@given(_rate, _rate, _src, _src, st.floats(min_value=1e-2, max_value=1e2))
def test_feasibility_is_scale_invariant(c_ab, c_ba, s_ab, s_ba, k) -> None:
    base = feasibility_point(DirectionalRates(c_ab, c_ba, s_ab, s_ba))
    scaled = feasibility_point(DirectionalRates(k * c_ab, k * c_ba, k * s_ab, k * s_ba))
    assert scaled.f_ab == pytest.approx(base.f_ab, rel=1e-9, abs=1e-12)
    assert scaled.f_ba == pytest.approx(base.f_ba, rel=1e-9, abs=1e-12)


@settings(max_examples=100)
@given(_rate, _rate, _src, _src)
def test_swapping_directions_swaps_feasibility(c_ab, c_ba, s_ab, s_ba) -> None:
    fwd = feasibility_point(DirectionalRates(c_ab, c_ba, s_ab, s_ba))
    rev = feasibility_point(DirectionalRates(c_ba, c_ab, s_ba, s_ab))
    assert (fwd.f_ab, fwd.f_ba) == (rev.f_ba, rev.f_ab)
