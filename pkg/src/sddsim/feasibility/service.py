"""
Two-way capacity bounds, Feasibility and Feasible Regions.

Rate frontiers per paradigm (C0 = no-SI capacity, CI = capacity at the
SI-degraded SINR):

- FDD_TDD: time sharing, (a C0_ab, (1 - a) C0_ba) for a from 1 to 0. This
  is the inner bound.
- IBFD: upper boundary of the convex hull of the time-sharing triangle and
  the [0, CI_ab] x [0, CI_ba] rectangle, i.e. the polyline
  (C0_ab, 0) -> corner -> (0, C0_ba). The corner is (CI_ab, CI_ba) when it
  lies above the time-sharing line, otherwise the point where the ray
  through it meets that line. With perfect SIC this is the outer-bound
  rectangle.
- SDD: the IBFD rate frontier; it differs only in coding efficiency.

Feasibility maps each rate vertex through r_eff = eta * r and divides by
the smaller of the two source coding rates.
"""

from __future__ import annotations

import math

import numpy as np

from sddsim.channel.schemas import LinkBudget
from sddsim.feasibility.exceptions import FeasibilityException
from sddsim.feasibility.schemas import (
    DirectionalRates,
    EfficiencyModel,
    FeasibilityPoint,
    Paradigm,
    RegionBoundary,
)

_LN2 = math.log(2.0)
_DOMINANCE_TOL = 1e-9


def awgn_capacity(snr_db: float) -> float:
    if not math.isfinite(snr_db):
        raise FeasibilityException("non_finite_snr", f"{snr_db}")
    return math.log1p(10.0 ** (snr_db / 10.0)) / _LN2


def degraded_snr_db(budget: LinkBudget, residual_si_db: float) -> float:
    """SINR with residual SI `residual_si_db` dB relative to the noise floor."""
    return budget.snr_db - 10.0 * math.log10(1.0 + 10.0 ** (residual_si_db / 10.0))


def _ibfd_corner(
    c0: tuple[float, float], ci: tuple[float, float]
) -> tuple[float, float]:
    """
    Corner of the IBFD frontier: the SI-degraded rate pair `ci`, pushed out
    to the time-sharing line when it falls inside it.
    """
    reach = ci[0] / c0[0] + ci[1] / c0[1] if c0[0] > 0 and c0[1] > 0 else 1.0
    if reach >= 1.0 or reach == 0.0:
        return ci
    return ci[0] / reach, ci[1] / reach


def rate_region(
    paradigm: Paradigm,
    budget_ab: LinkBudget,
    budget_ba: LinkBudget,
    em: EfficiencyModel,
    n_points: int,
) -> RegionBoundary:
    if n_points < 2:
        raise FeasibilityException("n_points_below_two", f"n_points={n_points}")
    c0 = (awgn_capacity(budget_ab.snr_db), awgn_capacity(budget_ba.snr_db))
    ts = np.linspace(0.0, 1.0, n_points)

    if paradigm == "FDD_TDD":
        vertices = [FeasibilityPoint((1 - t) * c0[0], t * c0[1]) for t in ts]
        return RegionBoundary(paradigm, tuple(vertices), space="rate")
    if paradigm not in ("IBFD", "SDD"):
        raise FeasibilityException("unknown_paradigm", str(paradigm))

    ci = (
        awgn_capacity(degraded_snr_db(budget_ab, em.residual_si_db)),
        awgn_capacity(degraded_snr_db(budget_ba, em.residual_si_db)),
    )
    # IBFD may always fall back to half duplex, so its frontier is the convex
    # hull of the SI rectangle and the time-sharing line. This keeps the FDD/TDD
    # region inside the IBFD one at any residual SI.
    corner = _ibfd_corner(c0, ci)
    vertices = []
    for t in ts:
        if t <= 0.5:
            u = 2.0 * t
            ab, ba = c0[0] + u * (corner[0] - c0[0]), u * corner[1]
        else:
            u = 2.0 * t - 1.0
            ab, ba = (1 - u) * corner[0], corner[1] + u * (c0[1] - corner[1])
        vertices.append(FeasibilityPoint(ab, ba))
    return RegionBoundary(paradigm, tuple(vertices), space="rate")


def feasibility_point(dr: DirectionalRates) -> FeasibilityPoint:
    denom = min(dr.r_src_ab, dr.r_src_ba)
    if denom <= 0:
        raise FeasibilityException("zero_source_rate", f"{dr.r_src_ab}, {dr.r_src_ba}")
    return FeasibilityPoint(dr.r_chan_ab / denom, dr.r_chan_ba / denom)


def efficiency_for(paradigm: Paradigm, em: EfficiencyModel) -> float:
    return em.eta_jscc if paradigm == "SDD" else em.eta_sep


def feasible_region(
    paradigm: Paradigm,
    budget_ab: LinkBudget,
    budget_ba: LinkBudget,
    em: EfficiencyModel,
    r_src_ab: float,
    r_src_ba: float,
    n_points: int,
    eta: float | None = None,
) -> RegionBoundary:
    """`eta` overrides the analytic efficiency (empirical mode)."""
    if eta is not None and not 0.0 <= eta <= 1.0:
        raise FeasibilityException("eta_out_of_range", f"eta={eta}")
    rates = rate_region(paradigm, budget_ab, budget_ba, em, n_points)
    eff = efficiency_for(paradigm, em) if eta is None else eta
    vertices = tuple(
        feasibility_point(
            DirectionalRates(eff * v.f_ab, eff * v.f_ba, r_src_ab, r_src_ba)
        )
        for v in rates.vertices
    )
    return RegionBoundary(paradigm, vertices)


def _best_ab_at(a: RegionBoundary, f_ba: float) -> float | None:
    """Largest f_ab on `a`'s frontier among points with f_ba' >= f_ba."""
    vs = a.vertices
    if f_ba <= vs[0].f_ba:
        return vs[0].f_ab
    for p, q in zip(vs, vs[1:]):
        if q.f_ba >= f_ba:
            if q.f_ba == p.f_ba:
                return q.f_ab
            u = (f_ba - p.f_ba) / (q.f_ba - p.f_ba)
            return p.f_ab + u * (q.f_ab - p.f_ab)
    return None


def dominates(a: RegionBoundary, b: RegionBoundary) -> bool:
    """True iff every vertex of `b` lies on or under `a`'s frontier."""
    scale = max(a.max_f_ab, a.max_f_ba, b.max_f_ab, b.max_f_ba, 1.0) * _DOMINANCE_TOL
    for v in b.vertices:
        best = _best_ab_at(a, v.f_ba - scale)
        if best is None or best < v.f_ab - scale:
            return False
    return True


def empirical_efficiency(rows: list[dict[str, str]]) -> dict[Paradigm, float]:
    """
    eta per paradigm as the mean success rate (1 - failure_rate) of sweep rows.

    SDD uses the SDD series; IBFD the imperfect-SIC IBFD series; FDD_TDD an
    FDD_TDD series when swept, otherwise the interference-free baseline
    (perfect-SIC) series, otherwise IBFD.
    """
    def mean_success(pred) -> float | None:
        vals = [1.0 - float(r["failure_rate"]) for r in rows if pred(r)]
        return float(np.mean(vals)) if vals else None

    def is_ibfd(r: dict[str, str], perfect: bool) -> bool:
        return r["paradigm"] == "IBFD" and (r["sic_mode"] == "perfect") == perfect

    sdd = mean_success(lambda r: r["paradigm"] == "SDD")
    ibfd = mean_success(lambda r: is_ibfd(r, perfect=False))
    clean = mean_success(lambda r: is_ibfd(r, perfect=True))
    fdd = mean_success(lambda r: r["paradigm"] == "FDD_TDD")
    if sdd is None or ibfd is None:
        raise FeasibilityException("empirical_rows_missing", "need SDD and IBFD series")
    if fdd is None:
        fdd = clean if clean is not None else ibfd
    return {"FDD_TDD": fdd, "IBFD": ibfd, "SDD": sdd}
