"""Distinguished orbits, fate classification, and the critical-sigma search.

Launches come out of P2 (along its unstable eigenvector), out of P0 (on the
center-manifold family), and out of Q1 in the chart at infinity.  A standard
set of terminal events operationalizes the two possible fates of an orbit:

* entry into a parabola point P0^lambda, detected by a stagnation event
  (field norm below 1e-11 within 1e-4 of the critical parabola) -- entry is
  an infinite-time limit, so stagnation is the practical certificate;
* escape to the sign-change attractor Q3 at infinity, certified either by a
  downward crossing of the midplane {Y = -beta/(2 alpha)} with Z above the
  vertex height (Z is non-decreasing, so the orbit can never return to the
  parabola), or by Y falling below a floor with X bounded away from zero.

Everything else (out of time, out of steps) is Inconclusive and surfaced,
never coerced; near the critical sigma the vertex approach is logarithmic
and Inconclusive outcomes are expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import numpy as np

from .params import (
    Params,
    DomainError,
    beta_over_alpha,
    derive_exponents,
    lambda_range,
    parabola_z,
    p2_coordinates,
    validate_params,
)
from .field import (
    make_rhs,
    make_chart_rhs,
    center_family_P0,
    p2_unstable_eigenvector,
    p2_chart_coordinates,
    phase_from_chart,
)
from .integrate import EventSpec, IntegrationControls, Trajectory, integrate

__all__ = [
    "FateConfig",
    "FateKind",
    "OrbitFate",
    "ShootResult",
    "InconclusiveError",
    "BracketError",
    "NOT_ENTERING",
    "launch_from_P2",
    "launch_from_P0",
    "launch_from_Q1_chart",
    "parabola_entry_distance",
    "standard_fate_events",
    "classify_fate",
    "run_p2_orbit",
    "run_p0_orbit",
    "run_q1_orbit",
    "q1_to_p2_connection",
    "lambda_of_sigma",
    "sigma_star",
]


class InconclusiveError(RuntimeError):
    """An orbit terminated without any fate certificate."""


class BracketError(ValueError):
    """A shooting bracket does not separate the two fates."""


class FateKind:
    ENTERS_PARABOLA = "enters_parabola"
    ENTERS_VERTEX = "enters_vertex_neighborhood"
    ENTERS_Q3 = "enters_q3"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FateConfig:
    """Thresholds used by the standard fate event set."""

    stagnation_field_tol: float = 1e-11
    parabola_dist_tol: float = 1e-4
    vertex_tol: float = 5e-3
    y_floor: float = -1e3
    x_away_tol: float = 1e-8
    delta: float = 1e-6


@dataclass
class OrbitFate:
    """Classified terminal behavior of one orbit."""

    kind: str
    lambda_hat: float | None
    entry_point: np.ndarray | None
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def parabola_side(self) -> bool:
        return self.kind in (FateKind.ENTERS_PARABOLA, FateKind.ENTERS_VERTEX)

    @property
    def decisive(self) -> bool:
        return self.kind != FateKind.INCONCLUSIVE


@dataclass
class ShootResult:
    sigma_star: float
    bracket: tuple[float, float]
    iterations: int
    fate_at_ends: tuple[OrbitFate, OrbitFate]
    evaluations: list = dc_field(default_factory=list)


class _NotEntering:
    __slots__ = ()

    def __repr__(self):
        return "NOT_ENTERING"


NOT_ENTERING = _NotEntering()


# ---------------------------------------------------------------------------
# launches
# ---------------------------------------------------------------------------


def launch_from_P2(params: Params, delta: float = 1e-6) -> np.ndarray:
    """P2 + delta * e3 with e3 the unit unstable eigenvector oriented into {Z>0}."""
    if not 0.0 < delta <= 1e-4:
        raise DomainError("delta must lie in (0, 1e-4]")
    e3 = p2_unstable_eigenvector(params)
    if e3[2] < 0:
        e3 = -e3
    return p2_coordinates(params) + delta * e3


def launch_from_P0(K: float, z0: float, params: Params) -> np.ndarray:
    """Start on the center-manifold family out of the origin.

    X comes from the explicit family X = K sqrt(Z) - (m-1) alpha Z and Y from
    the tangent-plane relation (beta/alpha) Y = X - Z of the center manifold.
    """
    if K <= 0.0:
        raise DomainError("K must be positive")
    if not 0.0 < z0 <= 1e-5:
        raise DomainError("z0 must lie in (0, 1e-5]")
    x0 = center_family_P0(K, z0, params)
    if x0 <= 0.0:
        raise DomainError(
            "non-physical start: K=%.17g gives X=%.17g <= 0 at z0=%.17g" % (K, x0, z0)
        )
    exp = derive_exponents(params)
    y0 = (x0 - z0) * exp.alpha / exp.beta
    return np.array([x0, y0, z0])


def launch_from_Q1_chart(
    slope_mode: str, delta: float, params: Params, sign: int = 1
) -> np.ndarray:
    """Chart start near Q1: delta*(1,1,0) for tangent_v1 (profiles with
    f'(0) = 0), delta*(0, +-1, 0) for tangent_v2 (f'(0) != 0)."""
    if not 0.0 < delta <= 1e-4:
        raise DomainError("delta must lie in (0, 1e-4]")
    if slope_mode == "tangent_v1":
        return np.array([delta, delta, 0.0])
    if slope_mode == "tangent_v2":
        if sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        return np.array([0.0, sign * delta, 0.0])
    raise DomainError("slope_mode must be tangent_v1 or tangent_v2")


# ---------------------------------------------------------------------------
# fate events and classification
# ---------------------------------------------------------------------------


def parabola_entry_distance(pt, params: Params) -> float:
    """Distance from pt to the parabola point with the same Y (clamped).

    This is exactly the quantity the parabola-entry certificate bounds:
    || pt - (0, lambda_hat, Z(lambda_hat)) || with lambda_hat = clamp(Y).
    """
    x, y, z = (float(v) for v in pt)
    lo, hi = lambda_range(params)
    lam = min(max(y, lo), hi)
    dz = z - parabola_z(lam, params)
    dy = y - lam
    return math.sqrt(x * x + dy * dy + dz * dz)


def standard_fate_events(params: Params, cfg: FateConfig | None = None) -> list[EventSpec]:
    """The terminal event set used for all fate classifications.

    Order matters for tie-breaking: stagnation, midplane, Y-floor.
    """
    cfg = cfg or FateConfig()
    rhs = make_rhs(params)
    boa = beta_over_alpha(params)
    lo, hi = lambda_range(params)
    ftol = cfg.stagnation_field_tol
    dtol = cfg.parabola_dist_tol

    def stagnation_guard(p):
        x, y, z = p
        f = rhs(0.0, p)
        fnorm = math.sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2])
        lam = min(max(y, lo), hi)
        dz = z + lam * (lam + boa)
        dy = y - lam
        dist = math.sqrt(x * x + dy * dy + dz * dz)
        return max(fnorm - ftol, dist - dtol)

    return [
        EventSpec(id="stagnation", guard=stagnation_guard, direction="falling", terminal=True),
        EventSpec(
            id="midplane",
            guard=lambda p: p[1] + boa / 2.0,
            direction="falling",
            terminal=True,
        ),
        EventSpec(
            id="y_floor",
            guard=lambda p: p[1] - cfg.y_floor,
            direction="falling",
            terminal=True,
        ),
    ]


def classify_fate(traj: Trajectory, params: Params, cfg: FateConfig | None = None) -> OrbitFate:
    """Deterministic fate from a trajectory run with the standard event set."""
    cfg = cfg or FateConfig()
    exp = derive_exponents(params)
    boa = beta_over_alpha(params)
    diagnostics = {
        "termination": traj.termination,
        "n_steps": traj.n_steps,
        "final_eta": traj.final_eta,
        "events": [(h.id, h.eta) for h in traj.events],
    }
    hit = traj.terminal_event()
    if traj.termination != "event" or hit is None:
        diagnostics["final_point"] = traj.final_point
        return OrbitFate(FateKind.INCONCLUSIVE, None, None, diagnostics)
    pt = hit.point
    if hit.id == "stagnation":
        lam_hat = float(pt[1])
        dist = parabola_entry_distance(pt, params)
        if dist > 2.0 * cfg.parabola_dist_tol or pt[0] >= cfg.parabola_dist_tol:
            diagnostics["reason"] = "stagnation fired away from the parabola"
            return OrbitFate(FateKind.INCONCLUSIVE, None, pt, diagnostics)
        kind = (
            FateKind.ENTERS_VERTEX
            if abs(lam_hat + boa / 2.0) < cfg.vertex_tol
            else FateKind.ENTERS_PARABOLA
        )
        return OrbitFate(kind, lam_hat, pt, diagnostics)
    if hit.id == "midplane":
        if pt[2] > exp.z_max:
            return OrbitFate(FateKind.ENTERS_Q3, None, pt, diagnostics)
        diagnostics["reason"] = "midplane crossed below the vertex height"
        return OrbitFate(FateKind.INCONCLUSIVE, None, pt, diagnostics)
    if hit.id == "y_floor":
        if pt[0] >= cfg.x_away_tol:
            return OrbitFate(FateKind.ENTERS_Q3, None, pt, diagnostics)
        diagnostics["reason"] = "Y floor reached with X not bounded away from 0"
        return OrbitFate(FateKind.INCONCLUSIVE, None, pt, diagnostics)
    diagnostics["reason"] = "unrecognized terminal event %r" % hit.id
    return OrbitFate(FateKind.INCONCLUSIVE, None, pt, diagnostics)


def run_p2_orbit(
    params: Params,
    controls: IntegrationControls | None = None,
    cfg: FateConfig | None = None,
    delta: float | None = None,
) -> tuple[Trajectory, OrbitFate]:
    cfg = cfg or FateConfig()
    start = launch_from_P2(params, delta if delta is not None else cfg.delta)
    traj = integrate(make_rhs(params), start, standard_fate_events(params, cfg), controls)
    return traj, classify_fate(traj, params, cfg)


def run_p0_orbit(
    K: float,
    z0: float,
    params: Params,
    controls: IntegrationControls | None = None,
    cfg: FateConfig | None = None,
) -> tuple[Trajectory, OrbitFate]:
    cfg = cfg or FateConfig()
    start = launch_from_P0(K, z0, params)
    traj = integrate(make_rhs(params), start, standard_fate_events(params, cfg), controls)
    return traj, classify_fate(traj, params, cfg)


# ---------------------------------------------------------------------------
# Q1 chart runs
# ---------------------------------------------------------------------------


def q1_to_p2_connection(
    params: Params,
    delta: float = 1e-5,
    rel_target: float = 1e-3,
    controls: IntegrationControls | None = None,
):
    """Integrate the chart orbit out of Q1 tangent to (1,1,0) inside {z = 0}.

    Returns (trajectory, hit) where the terminal hit certifies arrival within
    rel_target relative distance of the chart image of P2.
    """
    start = launch_from_Q1_chart("tangent_v1", delta, params)
    target = p2_chart_coordinates(params)
    scale = math.hypot(target[0], target[1])

    def proximity(p):
        return math.hypot(p[0] - target[0], p[1] - target[1]) / scale - rel_target

    events = [
        EventSpec(id="p2_arrival", guard=proximity, direction="falling", terminal=True),
        EventSpec(
            id="w_overflow",
            guard=lambda p: 4.0 * target[0] - p[0],
            direction="falling",
            terminal=True,
        ),
    ]
    controls = controls or IntegrationControls(max_time=100.0, max_step=0.01)
    traj = integrate(make_chart_rhs(params), start, events, controls)
    return traj, traj.terminal_event()


def run_q1_orbit(
    params: Params,
    delta: float = 1e-6,
    z0: float = 0.0,
    handoff_w: float = 1e-2,
    controls: IntegrationControls | None = None,
    cfg: FateConfig | None = None,
):
    """Two-leg run: chart integration out of Q1, handoff to phase coordinates.

    The chart leg starts at delta*(1,1,0) + (0,0,z0) and ends when w exceeds
    handoff_w (X = 1/w at most 1/handoff_w); the phase leg then runs the
    standard fate events.  With z0 = 0 the orbit stays in the invariant plane
    and converges to P2 instead of producing a profile fate; the chart leg's
    arrival is then reported through the diagnostics.
    """
    cfg = cfg or FateConfig()
    if handoff_w < 1e-2:
        raise DomainError("handoff threshold must be at least 1e-2")
    start = launch_from_Q1_chart("tangent_v1", delta, params) + np.array([0.0, 0.0, z0])
    chart_controls = controls or IntegrationControls(max_time=100.0, max_step=0.01)
    handoff = EventSpec(
        id="handoff", guard=lambda p: p[0] - handoff_w, direction="rising", terminal=True
    )
    chart_traj = integrate(make_chart_rhs(params), start, [handoff], chart_controls)
    hit = chart_traj.terminal_event()
    if hit is None:
        fate = OrbitFate(
            FateKind.INCONCLUSIVE,
            None,
            None,
            {"termination": chart_traj.termination, "leg": "chart", "events": []},
        )
        return chart_traj, None, fate
    phase_start = phase_from_chart(hit.point)
    phase_controls = IntegrationControls() if controls is None else controls
    phase_traj = integrate(
        make_rhs(params), phase_start, standard_fate_events(params, cfg), phase_controls
    )
    fate = classify_fate(phase_traj, params, cfg)
    fate.diagnostics["chart_leg_eta"] = hit.eta
    fate.diagnostics["handoff_point"] = phase_start
    return chart_traj, phase_traj, fate


# ---------------------------------------------------------------------------
# lambda(sigma) and the critical sigma
# ---------------------------------------------------------------------------


def lambda_of_sigma(
    m: float,
    sigma: float,
    controls: IntegrationControls | None = None,
    cfg: FateConfig | None = None,
):
    """Y-coordinate of the parabola point the P2 orbit enters, or NOT_ENTERING.

    Raises InconclusiveError when the orbit resolves neither way; callers are
    expected to surface that, not swallow it.
    """
    params = validate_params(m, sigma)
    _, fate = run_p2_orbit(params, controls, cfg)
    if fate.parabola_side:
        return fate.lambda_hat
    if fate.kind == FateKind.ENTERS_Q3:
        return NOT_ENTERING
    raise InconclusiveError(
        "P2 orbit at m=%.17g sigma=%.17g is inconclusive: %s" % (m, sigma, fate.diagnostics)
    )


def _scaled_controls(base: IntegrationControls, factor: float) -> IntegrationControls:
    return replace(
        base,
        max_time=base.max_time * factor,
        max_steps=int(base.max_steps * factor),
    )


def sigma_star(
    m: float,
    bracket: tuple[float, float],
    tol: float,
    controls: IntegrationControls | None = None,
    cfg: FateConfig | None = None,
    retry_cap: int = 4,
) -> ShootResult:
    """Bisect sigma between a parabola-entering and a Q3-escaping fate.

    Convergence at the vertex is logarithmic, so evaluation points very close
    to the critical sigma may come back Inconclusive at the base time budget.
    Each bisection step therefore tries up to retry_cap fallbacks: nearby
    interior points first, then the midpoint again with an extended budget
    (8x, then 64x max_time).  If every attempt is inconclusive the search
    stops with InconclusiveError rather than inventing an answer.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError("bracket must satisfy lo < hi")
    if tol <= 0:
        raise BracketError("tol must be positive")
    base = controls or IntegrationControls()
    cfg = cfg or FateConfig()

    evaluations = []

    def fate_at(sig: float, budget: float = 1.0) -> OrbitFate:
        params = validate_params(m, sig)
        _, fate = run_p2_orbit(params, _scaled_controls(base, budget), cfg)
        evaluations.append((sig, budget, fate.kind, fate.lambda_hat))
        return fate

    fate_lo = fate_at(lo)
    fate_hi = fate_at(hi)
    if not (fate_lo.decisive and fate_hi.decisive):
        raise InconclusiveError("bracket endpoint fate is inconclusive")
    if fate_lo.parabola_side == fate_hi.parabola_side:
        raise BracketError(
            "fates agree at both bracket ends (%s at %.17g, %s at %.17g); "
            "widen the bracket" % (fate_lo.kind, lo, fate_hi.kind, hi)
        )
    ends = (fate_lo, fate_hi)
    lo_parabola = fate_lo.parabola_side

    iterations = 0
    while hi - lo > tol:
        width = hi - lo
        mid = 0.5 * (lo + hi)
        attempts = [
            (mid, 1.0),
            (mid + width / 8.0, 1.0),
            (mid - width / 8.0, 1.0),
            (mid, 8.0),
            (mid, 64.0),
        ][: retry_cap + 1]
        placed = False
        for sig, budget in attempts:
            fate = fate_at(sig, budget)
            if fate.decisive:
                if fate.parabola_side == lo_parabola:
                    lo = sig
                else:
                    hi = sig
                placed = True
                break
        if not placed:
            raise InconclusiveError(
                "all interior evaluations inconclusive near sigma=%.17g "
                "(bracket width %.3g); the vertex approach is logarithmic there"
                % (mid, width)
            )
        iterations += 1
    return ShootResult(
        sigma_star=0.5 * (lo + hi),
        bracket=(lo, hi),
        iterations=iterations,
        fate_at_ends=ends,
        evaluations=evaluations,
    )
