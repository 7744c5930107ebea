import numpy as np
import pytest

from ssblow.params import (
    DomainError,
    beta_over_alpha,
    derive_exponents,
    interface_xi_of_lambda,
    p2_coordinates,
    validate_params,
)
from ssblow.field import make_rhs, p2_unstable_eigenvector, p2_chart_coordinates, phase_from_chart
from ssblow.integrate import EventSpec, IntegrationControls, integrate
from ssblow.orbits import (
    NOT_ENTERING,
    BracketError,
    FateConfig,
    FateKind,
    InconclusiveError,
    classify_fate,
    lambda_of_sigma,
    launch_from_P0,
    launch_from_P2,
    launch_from_Q1_chart,
    parabola_entry_distance,
    q1_to_p2_connection,
    run_p0_orbit,
    run_p2_orbit,
    run_q1_orbit,
    sigma_star,
    standard_fate_events,
)


def test_launch_from_p2_geometry(params15_3):
    start = launch_from_P2(params15_3, 1e-6)
    e3 = p2_unstable_eigenvector(params15_3)
    if e3[2] < 0:
        e3 = -e3
    assert start == pytest.approx(p2_coordinates(params15_3) + 1e-6 * e3, rel=1e-12)
    assert start[2] > 0.0
    with pytest.raises(DomainError):
        launch_from_P2(params15_3, 1e-3)
    with pytest.raises(DomainError):
        launch_from_P2(params15_3, 0.0)


def test_p2_orbit_enters_parabola_at_sigma_3(p2_orbit_15_3, params15_3):
    traj, fate = p2_orbit_15_3
    assert fate.kind == FateKind.ENTERS_PARABOLA
    assert -0.1 < fate.lambda_hat < 0.0
    assert fate.entry_point[0] < 1e-4
    assert parabola_entry_distance(fate.entry_point, params15_3) < 1e-4
    # parabola-entry consistency with the interface map
    exp = derive_exponents(params15_3)
    assert interface_xi_of_lambda(fate.lambda_hat, params15_3) <= exp.xi_max + 1e-6


def test_p2_orbit_escapes_at_sigma_34(p2_orbit_15_34, params15_34):
    traj, fate = p2_orbit_15_34
    assert fate.kind == FateKind.ENTERS_Q3
    z_max = derive_exponents(params15_34).z_max
    assert fate.entry_point[2] > z_max


def test_p2_orbit_near_vertex_at_sigma_3285():
    pr = validate_params(1.5, 3.285)
    _, fate = run_p2_orbit(pr)
    assert fate.parabola_side
    assert abs(fate.lambda_hat + beta_over_alpha(pr) / 2.0) < 0.01


def test_p2_orbit_monotonicity(p2_orbit_15_3):
    """X never increases along the P2 orbit; Y never increases while Y >= 0."""
    traj, _ = p2_orbit_15_3
    x = traj.points[:, 0]
    y = traj.points[:, 1]
    assert np.max(np.diff(x)) <= 1e-9
    upper = y[:-1] >= 0.0
    assert np.max(np.diff(y)[upper], initial=-np.inf) <= 1e-9


def test_classification_requires_standard_events(params15_3):
    traj = integrate(
        make_rhs(params15_3),
        launch_from_P2(params15_3),
        [],
        IntegrationControls(max_time=1.0),
    )
    fate = classify_fate(traj, params15_3)
    assert fate.kind == FateKind.INCONCLUSIVE
    assert fate.diagnostics["termination"] == "max_time"


def test_lambda_of_sigma_values():
    lam = lambda_of_sigma(1.5, 3.0)
    assert -0.1 < lam < 0.0
    assert lambda_of_sigma(1.5, 3.4) is NOT_ENTERING


def test_lambda_trend_decreases_with_sigma():
    controls = {
        2.2: IntegrationControls(max_time=8e4, max_step=0.5),
        2.5: IntegrationControls(max_time=3e4, max_step=0.2),
        3.0: IntegrationControls(max_time=1e4, max_step=0.1),
    }
    lams = [lambda_of_sigma(1.5, s, controls[s]) for s in (2.2, 2.5, 3.0)]
    assert all(l < 0 for l in lams)
    assert lams[0] > lams[1] > lams[2]


def test_lambda_near_2_is_closer_to_zero():
    lam_near2 = lambda_of_sigma(
        1.5,
        2.05,
        IntegrationControls(max_time=2e6, max_step=5.0, rel_tol=1e-9),
    )
    lam_3 = lambda_of_sigma(1.5, 3.0)
    assert abs(lam_near2) < abs(lam_3)


def test_sigma_star_single_bisection_step():
    res = sigma_star(1.5, (3.0, 3.4), tol=0.2)
    assert res.iterations == 1
    assert res.bracket in ((3.2, 3.4), (3.0, 3.2))
    # fate at 3.2 is parabola entry, so the bracket moves right
    assert res.bracket == (3.2, 3.4)
    assert res.fate_at_ends[0].parabola_side
    assert res.fate_at_ends[1].kind == FateKind.ENTERS_Q3


def test_sigma_star_bracket_errors():
    with pytest.raises(BracketError):
        sigma_star(1.5, (3.0, 3.1), tol=0.05)  # both enter the parabola
    with pytest.raises(BracketError):
        sigma_star(1.5, (3.35, 3.4), tol=0.05)  # both escape to Q3
    with pytest.raises(BracketError):
        sigma_star(1.5, (3.4, 3.0), tol=0.05)
    with pytest.raises(BracketError):
        sigma_star(1.5, (3.0, 3.4), tol=-1.0)


def test_launch_from_p0_examples(params15_3):
    start = launch_from_P0(0.1, 1e-6, params15_3)
    assert start == pytest.approx([9.5e-5, 4.7e-4, 1e-6], rel=1e-10)
    # z0 -> 0 collapses onto the origin
    tiny = launch_from_P0(0.1, 1e-12, params15_3)
    assert np.linalg.norm(tiny) < 1e-5
    with pytest.raises(DomainError):
        launch_from_P0(0.001, 1e-6, params15_3)  # below the physicality threshold
    with pytest.raises(DomainError):
        launch_from_P0(0.1, 1e-4, params15_3)  # z0 too large
    with pytest.raises(DomainError):
        launch_from_P0(-1.0, 1e-6, params15_3)


def test_p0_orbit_enters_parabola_near_origin(params15_3):
    traj, fate = run_p0_orbit(0.3, 1e-5, params15_3)
    assert fate.kind == FateKind.ENTERS_PARABOLA
    assert -0.05 < fate.lambda_hat < 0.0


def test_launch_from_q1_chart_directions(params15_3):
    assert launch_from_Q1_chart("tangent_v1", 1e-5, params15_3) == pytest.approx(
        [1e-5, 1e-5, 0.0]
    )
    assert launch_from_Q1_chart("tangent_v2", 1e-5, params15_3, sign=-1) == pytest.approx(
        [0.0, -1e-5, 0.0]
    )
    with pytest.raises(DomainError):
        launch_from_Q1_chart("tangent_v1", 1.0, params15_3)
    with pytest.raises(DomainError):
        launch_from_Q1_chart("tangent_v3", 1e-5, params15_3)
    with pytest.raises(DomainError):
        launch_from_Q1_chart("tangent_v2", 1e-5, params15_3, sign=2)


def test_q1_to_p2_chart_connection(params15_3):
    traj, hit = q1_to_p2_connection(params15_3, delta=1e-5, rel_target=1e-3)
    assert hit is not None and hit.id == "p2_arrival"
    target = p2_chart_coordinates(params15_3)
    rel = np.linalg.norm(hit.point[:2] - target[:2]) / np.linalg.norm(target[:2])
    assert rel <= 1e-3 + 1e-12
    # the connection stays inside the invariant plane z = 0
    assert np.all(traj.points[:, 2] == 0.0)


def test_q1_handoff_matches_phase_coordinates(params15_3):
    """Continue past the handoff in the chart and compare the mapped points
    against the phase-space leg within integration tolerance."""
    chart_traj, phase_traj, fate = run_q1_orbit(
        params15_3, delta=1e-6, z0=1e-15, handoff_w=1e-2
    )
    hit = chart_traj.terminal_event()
    assert hit is not None and hit.id == "handoff"
    mapped = phase_from_chart(hit.point)
    assert mapped == pytest.approx(phase_traj.points[0], rel=1e-12)
    assert mapped[0] == pytest.approx(1.0 / hit.point[0], rel=1e-12)
    # a Q1 orbit shadowing the in-plane connection enters the parabola here
    assert fate.kind in (FateKind.ENTERS_PARABOLA, FateKind.ENTERS_VERTEX)


def test_q1_in_plane_orbit_reports_inconclusive(params15_3):
    # z0 = 0 rides the invariant plane into P2: no profile fate exists there
    _, phase_traj, fate = run_q1_orbit(
        params15_3,
        delta=1e-6,
        z0=0.0,
        controls=IntegrationControls(max_time=4000.0),
    )
    assert fate.kind == FateKind.INCONCLUSIVE
    assert np.linalg.norm(phase_traj.final_point - p2_coordinates(params15_3)) < 1e-3


def test_fate_robustness_to_delta(params15_3):
    _, fate_a = run_p2_orbit(params15_3, delta=1e-6)
    _, fate_b = run_p2_orbit(params15_3, delta=5e-7)
    assert fate_a.kind == fate_b.kind
    assert fate_a.lambda_hat == pytest.approx(fate_b.lambda_hat, abs=1e-6)


@pytest.mark.parametrize("sigma", [3.285, 3.4])
def test_fate_stability_under_tighter_tolerances(sigma):
    """The reference-experiment fates survive a 10x tolerance tightening and
    a launch-offset halving (sigma=3 is covered by the acceptance suite)."""
    pr = validate_params(1.5, sigma)
    _, base = run_p2_orbit(pr)
    tight = IntegrationControls(rel_tol=1e-11, abs_tol=1e-13)
    _, refined = run_p2_orbit(pr, tight)
    _, halved = run_p2_orbit(pr, delta=5e-7)
    assert refined.parabola_side == base.parabola_side == halved.parabola_side
    if base.lambda_hat is not None:
        assert refined.lambda_hat == pytest.approx(base.lambda_hat, abs=1e-5)
        assert halved.lambda_hat == pytest.approx(base.lambda_hat, abs=1e-5)


def test_midplane_event_certificate_is_checked(params15_34):
    """A synthetic trajectory crossing the midplane below the vertex height
    must not be certified as a Q3 escape."""
    boa = beta_over_alpha(params15_34)
    rhs = lambda t, y: (0.0, -1.0, 0.0)
    events = [
        EventSpec(
            id="midplane", guard=lambda p: p[1] + boa / 2.0, direction="falling", terminal=True
        )
    ]
    traj = integrate(rhs, (0.05, 0.0, 0.0), events, IntegrationControls(max_time=10.0))
    fate = classify_fate(traj, params15_34)
    assert fate.kind == FateKind.INCONCLUSIVE
    assert "below the vertex height" in fate.diagnostics["reason"]


def test_y_floor_fate(params15_3):
    cfg = FateConfig(y_floor=-5.0)
    start = (0.05, -0.5, 0.05)  # already below the midplane, diving
    traj = integrate(
        make_rhs(params15_3),
        start,
        standard_fate_events(params15_3, cfg),
        IntegrationControls(max_time=100.0),
    )
    fate = classify_fate(traj, params15_3, cfg)
    assert fate.kind == FateKind.ENTERS_Q3
    assert fate.entry_point[1] == pytest.approx(-5.0, abs=1e-8)
    assert fate.entry_point[0] >= cfg.x_away_tol
