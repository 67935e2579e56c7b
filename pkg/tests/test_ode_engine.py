import math

import numpy as np
import pytest

from pke_lab import ode_engine as ode
from pke_lab.errors import SeedExhaustionError, SingularStateError
from pke_lab.symmetry_cases import ModelParams, discriminant_closed_form, solve_abel
from pke_lab.symmetry_cases.reductions import abel_rhs


def expo(t, y):
    return y


def test_exponential_growth():
    tr = ode.integrate(expo, [1.0], (0.0, 1.0), ode.IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
    assert tr.status == "completed"
    assert tr(1.0)[0] == pytest.approx(math.e, rel=1e-9)


def test_backward_integration():
    tr = ode.integrate(expo, [math.e], (1.0, 0.0))
    assert tr(0.0)[0] == pytest.approx(1.0, rel=1e-9)
    assert tr.interval == (0.0, 1.0)


def test_dense_output_and_derivative():
    tr = ode.integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.0, 6.0))
    for t in np.linspace(0, 6, 37):
        assert tr(t) == pytest.approx([math.sin(t), math.cos(t)], abs=1e-8)
        assert tr.derivative(t) == pytest.approx([math.cos(t), -math.sin(t)], abs=1e-7)


def test_interpolant_consistent_with_derivative_channel():
    tr = ode.integrate(expo, [1.0], (0.0, 2.0))
    h = 1e-5
    for t in np.linspace(0.1, 1.9, 11):
        fd = (tr(t + h)[0] - tr(t - h)[0]) / (2 * h)
        assert fd == pytest.approx(tr.derivative(t)[0], rel=1e-8)


def test_convergence_order():
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        tr = ode.integrate(expo, [1.0], (0.0, 1.0), ode.IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2))
        errs.append(abs(tr(1.0)[0] - math.e) / math.e)
    for e, tol in zip(errs, (1e-6, 1e-8, 1e-10)):
        assert tol / 10 / 1e3 <= e <= 10 * tol or e < 1e-14


def test_event_bracketing_exact():
    # y = t - 0.3141592653, event at y = 0
    ev = ode.Event(lambda t, y: y[0], terminal=True, name="zero")
    tr = ode.integrate(lambda t, y: np.array([1.0]), [-0.3141592653], (0.0, 1.0),
                       ode.IntegratorConfig(events=(ev,)))
    assert tr.status == "terminal_event"
    assert tr.events[0].t == pytest.approx(0.3141592653, abs=1e-12)
    assert tr.t_end == tr.events[0].t


def test_nonterminal_event_with_direction():
    up = ode.Event(lambda t, y: math.sin(y[0]), terminal=False, direction=1, name="up")
    # events are found by sign changes between accepted steps, so cap the step
    cfg = ode.IntegratorConfig(events=(up,), max_step=0.5)
    tr = ode.integrate(lambda t, y: np.array([1.0]), [0.1], (0.0, 10.0), cfg)
    assert tr.status == "completed"
    # sin(y) rises through 0 at y = 2 pi only (t = 2 pi - 0.1)
    assert [e.t for e in tr.events] == pytest.approx([2 * math.pi - 0.1], abs=1e-10)


def test_singularity_gives_partial_trajectory():
    # y' = 1/(1 - t) blows up at t = 1
    def rhs(t, y):
        if t >= 1:
            raise SingularStateError("1 - t", 1 - t)
        return np.array([1 / (1 - t)])
    tr = ode.integrate(rhs, [0.0], (0.0, 2.0))
    assert tr.status == "singular"
    assert tr.singularity is not None
    assert 0.99 < tr.t_end <= 1.0


def test_initial_state_must_be_finite():
    with pytest.raises(SingularStateError):
        ode.integrate(lambda t, y: np.array([math.inf]), [0.0], (0.0, 1.0))


def test_degenerate_span():
    with pytest.raises(ValueError):
        ode.integrate(expo, [1.0], (1.0, 1.0))


def test_bad_config():
    with pytest.raises(ValueError):
        ode.IntegratorConfig(rel_tol=0)
    with pytest.raises(ValueError):
        ode.IntegratorConfig(max_step=-1)


def test_dense_output_outside_span():
    tr = ode.integrate(expo, [1.0], (0.0, 1.0))
    with pytest.raises(ValueError):
        tr(1.5)


def test_determinism():
    a = ode.integrate(expo, [1.0], (0.0, 3.0))
    b = ode.integrate(expo, [1.0], (0.0, 3.0))
    assert np.array_equal(a.t, b.t) and np.array_equal(a.y, b.y)


def test_csv_export():
    tr = ode.integrate(expo, [1.0], (0.0, 1.0))
    text = tr.to_csv(names=["u"])
    lines = text.strip().splitlines()
    assert lines[0] == "t,u,d_u"
    assert len(lines) == len(tr.t) + 1


# examples on the reduced equations -----------------------------------------------------------

def test_a35half_zeta0_zero_sigma_constant():
    sol = solve_abel("A35Half", ModelParams(lam=1.0), 0.5, 2.0, 5.0)
    assert sol.status == "completed"
    assert np.all(sol.trajectory.y == 2.0)


def test_a34_abel_singular_event_reproducible():
    P = ModelParams(lam=1.0)
    a = solve_abel("A34", P, 1.0, 1.0, 0.01)
    b = solve_abel("A34", P, 1.0, 1.0, 0.01, rel_tol=5e-12, abs_tol=5e-14)
    assert a.status == b.status == "terminal_event"
    assert abs(a.events[-1].t - b.events[-1].t) <= 1e-9


def test_a34_abel_rhs_value():
    assert abel_rhs("A34", ModelParams(lam=1.0))(1.0, 1.0) == pytest.approx(1 + 0.75 + 2 ** (2 / 3), rel=1e-14)


# seed search --------------------------------------------------------------------------------

def test_a32_seed_certificate():
    P = ModelParams(lam=1.0)
    cert = ode.find_nondegenerate_seed("A32", P)
    F, w = cert.state["F"], cert.state["w"]
    assert -1 <= F <= 1 and -1 <= w <= 1
    D = discriminant_closed_form("A32", P, {"F": F, "w": w}).D
    assert D == pytest.approx(cert.D, rel=1e-12)
    assert abs(cert.normalized_D) > 1e-6
    assert abs(3 * F + w) > 1e-9
    assert cert.rhs_finite
    assert set(cert.as_dict()) >= {"state", "D", "normalized_D", "margin", "distances"}


def test_a34_seed_never_on_q_zero():
    cert = ode.find_nondegenerate_seed("A34", ModelParams(lam=1.0))
    assert abs(cert.state["Q"]) > 1e-9


def test_a32_zero_line_never_qualifies():
    from pke_lab.symmetry_cases.seeds import make_score
    score = make_score("A32", ModelParams(lam=1.0))
    for F in np.linspace(-0.3, 0.3, 13):
        s = score({"F": float(F), "w": float(-3 * F)})
        assert s is None or abs(s[1]) <= 1e-6
    with pytest.raises(SeedExhaustionError):
        ode.grid_seed_search(lambda p: score({"F": p["F"], "w": -3 * p["F"]}), {"F": (-0.3, 0.3)}, samples=11)


def test_grid_search_prefers_far_from_zero_locus():
    cert = ode.grid_seed_search(lambda p: (p["a"], p["a"]), {"a": (-1.0, 1.0)}, samples=21)
    assert abs(cert.state["a"]) == pytest.approx(1.0)
