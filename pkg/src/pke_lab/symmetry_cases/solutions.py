"""Integrated reduced equations with dense output."""
from dataclasses import dataclass

import numpy as np

from ..errors import ExtrapolationError
from ..ode_engine import Event, IntegratorConfig, integrate
from . import reductions as red
from .params import normalize_tag, validate


@dataclass
class ReducedSolution:
    tag: str
    params: object
    kind: str            # "profile", "abel", "autonomous" or "q_of_g"
    variable: str
    channels: tuple
    trajectory: object
    system: object = None

    @property
    def validity(self):
        return self.trajectory.interval

    @property
    def events(self):
        return self.trajectory.events

    @property
    def status(self):
        return self.trajectory.status

    def check(self, t):
        lo, hi = self.validity
        if not lo <= t <= hi:
            raise ExtrapolationError(
                f"{self.variable}={t!r} outside the validity interval [{lo}, {hi}] of the {self.tag} {self.kind} solution")

    def __call__(self, t):
        self.check(t)
        return self.trajectory(t)

    def derivative(self, t):
        self.check(t)
        return self.trajectory.derivative(t)

    def state(self, t):
        return dict(zip(self.channels, self(t).tolist()))

    def mesh(self):
        return self.trajectory.t

    def to_csv(self, target=None):
        return self.trajectory.to_csv(target, names=self.channels)


def _config(rel_tol, abs_tol, max_step, events):
    return IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, max_step=max_step, events=tuple(events))


def _factor_events(factor, t0, state0, name, guard):
    """A sign change of the leading factor, and its approach to zero.

    At a fold the factor touches zero without changing sign and the
    solution's derivative blows up, so a terminal event also fires once
    |factor| falls below ``guard`` times its initial size.
    """
    f0 = abs(factor(t0, np.asarray(state0, dtype=float)))
    events = [Event(factor, terminal=True, name=f"singular: {name}")]
    if guard > 0 and f0 > 0:
        events.append(Event(lambda t, y: abs(factor(t, y)) - guard * f0, terminal=True, direction=-1,
                            name=f"near-singular: |{name}| < {guard:g} x initial"))
    return events


def solve_profile(tag, params, t0, state0, span_end, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf,
                  extra_events=(), singular_guard=1e-3):
    """Integrate the profile equation from (t0, state0) to span_end.

    The leading factor of the solved-for derivative drives terminal events,
    so the validity interval stops short of the singular locus.
    """
    tag = validate(tag, params)
    system = red.profile_system(tag, params)
    events = _factor_events(system.factor_event, t0, state0, system.factor_name, singular_guard)
    if system.variable == "v" or tag == "A35":
        events.append(Event(lambda t, y: t, terminal=True, name="independent variable hits 0"))
    events.extend(extra_events)
    tr = integrate(system, state0, (t0, span_end), _config(rel_tol, abs_tol, max_step, events))
    return ReducedSolution(tag, params, "profile", system.variable, system.channels, tr, system)


def solve_abel(tag, params, t0, sigma0, span_end, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf,
               sigma_guard=1e-4):
    """Integrate the Abel form; Sigma = 0 is a fold, so it is caught by a guard on |Sigma|."""
    tag = normalize_tag(tag)
    system = red.AbelSystem(tag, params)
    events = [Event(lambda t, y: y[0], terminal=True, name="Sigma = 0")]
    if sigma_guard > 0 and sigma0 != 0:
        s0 = abs(float(sigma0))
        events.append(Event(lambda t, y: abs(y[0]) - sigma_guard * s0, terminal=True, direction=-1,
                            name=f"near-singular: |Sigma| < {sigma_guard:g} x initial"))
    if system.variable == "r":
        events.append(Event(lambda t, y: t, terminal=True, name="r = 0"))
    tr = integrate(system, [sigma0], (t0, span_end), _config(rel_tol, abs_tol, max_step, events))
    return ReducedSolution(tag, params, "abel", system.variable, system.channels, tr, system)


def solve_autonomous(tag, params, w0, state0, span_end, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf,
                     singular_guard=1e-3):
    system = red.autonomous_rhs(tag, params)
    events = _factor_events(lambda t, y: system.leading_factor(t, *y), w0, state0,
                            "autonomous leading factor", singular_guard)
    tr = integrate(system, state0, (w0, span_end), _config(rel_tol, abs_tol, max_step, events))
    return ReducedSolution(system.tag, params, "autonomous", "w", system.channels, tr, system)


def solve_q_of_g(tag, params, g0, Q0, span_end, rel_tol=1e-11, abs_tol=1e-13, max_step=np.inf):
    f = red.q_of_g_rhs(tag, params)
    tr = integrate(lambda g, y: np.array([f(g, y[0])]), [Q0], (g0, span_end),
                   _config(rel_tol, abs_tol, max_step, ()))
    return ReducedSolution(normalize_tag(tag), params, "q_of_g", "g", ("Q",), tr, f)
