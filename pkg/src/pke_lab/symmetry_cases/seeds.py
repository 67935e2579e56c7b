"""Seed states for the reduced equations, certified nondegenerate."""
import dataclasses
import math

import numpy as np

from ..errors import DomainError, PkeLabError, PoleError
from ..ode_engine import grid_seed_search
from ..quartic_weyl import invariants, weyl_from_theta
from . import reductions as red
from .closed_forms import discriminant_closed_form
from .keyfunc import base_point, local_key_function
from .params import normalize_tag, validate

DEFAULT_BOXES = {
    "A32": {"F": (-1.0, 1.0), "w": (-1.0, 1.0)},
    "A34": {"g": (-1.0, 1.0), "Q": (-1.0, 1.0)},
    "A36": {"g": (-1.0, 1.0), "Q": (-1.0, 1.0)},
    "A37": {"g": (-1.0, 1.0), "Q": (-1.0, 1.0)},
    "A35": {"g": (-1.0, 1.0), "Q": (-1.0, 1.0)},
    "A35Half": {"z": (0.5, 2.0), "Omega": (-1.0, 1.0)},
}


def seed_to_state(tag, params, point):
    """(t0, profile state) for a seed given in the case's natural variables.

    A32 seeds are (F, w = Fz) at z = 0; v-cases and A35 seeds are (g, Q)
    at v = 1 or z = 1; A35Half seeds are (z, Omega) with F(z) = 0.
    """
    tag = normalize_tag(tag)
    if tag == "A32":
        return 0.0, (float(point["F"]), float(point["w"]))
    if tag in ("A34", "A36", "A37", "A35"):
        return 1.0, red.profile_from_g_q(tag, params, 1.0, float(point["g"]), float(point["Q"]))
    if tag == "A35Half":
        return float(point["z"]), (0.0, float(point["Omega"]))
    raise ValueError(f"{tag} has no reduced equation to seed")


def jet_discriminant(tag, params, t0, state):
    """(D, normalized D, invariants) from the local Taylor expansion at t0."""
    field = local_key_function(tag, params, t0, state)
    x, y = base_point(tag, params, t0)
    inv = invariants(weyl_from_theta(field.jet(x, y)))
    return inv.D, inv.normalized_D, inv


def printed_discriminant(tag, params, point):
    """Full printed D at a seed, or None where only a prefactor exists."""
    tag = normalize_tag(tag)
    try:
        if tag == "A32":
            return discriminant_closed_form(tag, params, {"F": point["F"], "w": point["w"]}).D
        if tag in ("A34", "A36"):
            return discriminant_closed_form(tag, params, {"g": point["g"], "Q": point["Q"]}).D
    except PoleError:
        return math.nan
    return None


def make_score(tag, params):
    tag = validate(tag, params)
    system = red.profile_system(tag, params)

    def score(point):
        try:
            t0, state = seed_to_state(tag, params, point)
            rhs = system(t0, np.asarray(state, dtype=float))
            if not np.all(np.isfinite(rhs)):
                return None
            D, nd, _ = jet_discriminant(tag, params, t0, state)
        except (PkeLabError, ArithmeticError, ValueError):
            return None
        if not (math.isfinite(D) and math.isfinite(nd)):
            return None
        printed = printed_discriminant(tag, params, point)
        if printed is not None:
            if not math.isfinite(printed):
                return None
            # both routes must agree on the sign before a point qualifies
            if printed * D < 0:
                return None
            return printed, nd
        return D, nd

    return score


def find_seed(case, params, box=None, samples=21, margin=1e-6):
    """Grid search for a nondegenerate seed; returns a SeedCertificate.

    The certificate's ``state`` holds the seed in the case's natural
    variables; ``seed_to_state`` turns it into an initial condition.
    """
    tag = validate(case, params)
    if tag == "A33":
        raise DomainError("A33 is degenerate for every choice of constants; nothing to seed")
    box = dict(box or DEFAULT_BOXES[tag])
    score = make_score(tag, params)
    cert = grid_seed_search(score, box, samples=samples, margin=margin)
    t0, state = seed_to_state(tag, params, cert.state)
    rhs = red.profile_system(tag, params)(t0, np.asarray(state, dtype=float))
    return dataclasses.replace(
        cert, rhs_finite=bool(np.all(np.isfinite(rhs))),
        notes=(f"{tag} seed at t0={t0!r}, profile state {tuple(float(s) for s in state)}",))


__all__ = ["DEFAULT_BOXES", "seed_to_state", "jet_discriminant", "printed_discriminant",
           "make_score", "find_seed"]
