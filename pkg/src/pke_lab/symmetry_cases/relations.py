"""Coordinate relations: recover the profile argument from an Abel trajectory.

Each relation is a quadrature of an expression in (t, Sigma(t)) over the
stored dense output of a :class:`ReducedSolution` of kind "abel".
"""
import math

import numpy as np
from scipy.integrate import quad

from .. import jets as J
from ..errors import AbelSingularityError, DomainError
from . import reductions as red
from .params import normalize_tag

QUAD_ABS = 1e-10


def _sigma(sol, t):
    return float(sol(t)[0])


def _guard_path(sol, a, b, floor=1e-10):
    """Refuse quadratures whose path comes close to Sigma = 0."""
    if a == b:
        return
    lo, hi = min(a, b), max(a, b)
    mesh = sol.mesh()
    pts = np.concatenate([[lo, hi], mesh[(mesh > lo) & (mesh < hi)], np.linspace(lo, hi, 65)])
    sig = np.array([_sigma(sol, t) for t in pts])
    scale = max(1.0, float(np.max(np.abs(sig))))
    k = int(np.argmin(np.abs(sig)))
    if abs(sig[k]) <= floor * scale or np.any(np.sign(sig) != np.sign(sig[0])):
        raise AbelSingularityError(float(sig[k]),
                                   f"quadrature path [{lo}, {hi}] passes through Sigma = 0 near t={pts[k]!r}")


def _integral(sol, f, a, b):
    if a == b:
        return 0.0
    _guard_path(sol, a, b)
    lo, hi = min(a, b), max(a, b)
    mesh = sol.mesh()
    brk = np.sort(mesh[(mesh > lo) & (mesh < hi)])
    # break at mesh points (the interpolant is only piecewise smooth)
    total, edges = 0.0, np.concatenate([[lo], brk, [hi]])
    for u, v in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda t: f(t, _sigma(sol, t)), u, v, epsabs=QUAD_ABS / len(edges), epsrel=1e-13,
                      limit=200)
        total += val
    return total if b >= a else -total


def _a37_factor(params):
    return params.alpha0**2 * 2.0 ** (8.0 / 3.0) / 3.0


def coordinate_relation(tag, params, solution, inputs):
    """Left side of the case's coordinate relation.

    ``inputs`` holds the Abel variable at the end of the path ("r" or "w"),
    optionally the start "r0"/"w0" (default: the trajectory start) and an
    integration constant "constant".  For A32 also "y".

    Returned quantity per case:
      A34:  x y                                 (constant multiplies)
      A36:  x^2 + y^2                           (constant multiplies)
      A37:  (x^2 + y^2) exp(2 alpha0 atan(x/y)) (constant multiplies)
      A35:  y^m0 / x                            (constant multiplies)
      A32:  x                                   (constant adds y * constant)
    """
    tag = normalize_tag(tag)
    if solution.kind != "abel":
        raise ValueError("coordinate relations integrate an Abel trajectory")
    t0 = solution.trajectory.t0
    if tag == "A32":
        w, y = float(inputs["w"]), float(inputs["y"])
        w0 = float(inputs.get("w0", t0))
        if y <= 0:
            raise DomainError("A32 needs y > 0")
        I = _integral(solution, lambda t, S: (12 * t + 1) * (3 * t + 1) / (3 * S), w0, w)
        return -y * math.log(y) + y * (4 * w - I) + y * float(inputs.get("constant", 0.0))
    r = float(inputs["r"])
    r0 = float(inputs.get("r0", t0))
    if r <= 0 or r0 <= 0:
        raise DomainError("r must be positive")
    const = float(inputs.get("constant", 1.0))
    if tag in ("A34", "A36"):
        I = _integral(solution, lambda t, S: 1.0 / S, r0, r)
        return const * r ** (2.0 / 3.0) * math.exp(-I)
    if tag == "A37":
        k = _a37_factor(params)
        I = _integral(solution, lambda t, S: (1 + k * t ** (-4.0 / 3.0)) / S, r0, r)
        return const * r ** (2.0 / 3.0) * math.exp(-I)
    if tag == "A35":
        m = params.m0
        abel = red.abel_rhs(tag, params)

        def integrand(t, S):
            g, s = red.g_s_from_abel(tag, params, t, S)
            # dg/dr along the trajectory, with Sigma' from the Abel equation
            dS = abel(t, S)
            return _dg_dr(params, t, S, dS) / (s + 3 * g / (1 - m))

        I = _integral(solution, integrand, r0, r)
        return const * math.exp(I)
    raise ValueError(f"no coordinate relation for {tag}")


def _dg_dr(params, r, S, dS):
    """Exact derivative of g(r, Sigma(r)) for A35."""
    m = params.m0
    c = J.cbrt_signed(m - 1)
    k = (m + 2) * (2 * m + 1)
    ds = -(4.0 / 3.0) * c**8 / (2.0 ** (4.0 / 3.0) * r ** (7.0 / 3.0))
    return ((m - 1) ** 2 * (dS / (2 * r) - S / (2 * r * r)) - (1 - m**3) * ds) / k


def relation_integrand(tag, params):
    """Integrand of the relation as a function of (t, Sigma), for checks."""
    tag = normalize_tag(tag)
    if tag == "A32":
        return lambda t, S: (12 * t + 1) * (3 * t + 1) / (3 * S)
    if tag in ("A34", "A36"):
        return lambda t, S: 1.0 / S
    if tag == "A37":
        k = _a37_factor(params)
        return lambda t, S: (1 + k * t ** (-4.0 / 3.0)) / S
    raise ValueError(tag)
