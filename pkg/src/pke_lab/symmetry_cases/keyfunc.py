"""Key functions Theta(x, y) of each symmetry algebra as jet evaluators."""
import math
from dataclasses import dataclass

import numpy as np

from .. import jets as J
from ..errors import DomainError
from ..quartic_weyl import (DEFAULT_EPS, classify_real, discriminant_condition, invariants,
                            weyl_from_theta)
from . import reductions as red
from .params import normalize_tag, validate


def profile_argument(tag, params, x, y):
    """Jet (or float) of the profile argument for the case at (x, y)."""
    if tag == "A32":
        if J.value(y) <= 0:
            raise DomainError("A32 needs y > 0 (ln y)")
        return J.log(y) + x / y
    if tag == "A34":
        if J.value(x * y) <= 0:
            raise DomainError("A34 needs x y > 0 (v = sqrt(x y))")
        return J.sqrt(x * y)
    if tag == "A36":
        return J.sqrt(x * x + y * y)
    if tag == "A37":
        if J.value(y) == 0:
            raise DomainError("A37 needs y != 0 (atan(x/y))")
        a = J.atan(x / y)
        return J.sqrt((x * x + y * y) * J.exp(2 * params.alpha0 * a))
    if tag == "A35":
        if J.value(y) <= 0:
            raise DomainError("A35 needs y > 0 (fractional power of y)")
        if J.value(x) == 0:
            raise DomainError("A35 needs x != 0 (z = y^m0 / x)")
        return J.power(y, params.m0) / x
    if tag == "A35Half":
        return y * x * x
    raise ValueError(f"no profile argument for {tag}")


def assemble_theta(tag, params, x, y, prof):
    """Theta from the case formula given prof = profile composed with its argument."""
    L = params.lam
    if tag == "A32":
        return (L / 3) * y**4 * prof
    if tag == "A34":
        return (4 * L / 3) * prof
    if tag == "A36":
        return -(L / 3) * prof
    if tag == "A37":
        return -(L / 3) * J.exp(-4 * params.alpha0 * J.atan(x / y)) * prof
    if tag == "A35":
        return J.power(y, 2 + 2 * params.m0) * prof
    if tag == "A35Half":
        th = y * prof
        if params.zeta0:
            if J.value(y) <= 0:
                raise DomainError("A35Half with zeta0 != 0 needs y > 0 (ln y)")
            th = th + params.zeta0 * y * J.log(y)
        return th
    raise ValueError(tag)


def a33_theta(params, x, y):
    F0, G0, L = params.F0, params.G0, params.lam
    inner = F0 * (x + G0 * y) ** 2 + L * y * y / (48 * F0)
    return inner * inner


class KeyFunctionField:
    """Evaluator (x, y) -> Jet2 of Theta."""

    def __init__(self, tag, params, profile_derivs=None, solution=None):
        self.tag = tag
        self.params = params
        self._derivs = profile_derivs
        self.solution = solution

    def argument(self, x, y):
        return profile_argument(self.tag, self.params, float(x), float(y))

    def jet(self, x, y, frame=None):
        """Jet of Theta at (x, y); with ``frame`` the slots follow its columns."""
        xj, yj = J.variables(x, y) if frame is None else J.frame_variables(x, y, frame)
        if self.tag == "A33":
            return a33_theta(self.params, xj, yj)
        arg = profile_argument(self.tag, self.params, xj, yj)
        d = self._derivs(arg.value)
        return assemble_theta(self.tag, self.params, xj, yj, J.lift(d, arg))

    __call__ = jet

    def value(self, x, y):
        return self.jet(x, y).value

    def classify(self, x, y, eps=DEFAULT_EPS):
        """Type at (x, y) from the better conditioned of the coordinate and level frames."""
        frames = {"xy": None}
        if self.tag != "A33":
            frames["level"] = level_frame(self.tag, self.params, x, y)
        return classify_in_frames(lambda M: self.jet(x, y, M), frames, eps)


def level_frame(tag, params, x, y):
    """Rotation whose second column is tangent to the level set of the profile argument."""
    xj, yj = J.variables(float(x), float(y))
    arg = profile_argument(tag, params, xj, yj)
    g = np.array([J.partial(arg, 1, 0), J.partial(arg, 0, 1)])
    n = float(np.hypot(*g))
    if n == 0:
        return np.eye(2)
    a, b = g / n
    return np.array([[a, -b], [b, a]])


@dataclass(frozen=True)
class FramedType:
    """Type with the frame it was decided in and the condition number of D there."""
    petrov: object
    invariants: object
    frame: str
    condition: float

    @property
    def tag(self):
        return self.petrov.tag


def classify_in_frames(build, frames, eps=DEFAULT_EPS):
    """Classify the quartic of ``build(M)`` in the frame where D is best conditioned.

    I, J and D are invariant under the rotations used here and the tag is
    invariant under any real frame change, so only round-off differs.
    """
    best = None
    for name, M in frames.items():
        q = weyl_from_theta(build(M))
        kappa = discriminant_condition(q)
        if best is None or kappa < best[2]:
            best = (q, name, kappa)
    q, name, kappa = best
    inv = invariants(q)
    return FramedType(classify_real(inv, eps), inv, name, kappa)


def key_function(tag, params, solution=None):
    """Key-function field backed by an integrated profile (None for A33)."""
    tag = validate(tag, params)
    if tag == "A33":
        return KeyFunctionField(tag, params)
    if solution is None:
        raise ValueError(f"{tag} needs a profile solution")
    system = red.profile_system(tag, params)

    def derivs(t):
        state = solution(t)
        return red.profile_derivatives(system, t, state)

    return KeyFunctionField(tag, params, derivs, solution)


def local_key_function(tag, params, t0, state0):
    """Key function from the Taylor expansion of the local solution through (t0, state0).

    Only valid where the profile argument equals t0; used for seed
    certificates and closed-form checks that need no integration.
    """
    tag = validate(tag, params)
    system = red.profile_system(tag, params)
    d = red.profile_derivatives(system, t0, state0)

    def derivs(t):
        if not math.isclose(t, t0, rel_tol=1e-12, abs_tol=1e-12):
            raise DomainError(f"local expansion at {t0!r} evaluated at {t!r}")
        return d

    return KeyFunctionField(tag, params, derivs)


def base_point(tag, params, t):
    """A convenient (x, y) whose profile argument equals t."""
    if tag == "A32":
        return t, 1.0                    # ln 1 + x/1
    if tag == "A34":
        if t <= 0:
            raise DomainError("v must be positive")
        return t, t                      # sqrt(t*t)
    if tag == "A36":
        if t <= 0:
            raise DomainError("v must be positive")
        return 0.6 * t, 0.8 * t
    if tag == "A37":
        if t <= 0:
            raise DomainError("v must be positive")
        return 0.0, t                    # atan(0) = 0
    if tag == "A35":
        if t == 0:
            raise DomainError("z must be nonzero")
        return 1.0 / t, 1.0              # 1^m0 / x
    if tag == "A35Half":
        return 1.0, t                    # t * 1^2
    raise ValueError(tag)
