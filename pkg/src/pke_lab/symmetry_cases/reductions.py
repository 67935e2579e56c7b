"""Reduced ordinary differential equations for each symmetry algebra.

Every equation is written once with the generic elementary functions of
:mod:`pke_lab.jets`, so it evaluates on floats (for the integrator) and on
univariate jets (for exact Taylor expansion of a local solution).

Profile equations (state = profile and its first derivative):

* A32  F(z):  (Fz + 12F - 1) Fzz = 9Fz^2 + 4Fz + 3F
* A34, A36  T(v):  (Tv + v^3) Tvv = 3v^2 Tv - 3v T
* A37  T(v):  (8a^2 T/v + (1+a^2) Tv + v^3) Tvv
              = 16a^2 (T^2/v^3 + Tv^2/v - 2 T Tv/v^2) + 3v^2 Tv - 3v T
* A35  F(z):  the generic-m0 equation, solved for Fzz
* A35Half  (F, Omega)(z): F' = Omega and the first-order Omega equation
"""
import math

import numpy as np

from .. import jets as J
from ..errors import AbelSingularityError, DomainError, SingularStateError
from .params import normalize_tag

_TWO13 = 2.0 ** (1 / 3)
_TWO23 = 2.0 ** (2 / 3)
_TWO43 = 2.0 ** (4 / 3)
_TWO83 = 2.0 ** (8 / 3)


def _guard(den, name, scale=1.0):
    d = J.value(den)
    if not math.isfinite(d) or abs(d) <= 1e-300 + 1e-14 * abs(scale):
        raise SingularStateError(name, d)


class ProfileSystem:
    """Reduced equation for a profile function, as a first-order system."""

    tag = None
    variable = "z"
    channels = ("F", "Fz")
    factor_name = ""

    def __init__(self, params):
        self.params = params

    # subclasses implement highest(t, u, du) (or the first-order variant)
    def leading_factor(self, t, *state):
        raise NotImplementedError

    def highest(self, t, *state):
        raise NotImplementedError

    def generic_rhs(self, t, state):
        u, du = state
        return (du, self.highest(t, u, du))

    def __call__(self, t, y):
        return np.array([J.value(v) for v in self.generic_rhs(t, tuple(y))])

    def factor_event(self, t, y):
        return J.value(self.leading_factor(t, *y))


class A32Profile(ProfileSystem):
    tag = "A32"
    factor_name = "Fz + 12F - 1"

    def leading_factor(self, z, F, Fz):
        return Fz + 12 * F - 1

    def highest(self, z, F, Fz):
        den = self.leading_factor(z, F, Fz)
        _guard(den, self.factor_name)
        return (9 * Fz * Fz + 4 * Fz + 3 * F) / den


class A34Profile(ProfileSystem):
    tag = "A34"
    variable = "v"
    channels = ("T", "Tv")
    factor_name = "Tv + v^3"

    def leading_factor(self, v, T, Tv):
        return Tv + v * v * v

    def highest(self, v, T, Tv):
        den = self.leading_factor(v, T, Tv)
        _guard(den, self.factor_name)
        return (3 * v * v * Tv - 3 * v * T) / den


class A36Profile(A34Profile):
    tag = "A36"


class A37Profile(ProfileSystem):
    tag = "A37"
    variable = "v"
    channels = ("T", "Tv")
    factor_name = "8 alpha0^2 T/v + (1 + alpha0^2) Tv + v^3"

    def leading_factor(self, v, T, Tv):
        a2 = self.params.alpha0**2
        return 8 * a2 * T / v + (1 + a2) * Tv + v * v * v

    def highest(self, v, T, Tv):
        a2 = self.params.alpha0**2
        den = self.leading_factor(v, T, Tv)
        _guard(den, self.factor_name)
        num = (16 * a2 * (T * T / (v * v * v) + Tv * Tv / v - 2 * T * Tv / (v * v))
               + 3 * v * v * Tv - 3 * v * T)
        return num / den


class A35Profile(ProfileSystem):
    tag = "A35"
    factor_name = "z^3 (m0(m0-1) z^2 Fz + (2m0+1)(2m0+2) z F) - (Lambda/3)(m0-1)^2 z^2"

    def leading_factor(self, z, F, Fz):
        m, L3 = self.params.m0, self.params.lam / 3
        return (z**3 * (m * (m - 1) * z * z * Fz + (2 * m + 1) * (2 * m + 2) * z * F)
                - L3 * (m - 1) ** 2 * z * z)

    def highest(self, z, F, Fz):
        m, L3 = self.params.m0, self.params.lam / 3
        den = self.leading_factor(z, F, Fz)
        _guard(den, self.factor_name)
        rest = (z**3 * ((2 * m + 1) * (2 * m + 2) * 2 * F * Fz + (m * m - 6 * m - 4) * z * Fz * Fz)
                + L3 * ((1 - 2 * m) * (1 + 2 * m) * F - (m - 1) * (5 * m - 1) * z * Fz))
        return -rest / den


class A35HalfProfile(ProfileSystem):
    """State (F, Omega) with F' = Omega; Omega solves a first-order equation."""

    tag = "A35Half"
    channels = ("F", "Omega")
    factor_name = "6 z^2 Omega - 4 zeta0 z + 3 Lambda z^2"

    def leading_factor(self, z, F, Om):
        zeta, L = self.params.zeta0, self.params.lam
        return 6 * z * z * Om - 4 * zeta * z + 3 * L * z * z

    def highest(self, z, F, Om):
        """Omega_z."""
        zeta, L = self.params.zeta0, self.params.lam
        den = self.leading_factor(z, F, Om)
        _guard(den, self.factor_name)
        return -(12 * z * Om * Om - 2 * zeta * Om + L * z * Om - (2.0 / 3.0) * L * zeta) / den

    def generic_rhs(self, t, state):
        F, Om = state
        return (Om, self.highest(t, F, Om))


_PROFILES = {"A32": A32Profile, "A34": A34Profile, "A35": A35Profile,
             "A35Half": A35HalfProfile, "A36": A36Profile, "A37": A37Profile}


def profile_system(tag, params):
    tag = normalize_tag(tag)
    if tag == "A33":
        raise ValueError("A33 has a closed-form key function and no reduced equation")
    return _PROFILES[tag](params)


def second_order_rhs(tag, params):
    """Evaluator ``(t, u, du) -> highest derivative`` (first order for A35Half)."""
    return profile_system(tag, params).highest


# Taylor expansion of local solutions ----------------------------------------

def _integrate_x(a, c):
    t = np.zeros_like(a.t)
    t[0, 0] = c
    for i in range(J.ORDER):
        t[i + 1, 0] = a.t[i, 0] / (i + 1)
    return J.Jet2(a.base_x, a.base_y, t)


def taylor_derivatives(system, t0, state0):
    """Derivatives d^k y_i/dt^k at t0, k = 0..4, for each state channel.

    Picard iteration on univariate jets: each pass fixes one more order.
    """
    tv = J.seed(t0, 0.0, "x")
    Y = [J.constant(t0, 0.0, float(v)) for v in state0]
    for _ in range(J.N):
        F = system.generic_rhs(tv, tuple(Y))
        Y = [_integrate_x(f if isinstance(f, J.Jet2) else J.constant(t0, 0.0, f), y0)
             for f, y0 in zip(F, state0)]
    return [y.coeff[:, 0].copy() for y in Y]


def profile_derivatives(system, t0, state0):
    """u, u', ..., u'''' of the profile (first state channel)."""
    return taylor_derivatives(system, t0, state0)[0]


# autonomous and Q(g) forms ----------------------------------------------------

class AutonomousSystem:
    """g(w) equations; A34/A36/A37 use T = v^4 g(ln v), A35 uses F = (Lambda/3) z^-2 g(ln z)."""

    variable = "w"
    channels = ("g", "gw")

    def __init__(self, tag, params):
        self.tag = normalize_tag(tag)
        if self.tag not in ("A34", "A35", "A36", "A37"):
            raise ValueError(f"no autonomous g-form for {self.tag}")
        self.params = params

    def leading_factor(self, w, g, g1):
        if self.tag == "A35":
            m = self.params.m0
            return m * (m - 1) * g1 + 2 * (m * m + 4 * m + 1) * g - (m - 1) ** 2
        a2 = (self.params.alpha0 or 0.0) ** 2 if self.tag == "A37" else 0.0
        return 1 + 4 * g + g1 + a2 * (g1 + 12 * g)

    def highest(self, w, g, g1):
        den = self.leading_factor(w, g, g1)
        _guard(den, "autonomous leading factor")
        if self.tag == "A35":
            m = self.params.m0
            rest = (-10 * (m - 1) * g * g1 - (4 * m * m + m + 4) * g1 * g1
                    - 4 * (m - 1) * g1 - 12 * g * g - 3 * g)
        else:
            a2 = (self.params.alpha0 or 0.0) ** 2 if self.tag == "A37" else 0.0
            rest = 3 * g + 48 * g * g + 4 * g1 + 40 * g * g1 + 7 * g1 * g1 - 9 * a2 * g1 * g1
        return -rest / den

    def generic_rhs(self, t, state):
        g, g1 = state
        return (g1, self.highest(t, g, g1))

    def __call__(self, t, y):
        return np.array([J.value(v) for v in self.generic_rhs(t, tuple(y))])


def autonomous_rhs(tag, params):
    return AutonomousSystem(tag, params)


def q_shift(tag, params):
    """``g_w = Q + shift * g``."""
    tag = normalize_tag(tag)
    return 3.0 / (1.0 - params.m0) if tag == "A35" else -3.0


def q_of_g_rhs(tag, params):
    """Evaluator ``(g, Q) -> dQ/dg``."""
    tag = normalize_tag(tag)
    if tag in ("A34", "A36", "A37"):
        a2 = params.alpha0**2 if tag == "A37" else 0.0

        def rhs(g, Q):
            den = (Q - 3 * g) * (1 + g + Q + a2 * (Q + 9 * g))
            _guard(den, "(Q - 3g)(1 + g + Q + alpha0^2 (Q + 9g))")
            return -Q * (1 + 4 * g + 4 * Q - 12 * a2 * (Q - 3 * g)) / den
        return rhs
    if tag == "A35":
        m = params.m0
        k = (m + 2) * (2 * m + 1)

        def rhs(g, Q):
            den = ((2 * g * (m**3 - 1) - (m - 1) ** 3) * Q + (m - 1) ** 2 * m * Q * Q
                   + 3 * g * ((m - 1) ** 2 - g * k))
            _guard(den, "A35 Q_g coefficient")
            return -(4 * (1 - m**3) * Q * Q + (4 * g * k - (m - 1) ** 2) * Q) / den
        return rhs
    raise ValueError(f"no Q(g) form for {tag}")


# Abel equations ---------------------------------------------------------------

def _pos(r, name="r"):
    if J.value(r) <= 0:
        raise DomainError(f"{name} must be positive on the real branch, got {J.value(r)!r}")


def abel_rhs(tag, params):
    """Evaluator ``(t, Sigma) -> dSigma/dt`` for the Abel form of ``tag``."""
    tag = normalize_tag(tag)
    L = params.lam

    def check_sigma(S):
        if J.value(S) == 0:
            raise AbelSingularityError(0.0)

    if tag == "A32":
        def rhs(w, S):
            check_sigma(S)
            return ((10 * w + 4.0 / 3.0) * S - w * (12 * w + 1) * (3 * w + 1) / 3.0) / S
    elif tag in ("A34", "A36", "A37"):
        a2 = params.alpha0**2 if tag == "A37" else 0.0

        def rhs(r, S):
            _pos(r)
            check_sigma(S)
            h = 0.75 * r + _TWO23 * J.power(r, -1.0 / 3.0)
            if a2:
                h = h * (1 + a2 * _TWO83 / 3.0 * J.power(r, -4.0 / 3.0))
            return (S + h) / S
    elif tag == "A35":
        m = params.m0
        c = J.cbrt_signed(m - 1)
        k5 = 2.0 ** (-2.0 / 3.0) / 3.0 * (m + 1) ** 2 * c**16
        k1 = _TWO23 * m * c**5

        def rhs(r, S):
            _pos(r)
            check_sigma(S)
            return (S + 0.75 * r - k5 * J.power(r, -5.0 / 3.0) - k1 * J.power(r, -1.0 / 3.0)) / S
    elif tag == "A35Half":
        zeta = params.zeta0

        def rhs(w, S):
            u = 12 * w + L
            if J.value(u) <= 0:
                raise DomainError(f"12w + Lambda must be positive, got {J.value(u)!r}")
            check_sigma(S)
            f1 = 2 * zeta * w * (24 * w * w - 5 * L * L / 3) / J.power(u, 4.5)
            f0 = 12 * zeta**2 * w**3 * (w + L / 3) * (w - L / 3) * (6 * w + L) / J.power(u, 8)
            return f1 + f0 / S
    else:
        raise ValueError("A33 has no Abel form")
    return rhs


class AbelSystem:
    variable = "r"
    channels = ("Sigma",)

    def __init__(self, tag, params):
        self.tag = normalize_tag(tag)
        self.params = params
        self.rhs = abel_rhs(tag, params)
        if self.tag in ("A32", "A35Half"):
            self.variable = "w"

    def __call__(self, t, y):
        return np.array([self.rhs(t, y[0])])


def a32_canonical(w, S, branch=1.0):
    """Canonical variables (v, V) of the A32 Abel equation: v = 5w^2 + 4w/3."""
    v = 5 * w * w + 4 * w / 3
    return v, branch * math.sqrt(16.0 / 9.0 + 20 * v)


# maps between profile variables and Abel variables -------------------------

def g_q_from_profile(tag, params, t, state):
    """(g, Q) of the autonomous description at profile point t."""
    tag = normalize_tag(tag)
    u, du = state
    if tag in ("A34", "A36", "A37"):
        g = u / t**4
        return g, du / t**3 - g
    if tag == "A35":
        L3 = params.lam / 3
        g = t * t * u / L3
        gw = (2 * t * t * u + t**3 * du) / L3
        return g, gw - 3 * g / (1 - params.m0)
    raise ValueError(f"no (g, Q) description for {tag}")


def profile_from_g_q(tag, params, t, g, Q):
    """Inverse of :func:`g_q_from_profile` at profile point t."""
    tag = normalize_tag(tag)
    if tag in ("A34", "A36", "A37"):
        return g * t**4, (Q + g) * t**3
    if tag == "A35":
        L3 = params.lam / 3
        gw = Q + 3 * g / (1 - params.m0)
        return L3 * g / t**2, L3 * (gw - 2 * g) / t**3
    raise ValueError(f"no (g, Q) description for {tag}")


def abel_point(tag, params, t, state):
    """Map a profile state at t to (Abel variable, Sigma)."""
    tag = normalize_tag(tag)
    L = params.lam
    if tag == "A32":
        F, w = state
        return w, F + 4 * w / 3 + 3 * w * w
    if tag == "A35Half":
        z = t
        _, w = state
        u = 12 * w + L
        if u <= 0:
            raise DomainError("12w + Lambda must be positive")
        shift = 2 * params.zeta0 * (w + L / 3) / (12 * w * w + L * w) if params.zeta0 else 0.0
        return w, (z - shift) * w**3 / u**2.5
    g, Q = g_q_from_profile(tag, params, t, state)
    if Q <= 0:
        raise DomainError(f"Q must be positive for the Abel variable r, got {Q!r}")
    if tag in ("A34", "A36"):
        r = 0.5 * Q ** -0.75
        return r, -2 * r * (g + Q + 0.25)
    if tag == "A37":
        a2 = params.alpha0**2
        r = 0.5 * Q ** -0.75
        return r, -2 * r * ((1 + 9 * a2) * g + 0.25 + (1 - 3 * a2) * Q)
    if tag == "A35":
        m = params.m0
        c = J.cbrt_signed(m - 1)
        r = c**6 / (2 * Q**0.75)
        S = 2 * r * ((m + 2) * (2 * m + 1) * g + (1 - m**3) * Q - 0.25 * (m - 1) ** 2) / (m - 1) ** 2
        return r, S
    raise ValueError(f"no Abel form for {tag}")


def g_s_from_abel(tag, params, r, S):
    """(g, s) recovered from an Abel point; s plays the role of Q."""
    tag = normalize_tag(tag)
    if tag in ("A34", "A36", "A37"):
        s = 2.0 ** (-4.0 / 3.0) * r ** (-4.0 / 3.0)
        if tag == "A37":
            a2 = params.alpha0**2
            return -(S / (2 * r) + 0.25 + (1 - 3 * a2) * s) / (1 + 9 * a2), s
        return -S / (2 * r) - s - 0.25, s
    if tag == "A35":
        m = params.m0
        c = J.cbrt_signed(m - 1)
        s = c**8 / (_TWO43 * r ** (4.0 / 3.0))
        g = ((m - 1) ** 2 * S / (2 * r) - (1 - m**3) * s + 0.25 * (m - 1) ** 2) / ((m + 2) * (2 * m + 1))
        return g, s
    raise ValueError(f"no (g, s) recovery for {tag}")
