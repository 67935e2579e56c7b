"""Printed closed-form discriminants.

Where only a prefactor of a discriminant is available the result carries
``partial=True`` and ``D`` is ``None``; the prefactor still pins down the
zero and pole structure.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import PoleError
from .params import normalize_tag


@dataclass(frozen=True)
class ClosedForm:
    D: float
    P: float = None
    R: float = None
    partial: bool = False
    prefactor: float = None
    denominator: float = None


def _den(name, value, tol=0.0):
    if value == 0 or abs(value) <= tol or not math.isfinite(value):
        raise PoleError(name, value)
    return value


def d_a32(lam, F, w):
    den = _den("12F + w - 1", 12 * F + w - 1)
    p1 = (18144 * F**2 * w**2 + 10368 * F**3 * w + 1998 * F**2 * w + 1512 * F**3 - 135 * F**2
          + 1944 * F * w**4 + 7668 * F * w**3 - 225 * F * w**2 - 261 * F * w - 810 * w**5
          - 534 * w**4 - 727 * w**3 - 126 * w**2)
    p2 = (-979776 * F**2 * w**5 - 1119744 * F**3 * w**4 + 23112 * F**2 * w**4
          + 2066688 * F**3 * w**3 - 460440 * F**2 * w**3 + 6531840 * F**4 * w**2
          - 1186272 * F**3 * w**2 + 45333 * F**2 * w**2 + 7464960 * F**5 * w
          - 1425600 * F**4 * w + 84348 * F**3 * w - 3294 * F**2 * w + 2985984 * F**6
          - 622080 * F**5 + 46980 * F**4 - 2268 * F**3 + 81 * F**2 - 279936 * F * w**6
          - 84132 * F * w**5 - 72672 * F * w**4 + 14898 * F * w**3 - 144 * F * w**2
          + 162 * F * w + 26244 * w**8 + 26568 * w**7 + 35656 * w**6 + 17480 * w**5
          + 7333 * w**4 + 882 * w**3 + 81 * w**2)
    pre = 64 * lam**6 * (3 * F + w) ** 2 / den**16
    return ClosedForm(pre * p1 * p1 * p2, prefactor=pre, denominator=den)


def d_a34(lam, g, Q):
    den = _den("g + Q + 1", g + Q + 1)
    f1 = g * (g + 1) + 2 * (g - 1) * Q + Q * Q
    f2 = 2 * g * (g + 1) ** 2 + (6 * g * g + 2 * g - 1) * Q + 2 * (3 * g - 1) * Q * Q + 2 * Q**3
    f3 = (2 * g * (g + 1) ** 3 + (g + 1) * (8 * g * g + 10 * g - 1) * Q
          + 3 * (4 * g * g + 6 * g - 5) * Q * Q + 2 * (4 * g + 3) * Q**3 + 2 * Q**4)
    pre = 576 * lam**6 * Q * Q / den**16
    return ClosedForm(pre * f1**2 * f2**2 * f3**2, prefactor=pre, denominator=den)


def prefactor_a35(lam, m0, g, Q):
    den = _den("g(m0+2)(2m0+1) + (m0-1)(m0(Q-1)+1)",
               g * (m0 + 2) * (2 * m0 + 1) + (m0 - 1) * (m0 * (Q - 1) + 1))
    pre = 64 * lam**6 * m0**2 / (27 * (m0 - 1) ** 12 * den**18)
    return ClosedForm(None, partial=True, prefactor=pre, denominator=den)


def prefactor_a37(lam, alpha0, g, Q):
    den = _den("alpha0^2(9g+Q) + g + Q + 1", alpha0**2 * (9 * g + Q) + g + Q + 1)
    return ClosedForm(None, partial=True, prefactor=64 * lam**6 / (27 * den**18), denominator=den)


def prefactor_a35half(lam, zeta0, z, Om):
    den = _den("-4 zeta0 + 3 Lambda z + 6 z Omega", -4 * zeta0 + 3 * lam * z + 6 * z * Om)
    pre = 2359296 * lam**2 * (zeta0 + 3 * z * Om) ** 2 / den**16
    return ClosedForm(None, partial=True, prefactor=pre, denominator=den)


def discriminant_closed_form(tag, params, state):
    """Evaluate the printed closed form for ``tag`` at ``state`` (a mapping).

    A32 takes {F, w}; A34/A36/A35/A37 take {g, Q}; A35Half takes {z, Omega};
    the explicit example is requested with tag "example" and {w, x}.
    """
    key = str(tag).strip().lower()
    L = params.lam
    if key == "example":
        D, P, R = example_dpr(state["w"], state["x"], params)
        return ClosedForm(D, P, R)
    tag = normalize_tag(tag)
    if tag == "A32":
        return d_a32(L, state["F"], state["w"])
    if tag in ("A34", "A36"):
        return d_a34(L, state["g"], state["Q"])
    if tag == "A35":
        return prefactor_a35(L, params.m0, state["g"], state["Q"])
    if tag == "A37":
        return prefactor_a37(L, params.alpha0, state["g"], state["Q"])
    if tag == "A35Half":
        return prefactor_a35half(L, params.zeta0, state["z"], state["Omega"])
    # A33: degenerate for every choice of constants
    return ClosedForm(0.0)


# explicit example -------------------------------------------------------------

# R's degree-9 factor: coefficient of w^(9-k) is R_POLY[k] * Lambda^k
R_POLY = (1119744, 4665600, -16298496, -32908032, -13473216, -2372256, -114720, -1456, -138, 1)


def p_poly_coeffs(lam):
    """P's quartic factor in w, highest degree first."""
    return np.array([432.0, -1728 * lam, -1512 * lam**2, 400 * lam**3, 35 * lam**4])


def r_poly_coeffs(lam):
    return np.array([c * lam**k for k, c in enumerate(R_POLY)], dtype=float)


def d_poly_coeffs(lam):
    return np.array([4.0, -196 * lam, lam**2])


def example_dpr(w, x, params):
    L, z0 = params.lam, params.z0
    if w == 0:
        raise PoleError("w", w)
    if 12 * w + L == 0:
        raise PoleError("12w + Lambda", 0.0)
    if 2 * w + L == 0:
        raise PoleError("2w + Lambda", 0.0)
    if x == 0:
        raise PoleError("x", x)
    u, s = L + 12 * w, L + 2 * w
    D = 2**12 * 10**6 * L**6 * w**12 * u**2 * np.polyval(d_poly_coeffs(L), w) / s**16
    P = (-51200 * L * z0**2 * u**6 / (27 * w**2 * x**6 * s**8)) * np.polyval(p_poly_coeffs(L), w)
    R = (163840000 * L**2 * z0**4 * u**12 / (729 * w**6 * x**12 * s**15)) * np.polyval(r_poly_coeffs(L), w)
    return float(D), float(P), float(R)
