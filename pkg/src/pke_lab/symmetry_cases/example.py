"""The explicit A35Half example with zeta0 = 0.

Here Sigma is constant and the inverse profile is

    Z(w) = z0 w^-3 (12 w + Lambda)^(5/2),      Omega = Z^{-1}.

The key function is Theta = y F(y x^2) with F' = Omega; the value of F is a
gauge (it shifts Theta by a multiple of y, which drops out of every
curvature quantity) and is fixed here so that F vanishes at a reference
point of each branch.
"""
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .. import jets as J
from ..errors import BranchError, DomainError
from ..quartic_weyl import DEGENERATE, I_C, I_R, I_RC
from .closed_forms import d_poly_coeffs, p_poly_coeffs, r_poly_coeffs
from .keyfunc import KeyFunctionField, classify_in_frames, level_frame
from .params import ModelParams


def _example_params(params):
    if params.lam == 0:
        raise DomainError("lambda must be nonzero")
    if params.z0 is None or params.z0 == 0:
        raise DomainError("z0 must be nonzero")
    return ModelParams(lam=params.lam, zeta0=0.0, z0=params.z0)


@dataclass(frozen=True)
class Branch:
    lo: float
    hi: float

    def contains(self, w):
        return self.lo < w < self.hi

    def reference(self):
        if math.isinf(self.hi):
            return self.lo + max(1.0, abs(self.lo))
        return 0.5 * (self.lo + self.hi)


class ExampleField:
    def __init__(self, params):
        self.params = _example_params(params)
        self.lam = self.params.lam
        self.z0 = self.params.z0
        self.w_z = -self.lam / 12
        self._crit = None

    # Z and its derivatives -------------------------------------------------
    def check_domain(self, w):
        if not 12 * w + self.lam > 0:
            raise DomainError(f"12w + Lambda must be positive, got w={w!r}")
        if w == 0:
            raise DomainError("w = 0 is a pole of Z")

    def Z(self, w):
        self.check_domain(w)
        return self.z0 * w**-3 * (12 * w + self.lam) ** 2.5

    def Z_derivs(self, w):
        """Z, Z', ..., Z'''' at w (exact, via univariate jets)."""
        self.check_domain(w)
        wj = J.seed(w, 0.0, "x")
        Zj = self.z0 * J.power(wj, -3) * J.power(12 * wj + self.lam, 2.5)
        return Zj.coeff[:, 0].copy()

    def dZ(self, w):
        # closed form of the derivative, used for branch bookkeeping
        Z = self.Z(w)
        return -3 * Z * (2 * w + self.lam) / (w * (12 * w + self.lam))

    # branches ---------------------------------------------------------------
    def critical_points(self):
        """Zeros of Z' in the domain, located by sign scan and bracketing."""
        if self._crit is not None:
            return self._crit
        pieces = [(self.w_z, 0.0), (0.0, math.inf)] if self.w_z < 0 else [(self.w_z, math.inf)]
        crit = []
        for lo, hi in pieces:
            hi_f = hi if math.isfinite(hi) else max(1e3 * abs(self.lam), 1e3)
            span = hi_f - lo
            s = np.concatenate([np.geomspace(1e-9, 1e-3, 60), np.linspace(1e-3, 1 - 1e-9, 4000)])
            grid = lo + span * s
            if hi == 0.0:
                grid = grid[grid < -1e-12]
            vals = np.array([self.dZ(w) for w in grid])
            for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
                crit.append(brentq(self.dZ, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15))
        self._crit = tuple(sorted(crit))
        return self._crit

    def branches(self):
        cuts = sorted(set([self.w_z, math.inf] + ([0.0] if self.w_z < 0 else []) + list(self.critical_points())))
        return [Branch(a, b) for a, b in zip(cuts[:-1], cuts[1:])]

    def branch_of(self, w):
        for b in self.branches():
            if b.contains(w):
                return b
        raise BranchError(f"w={w!r} lies on no monotone branch", self.critical_points())

    def check_branch(self, lo, hi):
        """Raise unless Z is monotone on (lo, hi)."""
        inside = [c for c in self.critical_points() if lo < c < hi]
        if inside or (lo < 0 < hi):
            raise BranchError(f"Z is not monotone on ({lo}, {hi})", self.critical_points())
        return Branch(lo, hi)

    def omega(self, z, branch):
        """w on ``branch`` with Z(w) = z."""
        lo, hi = (branch.lo, branch.hi) if isinstance(branch, Branch) else branch
        branch = self.check_branch(lo, hi)
        f = lambda w: self.Z(w) - z
        ref = branch.reference()
        f_ref = f(ref)
        if f_ref == 0:
            return ref
        # Z is monotone here, so the residual changes sign at most once
        for end in (branch.lo, branch.hi):
            prev, f_prev = ref, f_ref
            for k in range(1, 400):
                if math.isfinite(end):
                    p = end + (ref - end) * 2.0**-k
                else:
                    p = ref + math.copysign(2.0**k, end)
                if not branch.contains(p) or p == prev:
                    break
                try:
                    fp = f(p)
                except (DomainError, OverflowError, ZeroDivisionError):
                    break
                if not math.isfinite(fp):
                    break
                if fp == 0:
                    return p
                if (fp < 0) != (f_prev < 0):
                    a, b = min(prev, p), max(prev, p)
                    return brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
                prev, f_prev = p, fp
        raise BranchError(f"z={z!r} is not in the image of Z on ({branch.lo}, {branch.hi})",
                          self.critical_points())

    def omega_derivs(self, w):
        """Omega, Omega', Omega'', Omega''' at z = Z(w)."""
        Z = self.Z_derivs(w)
        Z1, Z2, Z3 = Z[1], Z[2], Z[3]
        return np.array([w, 1 / Z1, -Z2 / Z1**3, (3 * Z2 * Z2 - Z1 * Z3) / Z1**5])

    def F_value(self, w):
        branch = self.branch_of(w)
        ref = branch.reference()
        integral, _ = quad(self.Z, ref, w, epsabs=1e-13, epsrel=1e-13, limit=200)
        return w * self.Z(w) - ref * self.Z(ref) - integral

    def F_derivs(self, w):
        """F, F', ..., F'''' at z = Z(w)."""
        return np.concatenate([[self.F_value(w)], self.omega_derivs(w)])

    # key function -----------------------------------------------------------
    def theta_jet_at_w(self, w, x, gauge_free=False, frame=None):
        """Jet of Theta at (x, y = Z(w)/x^2), optionally in a rotated frame."""
        if x == 0:
            raise DomainError("x must be nonzero")
        z = self.Z(w)
        y = z / (x * x)
        xj, yj = J.variables(x, y) if frame is None else J.frame_variables(x, y, frame)
        d = self.F_derivs(w) if not gauge_free else np.concatenate([[0.0], self.omega_derivs(w)])
        return yj * J.lift(d, yj * xj * xj)

    def key_function(self, branch=None):
        branch = branch or self.branches()[-1]

        def derivs(z):
            return self.F_derivs(self.omega(z, branch))

        return KeyFunctionField("A35Half", self.params, derivs)

    def classify_w(self, w, x=1.0, eps=1e-9):
        """FramedType at (x, Z(w)/x^2); see :func:`classify_in_frames`."""
        y = self.Z(w) / (x * x)
        frames = {"xy": None, "level": level_frame("A35Half", self.params, x, y)}
        return classify_in_frames(lambda M: self.theta_jet_at_w(w, x, True, M), frames, eps)


def example_field(params):
    return ExampleField(params)


# landmarks ---------------------------------------------------------------------

@dataclass(frozen=True)
class Landmarks:
    lam: float
    D_roots: tuple
    P_roots: tuple
    R_roots: tuple
    poles: tuple
    boundary: float

    def as_dict(self):
        return {"lambda": self.lam, "D_roots": list(self.D_roots), "P_roots": list(self.P_roots),
                "R_roots": list(self.R_roots), "poles": list(self.poles), "w_Z": self.boundary}


def _real_roots(coeffs):
    """Real roots of a polynomial, polished by bracketing."""
    coeffs = np.asarray(coeffs, dtype=float)
    cand = np.roots(coeffs)
    out = []
    for r in cand:
        if abs(r.imag) > 1e-7 * max(1.0, abs(r)):
            continue
        x = r.real
        d = 1e-6 * max(1.0, abs(x))
        a, b = x - d, x + d
        fa, fb = np.polyval(coeffs, a), np.polyval(coeffs, b)
        if fa * fb < 0:
            x = brentq(lambda t: np.polyval(coeffs, t), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        out.append(float(x))
    return tuple(sorted(out, reverse=True))


def example_landmarks(params):
    L = params.lam
    if L == 0:
        raise DomainError("lambda must be nonzero")
    s = 10 * math.sqrt(6.0)
    d_roots = tuple(sorted((L * (24.5 + s), L * (24.5 - s)), reverse=True))
    return Landmarks(L, d_roots, _real_roots(p_poly_coeffs(L)), _real_roots(r_poly_coeffs(L)),
                     tuple(sorted((0.0, -L / 2), reverse=True)), -L / 12)


# type ranges ----------------------------------------------------------------------

@dataclass
class TypeInterval:
    lo: float
    hi: float
    expected: str
    samples: int = 0
    agree: int = 0
    excluded: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    contradictions: list = field(default_factory=list)
    classified: list = field(default_factory=list)   # (w, tag) per sample

    @property
    def agreement(self):
        return self.agree / self.samples if self.samples else float("nan")

    def as_dict(self):
        return {"lo": self.lo, "hi": self.hi, "expected": self.expected, "samples": self.samples,
                "agree": self.agree, "agreement": self.agreement, "excluded": len(self.excluded),
                "counts": dict(self.counts), "contradictions": self.contradictions[:20]}


@dataclass
class TypeRanges:
    lam: float
    intervals: list
    threshold: float = 0.99

    @property
    def consistent(self):
        return all(iv.samples > 0 and iv.agreement >= self.threshold for iv in self.intervals)

    @property
    def total_samples(self):
        return sum(iv.samples for iv in self.intervals)

    def as_dict(self):
        return {"lambda": self.lam, "consistent": self.consistent, "threshold": self.threshold,
                "intervals": [iv.as_dict() for iv in self.intervals]}


def expected_intervals(params, w_max=None):
    """Intervals in w with the type printed for them."""
    L = params.lam
    lm = example_landmarks(params)
    if L > 0:
        w_max = w_max or 2.0 * lm.D_roots[0]
        w_d1, w_d2 = lm.D_roots
        return [(-L / 12, 0.0, I_C), (0.0, w_d2, I_C), (w_d2, w_d1, I_RC), (w_d1, w_max, I_C)]
    w_max = w_max or 100.0 * abs(L)
    return [(-L / 12, -L / 2, I_R), (-L / 2, w_max, I_C)]


def _sample_points(lo, hi, n):
    s = np.linspace(0.0, 1.0, n + 2)[1:-1]
    pts = lo + (hi - lo) * s
    # extra resolution towards both ends
    k = max(4, n // 8)
    t = np.geomspace(1e-5, 1e-2, k)
    pts = np.concatenate([pts, lo + (hi - lo) * t, hi - (hi - lo) * t])
    return np.unique(pts)


def type_ranges(params, samples_per_interval=300, w_max=None, band=2e-3, x=1.0, eps=1e-9,
                threshold=0.99):
    """Classify dense samples of each printed interval through the jet route."""
    ex = ExampleField(params)
    out = []
    for lo, hi, expected in expected_intervals(params, w_max):
        iv = TypeInterval(lo, hi, expected)
        counts = Counter()
        width = hi - lo
        for w in _sample_points(lo, hi, samples_per_interval):
            if min(w - lo, hi - w) < band * width:
                iv.excluded.append(float(w))
                continue
            tag = ex.classify_w(float(w), x, eps).tag
            iv.classified.append((float(w), tag))
            counts[tag] += 1
            iv.samples += 1
            if tag == expected:
                iv.agree += 1
            else:
                iv.contradictions.append((float(w), tag))
        iv.counts = dict(counts)
        out.append(iv)
    return TypeRanges(params.lam, out, threshold)


def boundary_tag(params, w, x=1.0, eps=1e-9):
    """Type at a landmark; exact landmarks of D give the Degenerate tag."""
    return ExampleField(params).classify_w(w, x, eps).tag


__all__ = ["ExampleField", "example_field", "example_landmarks", "Landmarks", "type_ranges",
           "TypeRanges", "TypeInterval", "expected_intervals", "boundary_tag", "Branch",
           "DEGENERATE", "I_R", "I_C", "I_RC"]
