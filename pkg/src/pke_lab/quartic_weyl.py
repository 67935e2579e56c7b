"""Weyl quartic: coefficients from key-function jets, invariants, type.

The binary quartic is

    c5 xi^4 + 4 c4 xi^3 + 6 c3 xi^2 + 4 c2 xi + c1

with ``c5 = 2 Theta_xxxx, ..., c1 = 2 Theta_yyyy``.  Classification by
invariants follows the real-slice criteria (D < 0: two real roots and a
complex pair; D > 0: four real roots iff P < 0 and R < 0, else none).
:func:`classify_by_roots` is an independent oracle that finds the roots of
the homogeneous form directly.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import UndefinedPatternError

I_R, I_C, I_RC, I_COMPLEX, DEGENERATE, UNRESOLVED = (
    "I_r", "I_c", "I_rc", "I_complex", "Degenerate", "Unresolved")
TAGS = (I_R, I_C, I_RC, DEGENERATE, UNRESOLVED)  # index = batch code

DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class QuarticCoefficients:
    c5: float
    c4: float
    c3: float
    c2: float
    c1: float

    def __post_init__(self):
        for name in ("c5", "c4", "c3", "c2", "c1"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"non-finite Weyl coefficient {name}={v!r}")

    @classmethod
    def from_sequence(cls, seq):
        vals = [float(v) for v in seq]
        if len(vals) != 5:
            raise ValueError(f"expected five coefficients, got {len(vals)}")
        return cls(*vals)

    def as_array(self):
        return np.array([self.c5, self.c4, self.c3, self.c2, self.c1])

    @property
    def magnitude(self):
        return float(np.max(np.abs(self.as_array())))

    def polynomial(self):
        """Coefficients in xi, highest degree first."""
        return np.array([self.c5, 4 * self.c4, 6 * self.c3, 4 * self.c2, self.c1])


@dataclass(frozen=True)
class QuarticInvariants:
    """I, J, D, P, R plus the magnitudes that set the tolerance bands.

    Each band is ``eps`` times the sum of absolute values of the terms that
    cancel in the quantity (``|I|^3 + 27 J^2`` for D).  Unlike ``max|c|``,
    these stay meaningful under the boosts that rescale c_k by t^(2k-6).
    """
    I: float
    J: float
    D: float
    P: float
    R: float
    d_scale: float = 1.0
    p_scale: float = 1.0
    r_scale: float = 1.0
    magnitude: float = 1.0  # max |c_i|, informational

    @property
    def scale(self):
        return self.d_scale

    @property
    def normalized_D(self):
        return self.D / self.d_scale if self.d_scale > 0 else 0.0


@dataclass(frozen=True)
class PetrovType:
    tag: str
    margin: float

    @property
    def is_general(self):
        return self.tag in (I_R, I_C, I_RC, I_COMPLEX)


def weyl_from_theta(theta):
    c = theta.coeff
    return QuarticCoefficients(2 * c[4, 0], 2 * c[3, 1], 2 * c[2, 2], 2 * c[1, 3], 2 * c[0, 4])


def _invariants_tuple(c5, c4, c3, c2, c1):
    I = c1 * c5 - 4 * c2 * c4 + 3 * c3 * c3
    J = c5 * (c3 * c1 - c2 * c2) - c4 * (c4 * c1 - c2 * c3) + c3 * (c4 * c2 - c3 * c3)
    D = I**3 - 27 * J * J
    P = 48 * (c3 * c5 - c4 * c4)
    R = 64 * (c1 * c5**3 - 9 * c3 * c3 * c5 * c5 + 24 * c3 * c5 * c4 * c4
              - 4 * c2 * c4 * c5 * c5 - 12 * c4**4)
    return I, J, D, P, R


def _scales_tuple(c5, c4, c3, c2, c1, I, J):
    a5, a4, a3, a2, a1 = abs(c5), abs(c4), abs(c3), abs(c2), abs(c1)
    ds = abs(I) ** 3 + 27 * J * J
    ps = 48 * (a3 * a5 + a4 * a4)
    rs = 64 * (a1 * a5**3 + 9 * a3 * a3 * a5 * a5 + 24 * a3 * a5 * a4 * a4
               + 4 * a2 * a4 * a5 * a5 + 12 * a4**4)
    return ds, ps, rs


def invariants(q):
    I, J, D, P, R = _invariants_tuple(q.c5, q.c4, q.c3, q.c2, q.c1)
    ds, ps, rs = _scales_tuple(q.c5, q.c4, q.c3, q.c2, q.c1, I, J)
    return QuarticInvariants(I, J, D, P, R, ds, ps, rs, q.magnitude)


def classify_real(inv, eps=DEFAULT_EPS):
    if eps < 0:
        raise ValueError("eps must be non-negative")
    margin = abs(inv.D) - eps * inv.d_scale
    if margin <= 0:
        return PetrovType(DEGENERATE, margin)
    if inv.D < 0:
        return PetrovType(I_RC, margin)
    p_band, r_band = eps * inv.p_scale, eps * inv.r_scale
    if inv.P < -p_band and inv.R < -r_band:
        return PetrovType(I_R, margin)
    if inv.P > p_band or inv.R > r_band:
        return PetrovType(I_C, margin)
    return PetrovType(UNRESOLVED, margin)


def classify_complex(inv, eps=DEFAULT_EPS):
    margin = abs(inv.D) - eps * inv.d_scale
    return PetrovType(I_COMPLEX if margin > 0 else DEGENERATE, margin)


def classify(q, eps=DEFAULT_EPS):
    return classify_real(invariants(q), eps)


def discriminant_condition(q):
    """Relative condition number of D with respect to the coefficients.

    sum_k |c_k dD/dc_k| / |D|; ``inf`` when D = 0.  Multiplied by the
    coefficients' relative error it bounds the relative error of D.
    """
    c5, c4, c3, c2, c1 = q.c5, q.c4, q.c3, q.c2, q.c1
    I, J, D, _, _ = _invariants_tuple(c5, c4, c3, c2, c1)
    dI = (c1, -4 * c2, 6 * c3, -4 * c4, c5)
    dJ = (c3 * c1 - c2 * c2, 2 * (c2 * c3 - c4 * c1), c5 * c1 + 2 * c2 * c4 - 3 * c3 * c3,
          2 * (c4 * c3 - c5 * c2), c5 * c3 - c4 * c4)
    s = sum(abs((3 * I * I * a - 54 * J * b) * c) for a, b, c in zip(dI, dJ, (c5, c4, c3, c2, c1)))
    return s / abs(D) if D != 0 else math.inf


# batch kernels ------------------------------------------------------------
# columns: I, J, D, P, R, d_scale, p_scale, r_scale

def _invariants_batch_loops(C):
    n = C.shape[0]
    out = np.empty((n, 8))
    for k in range(n):
        c5, c4, c3, c2, c1 = C[k, 0], C[k, 1], C[k, 2], C[k, 3], C[k, 4]
        I = c1 * c5 - 4 * c2 * c4 + 3 * c3 * c3
        J = c5 * (c3 * c1 - c2 * c2) - c4 * (c4 * c1 - c2 * c3) + c3 * (c4 * c2 - c3 * c3)
        out[k, 0] = I
        out[k, 1] = J
        out[k, 2] = I**3 - 27 * J * J
        out[k, 3] = 48 * (c3 * c5 - c4 * c4)
        out[k, 4] = 64 * (c1 * c5**3 - 9 * c3 * c3 * c5 * c5 + 24 * c3 * c5 * c4 * c4
                          - 4 * c2 * c4 * c5 * c5 - 12 * c4**4)
        a5, a4, a3, a2, a1 = abs(c5), abs(c4), abs(c3), abs(c2), abs(c1)
        out[k, 5] = abs(I) ** 3 + 27 * J * J
        out[k, 6] = 48 * (a3 * a5 + a4 * a4)
        out[k, 7] = 64 * (a1 * a5**3 + 9 * a3 * a3 * a5 * a5 + 24 * a3 * a5 * a4 * a4
                          + 4 * a2 * a4 * a5 * a5 + 12 * a4**4)
    return out


def _invariants_batch_numpy(C):
    c5, c4, c3, c2, c1 = C.T
    I, J, D, P, R = _invariants_tuple(c5, c4, c3, c2, c1)
    ds, ps, rs = _scales_tuple(c5, c4, c3, c2, c1, I, J)
    return np.column_stack([I, J, D, P, R, ds, ps, rs])


_invariants_batch_numba = _accel.njit(_invariants_batch_loops)


def _classify_batch_loops(C, eps):
    inv = _invariants_batch_numba(C)
    n = C.shape[0]
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        D, P, R = inv[k, 2], inv[k, 3], inv[k, 4]
        pb, rb = eps * inv[k, 6], eps * inv[k, 7]
        if abs(D) <= eps * inv[k, 5]:
            out[k] = 3
        elif D < 0:
            out[k] = 2
        elif P < -pb and R < -rb:
            out[k] = 0
        elif P > pb or R > rb:
            out[k] = 1
        else:
            out[k] = 4
    return out


def _classify_batch_numpy(C, eps):
    inv = _invariants_batch_numpy(C)
    D, P, R = inv[:, 2], inv[:, 3], inv[:, 4]
    db, pb, rb = eps * inv[:, 5], eps * inv[:, 6], eps * inv[:, 7]
    out = np.full(C.shape[0], 4, dtype=np.int64)
    pos = D > db
    real4 = pos & (P < -pb) & (R < -rb)
    none = pos & ((P > pb) | (R > rb))
    out[none] = 1
    out[real4] = 0
    out[D < -db] = 2
    out[np.abs(D) <= db] = 3
    return out


_classify_batch_numba = _accel.njit(_classify_batch_loops)
_invariants_batch = _accel.select(_invariants_batch_numba, _invariants_batch_numpy)
_classify_batch = _accel.select(_classify_batch_numba, _classify_batch_numpy)


def invariants_batch(C):
    """Columns I, J, D, P, R, d_scale, p_scale, r_scale for an (n, 5) array."""
    return _invariants_batch(np.ascontiguousarray(C, dtype=float))


def classify_batch(C, eps=DEFAULT_EPS):
    """Integer codes indexing :data:`TAGS`."""
    return _classify_batch(np.ascontiguousarray(C, dtype=float), float(eps))


# root-pattern oracle ------------------------------------------------------

_BINOM = np.array([1.0, 4.0, 6.0, 4.0, 1.0])


@dataclass(frozen=True)
class RootPattern:
    roots: tuple            # distinct roots in xi (complex, or math.inf)
    multiplicities: tuple   # same order as roots
    real_mask: tuple
    at_infinity: int
    chart_degenerate: bool
    rotation: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def n_real(self):
        return sum(m for m, r in zip(self.multiplicities, self.real_mask) if r)

    @property
    def signature(self):
        return tuple(sorted(self.multiplicities, reverse=True))

    @property
    def repeated(self):
        return max(self.multiplicities) > 1

    @property
    def tag(self):
        if self.repeated:
            return DEGENERATE
        return {4: I_R, 2: I_RC, 0: I_C}[self.n_real]


def _rotated_poly(c, theta):
    """Coefficients in t (highest first) of B(cos t - sin, sin t + cos)."""
    co, si = math.cos(theta), math.sin(theta)
    xi1 = np.array([co, -si])
    xi2 = np.array([si, co])
    out = np.zeros(5)
    for k in range(5):  # c[k] multiplies xi1^(4-k) xi2^k
        term = np.array([_BINOM[k] * c[k]])
        for _ in range(4 - k):
            term = np.polymul(term, xi1)
        for _ in range(k):
            term = np.polymul(term, xi2)
        out[5 - len(term):] += term
    return out


def _verify_cluster(poly, center, m, tol):
    derivs = [poly]
    for _ in range(m - 1):
        derivs.append(np.polyder(derivs[-1]))
    c = center
    top = derivs[-1]
    dtop = np.polyder(top)
    for _ in range(8):
        d = np.polyval(dtop, c) if len(dtop) else 0.0
        if d == 0:
            break
        step = np.polyval(top, c) / d
        c = c - step
        if abs(step) <= 1e-16 * max(1.0, abs(c)):
            break
    norm = np.sum(np.abs(poly)) * max(1.0, abs(c)) ** 4
    for k in range(m - 1):
        val = abs(np.polyval(derivs[k], c)) / math.factorial(k)
        if val > tol * norm:
            return False, center
    return True, c


def _cluster(roots, poly, tol):
    pending = [list(range(len(roots)))]
    radius = 1e-2
    clusters = []
    while pending:
        group = pending.pop()
        left = list(group)
        while left:
            i = left.pop(0)
            members = [i] + [j for j in left
                             if abs(roots[j] - roots[i]) <= radius * max(1.0, abs(roots[i]))]
            left = [j for j in left if j not in members]
            if len(members) == 1:
                clusters.append((roots[i], 1))
                continue
            center = np.mean([roots[j] for j in members])
            ok, polished = _verify_cluster(poly, center, len(members), tol)
            if ok:
                clusters.append((polished, len(members)))
            elif radius < 1e-12:
                clusters.extend((roots[j], 1) for j in members)
            else:
                pending.append(members)
        radius *= 0.1
    return clusters


def classify_by_roots(q, tol=1e-10):
    """Roots of the homogeneous quartic, clustered into a multiplicity pattern."""
    c = q.as_array()
    mag = np.max(np.abs(c))
    if mag == 0:
        raise UndefinedPatternError("all Weyl coefficients vanish; the root pattern is undefined")
    c = c / mag
    thetas = np.linspace(0.0, math.pi, 64, endpoint=False)
    # pick the chart in which the leading coefficient is largest
    co, si = np.cos(thetas), np.sin(thetas)
    lead = np.abs(sum(_BINOM[k] * c[k] * co ** (4 - k) * si**k for k in range(5)))
    theta = float(thetas[int(np.argmax(lead))])
    poly = _rotated_poly(c, theta)
    poly = poly / np.max(np.abs(poly))
    troots = np.roots(poly)
    clusters = _cluster(list(troots), poly, tol)
    co, si = math.cos(theta), math.sin(theta)
    roots, mults, real = [], [], []
    at_inf = 0
    for t, m in clusters:
        is_real = abs(t.imag) <= 1e-9 * max(1.0, abs(t))
        if is_real:
            t = complex(t.real, 0.0)
        num = co * t - si
        den = si * t + co
        if abs(den) <= 1e-12 * max(abs(num), 1e-300):
            roots.append(math.inf)
            at_inf += m
        else:
            roots.append(num / den)
        mults.append(m)
        real.append(is_real)
    chart_deg = abs(c[0]) <= 1e-12
    notes = ("degenerate-by-leading-coefficient",) if chart_deg else ()
    return RootPattern(tuple(roots), tuple(mults), tuple(real), at_inf, chart_deg, theta, notes)
