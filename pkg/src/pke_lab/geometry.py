"""Metrics in hyperheavenly coordinates and numerical curvature checks.

Stored metrics are ``g`` with ds^2 = g_ab dx^a dx^b, i.e. twice the
quadratic form in which these spaces are usually written.  The reported
scalar curvature uses the sign for which the Einstein condition reads
``R_ab = -Lambda g_ab``, ``R = -4 Lambda``.
"""
import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _accel
from . import jets as J
from .errors import DomainError, StencilError

GENERAL_CHART = ("q", "p", "x", "y")
EXAMPLE_CHART = ("q", "p", "x", "w")
SIGNATURE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class MetricSample:
    coords: tuple
    g: np.ndarray
    chart: tuple = GENERAL_CHART

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.shape != (4, 4):
            raise ValueError(f"metric must be 4x4, got {g.shape}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    @property
    def is_symmetric(self):
        return bool(np.array_equal(self.g, self.g.T))

    @property
    def det(self):
        return float(np.linalg.det(self.g))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.g)

    def signature(self, threshold=SIGNATURE_THRESHOLD):
        """(n_plus, n_minus), or None if an eigenvalue is within ``threshold`` of 0."""
        ev = self.eigenvalues()
        scale = max(1.0, float(np.max(np.abs(ev))))
        if np.any(np.abs(ev) <= threshold * scale):
            return None
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    @property
    def is_neutral(self):
        return self.signature() == (2, 2)

    def as_dict(self):
        return {"chart": list(self.chart), "coords": list(self.coords),
                "g": [float(v) for v in self.g.ravel()]}

    def to_json(self):
        return json.dumps(self.as_dict())


# metric assembly --------------------------------------------------------------

def metric_from_second_partials(x, y, Txx, Txy, Tyy, lam):
    """g in (q, p, x, y) from the second partials of Theta at (x, y)."""
    L3 = lam / 3.0
    g = np.zeros((4, 4))
    g[0, 3] = g[3, 0] = 1.0
    g[1, 2] = g[2, 1] = -1.0
    g[0, 0] = -2.0 * (Txx - L3 * y * y)
    g[0, 1] = g[1, 0] = -2.0 * (Txy + L3 * x * y)
    g[1, 1] = -2.0 * (Tyy - L3 * x * x)
    return g


def metric_from_key(theta, coords, lam):
    """MetricSample at (q, p, x, y) from the Jet2 of Theta at (x, y)."""
    q, p, x, y = coords
    if theta.base_x != x or theta.base_y != y:
        raise ValueError(f"jet based at ({theta.base_x}, {theta.base_y}) used at ({x}, {y})")
    g = metric_from_second_partials(x, y, J.partial(theta, 2, 0), J.partial(theta, 1, 1),
                                    J.partial(theta, 0, 2), lam)
    return MetricSample((q, p, x, y), g, GENERAL_CHART)


def key_metric(field_or_fn, lam):
    """Metric evaluator (q, p, x, y) -> 4x4 array from a key-function evaluator.

    ``field_or_fn(x, y)`` must return the Jet2 of Theta at (x, y).
    """
    def metric(X):
        _, _, x, y = (float(v) for v in X)
        th = field_or_fn(x, y)
        return metric_from_second_partials(x, y, J.partial(th, 2, 0), J.partial(th, 1, 1),
                                           J.partial(th, 0, 2), lam)
    return metric


def _example_checks(x, w, lam):
    if w == 0:
        raise DomainError("w = 0 is a pole of the example metric")
    if 12 * w + lam <= 0:
        raise DomainError(f"12w + Lambda must be positive (w > {-lam / 12!r}), got w={w!r}")
    if 2 * w + lam == 0:
        raise DomainError("2w + Lambda = 0 is a pole of the example metric")
    if x == 0:
        raise DomainError("x = 0 is a pole of the example metric")


def example_metric_array(X, lam, z0):
    """g in (q, p, x, w) for the explicit example; keeps the dtype of X."""
    X = np.asarray(X)
    if X.dtype == object:
        dt = X.dtype
        _, _, x, w = X
        L3 = mpmath.mpf(lam) / 3
    else:
        dt = X.dtype if X.dtype.kind == "f" else np.dtype(np.float64)
        _, _, x, w = X.astype(dt)
        L3 = dt.type(lam) / 3
    _example_checks(x, w, lam)
    u, s = 12 * w + lam, 2 * w + lam
    a = -z0 * u**1.5 / (w**4 * x**3)
    g = np.zeros((4, 4), dtype=dt)
    g[0, 3] = g[3, 0] = a * 3 * x * s                  # dq dw
    g[0, 2] = g[2, 0] = a * 2 * w * u                  # dq dx
    g[1, 2] = g[2, 1] = -1.0                           # dx dp
    g[1, 1] = -2 * x * x * (3 * w - lam) / s * L3
    g[0, 1] = g[1, 0] = -2 * z0 / (w**3 * x) * u**3.5 / s * L3
    g[0, 0] = 2 * z0 * z0 / (3 * w**6 * x**4) * u**5 * (36 * w * w + lam * lam) / s
    return g


def metric_example(coords, params):
    lam, z0 = params.lam, params.z0
    if z0 is None or z0 == 0:
        raise DomainError("the example needs z0 != 0")
    return MetricSample(coords, example_metric_array(coords, lam, z0), EXAMPLE_CHART)


def example_metric(params):
    """Metric evaluator X -> g for the explicit example."""
    lam, z0 = params.lam, params.z0
    if z0 is None or z0 == 0:
        raise DomainError("the example needs z0 != 0")
    return lambda X: example_metric_array(X, lam, z0)


def pullback(g, jacobian):
    """J^T g J for ``jacobian[a, b] = d old^a / d new^b``."""
    Jm = np.asarray(jacobian, dtype=float)
    return Jm.T @ g @ Jm


def example_chart_jacobian(x, w, field):
    """d(q, p, x, y)/d(q, p, x, w) with y = Z(w)/x^2 (``field`` an ExampleField)."""
    Z, Z1 = field.Z(w), field.dZ(w)
    Jm = np.eye(4)
    Jm[3, 2] = -2 * Z / x**3
    Jm[3, 3] = Z1 / x**2
    return Jm


# finite differences -------------------------------------------------------------

@dataclass(frozen=True)
class FDConfig:
    """Central differences with steps ``h * max(|X_c|, scale_floor)`` per axis,
    halved ``levels - 1`` times and combined by Richardson extrapolation."""
    h: float = 4e-2
    levels: int = 4
    scale_floor: float = 1.0
    scales: tuple = None      # explicit per-axis step scales override the above
    precision: str = "extended"   # "double", "extended" (long double) or "mp" (mpmath)
    mp_dps: int = 40

    def __post_init__(self):
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}, got {self.precision!r}")


PRECISIONS = ("double", "extended", "mp")


def _dtype(cfg):
    return {"double": np.float64, "extended": np.longdouble, "mp": object}[cfg.precision]


def _to_dtype(a, dt):
    a = np.asarray(a)
    if np.dtype(dt) == object:
        return np.array([mpmath.mpf(float(v)) if not isinstance(v, mpmath.mpf) else v
                         for v in a.ravel()], dtype=object).reshape(a.shape)
    return a.astype(dt)


def _steps(X, cfg):
    if cfg.scales is not None:
        return cfg.h * np.asarray(cfg.scales, dtype=float)
    return cfg.h * np.maximum(np.abs(X), cfg.scale_floor)


def _eval(metric, X, extent):
    try:
        g = np.asarray(metric(X))
        if g.dtype.kind not in "fO":
            g = g.astype(float)
    except DomainError as exc:
        raise StencilError(f"stencil point {tuple(X)} (half-width {tuple(extent)}) leaves the domain: {exc}") from exc
    finite = all(mpmath.isfinite(v) for v in g.ravel()) if g.dtype == object else np.all(np.isfinite(g))
    if not finite:
        raise StencilError(f"metric not finite at stencil point {tuple(X)}")
    return g


def _fd_level(metric, X, h):
    """(g, dg[c], ddg[c, d]) at X with per-axis steps h."""
    n = len(X)
    g0 = _eval(metric, X, h)
    shape = g0.shape
    dt = np.result_type(g0.dtype, X.dtype)
    dg = np.zeros((n,) + shape, dtype=dt)
    ddg = np.zeros((n, n) + shape, dtype=dt)
    E = np.eye(n, dtype=X.dtype)
    plus = [_eval(metric, X + h[c] * E[c], h) for c in range(n)]
    minus = [_eval(metric, X - h[c] * E[c], h) for c in range(n)]
    for c in range(n):
        dg[c] = (plus[c] - minus[c]) / (2 * h[c])
        ddg[c, c] = (plus[c] - 2 * g0 + minus[c]) / (h[c] * h[c])
    for c in range(n):
        for d in range(c + 1, n):
            pp = _eval(metric, X + h[c] * E[c] + h[d] * E[d], h)
            pm = _eval(metric, X + h[c] * E[c] - h[d] * E[d], h)
            mp = _eval(metric, X - h[c] * E[c] + h[d] * E[d], h)
            mm = _eval(metric, X - h[c] * E[c] - h[d] * E[d], h)
            ddg[c, d] = ddg[d, c] = (pp - pm - mp + mm) / (4 * h[c] * h[d])
    return g0, dg, ddg


def _richardson(table):
    """Neville-style table for even-order errors with step ratio 2.

    ``table[k]`` are estimates at step h/2^k; returns the diagonal, i.e. the
    best estimate using 1, 2, ... levels.
    """
    rows = [list(table)]
    for j in range(1, len(table)):
        prev = rows[-1]
        f = 4.0**j
        rows.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    return [r[0] if k == 0 else r[-1] for k, r in enumerate(rows)]


def example_fd_config(X, params, h=1e-2, levels=5, precision="mp"):
    """FDConfig whose x and w steps shrink with the distance to the example's poles."""
    _, _, x, w = (float(v) for v in X)
    lam = params.lam
    d_w = min(abs(w), abs(w + lam / 12), abs(w + lam / 2))
    return FDConfig(h=h, levels=levels, precision=precision, scales=(max(1.0, abs(X[0])), max(1.0, abs(X[1])),
                                                min(abs(x), max(1.0, abs(x))), min(d_w, max(1.0, abs(w)))))


def metric_derivatives(metric, X, cfg=None):
    """Richardson sequence [(dg, ddg), ...] at X, coarsest first, plus g.

    Stencil points and differences are formed in ``_dtype(cfg)``; evaluators
    that return float64 simply do not profit from the extra precision.
    """
    cfg = cfg or FDConfig()
    dt = _dtype(cfg)
    X = np.asarray(X, dtype=float)
    h = _steps(X, cfg)
    with mpmath.workdps(cfg.mp_dps):
        Xe = _to_dtype(X, dt)
        levels = [_fd_level(metric, Xe, _to_dtype(h / 2**k, dt)) for k in range(cfg.levels)]
        g = levels[0][0]
        dgs = _richardson([lv[1] for lv in levels])
        ddgs = _richardson([lv[2] for lv in levels])
    return g, list(zip(dgs, ddgs)), h


# curvature contraction ---------------------------------------------------------

def _ricci_loops(g, gi, dg, ddg):
    """Ricci tensor (MTW sign) from g, its inverse and first/second partials.

    dg[c, a, b] = d_c g_ab, ddg[c, d, a, b] = d_c d_d g_ab.
    """
    n = g.shape[0]
    Gl = np.zeros((n, n, n))      # Gamma_{e a b}
    dGl = np.zeros((n, n, n, n))  # d_d Gamma_{e a b}
    for e in range(n):
        for a in range(n):
            for b in range(n):
                Gl[e, a, b] = 0.5 * (dg[a, e, b] + dg[b, e, a] - dg[e, a, b])
                for d in range(n):
                    dGl[d, e, a, b] = 0.5 * (ddg[d, a, e, b] + ddg[d, b, e, a] - ddg[d, e, a, b])
    dgi = np.zeros((n, n, n))     # d_d g^{ce}
    for d in range(n):
        for c in range(n):
            for e in range(n):
                s = 0.0
                for i in range(n):
                    for j in range(n):
                        s -= gi[c, i] * dg[d, i, j] * gi[j, e]
                dgi[d, c, e] = s
    G = np.zeros((n, n, n))       # Gamma^c_{ab}
    dG = np.zeros((n, n, n, n))   # d_d Gamma^c_{ab}
    for c in range(n):
        for a in range(n):
            for b in range(n):
                s = 0.0
                for e in range(n):
                    s += gi[c, e] * Gl[e, a, b]
                G[c, a, b] = s
                for d in range(n):
                    t = 0.0
                    for e in range(n):
                        t += dgi[d, c, e] * Gl[e, a, b] + gi[c, e] * dGl[d, e, a, b]
                    dG[d, c, a, b] = t
    Ric = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            s = 0.0
            for c in range(n):
                s += dG[c, c, a, b] - dG[b, c, a, c]
                for d in range(n):
                    s += G[c, c, d] * G[d, a, b] - G[c, b, d] * G[d, a, c]
            Ric[a, b] = s
    return Ric


def _ricci_numpy(g, gi, dg, ddg):
    Gl = 0.5 * (np.einsum("aeb->eab", dg) + np.einsum("bea->eab", dg) - np.einsum("eab->eab", dg))
    dGl = 0.5 * (np.einsum("daeb->deab", ddg) + np.einsum("dbea->deab", ddg) - ddg)
    dgi = -np.einsum("ci,dij,je->dce", gi, dg, gi)
    G = np.einsum("ce,eab->cab", gi, Gl)
    dG = np.einsum("dce,eab->dcab", dgi, Gl) + np.einsum("ce,deab->dcab", gi, dGl)
    return (np.einsum("ccab->ab", dG) - np.einsum("bcac->ab", dG)
            + np.einsum("ccd,dab->ab", G, G) - np.einsum("cbd,dac->ab", G, G))


_ricci_numba = _accel.njit(_ricci_loops)
ricci_kernel = _accel.select(_ricci_numba, _ricci_numpy)


def _inverse(g):
    """Inverse in g's dtype: float64 inverse refined by Newton steps, or mpmath's for object arrays."""
    if g.dtype == object:
        return np.array(mpmath.inverse(mpmath.matrix(g.tolist())).tolist(), dtype=object)
    X = np.linalg.inv(g.astype(float)).astype(g.dtype)
    I2 = 2 * np.eye(g.shape[0], dtype=g.dtype)
    for _ in range(2):
        X = X @ (I2 - g @ X)
    return X


def ricci_from_derivatives(g, dg, ddg):
    """(Ricci tensor, scalar) with the sign convention R = -4 Lambda for Einstein spaces.

    float64 input goes through :data:`ricci_kernel`; extended-precision input
    is contracted with numpy in its own dtype.
    """
    g = np.asarray(g)
    if g.dtype == np.float64:
        g = np.ascontiguousarray(g)
        gi = np.linalg.inv(g)
        Ric = -ricci_kernel(g, gi, np.ascontiguousarray(dg, dtype=float), np.ascontiguousarray(ddg, dtype=float))
    else:
        gi = _inverse(g)
        Ric = -_ricci_numpy(g, gi, dg, ddg)
    R = np.einsum("ab,ab->", gi, Ric)
    return Ric, R


@dataclass
class CurvatureReport:
    max_traceless_ricci: float
    scalar_defect: float
    fd_step: tuple
    richardson_order: int
    levels: list = field(default_factory=list)   # [(max|C|, |R + 4 Lambda|)] per Richardson level
    scalar: float = math.nan
    warning: str = ""

    @property
    def converged(self):
        return not self.warning

    def as_dict(self):
        return {"max_traceless_ricci": self.max_traceless_ricci, "scalar_defect": self.scalar_defect,
                "scalar": self.scalar, "fd_step": list(self.fd_step),
                "richardson_order": self.richardson_order, "levels": [list(v) for v in self.levels],
                "warning": self.warning}


def curvature(metric, point, lam, cfg=None, derivs=None):
    """Traceless Ricci and scalar defect at ``point`` by Richardson-extrapolated FD.

    ``metric`` maps a coordinate 4-vector to the 4x4 g; ``lam`` is the
    cosmological constant the Einstein condition is checked against.
    ``derivs`` reuses the output of :func:`metric_derivatives` for the same cfg.
    """
    cfg = cfg or FDConfig()
    g, seq, h = derivs or metric_derivatives(metric, point, cfg)
    levels = []
    with mpmath.workdps(cfg.mp_dps):
        for dg, ddg in seq:
            Ric, R = ricci_from_derivatives(g, dg, ddg)
            C = Ric - R / 4 * g
            levels.append((float(np.max(np.abs(C))), float(abs(R + 4 * lam)), float(R)))
    g = g.astype(float)
    c_last, d_last, R_last = levels[-1]
    warning = ""
    if len(levels) >= 2:
        c_prev, d_prev, _ = levels[-2]
        floor = 1e-10 * max(1.0, float(np.max(np.abs(g))))
        if (c_last > c_prev and c_last > floor) or (d_last > d_prev and d_last > floor):
            warning = (f"Richardson not converging: level {len(levels) - 2} gave ({c_prev:.3e}, {d_prev:.3e}),"
                       f" level {len(levels) - 1} gave ({c_last:.3e}, {d_last:.3e})")
    return CurvatureReport(c_last, d_last, tuple(float(v) for v in h), 2 * len(levels),
                           [(c, d) for c, d, _ in levels], R_last, warning)


# Killing vectors --------------------------------------------------------------

@dataclass(frozen=True)
class KillingVectorField:
    """Vector field with components ``fn(X) -> 4-vector`` in a named chart."""
    name: str
    fn: object
    chart: tuple = GENERAL_CHART

    def __call__(self, X):
        return np.asarray(self.fn(np.asarray(X, dtype=float)), dtype=float)


def k1(chart=GENERAL_CHART):
    return KillingVectorField("K1", lambda X: np.array([1.0, 0.0, 0.0, 0.0]), chart)


def k2(chart=GENERAL_CHART):
    return KillingVectorField("K2", lambda X: np.array([0.0, 1.0, 0.0, 0.0]), chart)


def k3(case):
    """a0(p dq + y dx) + b0(q dq - y dy) + n0(q dp + x dy) + m0(p dp - x dx) in (q, p, x, y)."""
    a0, b0, n0, m0 = case.a0, case.b0, case.n0, case.m0

    def fn(X):
        q, p, x, y = X
        return np.array([a0 * p + b0 * q, n0 * q + m0 * p, a0 * y - m0 * x, n0 * x - b0 * y])

    return KillingVectorField(f"K3[{case.tag}]", fn, GENERAL_CHART)


def k3_example():
    """K3 of the A35Half row in (q, p, x, w): w = Omega(y x^2) is invariant."""
    return KillingVectorField("K3[A35Half]", lambda X: np.array([X[0], -0.5 * X[1], 0.5 * X[2], 0.0]),
                              EXAMPLE_CHART)


def killing_vectors(case=None, example=False):
    if example:
        return [k1(EXAMPLE_CHART), k2(EXAMPLE_CHART), k3_example()]
    out = [k1(), k2()]
    if case is not None:
        out.append(k3(case))
    return out


def lie_derivative(K, metric, point, cfg=None, derivs=None):
    """(L_K g)_ab = K^c d_c g_ab + g_cb d_a K^c + g_ac d_b K^c by Richardson FD."""
    cfg = cfg or FDConfig()
    X = np.asarray(point, dtype=float)
    g, seq, h = derivs or metric_derivatives(metric, X, cfg)
    dg = seq[-1][0]
    n = len(X)
    dt = g.dtype
    with mpmath.workdps(cfg.mp_dps):
        # K is differenced in the stencil dtype so x + h rounding does not leak into dK
        Xe, E = _to_dtype(X, dt), np.eye(n, dtype=dt)
        Kf = lambda Y: _to_dtype(K.fn(Y), dt)
        est = []
        for k in range(cfg.levels):
            hk = _to_dtype(h / 2**k, dt)
            est.append(np.array([(Kf(Xe + hk[a] * E[a]) - Kf(Xe - hk[a] * E[a])) / (2 * hk[a]) for a in range(n)]))
        dK = _richardson(est)[-1]          # dK[a, c] = d_a K^c
        Kx = Kf(Xe)
        L = np.einsum("c,cab->ab", Kx, dg) + np.einsum("cb,ac->ab", g, dK) + np.einsum("ac,bc->ab", g, dK)
        return L.astype(float)


def killing_residual(K, metric, point, cfg=None, derivs=None):
    """max_ab |(L_K g)_ab| at ``point``."""
    return float(np.max(np.abs(lie_derivative(K, metric, point, cfg, derivs))))


__all__ = [
    "MetricSample", "metric_from_key", "metric_from_second_partials", "key_metric", "metric_example",
    "example_metric", "example_metric_array", "pullback", "example_chart_jacobian", "FDConfig",
    "example_fd_config", "metric_derivatives", "ricci_from_derivatives", "ricci_kernel", "CurvatureReport", "curvature",
    "KillingVectorField", "k1", "k2", "k3", "k3_example", "killing_vectors", "lie_derivative",
    "killing_residual", "GENERAL_CHART", "EXAMPLE_CHART",
]
