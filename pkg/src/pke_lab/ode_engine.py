"""Explicit Dormand-Prince 5(4) integrator with dense output and events.

Singular loci of the reduced equations are handled by raising
:class:`~pke_lab.errors.SingularStateError` from the right-hand side (or by
returning non-finite values).  The integrator then shrinks the step until it
underflows and returns the partial trajectory with a singularity report.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import SingularStateError

# Dormand-Prince tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
E = B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                  187 / 2100, 1 / 40])
# free fourth-order interpolant, y(t + th*h) = y + h * K.T @ (P @ [th, th^2, th^3, th^4])
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@dataclass(frozen=True)
class Event:
    fn: object
    terminal: bool = True
    direction: int = 0
    name: str = ""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    events: tuple = ()
    first_step: float = None
    max_steps: int = 200000
    min_step_factor: float = 1e-13

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class EventRecord:
    t: float
    y: tuple
    name: str
    index: int
    terminal: bool


class Trajectory:
    """Accepted mesh plus per-step interpolation data."""

    def __init__(self, t, y, f, steps, K, events, status, message="", singularity=None):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.f = np.asarray(f, dtype=float)
        self._steps = np.asarray(steps, dtype=float).reshape(-1, 2)  # (t_start, h)
        self._K = np.asarray(K, dtype=float)
        self.events = list(events)
        self.status = status
        self.message = message
        self.singularity = singularity

    @property
    def n_dim(self):
        return self.y.shape[1]

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t_end(self):
        return float(self.t[-1])

    @property
    def interval(self):
        return (min(self.t0, self.t_end), max(self.t0, self.t_end))

    def covers(self, t):
        lo, hi = self.interval
        return lo <= t <= hi

    def _locate(self, t):
        if not self.covers(t):
            lo, hi = self.interval
            raise ValueError(f"t={t!r} outside the covered span [{lo}, {hi}]")
        if len(self._steps) == 0:
            return -1
        forward = self.t_end >= self.t0
        if forward:
            i = int(np.searchsorted(self.t, t, side="right")) - 1
        else:
            i = int(np.searchsorted(-self.t, -t, side="right")) - 1
        return min(max(i, 0), len(self._steps) - 1)

    def _eval(self, t, deriv=False):
        i = self._locate(t)
        if i < 0:
            return self.f[0].copy() if deriv else self.y[0].copy()
        ts, h = self._steps[i]
        th = (t - ts) / h
        K = self._K[i]
        if deriv:
            w = P @ np.array([1.0, 2 * th, 3 * th**2, 4 * th**3])
            return K.T @ w
        w = P @ np.array([th, th**2, th**3, th**4])
        y_start = self.y[i]
        return y_start + h * (K.T @ w)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self._eval(float(t))
        return np.array([self._eval(float(s)) for s in t])

    def derivative(self, t):
        """Derivative of the interpolant (not a fresh rhs evaluation)."""
        if np.ndim(t) == 0:
            return self._eval(float(t), deriv=True)
        return np.array([self._eval(float(s), deriv=True) for s in t])

    def to_csv(self, target=None, names=None):
        names = list(names) if names else [f"y{k}" for k in range(self.n_dim)]
        header = ["t"] + names + [f"d_{n}" for n in names]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for t, y, f in zip(self.t, self.y, self.f):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in y] + [repr(float(v)) for v in f])
        text = buf.getvalue()
        if target is None:
            return text
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


def _safe_rhs(rhs, t, y):
    try:
        f = np.asarray(rhs(t, y), dtype=float)
    except SingularStateError as exc:
        return None, exc
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        return None, exc
    if not np.all(np.isfinite(f)):
        return None, FloatingPointError(f"non-finite rhs at t={t!r}")
    return f, None


def _norm(x):
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(rhs, t0, y0, f0, direction, cfg):
    scale = cfg.abs_tol + np.abs(y0) * cfg.rel_tol
    d0, d1 = _norm(y0 / scale), _norm(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, cfg.max_step)
    f1, err = _safe_rhs(rhs, t0 + direction * h0, y0 + direction * h0 * f0)
    if err is not None:
        return h0 * 1e-3
    d2 = _norm((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.max_step)


def _stages(rhs, t, y, f, h):
    n = len(y)
    K = np.empty((7, n))
    K[0] = f
    for s in range(1, 6):
        dy = sum(a * K[j] for j, a in enumerate(A[s]))
        k, err = _safe_rhs(rhs, t + C[s] * h, y + h * dy)
        if err is not None:
            return None, None, err
        K[s] = k
    y_new = y + h * (K[:6].T @ B[:6])
    f_new, err = _safe_rhs(rhs, t + h, y_new)
    if err is not None:
        return None, None, err
    K[6] = f_new
    return y_new, K, None


def integrate(rhs, y0, span, config=None):
    """Integrate ``y' = rhs(t, y)`` from ``span[0]`` towards ``span[1]``."""
    cfg = config or IntegratorConfig()
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise ValueError("degenerate integration span")
    direction = 1.0 if t1 > t0 else -1.0
    y = np.array(y0, dtype=float).ravel()
    f, err = _safe_rhs(rhs, t0, y)
    if err is not None:
        raise SingularStateError("initial state", None, f"rhs not finite at the initial state: {err}")

    events = list(cfg.events)
    g_old = [float(ev.fn(t0, y)) for ev in events]
    ts, ys, fs, steps, Ks, log = [t0], [y.copy()], [f.copy()], [], [], []
    h = cfg.first_step or _initial_step(rhs, t0, y, f, direction, cfg)
    t = t0
    status, message, singular = "completed", "", None
    last_err = None

    for _ in range(cfg.max_steps):
        if direction * (t1 - t) <= 0:
            break
        h_min = cfg.min_step_factor * max(1.0, abs(t))
        h = min(h, cfg.max_step, abs(t1 - t))
        if h < h_min:
            status = "singular"
            singular = {"t": t, "y": y.tolist(), "reason": str(last_err) if last_err else "step underflow"}
            if isinstance(last_err, SingularStateError):
                singular["factor"] = last_err.factor
            message = f"step size underflow at t={t!r}"
            break
        hs = direction * h
        y_new, K, err = _stages(rhs, t, y, f, hs)
        if err is not None:
            last_err = err
            h *= 0.25
            continue
        scale = cfg.abs_tol + np.maximum(np.abs(y), np.abs(y_new)) * cfg.rel_tol
        err_norm = _norm(hs * (K.T @ E) / scale)
        if err_norm > 1.0:
            h *= max(0.2, 0.9 * err_norm**-0.2)
            last_err = None
            continue
        t_new = t + hs
        # accepted
        steps.append((t, hs))
        Ks.append(K)
        ts.append(t_new)
        ys.append(y_new.copy())
        fs.append(K[6].copy())
        stop = False
        for k, ev in enumerate(events):
            g_new = float(ev.fn(t_new, y_new))
            crossed = (g_old[k] < 0 < g_new) or (g_old[k] > 0 > g_new) or (g_new == 0 and g_old[k] != 0)
            if crossed and ev.direction:
                crossed = (g_new - g_old[k]) * ev.direction > 0
            if crossed:
                y_s, h_s, K_s = y.copy(), hs, K

                def g_of(tt, y_s=y_s, t_s=t, h_s=h_s, K_s=K_s, ev=ev):
                    th = (tt - t_s) / h_s
                    yy = y_s + h_s * (K_s.T @ (P @ np.array([th, th**2, th**3, th**4])))
                    return float(ev.fn(tt, yy))

                lo, hi = (t, t_new) if direction > 0 else (t_new, t)
                te = t_new if g_new == 0 else brentq(g_of, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
                th = (te - t) / hs
                ye = y + hs * (K.T @ (P @ np.array([th, th**2, th**3, th**4])))
                log.append(EventRecord(te, tuple(ye.tolist()), ev.name or f"event{k}", k, ev.terminal))
                if ev.terminal:
                    stop = True
                    ts[-1], ys[-1] = te, ye
                    fe, _ = _safe_rhs(rhs, te, ye)
                    fs[-1] = fe if fe is not None else K.T @ (P @ np.array([1.0, 2 * th, 3 * th**2, 4 * th**3]))
            g_old[k] = g_new
        t, y, f = t_new, y_new, K[6]
        if stop:
            status = "terminal_event"
            message = f"terminal event {log[-1].name} at t={log[-1].t!r}"
            break
        last_err = None
        fac = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm**-0.2)
        h *= fac
    else:
        status = "max_steps"
        message = "maximum number of steps reached"

    return Trajectory(ts, ys, fs, steps, Ks if Ks else np.zeros((0, 7, len(y))), log, status,
                      message, singular)


# seed search ---------------------------------------------------------------

@dataclass(frozen=True)
class SeedCertificate:
    state: dict
    D: float
    normalized_D: float
    margin: float
    distances: dict
    samples_tried: int
    rhs_finite: bool = True
    notes: tuple = field(default_factory=tuple)

    def as_dict(self):
        return {"state": dict(self.state), "D": self.D, "normalized_D": self.normalized_D,
                "margin": self.margin, "distances": dict(self.distances),
                "samples_tried": self.samples_tried, "rhs_finite": self.rhs_finite}


def grid_seed_search(score, box, samples=21, margin=1e-6, top=6, probe_steps=40):
    """Grid search for a point where ``score`` is safely nonzero.

    ``score(point) -> (D, normalized_D)`` returns ``None`` at points where the
    equations are singular.  ``box`` maps axis names to (lo, hi).  Among grid
    points with ``|normalized_D| > margin`` the ``top`` largest are probed along
    each axis for the nearest sign change or singularity, and the one farthest
    from any such locus wins.
    """
    from .errors import SeedExhaustionError

    names = list(box)
    axes = [np.linspace(box[n][0], box[n][1], samples) for n in names]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    good = []
    best_abs = 0.0
    for p in pts:
        point = dict(zip(names, p.tolist()))
        s = score(point)
        if s is None:
            continue
        D, nd = s
        if not (math.isfinite(D) and math.isfinite(nd)):
            continue
        best_abs = max(best_abs, abs(nd))
        if abs(nd) > margin:
            good.append((abs(nd), point, D, nd))
    if not good:
        raise SeedExhaustionError(
            f"no grid point with |D| above the margin {margin}; max normalized |D| = {best_abs}",
            best=best_abs)
    good.sort(key=lambda g: -g[0])
    widths = {n: (box[n][1] - box[n][0]) for n in names}
    best = None
    for _, point, D, nd in good[:top]:
        dist = {}
        for n in names:
            step = widths[n] / (probe_steps * 2) if widths[n] > 0 else 1e-3
            found = math.inf
            for sgn in (1.0, -1.0):
                for k in range(1, probe_steps + 1):
                    q = dict(point)
                    q[n] = point[n] + sgn * k * step
                    s = score(q)
                    if s is None or not math.isfinite(s[1]) or s[1] * nd <= 0 or abs(s[1]) <= margin:
                        found = min(found, k * step)
                        break
            dist[n] = found
        key = min(d / widths[n] if widths[n] > 0 else d for n, d in dist.items())
        if best is None or key > best[0]:
            best = (key, point, D, nd, dist)
    _, point, D, nd, dist = best
    return SeedCertificate(point, float(D), float(nd), float(abs(nd) - margin), dist, len(pts))


def find_nondegenerate_seed(case, params, box=None, samples=21, margin=1e-6):
    """Seed state for a reduced equation with a nondegeneracy certificate."""
    from .symmetry_cases import seeds

    return seeds.find_seed(case, params, box=box, samples=samples, margin=margin)
