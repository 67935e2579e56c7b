"""Bivariate jets truncated at total degree 4.

A :class:`Jet2` stores the Taylor coefficients ``t[i, j]`` of a scalar field
around ``(base_x, base_y)``; the partial derivative d^{i+j}/dx^i dy^j equals
``t[i, j] * i! * j!``.  Arithmetic is closed on the truncated algebra, so
composite key functions get exact derivatives up to fourth order.

The module-level elementary functions (:func:`exp`, :func:`log`,
:func:`power`, ...) accept either floats or jets, which lets the same
formula drive a float integrator and a jet expansion.
"""
import math

import numpy as np

from . import _accel
from .errors import DomainError, JetOrderError

ORDER = 4
N = ORDER + 1

_FACT = np.array([math.factorial(k) for k in range(N)], dtype=float)
# partial = taylor * _SCALE
_SCALE = np.outer(_FACT, _FACT)
_MASK = np.add.outer(np.arange(N), np.arange(N)) <= ORDER


def _mul_loops(a, b):
    out = np.zeros((N, N))
    for i in range(N):
        for j in range(N - i):
            s = 0.0
            for k in range(i + 1):
                for l in range(j + 1):
                    s += a[k, l] * b[i - k, j - l]
            out[i, j] = s
    return out


def _div_loops(a, b):
    out = np.zeros((N, N))
    b0 = b[0, 0]
    for i in range(N):
        for j in range(N - i):
            s = a[i, j]
            for k in range(i + 1):
                for l in range(j + 1):
                    if k == 0 and l == 0:
                        continue
                    s -= b[k, l] * out[i - k, j - l]
            out[i, j] = s / b0
    return out


_mul_numba = _accel.njit(_mul_loops)
_div_numba = _accel.njit(_div_loops)


def _compose_loops(c, h):
    # Horner in the nilpotent h: sum_k c[k] h^k
    out = np.zeros((N, N))
    out[0, 0] = c[ORDER]
    for k in range(ORDER - 1, -1, -1):
        out = _mul_numba(out, h)
        out[0, 0] += c[k]
    return out


# index tables for the vectorized product
def _product_tables():
    out, ia, ib = [], [], []
    for i in range(N):
        for j in range(N - i):
            for k in range(i + 1):
                for l in range(j + 1):
                    out.append(i * N + j)
                    ia.append(k * N + l)
                    ib.append((i - k) * N + (j - l))
    return np.array(out), np.array(ia), np.array(ib)


_OUT, _IA, _IB = _product_tables()


def _mul_numpy(a, b):
    prod = a.ravel()[_IA] * b.ravel()[_IB]
    return np.bincount(_OUT, weights=prod, minlength=N * N).reshape(N, N)


def _div_numpy(a, b):
    b0 = b[0, 0]
    u = b / b0
    u[0, 0] = 0.0
    # 1/(1+u) = 1 - u + u^2 - u^3 + u^4, u nilpotent of index 5
    r = np.zeros((N, N))
    r[0, 0] = 1.0
    for _ in range(ORDER):
        r = -_mul_numpy(r, u)
        r[0, 0] += 1.0
    return _mul_numpy(a, r) / b0


def _compose_numpy(c, h):
    out = np.zeros((N, N))
    out[0, 0] = c[ORDER]
    for k in range(ORDER - 1, -1, -1):
        out = _mul_numpy(out, h)
        out[0, 0] += c[k]
    return out


_compose_numba = _accel.njit(_compose_loops)

mul_kernel = _accel.select(_mul_numba, _mul_numpy)
div_kernel = _accel.select(_div_numba, _div_numpy)
compose_kernel = _accel.select(_compose_numba, _compose_numpy)


class Jet2:
    """Degree-4 jet of a scalar field of (x, y)."""

    __slots__ = ("base_x", "base_y", "t")
    __array_priority__ = 1000

    def __init__(self, base_x, base_y, taylor):
        self.base_x = float(base_x)
        self.base_y = float(base_y)
        t = np.array(taylor, dtype=float).reshape(N, N)
        t[~_MASK] = 0.0
        self.t = t

    @classmethod
    def from_partials(cls, base_x, base_y, partials):
        return cls(base_x, base_y, np.asarray(partials, dtype=float) / _SCALE)

    @property
    def coeff(self):
        """Partial derivatives, ``coeff[i][j]`` = d^{i+j}f/dx^i dy^j."""
        return self.t * _SCALE

    @property
    def value(self):
        return self.t[0, 0]

    def partial(self, i, j):
        return partial(self, i, j)

    def evaluate(self, dx, dy):
        """Taylor polynomial at (base_x + dx, base_y + dy)."""
        px = dx ** np.arange(N)
        py = dy ** np.arange(N)
        return float(px @ self.t @ py)

    def _like(self, taylor):
        return Jet2(self.base_x, self.base_y, taylor)

    def _check(self, other):
        if other.base_x != self.base_x or other.base_y != self.base_y:
            raise ValueError(
                f"jets expanded at different points: ({self.base_x}, {self.base_y}) "
                f"vs ({other.base_x}, {other.base_y})"
            )

    def __add__(self, other):
        if isinstance(other, Jet2):
            self._check(other)
            return self._like(self.t + other.t)
        t = self.t.copy()
        t[0, 0] += other
        return self._like(t)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.t)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet2):
            self._check(other)
            return self._like(mul_kernel(self.t, other.t))
        return self._like(self.t * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            self._check(other)
            if other.t[0, 0] == 0.0:
                raise DomainError("division by a jet whose constant term is zero (divisor)")
            return self._like(div_kernel(self.t, other.t))
        if other == 0:
            raise DomainError("division of a jet by zero")
        return self._like(self.t / other)

    def __rtruediv__(self, other):
        if self.t[0, 0] == 0.0:
            raise DomainError("division by a jet whose constant term is zero (divisor)")
        num = np.zeros((N, N))
        num[0, 0] = other
        return self._like(div_kernel(num, self.t))

    def __pow__(self, r):
        return power(self, r)

    def __repr__(self):
        return f"Jet2(base=({self.base_x}, {self.base_y}), value={self.value!r})"


def seed(base_x, base_y, which, c=0.0):
    """Seed jet: ``which`` is 'x', 'y' or 'const' (value ``c``)."""
    t = np.zeros((N, N))
    if which in ("x", "var_x"):
        t[0, 0] = base_x
        t[1, 0] = 1.0
    elif which in ("y", "var_y"):
        t[0, 0] = base_y
        t[0, 1] = 1.0
    elif which in ("const", "constant"):
        t[0, 0] = c
    else:
        raise ValueError(f"unknown seed kind {which!r}")
    return Jet2(base_x, base_y, t)


def variables(base_x, base_y):
    return seed(base_x, base_y, "x"), seed(base_x, base_y, "y")


def frame_variables(base_x, base_y, frame):
    """Jets of x and y whose two slots differentiate along the columns of ``frame``.

    With ``frame = [[a, b], [c, d]]`` the slots are the coordinates (u, v) of
    x = base_x + a u + b v, y = base_y + c u + d v.
    """
    M = np.asarray(frame, dtype=float)
    tx, ty = np.zeros((N, N)), np.zeros((N, N))
    tx[0, 0], tx[1, 0], tx[0, 1] = base_x, M[0, 0], M[0, 1]
    ty[0, 0], ty[1, 0], ty[0, 1] = base_y, M[1, 0], M[1, 1]
    return Jet2(base_x, base_y, tx), Jet2(base_x, base_y, ty)


def constant(base_x, base_y, c):
    return seed(base_x, base_y, "const", c)


def arith(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def partial(a, i, j):
    if i < 0 or j < 0 or i + j > ORDER:
        raise JetOrderError(f"partial of order ({i}, {j}) exceeds the jet order {ORDER}")
    return float(a.t[i, j] * _SCALE[i, j])


def lift(g_table, a):
    """Jet of g(a) from the derivatives g, g', ..., g'''' at a's value."""
    g = np.asarray(g_table, dtype=float)
    if g.shape != (N,):
        raise ValueError("g_table needs exactly five derivatives")
    h = a.t.copy()
    h[0, 0] = 0.0
    return a._like(compose_kernel(g / _FACT, h))


# elementary functions on floats or jets

def _derivs_power(a0, r):
    out = np.empty(N)
    coef = 1.0
    for k in range(N):
        out[k] = coef * a0 ** (r - k)
        coef *= r - k
    return out


def exp(a):
    if isinstance(a, Jet2):
        return lift(np.full(N, math.exp(a.value)), a)
    return math.exp(a)


def log(a):
    a0 = a.value if isinstance(a, Jet2) else a
    if a0 <= 0:
        raise DomainError(f"log of non-positive argument {a0!r}")
    if not isinstance(a, Jet2):
        return math.log(a)
    return lift([math.log(a0), 1 / a0, -1 / a0**2, 2 / a0**3, -6 / a0**4], a)


def power(a, r):
    """a**r; non-integer r needs a positive base."""
    is_int = float(r).is_integer()
    if not isinstance(a, Jet2):
        if not is_int and a <= 0:
            raise DomainError(f"fractional power {r} of non-positive argument {a!r}")
        return a**r
    if is_int:
        n = int(r)
        if n == 0:
            return constant(a.base_x, a.base_y, 1.0)
        base = a if n > 0 else 1.0 / a
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out
    if a.value <= 0:
        raise DomainError(f"fractional power {r} of non-positive argument {a.value!r}")
    return lift(_derivs_power(a.value, r), a)


def sqrt(a):
    return power(a, 0.5)


def cbrt_signed(c):
    """Real cube root of a float (used for constants like (m0-1)**(1/3))."""
    return math.copysign(abs(c) ** (1.0 / 3.0), c)


def atan(a):
    if not isinstance(a, Jet2):
        return math.atan(a)
    u = a.value
    s = 1.0 + u * u
    return lift([math.atan(u), 1 / s, -2 * u / s**2, (6 * u * u - 2) / s**3,
                 24 * u * (1 - u * u) / s**4], a)


def value(a):
    return a.value if isinstance(a, Jet2) else float(a)
