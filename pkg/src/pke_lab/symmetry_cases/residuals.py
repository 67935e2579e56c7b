"""Residuals of the two-Killing reduced HH equation and the master equation."""
from .params import AlgebraCase, structure_constants


def reduced_hh_residual(theta, lam):
    """Theta_xx Theta_yy - Theta_xy^2 + Lambda (x Theta_x + y Theta_y - Theta
    - x^2 Theta_xx/3 - y^2 Theta_yy/3 - 2 x y Theta_xy/3) at the jet's base."""
    c = theta.coeff
    x, y = theta.base_x, theta.base_y
    T, Tx, Ty = c[0, 0], c[1, 0], c[0, 1]
    Txx, Txy, Tyy = c[2, 0], c[1, 1], c[0, 2]
    lin = x * Tx + y * Ty - T - (x * x * Txx + y * y * Tyy + 2 * x * y * Txy) / 3
    return float(Txx * Tyy - Txy * Txy + lam * lin)


def reduced_hh_scale(theta, lam):
    """Magnitude of the largest term, for relative residuals."""
    c = theta.coeff
    x, y = theta.base_x, theta.base_y
    terms = [c[2, 0] * c[0, 2], c[1, 1] ** 2, lam * x * c[1, 0], lam * y * c[0, 1], lam * c[0, 0],
             lam * x * x * c[2, 0] / 3, lam * y * y * c[0, 2] / 3, 2 * lam * x * y * c[1, 1] / 3]
    return float(max(abs(t) for t in terms))


def master_residual(case, theta, x=None, y=None, zeta1=0.0, zeta2=0.0):
    """(a0 y - m0 x) Theta_x + (n0 x - b0 y) Theta_y + 2(b0 + m0) Theta - zeta1 x - zeta2 y."""
    if not isinstance(case, AlgebraCase):
        case = structure_constants(case)
    x = theta.base_x if x is None else x
    y = theta.base_y if y is None else y
    c = theta.coeff
    lhs = ((case.a0 * y - case.m0 * x) * c[1, 0] + (case.n0 * x - case.b0 * y) * c[0, 1]
           + 2 * (case.b0 + case.m0) * c[0, 0])
    return float(lhs - zeta1 * x - zeta2 * y)
