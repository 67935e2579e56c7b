import json
import math

import numpy as np
import pytest

from pke_lab import geometry as G
from pke_lab import jets as J
from pke_lab.errors import DomainError, StencilError
from pke_lab.symmetry_cases import ModelParams, example_field, find_seed, key_function, seed_to_state, solve_profile
from pke_lab.symmetry_cases import structure_constants

EX = ModelParams(lam=1.0, z0=1.0)


def zero_theta(x, y):
    return J.constant(x, y, 0.0)


# metric assembly ----------------------------------------------------------------------------

def test_metric_from_key_zero_theta_blocks():
    lam, x, y = 3.0, 0.5, 2.0
    ms = G.metric_from_key(zero_theta(x, y), (0.0, 0.0, x, y), lam)
    g = ms.g
    # doubled form of dy dq - dx dp + (Lambda/3)(y^2 dq^2 - 2xy dq dp + x^2 dp^2)
    assert g[0, 3] == 1 and g[1, 2] == -1
    assert g[0, 0] == pytest.approx(2 * y * y) and g[1, 1] == pytest.approx(2 * x * x)
    assert g[0, 1] == pytest.approx(-2 * x * y)
    assert ms.is_symmetric


def test_metric_from_key_origin_nondegenerate():
    ms = G.metric_from_key(zero_theta(0.0, 0.0), (0, 0, 0, 0), 1.0)
    assert ms.det == pytest.approx(1.0)
    assert ms.signature() == (2, 2)


def test_metric_from_key_base_mismatch():
    with pytest.raises(ValueError):
        G.metric_from_key(zero_theta(0.0, 1.0), (0, 0, 0.5, 1.0), 1.0)


def test_a32_sample_neutral():
    L = ModelParams(lam=1.0)
    cert = find_seed("A32", L)
    t0, st0 = seed_to_state("A32", L, cert.state)
    sol = solve_profile("A32", L, t0, st0, 0.3)
    field = key_function("A32", L, sol)
    for z in np.linspace(*sol.validity, 5)[1:-1]:
        x, y = z, 1.0
        ms = G.metric_from_key(field.jet(x, y), (0.1, -0.2, x, y), 1.0)
        assert ms.is_symmetric and ms.is_neutral and abs(ms.det) > 0


def test_metric_example_reference_point():
    ms = G.metric_example((0, 0, 1, 1), EX)
    assert np.all(np.isfinite(ms.g))
    assert ms.is_symmetric and ms.signature() == (2, 2)
    assert ms.chart == G.EXAMPLE_CHART


@pytest.mark.parametrize("lam,z0,x,w", [(1.0, 1.0, 1.0, 1.0), (1.0, -1.0, -0.7, 0.02), (-1.0, 2.0, 1.3, 0.3),
                                        (-1.0, 1.0, 2.0, 4.0)])
def test_metric_example_dp2_coefficient(lam, z0, x, w):
    g = G.metric_example((0.3, 0.4, x, w), ModelParams(lam=lam, z0=z0)).g
    assert g[1, 1] == pytest.approx(-2 * x * x * (3 * w - lam) / (2 * w + lam) * lam / 3, rel=1e-14)


def test_metric_example_independent_of_q_p():
    a = G.metric_example((0, 0, 1.2, 0.7), EX).g
    b = G.metric_example((5.0, -3.0, 1.2, 0.7), EX).g
    assert np.array_equal(a, b)


@pytest.mark.parametrize("X", [(0, 0, 1, 0), (0, 0, 1, -0.5), (0, 0, 1, -0.2), (0, 0, 0, 1)])
def test_metric_example_poles(X):
    with pytest.raises(DomainError):
        G.metric_example(X, EX)


def test_metric_example_needs_z0():
    with pytest.raises(DomainError):
        G.metric_example((0, 0, 1, 1), ModelParams(lam=1.0))


def test_example_signature_on_samples():
    rng = np.random.default_rng(5)
    for lam, z0 in [(1.0, 1.0), (-1.0, 2.0), (1.0, -1.0)]:
        P = ModelParams(lam=lam, z0=z0)
        for _ in range(30):
            w = rng.uniform(-lam / 12 + 0.02, 3)
            if min(abs(w), abs(w + lam / 2)) < 0.02:
                continue
            ms = G.metric_example((0, 0, rng.uniform(0.5, 3) * rng.choice([-1, 1]), w), P)
            assert ms.is_symmetric and ms.signature() in ((2, 2), None)


def test_chart_coherence():
    ex = example_field(EX)
    for x, w in [(1.0, 1.0), (-0.8, 0.3), (1.7, 5.0), (0.6, 0.01)]:
        y = ex.Z(w) / x**2
        th = ex.theta_jet_at_w(w, x)
        g_key = G.metric_from_key(th, (0.0, 0.0, x, y), EX.lam).g
        pulled = G.pullback(g_key, G.example_chart_jacobian(x, w, ex))
        g_ex = G.metric_example((0.0, 0.0, x, w), EX).g
        scale = np.max(np.abs(g_ex))
        assert np.max(np.abs(pulled - g_ex)) <= 1e-6 * scale


def test_json_export():
    ms = G.metric_example((0, 0, 1, 1), EX)
    rec = json.loads(ms.to_json())
    assert rec["chart"] == list(G.EXAMPLE_CHART) and len(rec["g"]) == 16
    assert np.allclose(np.array(rec["g"]).reshape(4, 4), ms.g)
    rep = G.curvature(G.example_metric(EX), np.array([0.0, 0.0, 1.0, 1.0]), 1.0)
    json.dumps(rep.as_dict())


# curvature --------------------------------------------------------------------------------

def test_constant_metric_flat():
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    rep = G.curvature(lambda X: g, np.array([0.1, 0.2, 0.3, 0.4]), 0.0)
    assert rep.max_traceless_ricci == 0 and rep.scalar_defect == 0


def test_heaven_limit_ricci_flat():
    rep = G.curvature(G.key_metric(zero_theta, 0.0), np.array([0.3, -0.2, 0.7, 1.1]), 0.0)
    assert rep.max_traceless_ricci == 0 and rep.scalar == 0


@pytest.mark.parametrize("lam", [1.0, -2.0])
def test_zero_theta_is_einstein(lam):
    # Theta = 0 solves the reduced equation for every Lambda
    rep = G.curvature(G.key_metric(zero_theta, lam), np.array([0.3, -0.2, 0.7, 1.1]), lam)
    assert rep.scalar == pytest.approx(-4 * lam, rel=1e-9)
    assert rep.max_traceless_ricci <= 1e-9


def test_non_einstein_control():
    # a non-Einstein control: a conformally flat metric with nonzero traceless Ricci
    def metric(X):
        f = math.exp(X[2])
        return f * np.array([[0, 0, 0, 1.0], [0, 0, -1.0, 0], [0, -1.0, 0, 0], [1.0, 0, 0, 0]])
    rep = G.curvature(metric, np.array([0.0, 0.0, 0.2, 0.1]), 1.0)
    assert rep.max_traceless_ricci > 1e-3


@pytest.mark.parametrize("X,lam,z0", [
    ((0.0, 0.0, 1.0, 1.0), 1.0, 1.0), ((0.5, -1.2, -0.7, 0.1), 1.0, -1.0),
    ((1.0, 0.3, 1.4, 0.35), -1.0, 2.0), ((-0.4, 0.9, 2.5, 2.5), -1.0, 1.0),
])
def test_example_is_einstein(X, lam, z0):
    P = ModelParams(lam=lam, z0=z0)
    X = np.array(X)
    rep = G.curvature(G.example_metric(P), X, lam, G.example_fd_config(X, P))
    assert rep.scalar_defect <= 1e-6 and rep.max_traceless_ricci <= 1e-6


def test_richardson_monotone():
    X = np.array([0.2, 0.1, 1.2, 0.8])
    rep = G.curvature(G.example_metric(EX), X, 1.0, G.example_fd_config(X, EX))
    c = [v[0] for v in rep.levels]
    s = [v[1] for v in rep.levels]
    assert c[0] > c[1] > c[2] and s[0] > s[1] > s[2]
    assert rep.richardson_order == 2 * len(rep.levels)


def test_precision_modes():
    X = np.array([0.2, 0.1, 1.2, 0.8])
    out = {}
    for prec in ("double", "extended", "mp"):
        cfg = G.example_fd_config(X, EX, precision=prec)
        rep = G.curvature(G.example_metric(EX), X, 1.0, cfg)
        out[prec] = max(rep.max_traceless_ricci, rep.scalar_defect)
    assert out["mp"] <= 1e-6
    assert out["mp"] <= out["double"]
    with pytest.raises(ValueError):
        G.FDConfig(precision="quad")


def test_stencil_leaves_domain():
    X = np.array([0.0, 0.0, 1.0, 0.001])
    with pytest.raises(StencilError):
        G.curvature(G.example_metric(EX), X, 1.0, G.FDConfig(h=0.1))


def test_nonfinite_metric_in_stencil():
    def metric(X):
        return np.full((4, 4), np.nan) if X[0] > 0 else np.eye(4)
    with pytest.raises(StencilError):
        G.curvature(metric, np.zeros(4), 0.0)


def test_contraction_against_sympy():
    sympy = pytest.importorskip("sympy")
    xs = sympy.symbols("x0:4")
    x0, x1, x2, x3 = xs
    gs = sympy.Matrix([[1 + x0 * x1, x2, 0, sympy.Rational(1, 3)],
                       [x2, -1 - x3**2, x0 / 5, 0],
                       [0, x0 / 5, -1 + x1 * x3, sympy.Rational(1, 10)],
                       [sympy.Rational(1, 3), 0, sympy.Rational(1, 10), 1 + x0**2]])
    pt = {x0: 0.3, x1: -0.2, x2: 0.5, x3: 0.1}
    gi = gs.inv()
    Gam = [[[sum(gi[a, e] * (sympy.diff(gs[e, b], xs[c]) + sympy.diff(gs[e, c], xs[b]) - sympy.diff(gs[b, c], xs[e]))
                 for e in range(4)) / 2 for c in range(4)] for b in range(4)] for a in range(4)]
    Ric = sympy.zeros(4, 4)
    for b in range(4):
        for d in range(4):
            expr = 0
            for a in range(4):
                expr += sympy.diff(Gam[a][b][d], xs[a]) - sympy.diff(Gam[a][b][a], xs[d])
                for e in range(4):
                    expr += Gam[a][a][e] * Gam[e][b][d] - Gam[a][d][e] * Gam[e][b][a]
            Ric[b, d] = expr.subs(pt)
    Ric = np.array(Ric.evalf(), dtype=float)
    g = np.array(gs.subs(pt).evalf(), dtype=float)
    dg = np.array([[[float(sympy.diff(gs[a, b], xs[c]).subs(pt)) for b in range(4)] for a in range(4)]
                   for c in range(4)])
    ddg = np.array([[[[float(sympy.diff(gs[a, b], xs[c], xs[d]).subs(pt)) for b in range(4)] for a in range(4)]
                     for d in range(4)] for c in range(4)])
    gi = np.linalg.inv(g)
    # the kernels contract with the textbook sign; the public result flips it so R = -4 Lambda
    assert np.allclose(G.ricci_kernel(g, gi, dg, ddg), Ric, rtol=1e-12, atol=1e-12)
    R_num, S_num = G.ricci_from_derivatives(g, dg, ddg)
    assert np.allclose(R_num, -Ric, rtol=1e-12, atol=1e-12)
    assert S_num == pytest.approx(-float(np.einsum("ab,ab->", gi, Ric)), rel=1e-12)


def test_ricci_kernels_agree():
    rng = np.random.default_rng(2)
    g = np.array([[0.3, 0.1, 0.2, 1.0], [0.1, -0.4, -1.0, 0.0], [0.2, -1.0, 0.5, 0.0], [1.0, 0.0, 0.0, 0.1]])
    gi = np.linalg.inv(g)
    dg = rng.standard_normal((4, 4, 4))
    dg = dg + dg.transpose(0, 2, 1)
    ddg = rng.standard_normal((4, 4, 4, 4))
    ddg = ddg + ddg.transpose(1, 0, 2, 3)
    ddg = ddg + ddg.transpose(0, 1, 3, 2)
    assert np.allclose(G._ricci_numba(g, gi, dg, ddg), G._ricci_numpy(g, gi, dg, ddg), rtol=1e-12, atol=1e-12)


# Killing vectors ----------------------------------------------------------------------------

@pytest.mark.parametrize("X", [(0.0, 0.0, 1.0, 1.0), (1.1, -0.7, -1.5, 0.2), (0.3, 1.9, 2.2, 2.8)])
def test_example_killing_vectors(X):
    X = np.array(X)
    m = G.example_metric(EX)
    cfg = G.example_fd_config(X, EX)
    derivs = G.metric_derivatives(m, X, cfg)
    k1, k2, k3 = G.killing_vectors(example=True)
    assert G.killing_residual(k1, m, X, cfg, derivs) <= 1e-9
    assert G.killing_residual(k2, m, X, cfg, derivs) <= 1e-9
    assert G.killing_residual(k3, m, X, cfg, derivs) <= 1e-6


def test_non_killing_control():
    X = np.array([0.0, 0.0, 1.0, 1.0])
    dx = G.KillingVectorField("d_x", lambda Y: np.array([0.0, 0.0, 1.0, 0.0]), G.EXAMPLE_CHART)
    assert G.killing_residual(dx, G.example_metric(EX), X, G.example_fd_config(X, EX)) > 1e-2


def test_a32_key_metric_k3():
    L = ModelParams(lam=1.0)
    cert = find_seed("A32", L)
    t0, st0 = seed_to_state("A32", L, cert.state)
    sol = solve_profile("A32", L, t0, st0, 0.3)
    field = key_function("A32", L, sol)
    m = G.key_metric(field, 1.0)
    z = 0.5 * sum(sol.validity)
    X = np.array([0.2, -0.1, z, 1.0])
    cfg = G.FDConfig(h=1e-3, levels=3, precision="double")
    k = G.k3(structure_constants("A32"))
    assert G.killing_residual(k, m, X, cfg) <= 1e-6
    assert G.killing_residual(G.k1(), m, X, cfg) <= 1e-9
