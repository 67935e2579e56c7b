import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pke_lab import jets as J
from pke_lab import quartic_weyl as qw
from pke_lab.errors import UndefinedPatternError

Q = qw.QuarticCoefficients


def exact_invariants(c5, c4, c3, c2, c1):
    """I, J, D, P, R in exact rational arithmetic (independent transcription)."""
    c5, c4, c3, c2, c1 = (Fraction(c) for c in (c5, c4, c3, c2, c1))
    I = c1 * c5 - 4 * c2 * c4 + 3 * c3 * c3
    # J = det [[c5, c4, c3], [c4, c3, c2], [c3, c2, c1]]
    Jv = (c5 * (c3 * c1 - c2 * c2) - c4 * (c4 * c1 - c3 * c2) + c3 * (c4 * c2 - c3 * c3))
    D = I**3 - 27 * Jv**2
    P = 48 * (c3 * c5 - c4 * c4)
    R = 64 * (c1 * c5**3 - 9 * c3**2 * c5**2 + 24 * c3 * c5 * c4**2 - 4 * c2 * c4 * c5**2 - 12 * c4**4)
    return I, Jv, D, P, R


# weyl_from_theta ------------------------------------------------------------------------

def test_weyl_from_x4():
    x, y = J.variables(0.3, -0.2)
    assert qw.weyl_from_theta(x**4).as_array() == pytest.approx([48, 0, 0, 0, 0], abs=1e-12)


def test_weyl_from_x2y2():
    x, y = J.variables(0.3, -0.2)
    assert qw.weyl_from_theta(x * x * y * y).as_array() == pytest.approx([0, 0, 8, 0, 0], abs=1e-12)


def test_weyl_from_xy3():
    x, y = J.variables(0.3, -0.2)
    assert qw.weyl_from_theta(x * y**3).as_array() == pytest.approx([0, 0, 0, 12, 0], abs=1e-12)


# invariants ------------------------------------------------------------------------------

def test_invariants_xi4_minus_1():
    inv = qw.invariants(Q(1, 0, 0, 0, -1))
    assert (inv.I, inv.J, inv.D) == (-1, 0, -1)


def test_invariants_four_real_roots():
    c = (1, 0, Fraction(-5, 6), 0, 4)
    I, Jv, D, P, R = exact_invariants(*c)
    assert (D, P, R) == (Fraction(81, 4), -40, -144)
    inv = qw.invariants(Q(*(float(v) for v in c)))
    assert inv.D == pytest.approx(20.25, rel=1e-14)
    assert inv.P == pytest.approx(-40, rel=1e-14)
    assert inv.R == pytest.approx(-144, rel=1e-14)


def test_invariants_quadruple_root():
    inv = qw.invariants(Q(1, 0, 0, 0, 0))
    assert (inv.I, inv.J, inv.D, inv.P, inv.R) == (0, 0, 0, 0, 0)


def test_discriminant_against_sympy():
    sympy = pytest.importorskip("sympy")
    xi = sympy.symbols("xi")
    c = (Fraction(2), Fraction(-1, 3), Fraction(1, 5), Fraction(3, 7), Fraction(-1, 2))
    poly = sympy.Poly(sum(sympy.Rational(b) * sympy.Rational(v.numerator, v.denominator) * xi**(4 - k)
                          for k, (b, v) in enumerate(zip((1, 4, 6, 4, 1), c))), xi)
    # with the binomial normalisation the classical discriminant is 256 (I^3 - 27 J^2)
    _, _, D, _, _ = exact_invariants(*c)
    disc = sympy.discriminant(poly)
    assert sympy.Rational(disc) / sympy.Rational(D.numerator, D.denominator) == 256
    inv = qw.invariants(Q(*(float(v) for v in c)))
    assert inv.D == pytest.approx(float(D), rel=1e-12)


# classify_real ------------------------------------------------------------------------------

def test_classify_examples():
    assert qw.classify(Q(1, 0, 0, 0, -1)).tag == qw.I_RC
    assert qw.classify(Q(1, 0, -5 / 6, 0, 4)).tag == qw.I_R
    assert qw.classify(Q(1, 0, 5 / 6, 0, 4)).tag == qw.I_C
    assert qw.classify(Q(1, 0, 0, 0, 0)).tag == qw.DEGENERATE


def test_classify_ic_exact_values():
    _, _, D, P, _ = exact_invariants(1, 0, Fraction(5, 6), 0, 4)
    assert D == Fraction(81, 4) and P == 40


def test_margin_reported():
    t = qw.classify(Q(1, 0, 0, 0, -1))
    assert t.margin > 0
    assert qw.classify(Q(1, 0, 0, 0, 0)).margin <= 0


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        qw.classify_real(qw.invariants(Q(1, 0, 0, 0, -1)), eps=-1)


def test_unresolved_boundary():
    # D > 0 with P = 0 exactly and R < 0: left unresolved
    inv = qw.QuarticInvariants(I=1, J=0, D=1, P=0.0, R=-1, d_scale=1, p_scale=1, r_scale=1)
    assert qw.classify_real(inv).tag == qw.UNRESOLVED


def test_complex_predicate():
    assert qw.classify_complex(qw.invariants(Q(1, 0, 0, 0, -1))).tag == qw.I_COMPLEX
    assert qw.classify_complex(qw.invariants(Q(1, 0, 0, 0, 0))).tag == qw.DEGENERATE


def test_nonfinite_coefficients_rejected():
    with pytest.raises(ValueError):
        Q(math.nan, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        Q.from_sequence([1, 2, 3])


# root oracle ------------------------------------------------------------------------------------

def test_roots_xi4_minus_1():
    pat = qw.classify_by_roots(Q(1, 0, 0, 0, -1))
    assert pat.n_real == 2 and pat.signature == (1, 1, 1, 1) and pat.tag == qw.I_RC


def test_roots_four_real():
    pat = qw.classify_by_roots(Q(1, 0, -5 / 6, 0, 4))
    assert pat.n_real == 4 and not pat.repeated
    finite = sorted(r.real for r in pat.roots)
    assert finite == pytest.approx([-2, -1, 1, 2], abs=1e-10)


def test_roots_linear_has_triple_root_at_infinity():
    pat = qw.classify_by_roots(Q(0, 0, 0, 1, 0))
    assert pat.chart_degenerate and pat.at_infinity == 3
    assert pat.signature == (3, 1) and pat.tag == qw.DEGENERATE
    assert "degenerate-by-leading-coefficient" in pat.notes


def test_roots_zero_quartic():
    with pytest.raises(UndefinedPatternError):
        qw.classify_by_roots(Q(0, 0, 0, 0, 0))


def quartic_from_roots(roots, lead=1.0):
    """Binomially normalised coefficients of lead * prod(xi - r)."""
    p = np.real(np.poly(roots)) * lead
    return Q(p[0], p[1] / 4, p[2] / 6, p[3] / 4, p[4])


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-2, 2), lead=st.floats(0.2, 3))
def test_repeated_roots_have_vanishing_d(a, b, c, lead):
    assume(min(abs(a - b), abs(a - c), abs(b - c)) > 0.05)
    q = quartic_from_roots([a, a, b, c], lead)
    inv = qw.invariants(q)
    assert qw.classify_real(inv).tag == qw.DEGENERATE
    assert qw.classify_by_roots(q).repeated


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-2, 2), d=st.floats(-2, 2))
def test_simple_roots_leave_the_band(a, b, c, d):
    r = [a, b, c, d]
    assume(min(abs(r[i] - r[j]) for i in range(4) for j in range(i)) > 0.05)
    q = quartic_from_roots(r)
    assert qw.classify(q).tag == qw.I_R
    assert qw.classify_by_roots(q).tag == qw.I_R


def oracle_tag(q):
    return qw.classify_by_roots(q).tag


@settings(max_examples=400, deadline=None)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=5, max_size=5))
def test_oracle_agreement_property(cs):
    q = Q(*cs)
    inv = qw.invariants(q)
    # corpus filter: |D| above 1e-6 times the sixth power of the coefficient magnitude
    assume(abs(inv.D) > 1e-6 * q.magnitude**6)
    assert qw.classify_real(inv).tag == oracle_tag(q)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=5, max_size=5), st.floats(0.01, 100))
def test_scaling_equivariance(cs, lam):
    q = Q(*cs)
    assume(abs(qw.invariants(q).D) > 1e-6 * q.magnitude**6)
    s = Q(*(lam * c for c in cs))
    a, b = qw.invariants(q), qw.invariants(s)
    for name, k in (("I", 2), ("J", 3), ("D", 6), ("P", 2), ("R", 4)):
        va, vb = getattr(a, name), getattr(b, name)
        assert vb == pytest.approx(lam**k * va, rel=1e-9, abs=1e-12 * max(1.0, lam**k))
    assert qw.classify_real(a).tag == qw.classify_real(b).tag


# batch kernels ------------------------------------------------------------------------------------

def test_batch_matches_scalar():
    rng = np.random.default_rng(7)
    C = rng.uniform(-1, 1, (500, 5))
    C[:5] = [[1, 0, 0, 0, -1], [1, 0, -5 / 6, 0, 4], [1, 0, 5 / 6, 0, 4], [1, 0, 0, 0, 0], [0, 0, 0, 1, 0]]
    inv = qw.invariants_batch(C)
    tags = qw.classify_batch(C)
    for k, row in enumerate(C):
        s = qw.invariants(Q(*row))
        assert inv[k, :5] == pytest.approx([s.I, s.J, s.D, s.P, s.R], rel=1e-12, abs=1e-14)
        assert qw.TAGS[tags[k]] == qw.classify_real(s).tag


def test_batch_kernels_numba_equals_numpy():
    rng = np.random.default_rng(3)
    C = rng.uniform(-1, 1, (2000, 5))
    a, b = qw._invariants_batch_numba(C), qw._invariants_batch_numpy(C)
    # D cancels; compare it against its own term-magnitude scale (column 5)
    assert np.all(np.abs(a[:, 2] - b[:, 2]) <= 1e-13 * b[:, 5])
    keep = [0, 1, 3, 4, 5, 6, 7]
    assert np.allclose(a[:, keep], b[:, keep], rtol=1e-13, atol=1e-15)
    assert np.array_equal(qw._classify_batch_numba(C, 1e-9), qw._classify_batch_numpy(C, 1e-9))
