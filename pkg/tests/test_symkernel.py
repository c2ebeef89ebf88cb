from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fieldcon.symkernel import (
    OpMatrix,
    OpPoly,
    OpRat,
    SingularMatrix,
    format_poly,
    format_rat,
    hermite_reduce,
    kernel_text,
    mat_det,
    mat_inverse,
    mat_kernel,
    matrix_from_json,
    matrix_to_json,
    param_field,
    parse_kernel,
    parse_rat,
    poly_from_json,
    poly_gcd,
    poly_to_json,
    rat_to_float,
    specialize_rat,
)

K = param_field(("a", "e"))
a, e = K.gens

COEFFS = [K(0), K(1), K(-1), K(2), K(3) / 2, a, e, a - 1, e**2, 1 / (a - 1), -e / (a + 2)]
coeff = st.sampled_from(COEFFS)
polys = st.lists(coeff, max_size=4).map(lambda cs: OpPoly(tuple(cs), K))
nonzero_polys = polys.filter(lambda p: not p.is_zero())
rats = st.tuples(polys, nonzero_polys).map(lambda t: OpRat.of(t[0]) / OpRat.of(t[1]))


# ring laws ----------------------------------------------------------------------


@given(polys, polys, polys)
def test_poly_ring_laws(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == OpPoly.zero(K)


@given(polys, polys)
def test_adjoint_is_involutive_ring_map(p, q):
    assert p.adjoint().adjoint() == p
    assert (p * q).adjoint() == p.adjoint() * q.adjoint()
    assert (p + q).adjoint() == p.adjoint() + q.adjoint()


@given(polys, nonzero_polys)
def test_division_with_remainder(p, q):
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert rem.is_zero() or rem.degree < q.degree


@given(nonzero_polys, nonzero_polys)
def test_gcd_divides_both(p, q):
    g = poly_gcd(p, q)
    assert (p % g).is_zero() and (q % g).is_zero()
    assert g.lc() == 1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        OpPoly.D(K).divmod(OpPoly.zero(K))
    with pytest.raises(ZeroDivisionError):
        OpRat.of(1, K) / OpRat.of(0, K)


@given(rats, rats, rats)
def test_fraction_field_laws(x, y, z):
    assert x + y == y + x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    if y:
        assert (x / y) * y == x


@given(rats)
def test_rat_is_reduced(x):
    assert x.den.lc() == 1
    assert poly_gcd(x.num, x.den).degree == 0 if x.num else x.den == OpPoly.const(1, K)


def test_local_rat_demotes():
    D = OpPoly.D(K)
    r = OpRat.of(D * D - 1) / OpRat.of(D + 1)
    assert r.is_local()
    assert r.as_poly() == D - 1


# matrices -------------------------------------------------------------------------


def _mat(rows):
    return OpMatrix.build([[x if isinstance(x, OpPoly) else OpPoly.const(x, K) for x in r] for r in rows])


@given(st.lists(polys, min_size=4, max_size=4))
def test_inverse_multiplies_back(entries):
    m = _mat([entries[:2], entries[2:]])
    if mat_det(m).is_zero():
        with pytest.raises(SingularMatrix):
            mat_inverse(m)
        return
    inv = mat_inverse(m)
    ident = OpMatrix.identity(m.row_labels, K)
    assert m.matmul(inv).equals(ident)
    assert inv.matmul(m).equals(ident)


@given(st.lists(polys, min_size=4, max_size=4))
def test_det_is_multiplicative_on_2x2(entries):
    m = _mat([entries[:2], entries[2:]])
    t = _mat([[entries[3], entries[1]], [entries[0], entries[2]]])
    assert mat_det(m.matmul(t)) == mat_det(m) * mat_det(t)


def test_nonlocal_inverse():
    D = OpPoly.D(K)
    m = _mat([[0, D], [D, 0]])
    inv = mat_inverse(m)
    assert not inv.is_local()
    assert inv[0, 1] == OpRat.of(1, K) / OpRat.of(D)
    assert kernel_text(inv[0, 1]) == "[1] / [d_y] delta(y-x)"


def test_left_kernel():
    D = OpPoly.D(K)
    m = _mat([[0, 0, 0], [0, 0, D], [0, -D, 0]])
    ker = mat_kernel(m)
    assert ker == [(OpPoly.const(1, K), OpPoly.zero(K), OpPoly.zero(K))]
    # a dependent pair of rows
    m2 = _mat([[1, D], [2, 2 * D]])
    (v,) = mat_kernel(m2)
    row = [v[0] * m2[0, j] + v[1] * m2[1, j] for j in range(2)]
    assert all(x.is_zero() for x in row)


def test_antisymmetry_check_uses_adjoint():
    D = OpPoly.D(K)
    assert _mat([[2 * D, 1], [-1, 0]]).is_distributionally_antisymmetric()
    # d_y delta(y-x) is itself antisymmetric, constants off the diagonal must flip sign
    assert _mat([[0, D], [D, 0]]).is_distributionally_antisymmetric()
    assert not _mat([[0, 1], [1, 0]]).is_distributionally_antisymmetric()
    assert not _mat([[1, 0], [0, 0]]).is_distributionally_antisymmetric()


# module membership ------------------------------------------------------------------


@given(polys, polys)
def test_hermite_reduce_decides_membership(c1, c2):
    D = OpPoly.D(K)
    one, zero = OpPoly.const(1, K), OpPoly.zero(K)
    basis = [(one, D, zero), (zero, D * D + a, one)]
    v = [c1 * x + c2 * y for x, y in zip(*basis)]
    assert all(r.is_zero() for r in hermite_reduce(v, basis))
    # (0, 0, 1) is outside the module, so shifting by it must leave a residual
    w = [v[0], v[1], v[2] + one]
    assert any(not r.is_zero() for r in hermite_reduce(w, basis))


def test_hermite_reduce_non_member():
    D = OpPoly.D(K)
    basis = [(D, OpPoly.zero(K))]
    res = hermite_reduce((OpPoly.const(1, K), OpPoly.zero(K)), basis)
    assert res[0] == OpPoly.const(1, K)


# text and json ------------------------------------------------------------------------


@given(rats)
def test_kernel_text_parses_back(x):
    text = f"({format_poly(x.num)})/({format_poly(x.den)})"
    assert parse_kernel(text, K) == x


@given(polys)
def test_poly_json_roundtrip(p):
    assert poly_from_json(poly_to_json(p), K) == p


def test_matrix_json_roundtrip():
    D = OpPoly.D(K)
    m = mat_inverse(_mat([[0, D + a], [-(D - a), 1]]))
    back = matrix_from_json(matrix_to_json(m), K)
    assert back.equals(m)
    assert back.row_labels == m.row_labels


def test_format_rat_is_decimal_free():
    assert format_rat(K(3) / 2) == "3/2"
    assert format_rat(1 / (e**2 * (a - 1))) == "1/(e^2*(a - 1))"
    assert format_rat(parse_rat("-(a^2-1)*e^2", K)) == "-e^2*(a - 1)*(a + 1)"


def test_kernel_text_examples():
    D = OpPoly.D(K)
    assert kernel_text(OpRat.of(D) * OpRat.of(1 / (e**2 * (a - 1)), K)) == "(1/(e^2*(a - 1))) d_y delta(y-x)"
    assert kernel_text(OpPoly.const(-1, K)) == "-delta(y-x)"
    assert kernel_text(2 * D) == "2 d_y delta(y-x)"
    assert kernel_text(OpPoly.zero(K)) == "0"


def test_specialize_and_evaluate():
    x = 1 / (e * (a - 1))
    assert specialize_rat(x, {"a": Fraction(3), "e": 1}, param_field()) == param_field()(1) / 2
    with pytest.raises(ZeroDivisionError):
        specialize_rat(x, {"a": 1}, param_field(("e",)))
    assert rat_to_float(x, {"a": 2.5, "e": 0.75}) == pytest.approx(1 / (0.75 * 1.5))
    p = OpPoly((a, K(0), e), K)
    assert p.evaluate(2j, {"a": 1.0, "e": 0.5}) == pytest.approx(1.0 - 2.0)


def test_parse_kernel_rejects_parameter_named_D():
    with pytest.raises(ValueError):
        parse_kernel("D", param_field(("D",)))
