"""Tests for polynomial map structure analysis."""

import itertools
import random
from fractions import Fraction

import pytest

from degreelab.polycore import Poly, parse_poly
from degreelab.mapforms import (
    FormViolationError,
    PolyMap,
    complex_jacobian_det,
    decompose_homogeneous,
    euler_cubic_identity_check,
    jacobian_det,
    jacobian_matrix,
    keller_check,
    map_compose,
    realify,
    realify_det_identity_residual,
    recognize_form,
)

from gen_maps import (
    random_complex_map,
    random_cubic_form_map,
    random_druzkowski_map,
    random_map,
    random_poly,
    random_upper_triangular_map,
)


def make_map(*exprs):
    n = len(exprs)
    return PolyMap([parse_poly(e, n) for e in exprs])


TRIANGULAR = make_map("x1 + x2^3", "x2")


def leibniz_det(rows, nvars):
    """Permutation-sum determinant, used as an independent oracle."""
    n = len(rows)
    total = Poly.zero(nvars)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n)
                         if perm[a] > perm[b])
        prod = Poly.const(nvars, 1)
        for i in range(n):
            prod = prod * rows[i][perm[i]]
        total = total + prod if inversions % 2 == 0 else total - prod
    return total


# --------------------------------------------------------------- PolyMap

def test_polymap_validation():
    with pytest.raises(ValueError):
        PolyMap([])
    with pytest.raises(ValueError):
        PolyMap([parse_poly("x1", 1), parse_poly("x1 + x2", 2)])


def test_polymap_eval():
    assert TRIANGULAR.eval([Fraction(1), Fraction(2)]) == (Fraction(9), Fraction(2))


def test_identity_map():
    F = PolyMap.identity(3)
    assert F.eval([1, 2, 3]) == (1, 2, 3)


# -------------------------------------------------------------- jacobian

def test_jacobian_triangular():
    jac = jacobian_matrix(TRIANGULAR)
    assert jac[0][0] == Poly.const(2, 1)
    assert jac[0][1] == parse_poly("3*x2^2", 2)
    assert jac[1][0] == Poly.zero(2)
    assert jac[1][1] == Poly.const(2, 1)


def test_jacobian_identity():
    jac = jacobian_matrix(PolyMap.identity(2))
    assert jac[0][0] == Poly.const(2, 1)
    assert jac[0][1] == Poly.zero(2)


def test_jacobian_matches_componentwise_diff():
    rng = random.Random(42)
    for _ in range(10):
        F = random_map(rng, 3)
        jac = jacobian_matrix(F)
        for i in range(3):
            for j in range(3):
                assert jac[i][j] == F.components[i].diff(j + 1)


def test_jacobian_cached_once():
    F = make_map("x1^2", "x2")
    assert jacobian_matrix(F) is jacobian_matrix(F)
    assert jacobian_det(F) is jacobian_det(F)


# ----------------------------------------------------------- determinant

def test_det_triangular_is_one():
    assert jacobian_det(TRIANGULAR) == Poly.const(2, 1)


def test_det_squares_map():
    F = make_map("x1^2", "x2^2")
    assert jacobian_det(F) == parse_poly("4*x1*x2", 2)


def test_det_matches_leibniz_oracle_small():
    rng = random.Random(7)
    for n in (2, 3):
        for _ in range(8):
            F = random_map(rng, n, max_deg=2)
            oracle = leibniz_det(jacobian_matrix(F), n)
            assert jacobian_det(F) == oracle


def test_det_elimination_path_matches_leibniz():
    # n = 5 exercises the fraction-free elimination branch
    rng = random.Random(19)
    for _ in range(3):
        F = random_map(rng, 5, max_deg=1)
        oracle = leibniz_det(jacobian_matrix(F), 5)
        assert jacobian_det(F) == oracle


def test_det_elimination_triangular_unit():
    rng = random.Random(23)
    F = random_upper_triangular_map(rng, 5)
    assert jacobian_det(F) == Poly.const(5, 1)


def test_det_singular_linear_map():
    F = make_map("x1 + x2", "x1 + x2")
    assert jacobian_det(F).is_zero


# ---------------------------------------------------------- keller_check

def test_keller_triangular():
    st = keller_check(TRIANGULAR)
    assert st.kind == "nonzero_constant"
    assert st.constant_value == 1
    assert st.is_keller


def test_keller_squares():
    st = keller_check(make_map("x1^2", "x2^2"))
    assert st.kind == "nonconstant"
    assert not st.is_keller


def test_keller_cubic_line():
    # det of d/dx (x^3 + x) = 3x^2 + 1: constant nowhere, never zero
    st = keller_check(make_map("x1^3 + x1"))
    assert st.kind == "nonconstant"


def test_keller_zero_det():
    st = keller_check(make_map("x1 + x2", "x1 + x2"))
    assert st.kind == "zero_constant"
    assert st.constant_value == 0


def test_keller_random_triangular():
    rng = random.Random(99)
    for _ in range(10):
        n = rng.randint(2, 4)
        st = keller_check(random_upper_triangular_map(rng, n))
        assert st.kind == "nonzero_constant"
        assert st.constant_value == 1


# ---------------------------------------------- homogeneous decomposition

def test_decompose_triangular():
    parts = decompose_homogeneous(TRIANGULAR)
    assert sorted(parts) == [1, 3]
    assert parts[1] == PolyMap.identity(2)
    assert parts[3] == make_map("x2^3", "0")


def test_decompose_constant_map():
    F = make_map("5", "-1/2")
    parts = decompose_homogeneous(F)
    assert sorted(parts) == [0]


def test_decompose_reconstructs():
    rng = random.Random(1234)
    for _ in range(15):
        n = rng.randint(1, 3)
        F = random_map(rng, n, max_deg=3)
        parts = decompose_homogeneous(F)
        for i in range(n):
            rebuilt = Poly.zero(n)
            for part in parts.values():
                rebuilt = rebuilt + part.components[i]
            assert rebuilt == F.components[i]


# --------------------------------------------------------- form witness

def test_form_triangular_druzkowski():
    w = recognize_form(TRIANGULAR)
    assert w.form == "druzkowski"
    assert w.linear_part_identity
    assert w.druzkowski_matrix == (
        (Fraction(0), Fraction(1)), (Fraction(0), Fraction(0)))


def test_form_cubic_but_not_cube():
    w = recognize_form(make_map("x1 + x1^2*x2", "x2"))
    assert w.form == "cubic_homogeneous"
    assert w.linear_part_identity
    assert w.druzkowski_matrix is None


def test_form_identity_is_druzkowski_zero_matrix():
    w = recognize_form(PolyMap.identity(3))
    assert w.form == "druzkowski"
    assert w.druzkowski_matrix == tuple(
        (Fraction(0),) * 3 for _ in range(3))


def test_form_rejects_quadratic_part():
    w = recognize_form(make_map("x1 + x2^2", "x2"))
    assert w.form == "neither"
    assert w.linear_part_identity


def test_form_rejects_wrong_linear_part():
    w = recognize_form(make_map("2*x1", "x2"))
    assert w.form == "neither"
    assert not w.linear_part_identity
    w2 = recognize_form(make_map("x1 + 1", "x2"))
    assert w2.form == "neither"
    assert not w2.linear_part_identity


def test_form_recovers_random_druzkowski_matrix():
    rng = random.Random(31)
    for _ in range(10):
        n = rng.randint(2, 4)
        F, rows = random_druzkowski_map(rng, n, nilpotent=False)
        w = recognize_form(F)
        assert w.form == "druzkowski"
        assert w.druzkowski_matrix == rows


def test_form_fractional_cube_coefficient():
    # H1 = (1/2 x2)^3 has coefficient 1/8 on x2^3
    w = recognize_form(make_map("x1 + 1/8*x2^3", "x2"))
    assert w.form == "druzkowski"
    assert w.druzkowski_matrix[0] == (Fraction(0), Fraction(1, 2))


def test_form_non_cube_coefficient():
    w = recognize_form(make_map("x1 + 2*x2^3", "x2"))
    assert w.form == "cubic_homogeneous"
    assert w.druzkowski_matrix is None


def test_form_permutation_invariance():
    rng = random.Random(62)
    for _ in range(8):
        n = 3
        F, _ = random_druzkowski_map(rng, n, nilpotent=False)
        perm = list(range(n))
        rng.shuffle(perm)
        # reindex variables and components simultaneously
        swapped_vars = [Poly.var(n, perm[j] + 1) for j in range(n)]
        comps = [F.components[perm.index(i)].compose(swapped_vars)
                 for i in range(n)]
        G = PolyMap(comps)
        assert recognize_form(G).form == recognize_form(F).form


# --------------------------------------------- scaled-derivative identity

def test_euler_identity_worked_example():
    residual = euler_cubic_identity_check(TRIANGULAR, [1, 1])
    assert residual == (Fraction(0), Fraction(0))


def test_euler_identity_at_origin():
    residual = euler_cubic_identity_check(TRIANGULAR, [0, 0])
    assert residual == (Fraction(0), Fraction(0))


def test_euler_identity_random_druzkowski():
    rng = random.Random(404)
    for _ in range(10):
        n = rng.randint(2, 4)
        F, _ = random_druzkowski_map(rng, n, nilpotent=False)
        a = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)]
        assert all(r == 0 for r in euler_cubic_identity_check(F, a))


def test_euler_identity_random_cubic_form():
    rng = random.Random(505)
    for _ in range(10):
        n = rng.randint(1, 4)
        F = random_cubic_form_map(rng, n)
        a = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n)]
        assert all(r == 0 for r in euler_cubic_identity_check(F, a))


def test_euler_identity_rejects_other_shapes():
    with pytest.raises(FormViolationError):
        euler_cubic_identity_check(make_map("x1^2", "x2"), [1, 1])


# ------------------------------------------------------------- realify

def test_realify_square():
    # z^2 -> (x^2 - y^2, 2xy)
    z_sq = (parse_poly("x1^2", 1), Poly.zero(1))
    F = realify([z_sq])
    assert F.components[0] == parse_poly("x1^2 - x2^2", 2)
    assert F.components[1] == parse_poly("2*x1*x2", 2)
    assert jacobian_det(F) == parse_poly("4*x1^2 + 4*x2^2", 2)


def test_realify_identity():
    ident = [(parse_poly("x1", 1), Poly.zero(1))]
    F = realify(ident)
    assert F == PolyMap.identity(2)


def test_realify_gaussian_coefficient():
    # (2 + 3i) * z  ->  (2x - 3y, 3x + 2y)
    Fc = [(parse_poly("2*x1", 1), parse_poly("3*x1", 1))]
    F = realify(Fc)
    assert F.components[0] == parse_poly("2*x1 - 3*x2", 2)
    assert F.components[1] == parse_poly("3*x1 + 2*x2", 2)


def test_realify_variable_interleaving():
    # For n=2 the real variables are (x1, y1, x2, y2); check z2 lands on
    # the third/fourth slots.
    Fc = [(parse_poly("x2", 2), Poly.zero(2)),
          (parse_poly("x1", 2), Poly.zero(2))]
    F = realify(Fc)
    assert F.components[0] == parse_poly("x3", 4)
    assert F.components[1] == parse_poly("x4", 4)
    assert F.components[2] == parse_poly("x1", 4)
    assert F.components[3] == parse_poly("x2", 4)


def test_complex_jacobian_det_square():
    z_sq = [(parse_poly("x1^2", 1), Poly.zero(1))]
    dr, di = complex_jacobian_det(z_sq)
    assert dr == parse_poly("2*x1", 1)
    assert di.is_zero


def test_realify_det_identity_random():
    rng = random.Random(606)
    for _ in range(12):
        n = rng.randint(1, 2)
        Fc = random_complex_map(rng, n, max_deg=3)
        assert realify_det_identity_residual(Fc).is_zero


# ------------------------------------------------------------- compose

def test_compose_triangular_with_inverse_is_identity():
    F = make_map("x1 + x2^3", "x2")
    G = make_map("x1 - x2^3", "x2")
    assert map_compose(F, G) == PolyMap.identity(2)
    assert map_compose(G, F) == PolyMap.identity(2)


def test_chain_rule_at_random_points():
    rng = random.Random(808)
    for _ in range(8):
        n = rng.randint(2, 3)
        F = random_map(rng, n, max_deg=2)
        G = random_map(rng, n, max_deg=2)
        p = [Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)]
        gp = [c.eval(p) for c in G.components]
        left = [[e.eval(p) for e in row] for row in jacobian_matrix(map_compose(F, G))]
        jf = [[e.eval(gp) for e in row] for row in jacobian_matrix(F)]
        jg = [[e.eval(p) for e in row] for row in jacobian_matrix(G)]
        for i in range(n):
            for j in range(n):
                dot = sum(jf[i][k] * jg[k][j] for k in range(n))
                assert left[i][j] == dot
