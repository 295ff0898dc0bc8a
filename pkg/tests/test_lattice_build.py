from fractions import Fraction
from importlib import resources

import mpmath
import pytest

from quatlattice.cli import read_gram
from quatlattice.field_core import (
    embeddings,
    is_totally_positive,
    make_quadratic,
    make_simplest_quartic,
    norm,
    trace,
)
from quatlattice.lattice_analyze import is_even
from quatlattice.lattice_build import (
    BARNES_WALL16,
    E8xE8,
    TwistError,
    TwistValidationError,
    build_quadratic,
    build_quartic,
    det_via_formula,
    exact_det,
    exact_gram,
    gram_det_via_formula,
    quartic_s,
    twist_E8,
    twist_quartic,
)
from quatlattice.quat_algebra import QuaternionElement, QuaternionOrder, maximal_order


def fixture(name):
    return read_gram(str(resources.files("quatlattice") / "data" / name))


def as_ints(G):
    return [[int(x) for x in row] for row in G]


@pytest.fixture(scope="module")
def e8():
    return build_quadratic(5)


@pytest.fixture(scope="module")
def bw16():
    return build_quartic(20)


def test_e8_gram_matches_printed_matrix(e8):
    G = e8.gram()
    assert all(x.denominator == 1 for row in G for x in row)
    assert as_ints(G) == fixture("e8_sqrt5.gram")


def test_e8_twist_is_worked_example(e8):
    F = e8.field
    rt = F.sqrt_radicand()
    eps = 2 + rt
    assert e8.alpha == 1 / (eps * rt)
    assert norm(e8.alpha) == Fraction(1, 5)


def test_bw16_gram_matches_printed_matrix_after_basis_change(bw16):
    # the printed matrix uses (r^2 - 1)/2 in place of (1 + r^2)/2; the two
    # integral bases differ by a unimodular change, so the lattices coincide
    F = bw16.field
    r = F.gen()
    W = [F.one(), r, (r * r - 1) / 2, F.integral_basis_elements()[3]]
    Z = [g * w for g in bw16.order.generators for w in W]
    G = exact_gram(bw16.order, bw16.alpha, basis=Z)
    assert as_ints(G) == fixture("bw16_m20.gram")


@pytest.mark.parametrize("D", [2, 5, 13, 29, 53, 10, 26])
def test_e8_twists_are_valid(D):
    lat = build_quadratic(D)
    G = lat.gram()
    assert exact_det(G) == 1 and is_even(G)
    assert is_totally_positive(lat.alpha)
    assert norm(lat.alpha) == Fraction(1, lat.field.field_disc)


@pytest.mark.parametrize("D", [13, 29, 53, 173])
def test_family_method_for_s_squared_plus_4(D):
    lat = build_quadratic(D, "family")
    G = lat.gram()
    assert exact_det(G) == 1 and is_even(G)


def test_family_and_pell_give_different_grams_for_d5():
    a = build_quadratic(5, "pell").gram()
    b = build_quadratic(5, "family").gram()
    assert exact_det(a) == exact_det(b) == 1
    assert a != b


def test_no_twist_without_negative_pell():
    with pytest.raises(TwistError):
        twist_E8(make_quadratic(3))  # x^2 - 3y^2 = -1 has no solution


def test_no_twist_when_algebra_ramified():
    with pytest.raises(TwistError):
        twist_E8(make_quadratic(17))  # d_F = 1 mod 8, D_B = 2 Z_F


def test_exact_gram_is_symmetric_and_integral(bw16):
    G = bw16.gram()
    n = len(G)
    assert n == 16
    assert all(G[i][j] == G[j][i] for i in range(n) for j in range(n))
    assert all(x.denominator == 1 for row in G for x in row)


class TestFormula:
    def test_unimodular_cases_match_formula(self):
        for lat in (build_quadratic(5), build_quadratic(13, "family"), build_quartic(6)):
            assert exact_det(lat.gram()) == det_via_formula(lat.order, lat.alpha) == 1

    def test_gram_det_is_square_of_formula(self, bw16):
        # the formula gives the covolume; the Gram determinant is its square
        assert det_via_formula(bw16.order, bw16.alpha) == 16
        assert exact_det(bw16.gram()) == gram_det_via_formula(bw16.order, bw16.alpha) == 256

    def test_formula_with_ramified_algebra(self):
        F = make_quadratic(17)
        O = maximal_order(F)
        rt = F.sqrt_radicand()
        alpha = 1 / ((4 + rt) * rt)  # 4 + sqrt(17) has norm -1
        assert norm(alpha) == Fraction(1, 17)
        assert det_via_formula(O, alpha) == 4

    def test_formula_rejects_non_maximal(self):
        F = make_quadratic(5)
        gens = tuple(QuaternionElement.basis_unit(F, c) for c in "1ijk")
        with pytest.raises(ValueError):
            det_via_formula(QuaternionOrder(F, gens), F.one())


class TestQuartic:
    def test_selection_log_names_validated_scaling(self, bw16):
        log = bw16.selection_log
        validated = [e for e in log if e["status"] == "validated"]
        assert validated and validated[0]["candidate"].startswith("B: 2/(s f') with s=(...)/4")
        example = [e for e in log if e["candidate"].startswith("A:")][0]
        assert example["status"] == "rejected"
        assert bw16.expected_class == BARNES_WALL16

    def test_norms_of_s(self):
        # Nm(s) = 1 holds for the halved element, not the quartered one
        F = make_simplest_quartic(20)
        assert norm(quartic_s(F, 2)) == 1
        assert norm(quartic_s(F, 4)) == Fraction(1, 16)
        with mpmath.workprec(128):
            prod = mpmath.fprod(embeddings(quartic_s(F, 2)).values)
            assert abs(prod - 1) < mpmath.mpf(10) ** -30

    def test_e8xe8_twist(self):
        F = make_simplest_quartic(6)
        alpha, cls, log = twist_quartic(F)
        assert cls == E8xE8
        assert norm(alpha) == Fraction(1, F.field_disc)
        assert is_totally_positive(alpha)

    def test_excluded_valuations(self):
        with pytest.raises(TwistError):
            twist_quartic(make_simplest_quartic(8))

    def test_validation_error_carries_diagnostics(self):
        err = TwistValidationError("x", [{"candidate": "c", "status": "rejected"}])
        assert err.diagnostics[0]["status"] == "rejected"


@pytest.mark.parametrize("builder", [lambda: build_quadratic(5), lambda: build_quartic(6)])
def test_generator_matrix_reproduces_gram(builder):
    lat = builder()
    G = lat.gram()
    approx = lat.generator_matrix(128).gram()
    with mpmath.workprec(128):
        for i, row in enumerate(G):
            for j, x in enumerate(row):
                exact = mpmath.mpf(x.numerator) / x.denominator
                assert abs(approx[i][j] - exact) <= mpmath.mpf(10) ** -30 * max(1, abs(exact))


def test_trace_form_entries(e8):
    # the diagonal entry for the basis element 1 is Tr(alpha * 2)
    assert e8.gram()[0][0] == trace(e8.alpha * 2)
