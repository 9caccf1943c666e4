import numpy as np
import pytest

from sgsecant.invariants import (
    DEGREE6_FILLING,
    X_UNIVERSE,
    FillingPair,
    SparsePoly,
    allowed_invariant_degrees,
    aux_universe,
    column_determinant_product,
    column_determinants,
    contract_coefficient,
    degree_six_invariant,
    degree_six_multiplier,
    evaluation_scale,
    filling_search,
    invariant_vanishes,
    poly_to_lines,
    random_filling,
    read_invariant_file,
    write_invariant_file,
    young_symmetrize,
)
from sgsecant.tensor_core import (
    SecantSpec,
    apply_group,
    sample_ambient_point,
    sample_secant_point,
)

UNIV = tuple(("t", i) for i in range(6))


def var(i, coeff=1):
    return SparsePoly.variable(UNIV, ("t", i), coeff)


def test_sparsepoly_arithmetic():
    p = var(0) + var(1, 2)
    q = var(0) - var(1, 2)
    prod = p * q
    sq = var(0) * var(0) - var(1, 4) * var(1)
    assert prod == sq
    assert len(p * p) == 3
    assert not (p - p)
    assert (p * 0) == SparsePoly.zero(UNIV)
    assert p.evaluate([3, 5, 0, 0, 0, 0]) == 13


def test_sparsepoly_determinant_matches_manual_expansion():
    rows = [[("t", 0), ("t", 1)], [("t", 2), ("t", 3)]]
    det = SparsePoly.determinant(UNIV, rows)
    manual = var(0) * var(3) - var(1) * var(2)
    assert det == manual


def test_sparsepoly_determinant_duplicate_rows_cancels():
    rows = [[("t", 0), ("t", 1)], [("t", 0), ("t", 1)]]
    assert not SparsePoly.determinant(UNIV, rows)


def test_sparsepoly_normalization():
    p = var(0, -6) + var(1, 9)
    canonical, mult = p.normalized()
    assert mult == -3
    assert canonical == var(0, 2) + var(1, -3)
    assert canonical.content() == 1


def test_contract_coefficient_example_and_linearity():
    # extracting a factor leaves the cofactor untouched
    p = var(0) * var(2) * var(3) + var(1) * var(2)
    assert contract_coefficient(p, [("t", 0)]) == var(2) * var(3)
    assert contract_coefficient(p, [("t", 2)]) == var(0) * var(3) + var(1)
    # exact multiplicity: t0^2 is not matched by a single t0
    sq = var(0) * var(0)
    assert not contract_coefficient(sq, [("t", 0)])
    rng = np.random.default_rng(0)
    for _ in range(10):
        coeffs = rng.integers(-5, 6, size=8)
        a = var(0) * var(1, int(coeffs[0])) + var(2, int(coeffs[1])) * var(0) + var(3, int(coeffs[2]))
        b = var(0) * var(4, int(coeffs[3])) + var(5, int(coeffs[4]))
        lhs = contract_coefficient(a + b, [("t", 0)])
        rhs = contract_coefficient(a, [("t", 0)]) + contract_coefficient(b, [("t", 0)])
        assert lhs == rhs


def test_column_determinants_structure():
    v_polys, w_polys = column_determinants(DEGREE6_FILLING)
    universe = aux_universe(DEGREE6_FILLING)
    expected_first = SparsePoly.determinant(
        universe, [[("v", letter, c) for c in (1, 2, 3)] for letter in "abd"]
    )
    assert v_polys[0] == expected_first
    assert all(len(p) == 6 for p in v_polys)
    assert len(v_polys[0] * v_polys[1]) == 36
    assert all(len(p) == 720 for p in w_polys)
    # first column of the second tableau carries occurrences a1,a2,a3,b3,c2,c3
    labels = {lab for mono, _ in w_polys[0].monomials() for lab in mono}
    assert {(lab[1], lab[2]) for lab in labels} == {
        ("a", 1), ("a", 2), ("a", 3), ("b", 3), ("c", 2), ("c", 3)
    }


def test_degenerate_filling_product_is_zero():
    bad = FillingPair(
        tableau_v=(("a", "c"), ("a", "e"), ("d", "f")),
        tableau_w=DEGREE6_FILLING.tableau_w,
    )
    assert not column_determinant_product(bad)


def test_column_determinant_product_guard():
    with pytest.raises(RuntimeError):
        column_determinant_product(DEGREE6_FILLING, max_terms=10_000)


def test_filling_validation():
    with pytest.raises(ValueError):
        FillingPair((("a", "c"), ("b", "e"), ("d", "f")), (("a", "a", "b"),) * 6).validate()
    bad_v = FillingPair((("a", "a"), ("b", "e"), ("d", "f")), DEGREE6_FILLING.tableau_w)
    with pytest.raises(ValueError):
        bad_v.validate()
    DEGREE6_FILLING.validate()


def test_full_mode_monomial_structure():
    F = degree_six_invariant()
    assert len(F) == 10080
    plus = sum(1 for _, c in F.monomials() if c == 1)
    minus = sum(1 for _, c in F.monomials() if c == -1)
    assert plus == 5040 and minus == 5040
    assert F.total_degrees() == {6}
    for mono, _ in F.monomials():
        first = [lab[0] for lab in mono]
        assert sorted(first) == [1, 1, 2, 2, 3, 3]
        wedge = [x for lab in mono for x in lab[1:]]
        assert all(wedge.count(j) == 3 for j in range(1, 7))


def test_evaluate_mode_agrees_with_full_mode():
    raw_poly = young_symmetrize(DEGREE6_FILLING, mode="full", normalize=False)
    rng = np.random.default_rng(1)
    for _ in range(20):
        point = rng.standard_normal(len(X_UNIVERSE)) + 1j * rng.standard_normal(
            len(X_UNIVERSE)
        )
        value = young_symmetrize(DEGREE6_FILLING, mode="evaluate", point=point)
        direct = raw_poly.evaluate(point)
        assert abs(value - direct) < 1e-10 * abs(direct)
    canonical, mult = raw_poly.normalized()
    assert canonical == degree_six_invariant()
    assert mult == degree_six_multiplier()


def test_invariance_under_unit_determinant_transformations():
    rng = np.random.default_rng(2)
    spec = SecantSpec(2, 2, 5, 1)
    for _ in range(5):
        T = sample_ambient_point(spec, rng)
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        g = g * np.linalg.det(g) ** (-1 / 3)
        h = h * np.linalg.det(h) ** (-1 / 6)
        moved = apply_group(T, g, h)
        before = young_symmetrize(DEGREE6_FILLING, mode="evaluate", point=T)
        after = young_symmetrize(DEGREE6_FILLING, mode="evaluate", point=moved)
        assert abs(after - before) < 1e-8 * abs(before)


def test_invariant_vanishing_split():
    rng = np.random.default_rng(3)
    secant = SecantSpec(2, 2, 5, 5)
    for _ in range(20):
        assert invariant_vanishes(sample_secant_point(secant, rng))
        assert not invariant_vanishes(sample_ambient_point(secant, rng))


def test_evaluate_mode_input_checks():
    with pytest.raises(ValueError):
        young_symmetrize(DEGREE6_FILLING, mode="evaluate")
    rng = np.random.default_rng(4)
    with pytest.raises(ValueError):
        young_symmetrize(
            DEGREE6_FILLING,
            mode="evaluate",
            point=sample_ambient_point(SecantSpec(2, 1, 6, 1), rng),
        )
    with pytest.raises(ValueError):
        young_symmetrize(DEGREE6_FILLING, mode="nope")


def test_filling_search_screens_candidates():
    rng = np.random.default_rng(5)
    degenerate = FillingPair(
        tableau_v=(("a", "c"), ("a", "e"), ("d", "f")),
        tableau_w=DEGREE6_FILLING.tableau_w,
    )
    found = filling_search(rng, budget=2, candidates=[DEGREE6_FILLING, degenerate])
    assert found == [DEGREE6_FILLING]
    rng = np.random.default_rng(6)
    hits = filling_search(rng, budget=1)
    assert all(isinstance(f, FillingPair) for f in hits)


def test_random_filling_is_valid():
    rng = np.random.default_rng(7)
    for _ in range(10):
        random_filling(rng).validate()


def brute_force_degrees(s, dmax):
    return {
        d for d in range(dmax + 1) if d % 3 == 0 and (2 * d) % s == 0 and d <= 3 * s
    }


def test_allowed_invariant_degrees():
    assert allowed_invariant_degrees(7, 21) == {0, 21}
    assert allowed_invariant_degrees(6, 18) == {0, 3, 6, 9, 12, 15, 18}
    assert 15 in allowed_invariant_degrees(15, 45)
    for s in range(1, 20):
        assert allowed_invariant_degrees(s, 3 * s) == brute_force_degrees(s, 3 * s)


def test_invariant_file_roundtrip(tmp_path):
    F = degree_six_invariant()
    path = tmp_path / "invariant.poly"
    write_invariant_file(F, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# vars m=3 k=3 n=6 degree=6"
    assert len(lines) == 10081
    assert lines == poly_to_lines(F)
    assert sorted(lines[1:]) == lines[1:]
    back = read_invariant_file(path)
    assert back == F


def test_evaluation_scale_dominates_value():
    rng = np.random.default_rng(8)
    F = degree_six_invariant()
    point = rng.standard_normal(len(X_UNIVERSE)) + 1j * rng.standard_normal(
        len(X_UNIVERSE)
    )
    assert abs(F.evaluate(point)) <= evaluation_scale(F, point)
