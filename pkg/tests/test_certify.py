import json

import numpy as np
import pytest

from sgsecant.certify import (
    Certificate,
    InconclusiveLineError,
    UnivariatePoly,
    bareiss_det,
    block_specialization_check,
    certify_box,
    certify_phi,
    factor_degrees_mod_p,
    interpolate_integer_poly,
    irreducibility_certificate,
    lemma_forces_irreducibility,
    lemma_gap_scan,
    poly_gcd,
    prime_stream,
    specialize_to_line,
    squarefree_decompose,
)
from sgsecant.flattening import GenericSkewMatrix, PatternMatrix, box_product
from sgsecant.certify import _line_matrix_values


def test_bareiss_against_numpy():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 5, 8):
        M = rng.integers(-9, 10, size=(n, n))
        exact = bareiss_det(M.tolist())
        approx = np.linalg.det(M.astype(float))
        assert abs(exact - approx) < 1e-6 * max(1.0, abs(approx))
    singular = [[1, 2, 3], [2, 4, 6], [0, 1, 5]]
    assert bareiss_det(singular) == 0
    assert bareiss_det([[7]]) == 7
    assert bareiss_det([[0, 1], [1, 0]]) == -1


def test_interpolation_newton_form():
    f = UnivariatePoly([3, -2, 0, 5])  # 3 - 2t + 5t^3
    values = [f(t) for t in range(4)]
    assert interpolate_integer_poly(values) == f
    assert interpolate_integer_poly([4]) == UnivariatePoly([4])


def test_poly_gcd_and_exact_division():
    a = UnivariatePoly([1, 2, 1])  # (t+1)^2
    b = UnivariatePoly([1, 1]) * UnivariatePoly([2, 1])
    g = poly_gcd(a, b)
    assert g == UnivariatePoly([1, 1])
    quotient = a.divide_exact(g)
    assert quotient == UnivariatePoly([1, 1])
    with pytest.raises(ArithmeticError):
        UnivariatePoly([1, 0, 1]).divide_exact(UnivariatePoly([1, 1]))


def test_single_variable_pattern_specializes_linearly():
    pattern = PatternMatrix([[1]], [[0]], [(1,)], label="unit")
    rng = np.random.default_rng(1)
    f, line_seed = specialize_to_line(pattern, rng)
    line_rng = np.random.default_rng(line_seed)
    alpha = int(line_rng.integers(-10, 11, 1)[0])
    beta = int(line_rng.integers(-10, 11, 1)[0])
    assert f == UnivariatePoly([alpha, beta])


def test_specialization_agrees_with_direct_determinants():
    pattern = box_product(GenericSkewMatrix(3), GenericSkewMatrix(4))
    rng = np.random.default_rng(2)
    f, line_seed = specialize_to_line(pattern, rng)
    line_rng = np.random.default_rng(line_seed)
    nvars = len(pattern.variables)
    alpha = [int(x) for x in line_rng.integers(-10, 11, nvars)]
    beta = [int(x) for x in line_rng.integers(-10, 11, nvars)]
    for t in (17, -5, 23):
        direct = bareiss_det(_line_matrix_values(pattern, alpha, beta, t))
        assert f(t) == direct


def test_zero_patterns_give_zero_polynomial():
    rng = np.random.default_rng(3)
    for s in (1, 2):
        pattern = box_product(GenericSkewMatrix(3), GenericSkewMatrix(s))
        f, _ = specialize_to_line(pattern, rng)
        assert not f


def test_degree_bookkeeping():
    rng = np.random.default_rng(4)
    for s in range(3, 9):
        pattern = box_product(GenericSkewMatrix(3), GenericSkewMatrix(s))
        f, _ = specialize_to_line(pattern, rng)
        assert f.degree == 3 * s


def test_squarefree_reassembly():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g1 = UnivariatePoly([int(c) for c in rng.integers(-5, 6, 3)] + [1])
        g2 = UnivariatePoly([int(c) for c in rng.integers(-5, 6, 2)] + [1])
        f = g1 * g1 * g2.scaled(int(rng.integers(1, 5)))
        content, parts = squarefree_decompose(f)
        rebuilt = UnivariatePoly([content])
        for factor, mult in parts:
            for _ in range(mult):
                rebuilt = rebuilt * factor
        assert rebuilt == f


def test_perfect_power_cases():
    rng = np.random.default_rng(6)
    c3 = certify_box(3, rng)
    assert (c3.kind, c3.base_degree, c3.exponent) == ("perfect_power", 3, 3)
    c4 = certify_box(4, rng)
    assert (c4.kind, c4.base_degree, c4.exponent) == ("perfect_power", 6, 2)
    phi0 = certify_phi(0, rng)
    assert (phi0.kind, phi0.base_degree, phi0.exponent) == ("perfect_power", 3, 3)


def test_factor_degrees_small_cases():
    assert factor_degrees_mod_p(UnivariatePoly([1, 0, 1]), 3) == (2,)
    assert factor_degrees_mod_p(UnivariatePoly([1, 0, 1]), 5) == (1, 1)
    assert factor_degrees_mod_p(UnivariatePoly([0, 1]), 7) == (1,)
    with pytest.raises(ValueError):
        factor_degrees_mod_p(UnivariatePoly([1, 0, 1]), 4)
    with pytest.raises(ValueError):
        # not squarefree mod 2
        factor_degrees_mod_p(UnivariatePoly([1, 2, 1]), 2)


def test_factor_degrees_sum_to_degree():
    rng = np.random.default_rng(7)
    primes = prime_stream()
    p = next(primes)
    for _ in range(10):
        f = UnivariatePoly([int(c) for c in rng.integers(-20, 21, 9)] + [1])
        degrees = factor_degrees_mod_p(f, p)
        assert sum(degrees) == f.degree


def test_irreducibility_certificate_quadratic():
    cert = irreducibility_certificate(UnivariatePoly([1, 0, 1]), primes=[3])
    assert cert.kind == "irreducible"
    assert cert.primes == (3,)
    assert cert.degree_multisets == ((2,),)


def test_certificate_never_passes_reducible_products():
    rng = np.random.default_rng(8)
    count = 0
    while count < 20:
        a, b = rng.integers(1, 30, size=2)
        f = UnivariatePoly([int(a), 0, 1]) * UnivariatePoly([int(b), 0, 1])
        # both factors are irreducible over Q (negative roots of t^2 + c)
        cert = irreducibility_certificate(f)
        assert cert.kind == "inconclusive"
        count += 1


def test_structure_table_one_through_eight():
    rng = np.random.default_rng(9)
    kinds = []
    for s in range(1, 9):
        cert = certify_box(s, rng)
        if cert.kind == "perfect_power":
            kinds.append((cert.kind, cert.base_degree, cert.exponent))
        else:
            kinds.append(cert.kind)
    assert kinds == [
        "zero",
        "zero",
        ("perfect_power", 3, 3),
        ("perfect_power", 6, 2),
        "irreducible",
        "irreducible",
        "irreducible",
        "irreducible",
    ]


def test_lemma_gap_scan():
    # independent oracle: direct divisibility scan
    def forced(s):
        return not any(d % 3 == 0 and (2 * d) % s == 0 for d in range(1, 3 * s))

    assert lemma_forces_irreducibility(7)
    assert not lemma_forces_irreducibility(15)
    assert not lemma_forces_irreducibility(6)
    assert lemma_gap_scan(20) == [s for s in range(1, 21) if forced(s)]


def test_block_specialization_residuals():
    rng = np.random.default_rng(10)
    for s in (4, 8):
        for _ in range(3):
            assert block_specialization_check(s, rng) < 1e-9
    assert block_specialization_check(6, rng, t_prime=0.0) == 0.0
    with pytest.raises(ValueError):
        block_specialization_check(3, rng)


def test_certificate_json_roundtrip():
    rng = np.random.default_rng(11)
    cert = certify_box(6, rng)
    blob = json.loads(json.dumps(cert.to_json()))
    assert blob["input"] == "box:s=6"
    assert blob["kind"] == "irreducible"
    assert blob["degree"] == 18
    assert all(isinstance(p, int) for p in blob["primes"])
    zero = certify_box(2, rng)
    assert zero.to_json()["kind"] == "zero"


def test_prime_stream_starts_above_bound():
    stream = prime_stream()
    first = [next(stream) for _ in range(3)]
    assert all(p > 2**20 for p in first)
    assert first == sorted(set(first))
