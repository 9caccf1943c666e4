"""Exact irreducibility and perfect-power certificates for pattern determinants.

The determinant of a symbolic pattern matrix is restricted to a random line
α + t·β with small integer coefficients, recovered exactly as an integer
polynomial in t by fraction-free determinant evaluations and interpolation,
and then analyzed: a perfect-power shape is detected by squarefree
decomposition over Q, and irreducibility is certified by intersecting the
feasible factor-degree splittings of the reductions modulo several large
primes.  Irreducibility of the restriction certifies irreducibility of the
full determinant; a reducible restriction proves nothing, so the outcome is
then reported as inconclusive.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .flattening import GenericSkewMatrix, PatternMatrix, box_product, phi_matrix
from .invariants import allowed_invariant_degrees


class InconclusiveLineError(RuntimeError):
    """The random line kept dropping degree; no certificate was attempted."""


# ---------------------------------------------------------------------------
# integer polynomials


class UnivariatePoly:
    """Dense univariate polynomial with arbitrary-precision integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = [int(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, UnivariatePoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"UnivariatePoly({list(self.coeffs)})"

    def __call__(self, t: int) -> int:
        value = 0
        for c in reversed(self.coeffs):
            value = value * t + c
        return value

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UnivariatePoly(out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __mul__(self, other):
        if not self or not other:
            return UnivariatePoly([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UnivariatePoly(out)

    def scaled(self, c: int):
        return UnivariatePoly([c * a for a in self.coeffs])

    def derivative(self):
        return UnivariatePoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, abs(c))
        return g

    def primitive(self):
        """(primitive part with positive leading coefficient, signed content)."""
        if not self:
            return UnivariatePoly([]), 0
        g = self.content()
        if self.coeffs[-1] < 0:
            g = -g
        return UnivariatePoly([c // g for c in self.coeffs]), g

    def divide_exact(self, other):
        """Quotient self/other when the division is exact over Z."""
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        out = [0] * max(len(rem) - d, 0)
        for i in range(len(rem) - 1, d - 1, -1):
            if rem[i] == 0:
                continue
            q, r = divmod(rem[i], lead)
            if r:
                raise ArithmeticError("division is not exact")
            out[i - d] = q
            for j, c in enumerate(other.coeffs):
                rem[i - d + j] -= q * c
        if any(rem):
            raise ArithmeticError("division is not exact")
        return UnivariatePoly(out)


def poly_gcd(a: UnivariatePoly, b: UnivariatePoly) -> UnivariatePoly:
    """Primitive gcd over Z (primitive pseudo-remainder sequence)."""
    a, _ = a.primitive()
    b, _ = b.primitive()
    if not a:
        return b
    if not b:
        return a
    while b:
        # pseudo-remainder of a by b, renormalized to primitive at each step
        delta = a.degree - b.degree
        if delta < 0:
            a, b = b, a
            continue
        lead = b.coeffs[-1]
        r = a.scaled(lead ** (delta + 1))
        while r and r.degree >= b.degree:
            shift = r.degree - b.degree
            factor = r.coeffs[-1] // lead if r.coeffs[-1] % lead == 0 else None
            if factor is None:
                # renormalize and retry with a fresh pseudo-remainder
                r = r.scaled(lead)
                continue
            step = UnivariatePoly([0] * shift + [factor]) * b
            r = r - step
        a, b = b, r.primitive()[0] if r else UnivariatePoly([])
    return a.primitive()[0]


def squarefree_decompose(f: UnivariatePoly):
    """Yun decomposition: (signed content, [(primitive factor, multiplicity)]).

    The product of factor^multiplicity times the content reproduces f
    exactly; a single repeated factor is how perfect powers show up.
    """
    if not f:
        raise ValueError("zero polynomial has no squarefree decomposition")
    prim, content = f.primitive()
    if prim.degree == 0:
        return content, []
    parts = []
    df = prim.derivative()
    g = poly_gcd(prim, df)
    c = prim.divide_exact(g)
    d = df.divide_exact(g) - c.derivative()
    i = 1
    while c.degree > 0:
        a = poly_gcd(c, d)
        if a.degree > 0:
            parts.append((a, i))
        c = c.divide_exact(a)
        d = d.divide_exact(a) - c.derivative()
        i += 1
    # fix content so that content * prod(parts) == f exactly
    rebuilt = UnivariatePoly([1])
    for a, mult in parts:
        for _ in range(mult):
            rebuilt = rebuilt * a
    scale = prim.coeffs[-1] // rebuilt.coeffs[-1]
    return content * scale, parts


def perfect_power_shape(f: UnivariatePoly):
    """(base_degree, exponent) when f = c · g^e with e >= 2, else None."""
    _, parts = squarefree_decompose(f)
    if len(parts) == 1 and parts[0][1] >= 2:
        return parts[0][0].degree, parts[0][1]
    return None


# ---------------------------------------------------------------------------
# exact determinants and line restriction


def bareiss_det(rows) -> int:
    """Fraction-free determinant of a square integer matrix."""
    M = [[int(x) for x in row] for row in rows]
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = M[k][k]
        for i in range(k + 1, n):
            row_i = M[i]
            row_k = M[k]
            head = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - head * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * M[-1][-1] if n else 1


def interpolate_integer_poly(values) -> UnivariatePoly:
    """Exact polynomial through (i, values[i]) for i = 0..N (Newton form)."""
    table = [Fraction(v) for v in values]
    n = len(table)
    diffs = [table[0]]
    for level in range(1, n):
        table = [(table[i + 1] - table[i]) / level for i in range(len(table) - 1)]
        diffs.append(table[0])
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for j in range(n):
        for i, b in enumerate(basis):
            poly[i] += diffs[j] * b
        # multiply basis by (t - j)
        nxt = [Fraction(0)] * (len(basis) + 1)
        for i, b in enumerate(basis):
            nxt[i] -= j * b
            nxt[i + 1] += b
        basis = nxt
    out = []
    for c in poly:
        if c.denominator != 1:
            raise ArithmeticError("interpolation of integer data gave a non-integer")
        out.append(int(c))
    return UnivariatePoly(out)


def _line_matrix_values(pattern: PatternMatrix, alpha, beta, t: int):
    vals = [a + t * b for a, b in zip(alpha, beta)]
    vals.append(0)
    idx = pattern.var_index
    sign = pattern.sign
    n = pattern.size
    return [
        [int(sign[r, c]) * vals[idx[r, c]] for c in range(n)] for r in range(n)
    ]


def specialize_to_line(pattern: PatternMatrix, rng, bound: int = 10, retries: int = 5):
    """Exact determinant of the pattern restricted to a random integer line.

    Returns (poly, line_seed).  An identically zero determinant comes back as
    the zero polynomial; a nonzero determinant whose restriction drops degree
    triggers a fresh line, and persistent drops raise InconclusiveLineError.
    """
    n = pattern.size
    nvars = len(pattern.variables)
    for _ in range(retries):
        line_seed = int(rng.integers(2**63))
        line_rng = np.random.default_rng(line_seed)
        alpha = [int(x) for x in line_rng.integers(-bound, bound + 1, nvars)]
        beta = [int(x) for x in line_rng.integers(-bound, bound + 1, nvars)]
        values = [
            bareiss_det(_line_matrix_values(pattern, alpha, beta, t))
            for t in range(n + 1)
        ]
        if not any(values):
            return UnivariatePoly([]), line_seed
        f = interpolate_integer_poly(values)
        if f.degree == n:
            return f, line_seed
    raise InconclusiveLineError(
        f"restriction of {pattern.label or 'pattern'} kept dropping degree"
    )


# ---------------------------------------------------------------------------
# factorization patterns modulo p


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_stream(start: int = 2**20 + 1):
    n = start if start % 2 else start + 1
    while True:
        if _is_probable_prime(n):
            yield n
        n += 2


def _gf_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _gf_monic(a, p):
    if not a:
        return a
    inv = pow(a[-1], p - 2, p)
    return [c * inv % p for c in a]


def _gf_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _gf_trim(out)


def _gf_mod(a, m, p):
    a = list(a)
    dm = len(m) - 1
    inv = pow(m[-1], p - 2, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            c = c * inv % p
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    del a[dm:]
    return _gf_trim(a)

def _gf_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, _gf_mod(a, _gf_monic(b, p), p)
    return _gf_monic(a, p)


def _gf_powmod(base, exponent, modulus, p):
    result = [1]
    base = _gf_mod(base, modulus, p) if len(base) >= len(modulus) else list(base)
    while exponent:
        if exponent & 1:
            result = _gf_mod(_gf_mul(result, base, p), modulus, p)
        base = _gf_mod(_gf_mul(base, base, p), modulus, p)
        exponent >>= 1
    return result


def factor_degrees_mod_p(f: UnivariatePoly, p: int):
    """Multiset of irreducible factor degrees of f modulo p.

    Distinct-degree factorization already pins the multiset: the degree-d
    stage captures every irreducible factor of degree d, each contributing d
    to its total degree.  Requires p prime, p not dividing the leading
    coefficient, and f squarefree mod p.
    """
    if not _is_probable_prime(p):
        raise ValueError(f"{p} is not prime")
    if f.degree < 1:
        raise ValueError("constant polynomial")
    if f.coeffs[-1] % p == 0:
        raise ValueError("prime divides the leading coefficient")
    fp = _gf_monic(_gf_trim([c % p for c in f.coeffs]), p)
    dfp = _gf_trim([i * c % p for i, c in enumerate(fp)][1:])
    if len(_gf_gcd(fp, dfp, p)) != 1:
        raise ValueError("not squarefree modulo this prime")
    degrees = []
    h = [0, 1]  # the Frobenius iterate, starting at t
    d = 0
    while len(fp) - 1 > 2 * d:
        d += 1
        h = _gf_powmod(h, p, fp, p)
        diff = list(h)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        g = _gf_gcd(fp, _gf_trim(diff), p)
        if len(g) > 1:
            count, rem = divmod(len(g) - 1, d)
            assert rem == 0
            degrees.extend([d] * count)
            fp = _gf_monic(_gf_exact_div(fp, g, p), p)
            h = _gf_mod(h, fp, p) if len(fp) > 1 else []
            if len(fp) == 1:
                break
    if len(fp) > 1:
        degrees.append(len(fp) - 1)
    return tuple(sorted(degrees))


def _gf_exact_div(a, b, p):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    inv = pow(b[-1], p - 2, p)
    for i in range(len(a) - 1, len(b) - 2, -1):
        c = a[i] * inv % p
        out[i - len(b) + 1] = c
        if c:
            for j in range(len(b)):
                a[i - len(b) + 1 + j] = (a[i - len(b) + 1 + j] - c * b[j]) % p
    assert not any(a[: len(b) - 1]) or _gf_trim(a[: len(b) - 1]) == []
    return _gf_trim(out)


def _subset_sums(degrees) -> int:
    mask = 1
    for d in degrees:
        mask |= mask << d
    return mask


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """Outcome of the determinant analysis with its modular evidence."""

    kind: str  # zero | perfect_power | irreducible | inconclusive
    input_desc: str = ""
    degree: int = None
    base_degree: int = None
    exponent: int = None
    primes: tuple = ()
    degree_multisets: tuple = ()
    lemma_forced: bool = False
    line_seed: int = None

    def to_json(self) -> dict:
        obj = {
            "input": self.input_desc,
            "line_seed": self.line_seed,
            "degree": self.degree,
            "kind": self.kind,
            "primes": list(self.primes),
            "degree_multisets": [list(m) for m in self.degree_multisets],
            "lemma_forced": self.lemma_forced,
        }
        if self.kind == "perfect_power":
            obj["base_degree"] = self.base_degree
            obj["exponent"] = self.exponent
        return obj


def _splitting_mask(f: UnivariatePoly, prime_budget: int, primes=None):
    """Feasible factor-degree bitmask of f from up to prime_budget primes."""
    n = f.degree
    feasible = (1 << (n + 1)) - 1
    used = []
    multisets = []
    stream = iter(primes) if primes is not None else prime_stream()
    trivial = (1 << n) | 1
    while len(used) < prime_budget:
        try:
            p = next(stream)
        except StopIteration:
            break
        try:
            degrees = factor_degrees_mod_p(f, p)
        except ValueError:
            continue
        used.append(p)
        multisets.append(degrees)
        feasible &= _subset_sums(degrees)
        if feasible == trivial:
            break
    return feasible, tuple(used), tuple(multisets)


def irreducibility_certificate(
    f: UnivariatePoly, prime_budget: int = 6, primes=None
) -> Certificate:
    """Certify irreducibility over Q by modular factor-degree splittings.

    Every prime's factor-degree multiset constrains the degrees of a
    hypothetical rational factorization to its subset sums; if the
    intersection over the probed primes leaves only the trivial splits, f is
    irreducible.  Anything else is inconclusive: reducibility over Q is
    never concluded from modular data alone.
    """
    if not f or f.degree < 1:
        raise ValueError("need a nonzero polynomial of positive degree")
    feasible, used, multisets = _splitting_mask(f, prime_budget, primes)
    trivial = (1 << f.degree) | 1
    kind = "irreducible" if feasible == trivial else "inconclusive"
    return Certificate(
        kind=kind,
        degree=f.degree,
        primes=used,
        degree_multisets=multisets,
    )


def lemma_forces_irreducibility(s: int) -> bool:
    """No admissible invariant degree below 3s, so the degree-3s determinant
    cannot factor into invariants."""
    return not any(0 < d < 3 * s for d in allowed_invariant_degrees(s, 3 * s))


def lemma_gap_scan(s_max: int):
    """All s <= s_max where degree arithmetic alone forces irreducibility."""
    return [s for s in range(1, s_max + 1) if lemma_forces_irreducibility(s)]


def certify_pattern(
    pattern: PatternMatrix,
    rng,
    lemma_s: int,
    input_desc: str,
    prime_budget: int = 6,
) -> Certificate:
    """Full pipeline: restrict to a line, classify the structure, certify."""
    f, line_seed = specialize_to_line(pattern, rng)
    if not f:
        # confirm the zero determinant on an independent line
        g, _ = specialize_to_line(pattern, rng)
        if g:
            raise InconclusiveLineError("inconsistent zero evaluations")
        return Certificate(kind="zero", input_desc=input_desc, degree=0, line_seed=line_seed)
    shape = perfect_power_shape(f)
    if shape is not None:
        base, exponent = shape
        return Certificate(
            kind="perfect_power",
            input_desc=input_desc,
            degree=f.degree,
            base_degree=base,
            exponent=exponent,
            line_seed=line_seed,
        )
    forced = lemma_forces_irreducibility(lemma_s)
    _, parts = squarefree_decompose(f)
    if len(parts) == 1 and parts[0][1] == 1:
        # a factorization of the full determinant restricts with the same
        # degrees to every degree-preserving line, so feasible splits may be
        # intersected across independent lines when one line is not enough
        n = f.degree
        trivial = (1 << n) | 1
        feasible = (1 << (n + 1)) - 1
        primes = []
        multisets = []
        for extra in range(3):
            if extra > 0:
                f, _ = specialize_to_line(pattern, rng)
                if not f or f.degree != n:
                    continue
            mask, used, sets = _splitting_mask(f, prime_budget)
            feasible &= mask
            primes.extend(used)
            multisets.extend(sets)
            if feasible == trivial:
                break
        kind = "irreducible" if (feasible == trivial or forced) else "inconclusive"
        return Certificate(
            kind=kind,
            input_desc=input_desc,
            degree=n,
            primes=tuple(primes),
            degree_multisets=tuple(multisets),
            lemma_forced=forced,
            line_seed=line_seed,
        )
    # repeated structure that is not a clean power (not expected here)
    return Certificate(
        kind="irreducible" if forced else "inconclusive",
        input_desc=input_desc,
        degree=f.degree,
        lemma_forced=forced,
        line_seed=line_seed,
    )


def certify_box(s: int, rng, prime_budget: int = 6) -> Certificate:
    """Certificate for the product pattern of 3x3 and sxs generic skews."""
    pattern = box_product(GenericSkewMatrix(3), GenericSkewMatrix(s))
    return certify_pattern(pattern, rng, s, f"box:s={s}", prime_budget)


def certify_phi(ell: int, rng, prime_budget: int = 6) -> Certificate:
    """Certificate for the flattening pattern of the ℓ-th family member."""
    pattern = phi_matrix(ell)
    return certify_pattern(pattern, rng, 4 * ell + 3, f"phi:l={ell}", prime_budget)


def block_specialization_check(s: int, rng, t_prime=None) -> float:
    """Numeric check of the block-evaluation identity behind the induction.

    Zeroing the variables that pair the leading 3-dimensional block with its
    complement makes the pattern block-diagonal, so its determinant splits as
    det(evaluated 9x9 block) times the complementary determinant.  Returns
    the relative residual between the two sides at random values.
    """
    if s < 4:
        raise ValueError("need s >= 4 for a nontrivial complementary block")
    pattern = box_product(GenericSkewMatrix(3), GenericSkewMatrix(s))
    values = np.empty(len(pattern.variables), dtype=complex)
    for idx, (i, j, k, l) in enumerate(pattern.variables):
        if l <= 3:
            if t_prime is None:
                values[idx] = rng.standard_normal() + 1j * rng.standard_normal()
            else:
                values[idx] = t_prime
        elif k <= 3:
            values[idx] = 0.0
        else:
            values[idx] = rng.standard_normal() + 1j * rng.standard_normal()
    M = pattern.evaluate(values)
    lead = [i * s + k for i in range(3) for k in range(3)]
    rest = [i * s + k for i in range(3) for k in range(3, s)]
    lhs = np.linalg.det(M)
    C = np.linalg.det(M[np.ix_(lead, lead)])
    rhs = C * np.linalg.det(M[np.ix_(rest, rest)])
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return float(abs(lhs - rhs) / scale)
