"""Exact sparse polynomials and the Young-symmetrizer contraction pipeline.

The degree-6 equation of sigma_5(Seg(P^2 x G(2,5))) is produced from a pair
of filled tableaux.  Each tableau column contributes a determinant in
auxiliary letter variables; the contraction steps then consume one letter at
a time, replacing its variables by x_{i,j,k,l}-weighted coefficients.

The product of all column determinants is astronomically large, so the
pipeline never expands it: it keeps the current polynomial as a sum of
weights attached to partially-consumed determinant factors.  Taking the
coefficient of a monomial of distinct variables factors across determinants,
and extracting a single variable from a determinant is a signed cofactor.
The resulting transition graph depends only on the filling and is cached, so
evaluating at many points after the first is cheap.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import gcd

import numpy as np

from .tensor_core import SecantSpec, TensorPoint

LETTERS = "abcdef"

#: number of x-variables for the degree-6 target, 3 * binom(6,3)
X_UNIVERSE = tuple(
    (i, j, k, l)
    for i in range(1, 4)
    for (j, k, l) in combinations(range(1, 7), 3)
)
_X_INDEX = {v: t for t, v in enumerate(X_UNIVERSE)}
_TRIPLES = tuple(combinations(range(1, 7), 3))


class SparsePoly:
    """Sparse polynomial with exact integer coefficients.

    Monomials are encoded as sorted byte strings of variable indices into a
    frozen, sorted universe (repeats encode exponents), which keeps the keys
    compact and canonically ordered.
    """

    __slots__ = ("universe", "terms", "_index")

    def __init__(self, universe, terms=None):
        self.universe = tuple(universe)
        if len(self.universe) > 255:
            raise ValueError("variable universe too large for byte encoding")
        self._index = {v: t for t, v in enumerate(self.universe)}
        self.terms = {}
        if terms:
            for key, coeff in terms.items():
                if coeff:
                    self.terms[key] = coeff

    @classmethod
    def zero(cls, universe):
        return cls(universe)

    @classmethod
    def constant(cls, universe, value: int):
        p = cls(universe)
        if value:
            p.terms[b""] = value
        return p

    @classmethod
    def variable(cls, universe, label, coeff: int = 1):
        p = cls(universe)
        if coeff:
            p.terms[bytes([p._index[label]])] = coeff
        return p

    def _same(self, other):
        if self.universe != other.universe:
            raise ValueError("polynomials live over different universes")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, SparsePoly)
            and self.universe == other.universe
            and self.terms == other.terms
        )

    def __len__(self):
        return len(self.terms)

    def __neg__(self):
        return SparsePoly(self.universe, {k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return SparsePoly(self.universe, out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scaled(other)
        self._same(other)
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = bytes(sorted(ka + kb))
                v = out.get(key, 0) + ca * cb
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return SparsePoly(self.universe, out)

    __rmul__ = __mul__

    def scaled(self, c: int):
        if c == 0:
            return SparsePoly(self.universe)
        return SparsePoly(self.universe, {k: c * v for k, v in self.terms.items()})

    def times_var(self, label, coeff: int = 1):
        idx = bytes([self._index[label]])
        return SparsePoly(
            self.universe,
            {bytes(sorted(k + idx)): coeff * v for k, v in self.terms.items()},
        )

    def monomials(self):
        """Pairs (tuple of labels, coefficient) in canonical order."""
        for key in sorted(self.terms):
            yield tuple(self.universe[b] for b in key), self.terms[key]

    def total_degrees(self):
        return {len(k) for k in self.terms}

    def content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = gcd(g, abs(c))
        return g

    def normalized(self):
        """(canonical poly, multiplier) with self = multiplier * canonical.

        Coefficients are divided by their gcd and the sign is fixed so the
        lexicographically first monomial has a positive coefficient.
        """
        if not self.terms:
            return SparsePoly(self.universe), 1
        g = self.content()
        lead = self.terms[min(self.terms)]
        if lead < 0:
            g = -g
        return (
            SparsePoly(self.universe, {k: c // g for k, c in self.terms.items()}),
            g,
        )

    def evaluate(self, values) -> complex:
        """Evaluate with values indexed like the universe."""
        values = np.asarray(values)
        total = 0j
        for key, coeff in self.terms.items():
            prod = complex(coeff)
            for b in key:
                prod *= values[b]
            total += prod
        return total

    @classmethod
    def determinant(cls, universe, rows):
        """Determinant of a matrix whose (r, c) entry is the single variable
        rows[r][c]; duplicated rows cancel exactly."""
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("determinant needs a square variable grid")
        p = cls(universe)
        for perm in permutations(range(n)):
            sign = _parity(perm)
            labels = [rows[r][perm[r]] for r in range(n)]
            key = bytes(sorted(p._index[lab] for lab in labels))
            v = p.terms.get(key, 0) + sign
            if v:
                p.terms[key] = v
            else:
                p.terms.pop(key, None)
        return p


def _parity(perm) -> int:
    seen = list(perm)
    sign = 1
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def contract_coefficient(poly: SparsePoly, labels) -> SparsePoly:
    """Coefficient of the product of the given variables (exponents exact).

    For each requested variable the term must contain it with exactly the
    requested multiplicity; the surviving terms are divided by the monomial.
    """
    idx = sorted(poly._index[lab] for lab in labels)
    counts = {}
    for b in idx:
        counts[b] = counts.get(b, 0) + 1
    out = {}
    for key, coeff in poly.terms.items():
        remaining = []
        good = True
        for b in set(key) | set(counts):
            have = key.count(b)
            want = counts.get(b, 0)
            if want and have != want:
                good = False
                break
            if not want:
                remaining.extend([b] * have)
        if good:
            out[bytes(sorted(remaining))] = coeff
    return SparsePoly(poly.universe, out)


@dataclass(frozen=True)
class FillingPair:
    """Fillings of the (2,2,2) and (3,3,3,3,3,3) tableaux with letters a–f."""

    tableau_v: tuple
    tableau_w: tuple

    def __post_init__(self):
        object.__setattr__(self, "tableau_v", tuple(tuple(r) for r in self.tableau_v))
        object.__setattr__(self, "tableau_w", tuple(tuple(r) for r in self.tableau_w))

    def validate(self):
        if len(self.tableau_v) != 3 or any(len(r) != 2 for r in self.tableau_v):
            raise ValueError("first tableau must have 3 rows of 2 cells")
        if len(self.tableau_w) != 6 or any(len(r) != 3 for r in self.tableau_w):
            raise ValueError("second tableau must have 6 rows of 3 cells")
        flat_v = [c for r in self.tableau_v for c in r]
        if sorted(flat_v) != list(LETTERS):
            raise ValueError("first tableau must use each letter exactly once")
        flat_w = [c for r in self.tableau_w for c in r]
        if sorted(flat_w) != sorted(LETTERS * 3):
            raise ValueError("second tableau must use each letter exactly three times")
        for row in self.tableau_w:
            if len(set(row)) != 3:
                raise ValueError("a letter may appear at most once per row")

    def w_occurrences(self):
        """Map letter -> list of (row, column) of its cells, top to bottom."""
        occ = {}
        for r, row in enumerate(self.tableau_w):
            for c, letter in enumerate(row):
                occ.setdefault(letter, []).append((r, c))
        return occ


#: the filling whose symmetrizer image is the degree-6 invariant
DEGREE6_FILLING = FillingPair(
    tableau_v=(("a", "c"), ("b", "e"), ("d", "f")),
    tableau_w=(
        ("a", "b", "c"),
        ("a", "b", "d"),
        ("a", "d", "e"),
        ("b", "d", "f"),
        ("c", "e", "f"),
        ("c", "e", "f"),
    ),
)


def aux_universe(filling: FillingPair):
    """Sorted auxiliary variables: ('v', letter, col) and ('w', letter, occ, col)."""
    labels = []
    for row in filling.tableau_v:
        for letter in row:
            labels.extend(("v", letter, c) for c in range(1, 4))
    for letter, cells in filling.w_occurrences().items():
        labels.extend(
            ("w", letter, occ, c)
            for occ in range(1, len(cells) + 1)
            for c in range(1, 7)
        )
    return tuple(sorted(set(labels)))


def column_determinants(filling: FillingPair):
    """The column determinants of both tableaux as exact polynomials."""
    universe = aux_universe(filling)
    v_polys = []
    for col in range(2):
        rows = [
            [("v", filling.tableau_v[r][col], c) for c in range(1, 4)]
            for r in range(3)
        ]
        v_polys.append(SparsePoly.determinant(universe, rows))
    occ_of = {}
    for letter, cells in filling.w_occurrences().items():
        for occ, cell in enumerate(cells, start=1):
            occ_of[cell] = (letter, occ)
    w_polys = []
    for col in range(3):
        rows = []
        for r in range(6):
            letter, occ = occ_of[(r, col)]
            rows.append([("w", letter, occ, c) for c in range(1, 7)])
        w_polys.append(SparsePoly.determinant(universe, rows))
    return v_polys, w_polys


def column_determinant_product(filling: FillingPair, max_terms: int = 2_000_000) -> SparsePoly:
    """Expanded product of all column determinants.

    The fully generic product has ~10^10 terms, far beyond reach; this
    expansion exists for small or degenerate fillings and raises once the
    intermediate size passes `max_terms`.  The symmetrizer pipeline never
    expands this product.
    """
    v_polys, w_polys = column_determinants(filling)
    product = SparsePoly.constant(aux_universe(filling), 1)
    for factor in v_polys + w_polys:
        if not factor:
            return SparsePoly(product.universe)
        product = product * factor
        if len(product) > max_terms:
            raise RuntimeError(
                "column determinant product exceeds max_terms; "
                "use the contraction pipeline instead"
            )
    return product


# ---------------------------------------------------------------------------
# contraction state machine


def _extract(rows, cols, row_label, col):
    """Signed cofactor bookkeeping: remove one row label and one column."""
    try:
        r = rows.index(row_label)
        c = cols.index(col)
    except ValueError:
        return None
    sign = -1 if (r + c) % 2 else 1
    return sign, rows[:r] + rows[r + 1 :], cols[:c] + cols[c + 1 :]


def _letter_plan(filling: FillingPair):
    v_loc = {}
    for row in filling.tableau_v:
        for col, letter in enumerate(row):
            v_loc[letter] = col
    w_loc = {letter: [] for letter in LETTERS}
    for letter, cells in filling.w_occurrences().items():
        for occ, (r, c) in enumerate(cells, start=1):
            w_loc[letter].append((2 + c, (letter, occ)))
    return [(letter, v_loc[letter], w_loc[letter]) for letter in LETTERS]


def _initial_state(filling: FillingPair):
    occ_of = {}
    for letter, cells in filling.w_occurrences().items():
        for occ, cell in enumerate(cells, start=1):
            occ_of[cell] = (letter, occ)
    factors = []
    for col in range(2):
        rows = tuple(filling.tableau_v[r][col] for r in range(3))
        factors.append((rows, (1, 2, 3)))
    for col in range(3):
        rows = tuple(occ_of[(r, col)] for r in range(6))
        factors.append((rows, (1, 2, 3, 4, 5, 6)))
    return tuple(factors)


_ORDERED_TRIPLES = [
    (triple, perm, _parity(perm_idx))
    for triple in _TRIPLES
    for perm_idx, perm in zip(permutations(range(3)), permutations(triple))
]


@lru_cache(maxsize=8)
def _transition_graph(filling: FillingPair):
    """Per-letter transition edges (src, pattern, multiplier, dst).

    States are tuples of partially consumed determinant factors; patterns
    index x_{i,j,k,l} in the shared linearization.  The graph is all the
    filling-specific work: both full expansion and numeric evaluation replay
    these edges with different weight semantics.
    """
    filling.validate()
    plan = _letter_plan(filling)
    states = [_initial_state(filling)]
    levels = []
    for letter, v_fac, w_occs in plan:
        next_states = []
        next_index = {}
        edges = {}
        for src_idx, state in enumerate(states):
            for i in (1, 2, 3):
                got = _extract(state[v_fac][0], state[v_fac][1], letter, i)
                if got is None:
                    continue
                sign_v, vrows, vcols = got
                base = list(state)
                base[v_fac] = (vrows, vcols)
                for triple, assignment, parity in _ORDERED_TRIPLES:
                    work = list(base)
                    sign = sign_v * parity
                    ok = True
                    for (fac, label), col in zip(w_occs, assignment):
                        got_w = _extract(work[fac][0], work[fac][1], label, col)
                        if got_w is None:
                            ok = False
                            break
                        s, rows, cols = got_w
                        sign *= s
                        work[fac] = (rows, cols)
                    if not ok:
                        continue
                    dst_state = tuple(work)
                    dst_idx = next_index.get(dst_state)
                    if dst_idx is None:
                        dst_idx = len(next_states)
                        next_index[dst_state] = dst_idx
                        next_states.append(dst_state)
                    pattern = _X_INDEX[(i,) + triple]
                    key = (src_idx, pattern, dst_idx)
                    edges[key] = edges.get(key, 0) + sign
        edge_list = [(s, p, m, d) for (s, p, d), m in sorted(edges.items()) if m]
        levels.append(
            tuple(
                np.array([e[col] for e in edge_list], dtype=np.int64)
                for col in range(4)
            )
            + (len(next_states),)
        )
        states = next_states
    if len(states) != 1 or any(f[0] for f in states[0]):
        raise AssertionError("contraction did not consume every determinant row")
    return tuple(levels)


def young_symmetrize(filling: FillingPair, mode: str = "full", point=None, normalize: bool = True):
    """Run the letter-by-letter contraction of the symmetrizer algorithm.

    mode="full" expands the image as an exact polynomial in x_{i,j,k,l},
    canonically normalized unless `normalize` is false.  mode="evaluate"
    substitutes the coordinates of `point` at every step, returning the raw
    (unnormalized) complex value; intermediates stay scalar, which is what
    makes screening fillings cheap.
    """
    levels = _transition_graph(filling)
    if mode == "evaluate":
        if point is None:
            raise ValueError("evaluate mode needs a point")
        xv = _x_values(point)
        weights = np.ones(1, dtype=complex)
        for src, pat, mult, dst, n_next in levels:
            nxt = np.zeros(n_next, dtype=complex)
            np.add.at(nxt, dst, weights[src] * xv[pat] * mult)
            weights = nxt
        return complex(weights[0])
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    weights = [{b"": 1}]
    for src, pat, mult, dst, n_next in levels:
        nxt = [dict() for _ in range(n_next)]
        for s, p, m, d in zip(src, pat, mult, dst):
            target = nxt[d]
            var = bytes([p])
            for key, coeff in weights[s].items():
                new_key = bytes(sorted(key + var))
                v = target.get(new_key, 0) + coeff * int(m)
                if v:
                    target[new_key] = v
                else:
                    target.pop(new_key, None)
        weights = nxt
    poly = SparsePoly(X_UNIVERSE, weights[0])
    if not normalize:
        return poly
    canonical, _ = poly.normalized()
    return canonical


def _x_values(point) -> np.ndarray:
    if isinstance(point, TensorPoint):
        if (point.spec.m, point.spec.k, point.spec.n) != (2, 2, 5):
            raise ValueError("the degree-6 invariant lives on (m,k,n) = (2,2,5)")
        return point.coords
    values = np.asarray(point, dtype=complex)
    if values.shape != (len(X_UNIVERSE),):
        raise ValueError(f"expected {len(X_UNIVERSE)} coordinates")
    return values


@lru_cache(maxsize=1)
def _degree_six_full():
    raw = young_symmetrize(DEGREE6_FILLING, mode="full", normalize=False)
    return raw.normalized()


def degree_six_invariant() -> SparsePoly:
    """The canonical degree-6 invariant (cached)."""
    return _degree_six_full()[0]


def degree_six_multiplier() -> int:
    """Raw contraction output = multiplier × canonical invariant."""
    return _degree_six_full()[1]


def evaluation_scale(poly: SparsePoly, point) -> float:
    """Sum of term magnitudes: the cancellation-free size of an evaluation."""
    xv = np.abs(_x_values(point))
    total = 0.0
    for key, coeff in poly.terms.items():
        prod = float(abs(coeff))
        for b in key:
            prod *= xv[b]
        total += prod
    return total


def invariant_vanishes(point, rel_tol: float = 1e-6) -> bool:
    """Whether the invariant vanishes at the point, scaled by term magnitude."""
    value = young_symmetrize(DEGREE6_FILLING, mode="evaluate", point=point)
    value /= degree_six_multiplier()
    scale = evaluation_scale(degree_six_invariant(), point)
    return abs(value) < rel_tol * scale


def random_filling(rng, max_tries: int = 200) -> FillingPair:
    """Random valid filling pair (letters once in V, three times in W,
    at most once per W row)."""
    letters = list(LETTERS)
    for _ in range(max_tries):
        rng.shuffle(letters)
        tableau_v = (tuple(letters[0:2]), tuple(letters[2:4]), tuple(letters[4:6]))
        pool = list(LETTERS * 3)
        rng.shuffle(pool)
        rows = [tuple(pool[3 * r : 3 * r + 3]) for r in range(6)]
        if all(len(set(row)) == 3 for row in rows):
            return FillingPair(tableau_v=tableau_v, tableau_w=tuple(rows))
    raise RuntimeError("could not draw a valid random filling")


def filling_search(rng, budget: int, candidates=None, screen_tol: float = 1e-8):
    """Screen candidate fillings by evaluating at one fixed random point.

    A nonzero screening value certifies a nonzero image; a zero value is
    only evidence (callers confirm survivors in full mode).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    probe = (
        rng.standard_normal(len(X_UNIVERSE)) + 1j * rng.standard_normal(len(X_UNIVERSE))
    )
    found = []
    count = 0
    if candidates is None:
        candidates = (random_filling(rng) for _ in range(budget))
    for filling in candidates:
        if count >= budget:
            break
        count += 1
        try:
            filling.validate()
        except ValueError:
            continue
        value = young_symmetrize(filling, mode="evaluate", point=probe)
        if abs(value) > screen_tol:
            found.append(filling)
    return found


def allowed_invariant_degrees(s: int, dmax: int) -> set:
    """Degrees d <= dmax admissible for an invariant on C^3 ⊗ Λ² C^s:
    d divisible by 3 and 2d divisible by s (so d is a multiple of s/2 up
    to 3s)."""
    if s < 1:
        raise ValueError("s must be positive")
    if dmax < 0:
        raise ValueError("dmax must be nonnegative")
    return {
        d
        for d in range(0, dmax + 1)
        if d % 3 == 0 and (2 * d) % s == 0 and d <= 3 * s
    }


# ---------------------------------------------------------------------------
# polynomial file format


def poly_to_lines(poly: SparsePoly) -> list:
    """Bit-exact text lines: header, then `coeff  factors...`, string-sorted."""
    body = []
    for labels, coeff in poly.monomials():
        factors = " ".join(",".join(str(x) for x in lab) for lab in labels)
        body.append(f"{coeff} {factors}")
    return ["# vars m=3 k=3 n=6 degree=6"] + sorted(body)


def write_invariant_file(poly: SparsePoly, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(poly_to_lines(poly)) + "\n")


def read_invariant_file(path) -> SparsePoly:
    poly = SparsePoly(X_UNIVERSE)
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            coeff = int(parts[0])
            labels = [tuple(int(x) for x in p.split(",")) for p in parts[1:]]
            key = bytes(sorted(poly._index[lab] for lab in labels))
            poly.terms[key] = poly.terms.get(key, 0) + coeff
    return poly
