"""Exterior flattenings and products of generic skew-symmetric matrices.

Two symbolic products of matrix patterns are built here.  The box product
keeps each pair of factor entries as an independent fresh variable, so its
determinant is generally nonzero; the classical Kronecker product collapses
the pair to a commutative product and obeys det(P⊗Q) = det(P)^n det(Q)^m,
which kills the determinant whenever one factor is an odd skew matrix.

The flattening of a tensor T in C^3 ⊗ Λ² C^{4ℓ+3} is the evaluation of one
fixed such pattern at the coordinates of T; its rank bounds the rank of T
from below (4 per summand), and its determinant cuts out the secant
hypersurface of the corresponding Segre-Grassmann variety.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor_core import SecantSpec, TensorPoint, column_subsets


@dataclass(frozen=True)
class GenericSkewMatrix:
    """Symbolic s×s skew matrix: entry (j,k) is +var(j,k) for j<k."""

    size: int

    def entry(self, j: int, k: int):
        """(sign, (j,k) with j<k) for a nonzero entry, else (0, None)."""
        if j == k:
            return 0, None
        if j < k:
            return 1, (j, k)
        return -1, (k, j)


class PatternMatrix:
    """Square matrix of signed variables, stored as sign and index grids.

    `variables` fixes the evaluation order; `var_index[r, c]` points into it
    (-1 for a structural zero) and `sign[r, c]` carries the ±1.
    """

    def __init__(self, sign, var_index, variables, label: str = ""):
        self.sign = np.asarray(sign, dtype=np.int8)
        self.var_index = np.asarray(var_index, dtype=np.int64)
        self.variables = tuple(variables)
        self.label = label
        if self.sign.shape != self.var_index.shape or self.sign.ndim != 2:
            raise ValueError("sign and var_index grids must be equal square shapes")

    @property
    def size(self) -> int:
        return self.sign.shape[0]

    def evaluate(self, values) -> np.ndarray:
        """Numeric matrix with variables[i] replaced by values[i]."""
        values = np.asarray(values)
        if values.shape != (len(self.variables),):
            raise ValueError(
                f"expected {len(self.variables)} values, got {values.shape}"
            )
        padded = np.concatenate([values, [0.0]])
        return self.sign * padded[self.var_index]

    def pattern_lines(self) -> list:
        """Export lines `row col sign i j k [l]`, zero entries omitted."""
        lines = []
        for r in range(self.size):
            for c in range(self.size):
                s = int(self.sign[r, c])
                if s == 0:
                    continue
                var = self.variables[self.var_index[r, c]]
                lines.append(
                    f"{r + 1} {c + 1} {'+' if s > 0 else '-'} "
                    + " ".join(str(x) for x in var)
                )
        return lines


def box_product(P: GenericSkewMatrix, Q: GenericSkewMatrix) -> PatternMatrix:
    """The pattern P⊠Q with entry ((i,k),(j,l)) = p_{ij} ⊗ q_{kl}.

    Each unordered pair of factor entries keeps its own variable (i,j,k,l)
    with i<j and k<l; the skew signs of both factors multiply in front.
    """
    a, c = P.size, Q.size
    n = a * c
    variables = [
        (i + 1, j + 1, k + 1, l + 1)
        for (i, j) in column_subsets(a, 2)
        for (k, l) in column_subsets(c, 2)
    ]
    index_of = {v: t for t, v in enumerate(variables)}
    sign = np.zeros((n, n), dtype=np.int8)
    var_index = np.full((n, n), -1, dtype=np.int64)
    for i in range(a):
        for k in range(c):
            row = i * c + k
            for j in range(a):
                sp, pv = P.entry(i, j)
                if sp == 0:
                    continue
                for l in range(c):
                    sq, qv = Q.entry(k, l)
                    if sq == 0:
                        continue
                    col = j * c + l
                    sign[row, col] = sp * sq
                    var_index[row, col] = index_of[
                        (pv[0] + 1, pv[1] + 1, qv[0] + 1, qv[1] + 1)
                    ]
    return PatternMatrix(sign, var_index, variables, label=f"box:s={c}")


# first factor of the flattening: coefficient and slice index of each cell
# of the fixed 3x3 skew pattern [[0, v1, -v2], [-v1, 0, v3], [v2, -v3, 0]]
_V_PATTERN = (
    ((0, 0), (1, 1), (-1, 2)),
    ((-1, 1), (0, 0), (1, 3)),
    ((1, 2), (-1, 3), (0, 0)),
)


@lru_cache(maxsize=None)
def phi_matrix(ell: int) -> PatternMatrix:
    """Symbolic flattening pattern of size 3(4ℓ+3) in variables x_{i,j,k}.

    Kronecker product of the fixed 3×3 skew pattern in v_1, v_2, v_3 with a
    generic (4ℓ+3)×(4ℓ+3) skew matrix, with each product v_i·e_{jk} renamed
    to the single variable (i, j, k), j<k.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    w = 4 * ell + 3
    Q = GenericSkewMatrix(w)
    variables = [
        (i + 1, j + 1, k + 1) for i in range(3) for (j, k) in column_subsets(w, 2)
    ]
    index_of = {v: t for t, v in enumerate(variables)}
    n = 3 * w
    sign = np.zeros((n, n), dtype=np.int8)
    var_index = np.full((n, n), -1, dtype=np.int64)
    for alpha in range(3):
        for beta in range(3):
            coeff, slot = _V_PATTERN[alpha][beta]
            if coeff == 0:
                continue
            for j in range(w):
                for l in range(w):
                    sq, qv = Q.entry(j, l)
                    if sq == 0:
                        continue
                    sign[alpha * w + j, beta * w + l] = coeff * sq
                    var_index[alpha * w + j, beta * w + l] = index_of[
                        (slot, qv[0] + 1, qv[1] + 1)
                    ]
    phi = PatternMatrix(sign, var_index, variables, label=f"phi:l={ell}")
    phi.ell = ell
    return phi


def ell_of_spec(spec: SecantSpec) -> int:
    """The family parameter ℓ for specs of shape (2, 1, 4ℓ+2)."""
    if spec.m != 2 or spec.k != 1 or (spec.n - 2) % 4 != 0:
        raise ValueError(f"spec (m,k,n)=({spec.m},{spec.k},{spec.n}) is not of shape (2,1,4l+2)")
    return (spec.n - 2) // 4


def phi_evaluate(phi: PatternMatrix, T: TensorPoint) -> np.ndarray:
    """Numeric flattening of T; the variable order matches T's linearization."""
    ell = ell_of_spec(T.spec)
    if getattr(phi, "ell", None) != ell:
        raise ValueError(f"pattern is for l={getattr(phi, 'ell', None)}, tensor has l={ell}")
    return phi.evaluate(T.coords)


def flattening_rank(T: TensorPoint, rel_tol: float = 1e-8) -> int:
    """Numeric rank of the evaluated flattening."""
    M = phi_evaluate(phi_matrix(ell_of_spec(T.spec)), T)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


def hadamard_scale(M: np.ndarray) -> float:
    """Product of row norms: the natural magnitude scale of a determinant."""
    norms = np.linalg.norm(M, axis=1)
    return float(np.prod(norms))


def det_phi(T: TensorPoint) -> complex:
    """Determinant of the evaluated flattening (LU with partial pivoting)."""
    M = phi_evaluate(phi_matrix(ell_of_spec(T.spec)), T)
    return complex(np.linalg.det(M))


def det_phi_vanishes(T: TensorPoint, factor: float = 1e-6) -> bool:
    """Scale-free vanishing test: |det| below factor times the Hadamard scale."""
    M = phi_evaluate(phi_matrix(ell_of_spec(T.spec)), T)
    scale = hadamard_scale(M)
    if scale == 0.0:
        return True
    return abs(np.linalg.det(M)) < factor * scale


def kronecker_det_check(P: np.ndarray, Q: np.ndarray):
    """(det(P⊗Q), det(P)^n · det(Q)^m) for square numeric P, Q."""
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("P and Q must be square")
    m, n = P.shape[0], Q.shape[0]
    lhs = complex(np.linalg.det(np.kron(P, Q)))
    rhs = complex(np.linalg.det(P) ** n * np.linalg.det(Q) ** m)
    return lhs, rhs
