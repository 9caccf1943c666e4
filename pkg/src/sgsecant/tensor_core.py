"""Parametrization of Segre-Grassmann varieties and their secants.

A point of the Segre-Grassmann variety is v ⊗ plucker(E) for a vector v of
length m+1 and a full-rank (k+1)×(n+1) matrix E; a point of the s-th secant
variety is a sum of s such terms.  Coordinates x_{i,J} are linearized
i-major with the (k+1)-subsets J of column indices in lexicographic order.
This linearization is shared by the flattening and invariant modules and by
all JSON exports.

Dimension questions reduce, via Terracini, to the numeric rank of the
Jacobian of the parametrization at a random point.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


class DegenerateSampleError(RuntimeError):
    """Raised when repeated random sampling keeps producing degenerate data."""


_RESAMPLE_LIMIT = 5


@dataclass(frozen=True)
class SecantSpec:
    """The quadruple (m, k, n, s) naming sigma_s(Seg(P^m x G(k,n)))."""

    m: int
    k: int
    n: int
    s: int

    def __post_init__(self):
        if self.m < 0 or self.k < 0:
            raise ValueError("m and k must be nonnegative")
        if not self.k < self.n:
            raise ValueError(f"need k < n, got k={self.k}, n={self.n}")
        if self.s < 1:
            raise ValueError("s must be positive")

    @property
    def plucker_count(self) -> int:
        return comb(self.n + 1, self.k + 1)

    @property
    def coord_count(self) -> int:
        """Number of affine ambient coordinates (m+1)·binom(n+1,k+1)."""
        return (self.m + 1) * self.plucker_count

    @property
    def ambient_dim(self) -> int:
        """Projective dimension of the ambient space."""
        return self.coord_count - 1

    @property
    def variety_dim(self) -> int:
        """Projective dimension of Seg(P^m x G(k,n)) itself."""
        return self.m + (self.k + 1) * (self.n - self.k)

    @property
    def params_per_term(self) -> int:
        return (self.m + 1) + (self.k + 1) * (self.n + 1)

    @property
    def param_count(self) -> int:
        return self.s * self.params_per_term

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k, "n": self.n, "s": self.s}

    @classmethod
    def from_json(cls, obj: dict) -> "SecantSpec":
        return cls(int(obj["m"]), int(obj["k"]), int(obj["n"]), int(obj["s"]))


@dataclass
class RankOneParams:
    """One summand of the parametrization: vector v and row-span matrix E."""

    v: np.ndarray
    E: np.ndarray


@dataclass
class TensorPoint:
    """A point of C^{m+1} ⊗ Λ^{k+1} C^{n+1}, with generators when sampled."""

    spec: SecantSpec
    coords: np.ndarray
    params: list = field(default=None)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex)
        if self.coords.shape != (self.spec.coord_count,):
            raise ValueError(
                f"coords length {self.coords.shape} does not match "
                f"expected ({self.spec.coord_count},)"
            )

    def to_json(self) -> dict:
        obj = {
            "spec": self.spec.to_json(),
            "coords": [[z.real, z.imag] for z in self.coords],
        }
        if self.params is not None:
            obj["params"] = [
                {
                    "v": [[z.real, z.imag] for z in p.v],
                    "E": [[[z.real, z.imag] for z in row] for row in p.E],
                }
                for p in self.params
            ]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "TensorPoint":
        spec = SecantSpec.from_json(obj["spec"])
        coords = np.array([complex(re, im) for re, im in obj["coords"]])
        params = None
        if obj.get("params") is not None:
            params = [
                RankOneParams(
                    v=np.array([complex(re, im) for re, im in p["v"]]),
                    E=np.array(
                        [[complex(re, im) for re, im in row] for row in p["E"]]
                    ),
                )
                for p in obj["params"]
            ]
        return cls(spec=spec, coords=coords, params=params)


@lru_cache(maxsize=None)
def column_subsets(n_cols: int, size: int) -> tuple:
    """All `size`-subsets of range(n_cols), lexicographic."""
    return tuple(combinations(range(n_cols), size))


def coordinate_labels(spec: SecantSpec) -> list:
    """1-based (i, j_1, ..., j_{k+1}) labels in linearization order."""
    subsets = column_subsets(spec.n + 1, spec.k + 1)
    return [
        (i + 1,) + tuple(j + 1 for j in J)
        for i in range(spec.m + 1)
        for J in subsets
    ]


def plucker_coords(E: np.ndarray) -> np.ndarray:
    """Maximal minors of E, one per column subset, in lexicographic order."""
    E = np.asarray(E, dtype=complex)
    if E.ndim != 2:
        raise ValueError("E must be a matrix")
    rows, cols = E.shape
    if rows > cols:
        raise ValueError(f"E must have at least as many columns as rows, got {E.shape}")
    subsets = column_subsets(cols, rows)
    stacked = np.stack([E[:, J] for J in subsets])
    return np.linalg.det(stacked)


def _cofactor_stack(subs: np.ndarray) -> np.ndarray:
    """Cofactor matrices d det(M)/dM for a stack of square matrices."""
    d = subs.shape[1]
    if d == 1:
        return np.ones_like(subs)
    if d == 2:
        out = np.empty_like(subs)
        out[:, 0, 0] = subs[:, 1, 1]
        out[:, 0, 1] = -subs[:, 1, 0]
        out[:, 1, 0] = -subs[:, 0, 1]
        out[:, 1, 1] = subs[:, 0, 0]
        return out
    out = np.empty_like(subs)
    index = list(range(d))
    for r in index:
        keep_r = index[:r] + index[r + 1 :]
        for c in index:
            keep_c = index[:c] + index[c + 1 :]
            sign = -1 if (r + c) % 2 else 1
            out[:, r, c] = sign * np.linalg.det(subs[np.ix_(range(len(subs)), keep_r, keep_c)])
    return out


def _minor_derivatives(E: np.ndarray) -> np.ndarray:
    """d plucker_coords(E) / dE as an array of shape (n_minors, rows*cols).

    Cofactor formula: the derivative of the minor on columns J with respect
    to entry (r, c) vanishes unless c in J, and otherwise equals the signed
    complementary minor, batched across all column subsets.
    """
    E = np.asarray(E, dtype=complex)
    rows, cols = E.shape
    subsets = column_subsets(cols, rows)
    subset_array = np.array(subsets, dtype=np.intp)
    stacked = E[:, subset_array].transpose(1, 0, 2).copy()
    cof = _cofactor_stack(stacked)
    out = np.zeros((len(subsets), rows * cols), dtype=complex)
    col_target = subset_array[:, None, :] + (np.arange(rows) * cols)[None, :, None]
    idx = np.arange(len(subsets))[:, None, None]
    out[idx, col_target] = cof
    return out


def _complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rank_one_point(spec: SecantSpec, v, E) -> TensorPoint:
    """Point v ⊗ plucker(E) with explicitly chosen generators."""
    v = np.asarray(v, dtype=complex)
    E = np.asarray(E, dtype=complex)
    if v.shape != (spec.m + 1,) or E.shape != (spec.k + 1, spec.n + 1):
        raise ValueError("generator shapes do not match spec")
    coords = np.kron(v, plucker_coords(E))
    return TensorPoint(spec=spec, coords=coords, params=[RankOneParams(v, E)])


def sample_rank_one(spec: SecantSpec, rng) -> TensorPoint:
    """Random point of Seg(P^m x G(k,n)) with complex-Gaussian generators.

    Degenerate draws (E numerically rank-deficient or v negligible) are
    rejected and resampled a bounded number of times.
    """
    for _ in range(_RESAMPLE_LIMIT):
        v = _complex_gaussian(rng, spec.m + 1)
        E = _complex_gaussian(rng, (spec.k + 1, spec.n + 1))
        if np.linalg.norm(v) < 1e-8:
            continue
        if numeric_rank(E) < spec.k + 1:
            continue
        return rank_one_point(spec, v, E)
    raise DegenerateSampleError("could not sample a nondegenerate rank-one point")


def sample_secant_point(spec: SecantSpec, rng) -> TensorPoint:
    """Sum of s independent rank-one samples; all generators are recorded."""
    terms = [sample_rank_one(spec, rng) for _ in range(spec.s)]
    coords = np.sum([t.coords for t in terms], axis=0)
    params = [t.params[0] for t in terms]
    return TensorPoint(spec=spec, coords=coords, params=params)


def sample_ambient_point(spec: SecantSpec, rng) -> TensorPoint:
    """Generic point of the ambient space (no rank structure)."""
    return TensorPoint(spec=spec, coords=_complex_gaussian(rng, spec.coord_count))


def point_from_params(spec: SecantSpec, params) -> np.ndarray:
    """Coordinates of the sum of the given rank-one generators."""
    coords = np.zeros(spec.coord_count, dtype=complex)
    for p in params:
        coords += np.kron(p.v, plucker_coords(p.E))
    return coords


def parametrization_jacobian(point: TensorPoint) -> np.ndarray:
    """Jacobian of the parametrization at the recorded generators.

    Columns are partial derivatives with respect to every entry of every
    v^i and E^i; by Terracini their span is the tangent cone to the secant
    variety at the point.
    """
    if point.params is None:
        raise ValueError("point has no recorded generators")
    spec = point.spec
    blocks = []
    eye = np.eye(spec.m + 1)
    for p in point.params:
        pl = plucker_coords(p.E)
        dv = np.kron(eye, pl.reshape(-1, 1))
        dE = np.kron(p.v.reshape(-1, 1), _minor_derivatives(p.E))
        blocks.extend([dv, dE])
    return np.hstack(blocks)


def jacobian_at_params(spec: SecantSpec, params) -> np.ndarray:
    point = TensorPoint(spec=spec, coords=point_from_params(spec, params), params=list(params))
    return parametrization_jacobian(point)


def numeric_rank(M: np.ndarray, rel_tol: float = 1e-8) -> int:
    """Singular values above rel_tol times the largest one."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


def secant_dimension(spec: SecantSpec, rng, trials: int = 3, rel_tol: float = 1e-8) -> int:
    """Affine cone dimension of sigma_s, as max Jacobian rank over trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = 0
    for _ in range(trials):
        point = sample_secant_point(spec, rng)
        best = max(best, numeric_rank(parametrization_jacobian(point), rel_tol))
    return best


def expected_dimension(spec: SecantSpec) -> int:
    """Expected projective dimension min(s·(dim X + 1) − 1, ambient)."""
    return min(spec.s * (spec.variety_dim + 1) - 1, spec.ambient_dim)


def is_expected_hypersurface(spec: SecantSpec, cone_dim: int) -> bool:
    """True when the measured cone dimension identifies a hypersurface."""
    return cone_dim == spec.coord_count - 1


def exterior_power_matrix(h: np.ndarray, size: int) -> np.ndarray:
    """Matrix of the induced action of h on Λ^size, entries det(h[J, K])."""
    h = np.asarray(h, dtype=complex)
    subsets = column_subsets(h.shape[0], size)
    M = np.empty((len(subsets), len(subsets)), dtype=complex)
    for a, J in enumerate(subsets):
        for b, K in enumerate(subsets):
            M[a, b] = np.linalg.det(h[np.ix_(J, K)])
    return M


def apply_group(point: TensorPoint, g: np.ndarray, h: np.ndarray) -> TensorPoint:
    """Transform coordinates by (g, h) in GL(m+1) x GL(n+1)."""
    spec = point.spec
    wedge = exterior_power_matrix(h, spec.k + 1)
    mat = np.kron(np.asarray(g, dtype=complex), wedge)
    return TensorPoint(spec=spec, coords=mat @ point.coords)
