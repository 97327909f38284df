"""Symbol constructors: Grothendieck-Haagerup type, divided differences, triangular
truncations, Marcinkiewicz layer-cake decompositions, dyadic blocks and the
Hörmander-Mikhlin condition on finite grids.

Every constructor returns a SchurSymbol whose provenance carries the tag and
the parameters `norm_lab.reference_envelope` needs.
"""

import itertools
import json
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import (
    ContractionError,
    DecompositionError,
    DimensionError,
    MonotonicityError,
    PartitionError,
    PreconditionError,
    ResolutionError,
    UnknownConstructionError,
)
from .hilbert import VectorFamily
from .linalg import ComplexMatrix, as_matrix, random_complex_matrix
from .schur import Provenance, SchurSymbol, identity_symbol, restrict, sgn
from .vector_valued import CONTRACTION_TOL, VectorValuedElement

logger = logging.getLogger(__name__)

RealArray = npt.NDArray[np.float64]


# ---------------------------------------------------------------------------
# Hilbert-space pairings
# ---------------------------------------------------------------------------


def _contraction(Lambda: npt.ArrayLike | None, d_out: int, d_in: int) -> ComplexMatrix:
    if Lambda is None:
        if d_out != d_in:
            raise DimensionError(f"identity needs equal dimensions, got {d_out} and {d_in}")
        return np.eye(d_in, dtype=np.complex128)
    op = as_matrix(Lambda, "Lambda")
    if op.shape != (d_out, d_in):
        raise DimensionError(f"Lambda must be {d_out}x{d_in}, got {op.shape}")
    norm = float(np.linalg.norm(op, 2))
    if norm > 1.0 + CONTRACTION_TOL:
        raise ContractionError(f"||Lambda|| = {norm:.6g} exceeds 1", {"norm": norm})
    return op


def _normalize_pairs(
    vectors: npt.NDArray[np.complex128], tol: float
) -> tuple[npt.NDArray[np.complex128], npt.NDArray[np.bool_]]:
    """Normalize an (n, n, d) array along the last axis; 0/0 = 0 with a flag."""
    norms = np.linalg.norm(vectors, axis=2)
    degenerate = norms <= tol
    unit = vectors / np.where(degenerate, 1.0, norms)[:, :, None]
    unit[degenerate] = 0.0
    return unit, degenerate


def _pairing(
    a: npt.NDArray[np.complex128], Lambda: ComplexMatrix, b: npt.NDArray[np.complex128]
) -> ComplexMatrix:
    """<a_jk, Lambda b_jk>, antilinear in a."""
    result: ComplexMatrix = np.einsum("jki,il,jkl->jk", a.conj(), Lambda, b)
    return result


def _tol(*families: VectorFamily) -> float:
    return max(F.tol_eq for F in families)


def gh_symbol(
    u: VectorFamily,
    u_prime: VectorFamily,
    w: VectorFamily,
    w_prime: VectorFamily,
    Lambda: npt.ArrayLike | None = None,
) -> SchurSymbol:
    """M(j, k) = <(u_j + u'_k)/||.||, Lambda (w_j + w'_k)/||.||>.

    Pairs with a vanishing sum get entry 0 and are flagged degenerate.
    """
    n = u.size
    if not (u_prime.size == w.size == w_prime.size == n):
        raise DimensionError("all four families must share the index set")
    if u_prime.dim != u.dim or w_prime.dim != w.dim:
        raise DimensionError("primed families must live in the same spaces")
    op = _contraction(Lambda, u.dim, w.dim)
    tol = _tol(u, u_prime, w, w_prime)
    a, deg_a = _normalize_pairs(u.vectors[:, None, :] + u_prime.vectors[None, :, :], tol)
    b, deg_b = _normalize_pairs(w.vectors[:, None, :] + w_prime.vectors[None, :, :], tol)
    degenerate = deg_a | deg_b
    M = np.where(degenerate, 0.0, _pairing(a, op, b))
    if degenerate.any():
        logger.debug("gh symbol: %d degenerate pairs set to 0", int(degenerate.sum()))
    return SchurSymbol(M, Provenance("gh", {"n": n}), u.labels, degenerate)


@dataclass(frozen=True)
class CornerEmbedding:
    """Difference-form symbol on two copies of the index set and its corner."""

    symbol: SchurSymbol
    corner: ComplexMatrix
    residual: float  # max |corner - M| against the direct gh symbol


def corner_embed(
    u: VectorFamily,
    u_prime: VectorFamily,
    w: VectorFamily,
    w_prime: VectorFamily,
    Lambda: npt.ArrayLike | None = None,
) -> CornerEmbedding:
    """Write the gh symbol as the off-diagonal corner of a difference symbol.

    On Gamma_1 u Gamma_2 take (h, g) = +(u, w) on the first copy and
    -(u', w') on the second; the Gamma_1 x Gamma_2 corner of
    <(h_a - h_b)/||.||, Lambda (g_a - g_b)/||.||> is the gh symbol.
    """
    n = u.size
    op = _contraction(Lambda, u.dim, w.dim)
    h = np.concatenate([u.vectors, -u_prime.vectors])
    g = np.concatenate([w.vectors, -w_prime.vectors])
    tol = _tol(u, u_prime, w, w_prime)
    a, deg_a = _normalize_pairs(h[:, None, :] - h[None, :, :], tol)
    b, deg_b = _normalize_pairs(g[:, None, :] - g[None, :, :], tol)
    degenerate = deg_a | deg_b
    Mhat = np.where(degenerate, 0.0, _pairing(a, op, b))
    labels = tuple((1, lbl) for lbl in u.labels) + tuple((2, lbl) for lbl in u.labels)
    corner = Mhat[:n, n:]
    direct = gh_symbol(u, u_prime, w, w_prime, op).entries
    residual = float(np.max(np.abs(corner - direct), initial=0.0))
    symbol = SchurSymbol(Mhat, Provenance("gh", {"n": 2 * n, "corner_embedding": True}), labels, degenerate)
    return CornerEmbedding(symbol=symbol, corner=corner, residual=residual)


def hilbert_divided_symbol(w: VectorFamily, Lambda: npt.ArrayLike | None = None) -> SchurSymbol:
    """M(j, k) = ||Lambda w_j - Lambda w_k|| / ||w_j - w_k||, 0 where w_j = w_k."""
    op = _contraction(Lambda, np.shape(Lambda)[0] if Lambda is not None else w.dim, w.dim)
    diff = w.vectors[:, None, :] - w.vectors[None, :, :]
    den = np.linalg.norm(diff, axis=2)
    num = np.linalg.norm(diff @ op.T, axis=2)
    degenerate = den <= w.tol_eq
    M = np.where(degenerate, 0.0, num / np.where(degenerate, 1.0, den))
    return SchurSymbol(
        M.astype(np.complex128),
        Provenance("hilbert_divided", {"n": w.size, "lambda_norm": float(np.linalg.norm(op, 2))}),
        w.labels,
        degenerate,
    )


def one_sided_symbol(u: VectorFamily, w: VectorFamily, side: str = "row") -> SchurSymbol:
    """<(u_j - u_k)/||u_j - u_k||, w_j/||w_j||> (side="row") or with w_k (side="column")."""
    if u.size != w.size or u.dim != w.dim:
        raise DimensionError("u and w must share index set and dimension")
    if side not in ("row", "column"):
        raise ValueError(f"side must be 'row' or 'column', got {side!r}")
    diffs = u.normalized_differences()
    norms = np.linalg.norm(w.vectors, axis=1)
    zero_w = norms <= w.tol_eq
    unit_w = w.vectors / np.where(zero_w, 1.0, norms)[:, None]
    unit_w[zero_w] = 0.0
    b = unit_w[:, None, :] if side == "row" else unit_w[None, :, :]
    b = np.broadcast_to(b, diffs.shape)
    M = np.einsum("jki,jki->jk", diffs.conj(), b)
    degenerate = u.coincidence_mask() | (zero_w[:, None] if side == "row" else zero_w[None, :])
    return SchurSymbol(
        np.where(degenerate, 0.0, M), Provenance("one_sided", {"n": u.size, "side": side}), u.labels, degenerate
    )


def arcsin_symbol(u: VectorFamily, w: VectorFamily) -> SchurSymbol:
    """arcsin <(u_j - u_k)/||.||, (w_j - w_k)/||.||> for real families."""
    if not (u.is_real() and w.is_real()):
        raise PreconditionError("arcsin symbol needs real-coordinate families")
    if u.size != w.size or u.dim != w.dim:
        raise DimensionError("u and w must share index set and dimension")
    a = u.normalized_differences().real
    b = w.normalized_differences().real
    inner = np.clip(np.einsum("jki,jki->jk", a, b), -1.0, 1.0)
    degenerate = u.coincidence_mask() | w.coincidence_mask()
    M = np.where(degenerate, 0.0, np.arcsin(inner))
    return SchurSymbol(M.astype(np.complex128), Provenance("arcsin", {"n": u.size}), u.labels, degenerate)


# ---------------------------------------------------------------------------
# Divided differences on grids in R
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionTable:
    """Piecewise-linear function given by (x, f(x)) pairs, x strictly increasing."""

    xs: RealArray
    ys: RealArray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise DimensionError("function table needs at least two (x, f(x)) pairs")
        if np.any(np.diff(xs) <= 0.0):
            raise DimensionError("table abscissae must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise DimensionError("function table has non-finite values")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "FunctionTable":
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DimensionError("expected a list of (x, f(x)) pairs")
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def load(cls, path: Path) -> "FunctionTable":
        with open(path) as f:
            return cls.from_pairs(json.load(f))

    def to_pairs(self) -> list[list[float]]:
        return [[float(x), float(y)] for x, y in zip(self.xs, self.ys)]

    def __call__(self, x: npt.ArrayLike) -> RealArray:
        result: RealArray = np.interp(np.asarray(x, dtype=np.float64), self.xs, self.ys)
        return result

    def check_nondecreasing(self) -> None:
        drops = np.flatnonzero(np.diff(self.ys) < 0.0)
        if drops.size:
            i = int(drops[0])
            raise MonotonicityError(
                f"f decreases between x={self.xs[i]:.6g} and x={self.xs[i + 1]:.6g}",
                {"index": i},
            )


def _grid(points: npt.ArrayLike) -> RealArray:
    grid = np.asarray(points, dtype=np.float64).ravel()
    if grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise DimensionError("grid must have at least two strictly increasing points")
    return grid


def grid_lipschitz(f: FunctionTable, points: npt.ArrayLike) -> float:
    """Largest slope of f between consecutive grid points."""
    grid = _grid(points)
    return float(np.max(np.abs(np.diff(f(grid)) / np.diff(grid))))


def _divided_power(f: FunctionTable, grid: RealArray, beta: float) -> RealArray:
    """((f(x) - f(y))/(x - y))^beta with symmetric difference quotients on the diagonal."""
    f.check_nondecreasing()
    fv = f(grid)
    if np.any(np.diff(fv) < 0.0):
        raise MonotonicityError("f decreases on the grid")
    dx = grid[:, None] - grid[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (fv[:, None] - fv[None, :]) / dx
    deriv = np.empty_like(fv)
    deriv[1:-1] = (fv[2:] - fv[:-2]) / (grid[2:] - grid[:-2])
    deriv[0] = (fv[1] - fv[0]) / (grid[1] - grid[0])
    deriv[-1] = (fv[-1] - fv[-2]) / (grid[-1] - grid[-2])
    np.fill_diagonal(D, deriv)
    D = np.clip(D, 0.0, None)
    result: RealArray = np.sqrt(D) if beta == 0.5 else D**beta
    return result


def beta_divided_symbol(f: FunctionTable, beta: float, points: npt.ArrayLike) -> SchurSymbol:
    """M(x, y) = ((f(x) - f(y))/(x - y))^beta for nondecreasing f."""
    if not 0.0 < beta < 1.0:
        raise PreconditionError(f"beta must lie in (0, 1), got {beta}")
    grid = _grid(points)
    lip = grid_lipschitz(f, grid)
    M = _divided_power(f, grid, beta)
    tag = "arazy" if beta == 0.5 else "beta"
    return SchurSymbol(
        M.astype(np.complex128),
        Provenance(tag, {"n": grid.size, "beta": beta, "lip": lip}),
        tuple(float(x) for x in grid),
    )


def arazy_sqrt_symbol(f: FunctionTable, points: npt.ArrayLike) -> SchurSymbol:
    """M(x, y) = sqrt((f(x) - f(y))/(x - y)); the beta = 1/2 divided power."""
    return beta_divided_symbol(f, 0.5, points)


def holder_divided_symbol(
    f: FunctionTable, alpha: float, beta: float, points: npt.ArrayLike
) -> SchurSymbol:
    """M(x, y) = |f(x) - f(y)|^beta / |x - y|^(alpha beta), diagonal flagged and set to 0."""
    if not 0.0 < alpha <= 1.0 or not 0.0 < beta < 1.0:
        raise PreconditionError(f"need 0 < alpha <= 1 and 0 < beta < 1, got {alpha}, {beta}")
    f.check_nondecreasing()
    grid = _grid(points)
    fv = f(grid)
    dx = np.abs(grid[:, None] - grid[None, :])
    diag = np.eye(grid.size, dtype=bool)
    safe = np.where(diag, 1.0, dx)
    df = np.abs(fv[:, None] - fv[None, :])
    M = np.where(diag, 0.0, df**beta / safe ** (alpha * beta))
    holder = float(np.max(np.where(diag, 0.0, df / safe**alpha)))
    return SchurSymbol(
        M.astype(np.complex128),
        Provenance("holder", {"n": grid.size, "alpha": alpha, "beta": beta, "holder": holder}),
        tuple(float(x) for x in grid),
        diag,
    )


@dataclass(frozen=True)
class HilbertRealization:
    """Vectors w_x = 1_[x0, x] in L2 of the grid segments and the contraction Lambda."""

    family: VectorFamily
    Lambda: ComplexMatrix
    lip: float


def arazy_hilbert_realization(f: FunctionTable, points: npt.ArrayLike) -> HilbertRealization:
    """Realize the Arazy divided difference as a Hilbert-space divided difference.

    Coordinates are in the orthonormal basis of normalized segment indicators;
    Lambda multiplies by sqrt(slope / Lip) so that sqrt(Lip) times the
    hilbert_divided symbol equals arazy_sqrt_symbol off the diagonal.
    """
    f.check_nondecreasing()
    grid = _grid(points)
    lengths = np.diff(grid)
    slopes = np.diff(f(grid)) / lengths
    lip = float(slopes.max())
    m = grid.size - 1
    # w_x has sqrt(len_i) on every segment i left of x
    W = np.tril(np.ones((grid.size, m)), k=-1) * np.sqrt(lengths)[None, :]
    scale = np.sqrt(slopes / lip) if lip > 0.0 else np.zeros(m)
    family = VectorFamily.from_vectors(W.astype(np.complex128), tuple(float(x) for x in grid))
    return HilbertRealization(family=family, Lambda=np.diag(scale).astype(np.complex128), lip=lip)


# ---------------------------------------------------------------------------
# Triangular truncations and Marcinkiewicz decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangularData:
    """Map a: Gamma -> Z over an integer grid Gamma (default 0..n-1)."""

    a: tuple[int, ...]
    grid: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        grid = self.grid or tuple(range(len(self.a)))
        if len(grid) != len(self.a):
            raise DimensionError("a must be defined on every grid point")
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        object.__setattr__(self, "grid", tuple(int(v) for v in grid))


def triangular_symbol(data: TriangularData) -> SchurSymbol:
    """M(j, k) = sgn(j - a_k) with sgn(0) = 1."""
    j = np.asarray(data.grid, dtype=np.float64)[:, None]
    a = np.asarray(data.a, dtype=np.float64)[None, :]
    M = sgn(j - a)
    return SchurSymbol(
        M.astype(np.complex128), Provenance("triangular", {"n": len(data.a)}), data.grid
    )


def triangular_gh_families(data: TriangularData) -> tuple[VectorFamily, VectorFamily, VectorFamily, VectorFamily]:
    """(u, u', w, w') = (j, -a_k, 1, 0) in dimension 1: the gh form of a triangular symbol."""
    n = len(data.a)
    u = VectorFamily.from_vectors(np.asarray(data.grid, dtype=np.float64))
    u_prime = VectorFamily.from_vectors(-np.asarray(data.a, dtype=np.float64))
    w = VectorFamily.from_vectors(np.ones(n))
    w_prime = VectorFamily.from_vectors(np.zeros(n))
    return u, u_prime, w, w_prime


@dataclass(frozen=True)
class TriangularTerm:
    """weight * (1 + sgn(j - a_k))/2 evaluated on one row: the half-line 1[k <= threshold]."""

    row: int
    threshold: int
    weight: float

    def a_map(self, n: int) -> TriangularData:
        """a_k = j for k <= threshold, j + 1 beyond: a generalized triangular truncation."""
        return TriangularData(tuple(self.row if k <= self.threshold else self.row + 1 for k in range(n)))

    def evaluate(self, n: int) -> RealArray:
        """Row `row` of the generalized triangular projection, times the weight."""
        T = triangular_symbol(self.a_map(n)).entries.real
        result: RealArray = self.weight * 0.5 * (1.0 + T[self.row])
        return result


@dataclass
class MarcinkiewiczDecomposition:
    """Per-row layer cake: M(j, .) = offsets[j] + sum of weighted half-line terms."""

    n: int
    terms: list[TriangularTerm] = field(default_factory=list)
    offsets: RealArray = field(default_factory=lambda: np.zeros(0))

    def reconstruct(self) -> RealArray:
        M = np.repeat(self.offsets[:, None], self.n, axis=1).astype(np.float64)
        for term in self.terms:
            M[term.row] += term.evaluate(self.n)
        return M

    def weight_sum(self, row: int | None = None) -> float:
        terms = self.terms if row is None else [t for t in self.terms if t.row == row]
        return float(sum(abs(t.weight) for t in terms))

    @property
    def identity_weight(self) -> float | None:
        """Common offset when every row carries the same constant, else None."""
        if self.offsets.size and np.all(self.offsets == self.offsets[0]):
            return float(self.offsets[0])
        return None


def row_variation(M: npt.ArrayLike) -> RealArray:
    """sum_k |M(j, k) - M(j, k+1)| per row."""
    arr = np.asarray(M)
    result: RealArray = np.sum(np.abs(np.diff(arr, axis=1)), axis=1)
    return result


def _real_rows(M: SchurSymbol | npt.ArrayLike) -> RealArray:
    arr = np.asarray(M.entries if isinstance(M, SchurSymbol) else M)
    if not np.all(np.isfinite(arr)):
        raise DecompositionError("symbol has non-finite entries")
    if np.iscomplexobj(arr) and np.any(np.abs(arr.imag) > 0.0):
        raise DecompositionError("rows must be real to decompose into triangular truncations")
    result: RealArray = np.asarray(arr.real, dtype=np.float64)
    return result


def marcinkiewicz_decompose(M: SchurSymbol | npt.ArrayLike) -> MarcinkiewiczDecomposition:
    """Layer-cake each row into half-line indicators plus a constant.

    For a row r_0, ..., r_{n-1}:
        r_k = r_{n-1} + sum_{m < n-1} (r_m - r_{m+1}) 1[k <= m]
    so the weights of row j sum in absolute value to its variation.
    """
    R = _real_rows(M)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DecompositionError(f"expected a square symbol, got shape {R.shape}")
    n = R.shape[0]
    terms: list[TriangularTerm] = []
    for j in range(n):
        steps = R[j, :-1] - R[j, 1:]
        for m in np.flatnonzero(steps):
            terms.append(TriangularTerm(row=j, threshold=int(m), weight=float(steps[m])))
    return MarcinkiewiczDecomposition(n=n, terms=terms, offsets=R[:, -1].copy())


def marcinkiewicz_symbol(rows: npt.ArrayLike) -> SchurSymbol:
    """Real symbol of bounded row variation, tagged with its variation bound."""
    R = _real_rows(rows)
    bound = float(np.max(row_variation(R) + np.abs(R[:, -1]), initial=0.0))
    return SchurSymbol(
        R.astype(np.complex128), Provenance("marcinkiewicz", {"n": R.shape[0], "variation_bound": bound})
    )


# ---------------------------------------------------------------------------
# Dyadic blocks
# ---------------------------------------------------------------------------


def _points(points: npt.ArrayLike) -> RealArray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DimensionError(f"grid points must be (N,) or (N, dim), got {pts.shape}")
    return pts


def sup_distances(points: npt.ArrayLike) -> RealArray:
    """|x - y|_inf over all pairs of grid points."""
    pts = _points(points)
    result: RealArray = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)
    return result


@dataclass
class DyadicBlocks:
    """Pairwise disjoint blocks of index pairs keyed by scale k."""

    points: RealArray
    masks: dict[int, npt.NDArray[np.bool_]]

    def __post_init__(self) -> None:
        n = self.points.shape[0]
        seen = np.zeros((n, n), dtype=bool)
        for k, mask in self.masks.items():
            if mask.shape != (n, n):
                raise PartitionError(f"block {k} has shape {mask.shape}, expected {(n, n)}")
            overlap = seen & mask
            if overlap.any():
                raise PartitionError(
                    f"block {k} overlaps earlier blocks", {"pairs": int(overlap.sum())}
                )
            seen |= mask

    @property
    def scales(self) -> list[int]:
        return sorted(self.masks)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def union(self) -> npt.NDArray[np.bool_]:
        out = np.zeros((self.size, self.size), dtype=bool)
        for mask in self.masks.values():
            out |= mask
        return out

    def nonempty(self) -> list[int]:
        return [k for k in self.scales if self.masks[k].any()]

    @classmethod
    def custom(cls, points: npt.ArrayLike, masks: Mapping[int, npt.ArrayLike]) -> "DyadicBlocks":
        return cls(_points(points), {int(k): np.asarray(m, dtype=bool) for k, m in masks.items()})


def dyadic_blocks(points: npt.ArrayLike, scales: Sequence[int] | None = None) -> DyadicBlocks:
    """Delta_k = {(x, y): 2^k <= |x - y|_inf < 2^(k+1)} over the covered scales."""
    pts = _points(points)
    dist = sup_distances(pts)
    positive = dist[dist > 0.0]
    if scales is None:
        if positive.size == 0:
            return DyadicBlocks(pts, {})
        lo = math.floor(math.log2(float(positive.min())))
        hi = math.floor(math.log2(float(positive.max())))
        scales = range(lo, hi + 1)
    masks = {int(k): (dist >= 2.0**k) & (dist < 2.0 ** (k + 1)) for k in scales}
    return DyadicBlocks(pts, masks)


def assemble_from_blocks(
    blocks: DyadicBlocks, symbols: Mapping[int, SchurSymbol | npt.ArrayLike]
) -> SchurSymbol:
    """M = sum_k 1_{Delta_k} M_k."""
    n = blocks.size
    M = np.zeros((n, n), dtype=np.complex128)
    for k in blocks.nonempty():
        if k not in symbols:
            raise PartitionError(f"no symbol given for nonempty block {k}")
        Mk = symbols[k]
        entries = Mk.entries if isinstance(Mk, SchurSymbol) else as_matrix(Mk)
        if entries.shape != (n, n):
            raise DimensionError(f"symbol for block {k} has shape {entries.shape}")
        M = np.where(blocks.masks[k], entries, M)
    return SchurSymbol(M, Provenance("dyadic", {"n": n, "scales": blocks.nonempty()}))


def restrict_to_block(M: SchurSymbol, blocks: DyadicBlocks, k: int) -> SchurSymbol:
    if k not in blocks.masks:
        raise PartitionError(f"unknown block {k}")
    return restrict(M, blocks.masks[k])


def block_square_function(x: npt.ArrayLike, blocks: DyadicBlocks) -> VectorValuedElement:
    """sum_k 1_{Delta_k} x (x) delta_k with one Hilbert coordinate per block."""
    xm = as_matrix(x, "x")
    if xm.shape != (blocks.size, blocks.size):
        raise DimensionError(f"x has shape {xm.shape}, blocks have {blocks.size} points")
    scales = blocks.scales
    if not scales:
        return VectorValuedElement.zero(blocks.size, 1)
    coords = np.stack([np.where(blocks.masks[k], xm, 0.0) for k in scales], axis=2)
    return VectorValuedElement.from_coordinates(coords)


def dyadic_variation(M: SchurSymbol | npt.ArrayLike) -> float:
    """sup over j and k of the variation of |M(j+m, j)| + |M(j, j+m)| on 2^k <= |m| < 2^(k+1),
    plus sup |M|, on the integer grid 0..n-1.

    Each annulus is walked on its positive and its negative side separately.
    """
    arr = np.abs(np.asarray(M.entries if isinstance(M, SchurSymbol) else M))
    if not np.all(np.isfinite(arr)):
        raise DecompositionError("symbol has non-finite entries")
    n = arr.shape[0]
    best = 0.0
    k = 0
    while 2**k < n:
        for j in range(n):
            for sign in (1, -1):
                ms = [sign * m for m in range(2**k, 2 ** (k + 1)) if 0 <= j + sign * m < n]
                if len(ms) < 2:
                    continue
                vals = np.array([arr[j + m, j] + arr[j, j + m] for m in ms])
                best = max(best, float(np.sum(np.abs(np.diff(vals)))))
        k += 1
    return best + float(arr.max(initial=0.0))


# ---------------------------------------------------------------------------
# Grids in R^n: imaginary powers and the Hörmander-Mikhlin condition
# ---------------------------------------------------------------------------


def uniform_grid(shape: Sequence[int], spacing: float = 1.0, origin: float = 0.0) -> RealArray:
    """Points of a uniform grid in C order, shape (prod(shape), len(shape))."""
    axes = [origin + spacing * np.arange(s) for s in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    result: RealArray = np.stack([m.ravel() for m in mesh], axis=1)
    return result


def imaginary_power_symbol(points: npt.ArrayLike, s: float) -> SchurSymbol:
    """M(x, y) = |x - y|^(is) with Euclidean distance, diagonal 1."""
    pts = _points(points)
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    diag = dist == 0.0
    M = np.where(diag, 1.0, np.exp(1j * s * np.log(np.where(diag, 1.0, dist))))
    return SchurSymbol(M, Provenance("imaginary_power", {"n": pts.shape[0], "s": s}))


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    return [g for g in itertools.product(range(order + 1), repeat=dim) if sum(g) <= order]


def mikhlin_condition(
    M: SchurSymbol | npt.ArrayLike,
    grid_shape: Sequence[int],
    spacing: float,
    order: int | None = None,
) -> float:
    """sup over sampled x != y and |gamma| <= order of |x - y|^|gamma| (|d_x^gamma M| + |d_y^gamma M|).

    The gamma = 0 term contributes |M| once. Finite differences come from
    repeated np.gradient (central inside, one-sided at the boundary); pairs within
    order * spacing of the diagonal in the sup-norm are excluded since their
    stencils reach the diagonal.
    """
    arr = np.asarray(M.entries if isinstance(M, SchurSymbol) else M, dtype=np.complex128)
    shape = tuple(int(s) for s in grid_shape)
    dim = len(shape)
    order = dim // 2 + 1 if order is None else order
    npts = int(np.prod(shape))
    if arr.shape != (npts, npts):
        raise DimensionError(f"symbol shape {arr.shape} does not match grid {shape}")
    if min(shape) < order + 1:
        raise ResolutionError(
            f"grid {shape} too coarse for derivatives of order {order}", {"order": order}
        )
    pts = uniform_grid(shape, spacing)
    sup_dist = sup_distances(pts)
    valid = sup_dist > order * spacing + 1e-12 * spacing
    if not valid.any():
        raise ResolutionError("no sampled pairs away from the diagonal stencil")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("symbol samples must be finite (set diagonal values explicitly)")
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    field_ = arr.reshape(shape + shape)

    best = float(np.max(np.abs(arr[valid])))
    for gamma in _multi_indices(dim, order):
        g = sum(gamma)
        if g == 0:
            continue
        dx = field_
        dy = field_
        for axis, count in enumerate(gamma):
            for _ in range(count):
                dx = np.gradient(dx, spacing, axis=axis)
                dy = np.gradient(dy, spacing, axis=dim + axis)
        value = dist**g * (np.abs(dx.reshape(npts, npts)) + np.abs(dy.reshape(npts, npts)))
        best = max(best, float(np.max(value[valid])))
    return best


# ---------------------------------------------------------------------------
# Seeded random instances
# ---------------------------------------------------------------------------


def random_family(n: int, d: int, rng: np.random.Generator, real: bool = False) -> VectorFamily:
    vecs = rng.standard_normal((n, d)) if real else random_complex_matrix((n, d), rng)
    return VectorFamily.from_vectors(np.asarray(vecs, dtype=np.complex128))


def random_contraction(d_out: int, d_in: int, rng: np.random.Generator) -> ComplexMatrix:
    A = random_complex_matrix((d_out, d_in), rng)
    result: ComplexMatrix = A / max(float(np.linalg.norm(A, 2)), 1.0)
    return result


def random_monotone_table(n: int, lip: float, rng: np.random.Generator) -> tuple[FunctionTable, RealArray]:
    """Nondecreasing piecewise-linear f on n points of [0, 1] with slopes in [0, lip]."""
    grid = np.linspace(0.0, 1.0, n)
    slopes = lip * rng.uniform(0.0, 1.0, size=n - 1)
    slopes[rng.integers(n - 1)] = lip
    ys = np.concatenate([[0.0], np.cumsum(slopes * np.diff(grid))])
    return FunctionTable(grid, ys), grid


CONSTRUCTIONS = (
    "identity",
    "gh",
    "hilbert_divided",
    "one_sided",
    "triangular",
    "arazy",
    "beta",
    "holder",
    "arcsin",
    "imaginary_power",
    "marcinkiewicz",
)


def build_symbol(
    tag: str, params: Mapping[str, Any], n: int, rng: np.random.Generator
) -> SchurSymbol:
    """Seeded random instance of construction `tag` on n indices."""
    d = int(params.get("d", 2))
    if tag == "identity":
        return identity_symbol(n)
    if tag == "gh":
        u, up, w, wp = (random_family(n, d, rng) for _ in range(4))
        return gh_symbol(u, up, w, wp, random_contraction(d, d, rng))
    if tag == "hilbert_divided":
        return hilbert_divided_symbol(random_family(n, d, rng, real=True), random_contraction(d, d, rng))
    if tag == "one_sided":
        side = str(params.get("side", "row"))
        return one_sided_symbol(random_family(n, d, rng), random_family(n, d, rng), side)
    if tag == "triangular":
        a = rng.integers(-1, n + 1, size=n)
        return triangular_symbol(TriangularData(tuple(int(v) for v in a)))
    if tag in ("arazy", "beta"):
        f, grid = random_monotone_table(n, float(params.get("lip", 1.0)), rng)
        beta = 0.5 if tag == "arazy" else float(params.get("beta", 0.25))
        return beta_divided_symbol(f, beta, grid)
    if tag == "holder":
        alpha = float(params.get("alpha", 0.5))
        beta = float(params.get("beta", 0.5))
        grid = np.linspace(0.0, 1.0, n)
        scale = rng.uniform(0.5, 1.5)
        return holder_divided_symbol(FunctionTable(grid, scale * grid**alpha), alpha, beta, grid)
    if tag == "arcsin":
        return arcsin_symbol(random_family(n, d, rng, real=True), random_family(n, d, rng, real=True))
    if tag == "imaginary_power":
        return imaginary_power_symbol(np.arange(n, dtype=np.float64), float(params.get("s", 1.0)))
    if tag == "marcinkiewicz":
        jumps = rng.choice([-1.0, 0.0, 1.0], size=(n, n - 1), p=[0.2, 0.6, 0.2])
        rows = np.concatenate([np.zeros((n, 1)), np.cumsum(jumps, axis=1)], axis=1)
        return marcinkiewicz_symbol(rows / max(1.0, float(np.abs(rows).max())))
    raise UnknownConstructionError(f"unknown construction {tag!r}", {"known": list(CONSTRUCTIONS)})
