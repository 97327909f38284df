"""Vector-valued matrices sum x_jk e_jk (x) v_jk and their C_p, R_p, RC_p norms.

Elements are stored as a scalar part x (n x n) and a vector part v (n x n x d).
All norms go through Gram contractions in the standard basis of C^d:

    column Gram  G(k', k) = sum_j <v_jk', v_jk> conj(x_jk') x_jk
    row Gram     H(j', j) = sum_k <J v_j'k, J v_jk> x_j'k conj(x_jk)

so that ||xi||_{C_p} = ||G^(1/2)||_p and ||xi||_{R_p} = ||H^(1/2)||_p. For
p < 2 the RC_p norm is an infimum over splittings and is computed by a convex
solver that also returns a dual certificate.
"""

import logging
from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize

from .errors import ContractionError, DimensionError, PreconditionError
from .hilbert import VectorFamily, anchor_vector
from .linalg import (
    ComplexMatrix,
    as_matrix,
    check_exponent,
    conjugate_exponent,
    psd_sqrt,
    schatten_norm,
)

logger = logging.getLogger(__name__)

CONTRACTION_TOL = 1e-9
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class VectorValuedElement:
    """Matrix-indexed assignment (j, k) -> (x_jk, v_jk in C^d)."""

    scalars: ComplexMatrix  # (n, n)
    vectors: npt.NDArray[np.complex128]  # (n, n, d)
    labels: tuple[Hashable, ...] = ()

    def __post_init__(self) -> None:
        x = as_matrix(self.scalars, "scalar part")
        v = np.asarray(self.vectors, dtype=np.complex128)
        if x.shape[0] != x.shape[1]:
            raise DimensionError(f"scalar part must be square, got {x.shape}")
        if v.ndim != 3 or v.shape[:2] != x.shape:
            raise DimensionError(
                f"vector part must have shape {x.shape + ('d',)}, got {v.shape}"
            )
        labels = self.labels or tuple(range(x.shape[0]))
        if len(labels) != x.shape[0]:
            raise DimensionError("labels do not match the scalar part")
        object.__setattr__(self, "scalars", x)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def size(self) -> int:
        return int(self.scalars.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[2])

    def coordinates(self) -> npt.NDArray[np.complex128]:
        """Y[j, k, i] = x_jk v_jk[i]: the coordinate matrices Y_i in the fixed basis."""
        result: npt.NDArray[np.complex128] = self.scalars[:, :, None] * self.vectors
        return result

    @classmethod
    def from_coordinates(
        cls, Y: npt.ArrayLike, labels: Sequence[Hashable] = ()
    ) -> "VectorValuedElement":
        """Canonical element with x_jk = ||Y_jk|| and unit v_jk (0/0 = 0)."""
        coords = np.asarray(Y, dtype=np.complex128)
        if coords.ndim != 3:
            raise DimensionError(f"coordinates must be (n, n, d), got {coords.shape}")
        norms = np.linalg.norm(coords, axis=2)
        safe = np.where(norms > 0.0, norms, 1.0)
        return cls(
            scalars=norms.astype(np.complex128),
            vectors=coords / safe[:, :, None],
            labels=tuple(labels),
        )

    @classmethod
    def zero(cls, n: int, d: int) -> "VectorValuedElement":
        return cls(np.zeros((n, n), np.complex128), np.zeros((n, n, d), np.complex128))

    def is_zero(self) -> bool:
        return not bool(np.any(self.coordinates()))

    def __add__(self, other: "VectorValuedElement") -> "VectorValuedElement":
        _check_compatible(self, other)
        return VectorValuedElement.from_coordinates(
            self.coordinates() + other.coordinates(), self.labels
        )

    def scale(self, c: complex) -> "VectorValuedElement":
        return VectorValuedElement(c * self.scalars, self.vectors, self.labels)


def _check_compatible(a: VectorValuedElement, b: VectorValuedElement) -> None:
    if a.scalars.shape != b.scalars.shape or a.dim != b.dim:
        raise DimensionError(
            f"elements differ: {a.scalars.shape}/d={a.dim} vs {b.scalars.shape}/d={b.dim}"
        )


def element_from_family(x: npt.ArrayLike, vectors: npt.ArrayLike) -> VectorValuedElement:
    """Element with scalar part x and vector part given as an (n, n, d) array."""
    return VectorValuedElement(as_matrix(x), np.asarray(vectors, dtype=np.complex128))


def simple_tensor_sum(xs: Sequence[npt.ArrayLike], family: VectorFamily) -> VectorValuedElement:
    """sum_k x_k (x) u_k for square matrices x_k and the vectors of `family`."""
    if len(xs) != family.size:
        raise DimensionError(f"{len(xs)} matrices for a family of {family.size} vectors")
    mats = np.stack([as_matrix(x) for x in xs])  # (K, n, n)
    coords = np.einsum("kab,ki->abi", mats, family.vectors)
    return VectorValuedElement.from_coordinates(coords)


def adjoint(xi: VectorValuedElement) -> VectorValuedElement:
    """Conjugate-transposed scalars, J applied to the vectors."""
    return VectorValuedElement(
        xi.scalars.conj().T, np.conj(xi.vectors.transpose(1, 0, 2)), xi.labels
    )


def column_gram(xi: VectorValuedElement) -> ComplexMatrix:
    """G(k', k) = sum_j <v_jk', v_jk> conj(x_jk') x_jk."""
    Y = xi.coordinates()
    result: ComplexMatrix = np.einsum("jai,jbi->ab", Y.conj(), Y)
    return result


def row_gram(xi: VectorValuedElement) -> ComplexMatrix:
    """H(j', j) = sum_k <J v_j'k, J v_jk> x_j'k conj(x_jk)."""
    Y = xi.coordinates()
    result: ComplexMatrix = np.einsum("aki,bki->ab", Y, Y.conj())
    return result


def column_norm(xi: VectorValuedElement, p: float) -> float:
    """||(sum <u_j, u_k> x_j* x_k)^(1/2)||_p."""
    p = check_exponent(p)
    return schatten_norm(psd_sqrt(column_gram(xi)), p)


def row_norm(xi: VectorValuedElement, p: float) -> float:
    """||(sum <u_j, u_k> x_j x_k*)^(1/2)||_p with vectors paired through J."""
    p = check_exponent(p)
    return schatten_norm(psd_sqrt(row_gram(xi)), p)


def stacked_embedding(xi: VectorValuedElement, side: str = "column") -> ComplexMatrix:
    """Explicit nd x n column stack of the Y_i (or n x nd row stack)."""
    Y = xi.coordinates()
    n, d = xi.size, xi.dim
    if side == "column":
        result: ComplexMatrix = Y.transpose(2, 0, 1).reshape(d * n, n)
    elif side == "row":
        result = Y.transpose(0, 2, 1).reshape(n, d * n)
    else:
        raise ValueError(f"side must be 'column' or 'row', got {side!r}")
    return result


def rank_one_embedding(
    xi: VectorValuedElement, side: str = "column", anchor: npt.ArrayLike | None = None
) -> ComplexMatrix:
    """Stacked embedding tensored with the rank-one map given by a unit anchor.

    Column side: h -> |h><anchor|; row side: h -> |anchor><h|. The S_p norm
    of the result equals column_norm / row_norm for every unit anchor.
    """
    e = anchor_vector(xi.dim) if anchor is None else np.asarray(anchor, dtype=np.complex128).ravel()
    if e.size == 0 or abs(float(np.linalg.norm(e)) - 1.0) > UNIT_TOL:
        raise PreconditionError(f"anchor must be a unit vector, got norm {np.linalg.norm(e):.6g}")
    stack = stacked_embedding(xi, side)
    result: ComplexMatrix
    if side == "column":
        result = np.kron(stack, e.conj()[None, :])
    else:
        result = np.kron(stack, e[:, None])
    return result


def duality_bracket(xi: VectorValuedElement, eta: VectorValuedElement) -> complex:
    """<xi, eta> = sum of tr(x y) <J(w), u> over simple-tensor terms."""
    _check_compatible(xi, eta)
    # only e_jk e_kj terms survive the trace
    return complex(np.einsum("jki,kji->", xi.coordinates(), eta.coordinates()))


def apply_contraction(xi: VectorValuedElement, Lambda: npt.ArrayLike) -> VectorValuedElement:
    """v_jk -> Lambda v_jk, scalars fixed."""
    op = np.asarray(Lambda, dtype=np.complex128)
    if op.shape != (xi.dim, xi.dim):
        raise DimensionError(f"operator must be {xi.dim}x{xi.dim}, got {op.shape}")
    return VectorValuedElement(xi.scalars, xi.vectors @ op.T, xi.labels)


def _check_contractions(ops: npt.NDArray[np.complex128], count: int, dim: int) -> None:
    if ops.shape != (count, dim, dim):
        raise DimensionError(f"expected {count} operators of size {dim}x{dim}, got {ops.shape}")
    norms = np.linalg.norm(ops, ord=2, axis=(1, 2))
    bad = np.flatnonzero(norms > 1.0 + CONTRACTION_TOL)
    if bad.size:
        raise ContractionError(
            f"operators {bad.tolist()} have norm above 1",
            {"norms": norms[bad].tolist()},
        )


def row_contraction_per_index(
    xi: VectorValuedElement, contractions: Sequence[npt.ArrayLike] | npt.ArrayLike
) -> VectorValuedElement:
    """v_jk -> Lambda_j v_jk with one contraction per row index; C_p norm does not increase."""
    ops = np.asarray(contractions, dtype=np.complex128)
    _check_contractions(ops, xi.size, xi.dim)
    return VectorValuedElement(xi.scalars, np.einsum("jab,jkb->jka", ops, xi.vectors), xi.labels)


def column_contraction_per_index(
    xi: VectorValuedElement, contractions: Sequence[npt.ArrayLike] | npt.ArrayLike
) -> VectorValuedElement:
    """v_jk -> Lambda_k v_jk with one contraction per column index; R_p norm does not increase."""
    ops = np.asarray(contractions, dtype=np.complex128)
    _check_contractions(ops, xi.size, xi.dim)
    return VectorValuedElement(xi.scalars, np.einsum("kab,jkb->jka", ops, xi.vectors), xi.labels)


# ---------------------------------------------------------------------------
# RC_p norms
# ---------------------------------------------------------------------------


@dataclass
class SolverSettings:
    """Settings of the p < 2 splitting solver."""

    max_iter: int = 200
    restarts: int = 3
    gap_tol: float = 2e-2
    seed: int = 0
    smoothing: tuple[float, ...] = (1e-3, 1e-6)


@dataclass
class RCNormResult:
    """Certified interval for an RC_p norm."""

    p: float
    lower: float
    upper: float
    certified: bool
    branch: str  # "intersection" (p >= 2) or "sum" (p < 2)
    iterations: int = 0
    column_part: float = 0.0
    row_part: float = 0.0
    history: list[float] = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.upper

    @property
    def gap(self) -> float:
        if self.upper == 0.0:
            return 0.0
        return (self.upper - self.lower) / self.upper


def rc_norm_certified(
    xi: VectorValuedElement, p: float, settings: SolverSettings | None = None
) -> RCNormResult:
    """RC_p norm with a dual lower bound; exact for p >= 2."""
    p = check_exponent(p, strict=True)
    if p >= 2.0:
        col = column_norm(xi, p)
        row = row_norm(xi, p)
        value = max(col, row)
        return RCNormResult(
            p=p, lower=value, upper=value, certified=True, branch="intersection",
            column_part=col, row_part=row,
        )
    return _SplittingSolver(xi, p, settings or SolverSettings()).solve()


def rc_norm(xi: VectorValuedElement, p: float, settings: SolverSettings | None = None) -> float:
    """||xi||_{RC_p}: max of R_p and C_p for p >= 2, splitting infimum for p < 2."""
    result = rc_norm_certified(xi, p, settings)
    if not result.certified:
        logger.warning(
            "RC_%g norm not certified: interval [%.6g, %.6g], gap %.3g",
            p, result.lower, result.upper, result.gap,
        )
    return result.upper


def _smoothed_schatten(
    S: ComplexMatrix, p: float, eps: float
) -> tuple[float, ComplexMatrix]:
    """(sum (s^2 + eps^2)^(p/2))^(1/p) and its dual-norming gradient (shape of S^T)."""
    U, s, Vh = np.linalg.svd(S, full_matrices=False)
    if eps == 0.0 and (s.size == 0 or s[0] == 0.0):
        return 0.0, np.zeros(S.shape[::-1], dtype=np.complex128)
    t = np.sqrt(s**2 + eps**2)
    scale = float(t.max())
    value = scale * float(np.sum((t / scale) ** p) ** (1.0 / p))
    weights = s * (t / value) ** (p - 2.0) / value
    grad: ComplexMatrix = (Vh.conj().T * weights) @ U.conj().T
    return value, grad


class _SplittingSolver:
    """Minimizes ||A||_{C_p} + ||Y - A||_{R_p} over coordinate splittings A.

    Splitting the full coordinates x_jk v_jk, rather than only the scalar part
    against a shared vector part, searches every decomposition of the sum, so
    the minimum is the RC_p norm itself.

    Each restart runs L-BFGS on a smoothed objective with decreasing smoothing;
    the gradients at the final point give RC_{p'} test elements whose bracket
    with xi lower-bounds the norm.
    """

    def __init__(self, xi: VectorValuedElement, p: float, settings: SolverSettings) -> None:
        self.xi = xi
        self.p = p
        self.q = conjugate_exponent(p)
        self.settings = settings
        self.Y = xi.coordinates()
        self.n = xi.size
        self.d = xi.dim
        self.size = self.Y.size

    def _colstack(self, A: npt.NDArray[np.complex128]) -> ComplexMatrix:
        result: ComplexMatrix = A.transpose(2, 0, 1).reshape(self.d * self.n, self.n)
        return result

    def _rowstack(self, B: npt.NDArray[np.complex128]) -> ComplexMatrix:
        result: ComplexMatrix = B.transpose(0, 2, 1).reshape(self.n, self.d * self.n)
        return result

    def _unpack(self, z: npt.NDArray[np.float64]) -> npt.NDArray[np.complex128]:
        A: npt.NDArray[np.complex128] = (z[: self.size] + 1j * z[self.size :]).reshape(self.Y.shape)
        return A

    def _pack(self, A: npt.NDArray[np.complex128]) -> npt.NDArray[np.float64]:
        return np.concatenate([A.real.ravel(), A.imag.ravel()])

    def _parts(
        self, A: npt.NDArray[np.complex128], eps: float
    ) -> tuple[float, float, npt.NDArray[np.complex128], npt.NDArray[np.complex128]]:
        """Values and functionals (indexed like A) of both parts."""
        n, d = self.n, self.d
        fc, Dc = _smoothed_schatten(self._colstack(A), self.p, eps)
        fr, Dr = _smoothed_schatten(self._rowstack(self.Y - A), self.p, eps)
        Fc = Dc.reshape(n, d, n).transpose(2, 0, 1)
        Fr = Dr.reshape(d, n, n).transpose(2, 1, 0)
        return fc, fr, Fc, Fr

    def _objective(self, eps: float):  # type: ignore[no-untyped-def]
        def fun(z: npt.NDArray[np.float64]) -> tuple[float, npt.NDArray[np.float64]]:
            fc, fr, Fc, Fr = self._parts(self._unpack(z), eps)
            F = Fc - Fr
            return fc + fr, np.concatenate([F.real.ravel(), -F.imag.ravel()])

        return fun

    def _exact_value(self, A: npt.NDArray[np.complex128]) -> tuple[float, float]:
        col = schatten_norm(self._colstack(A), self.p)
        row = schatten_norm(self._rowstack(self.Y - A), self.p)
        return col, row

    def _certificate(self, W: npt.NDArray[np.complex128]) -> float:
        """|<xi, W>| / ||W||_{RC_p'} for a test element given by its coordinates."""
        eta = VectorValuedElement.from_coordinates(W)
        dual = max(column_norm(eta, self.q), row_norm(eta, self.q))
        if dual == 0.0:
            return 0.0
        return abs(complex(np.einsum("jki,kji->", self.Y, W))) / dual

    def _starts(self) -> list[npt.NDArray[np.complex128]]:
        rng = np.random.default_rng(self.settings.seed)
        starts = [self.Y.copy()]
        for _ in range(self.settings.restarts):
            weights = rng.uniform(0.0, 1.0, size=(self.n, self.n))
            starts.append(weights[:, :, None] * self.Y)
        return starts

    def solve(self) -> RCNormResult:
        p = self.p
        scale = float(np.linalg.norm(self.Y))
        if scale == 0.0:
            return RCNormResult(p=p, lower=0.0, upper=0.0, certified=True, branch="sum")

        zero = np.zeros_like(self.Y)
        col_only, _ = self._exact_value(self.Y)
        _, row_only = self._exact_value(zero)
        best = min(col_only, row_only)
        best_parts = (col_only, 0.0) if col_only <= row_only else (0.0, row_only)
        lower = 0.0
        iterations = 0
        history: list[float] = []

        for start in self._starts():
            z = self._pack(start)
            for eps_rel in self.settings.smoothing:
                res = minimize(
                    self._objective(eps_rel * scale),
                    z,
                    jac=True,
                    method="L-BFGS-B",
                    options={"maxiter": self.settings.max_iter},
                )
                z = res.x
                iterations += int(res.nit)
            A = self._unpack(z)
            col, row = self._exact_value(A)
            history.append(col + row)
            if col + row < best:
                best, best_parts = col + row, (col, row)

            _, _, Fc, Fr = self._parts(A, self.settings.smoothing[-1] * scale)
            for F in (Fc, Fr, 0.5 * (Fc + Fr)):
                lower = max(lower, self._certificate(F.transpose(1, 0, 2)))

        lower = min(lower, best)
        certified = (best - lower) <= self.settings.gap_tol * best
        logger.debug(
            "RC_%g splitting: upper %.8g lower %.8g after %d iterations", p, best, lower, iterations
        )
        return RCNormResult(
            p=p,
            lower=lower,
            upper=best,
            certified=certified,
            branch="sum",
            iterations=iterations,
            column_part=best_parts[0],
            row_part=best_parts[1],
            history=history,
        )


def hilbert_schmidt(xi: VectorValuedElement) -> float:
    """sqrt(sum |x_jk|^2 ||v_jk||^2): the common value of all three norms at p = 2."""
    return float(np.linalg.norm(xi.coordinates()))


def norm_triple(xi: VectorValuedElement, p: float) -> tuple[float, float, float]:
    """(column, row, rc) norms at p."""
    return column_norm(xi, p), row_norm(xi, p), rc_norm(xi, p)


__all__ = [
    "RCNormResult",
    "SolverSettings",
    "VectorValuedElement",
    "adjoint",
    "apply_contraction",
    "column_contraction_per_index",
    "column_gram",
    "column_norm",
    "duality_bracket",
    "element_from_family",
    "hilbert_schmidt",
    "norm_triple",
    "rc_norm",
    "rc_norm_certified",
    "row_contraction_per_index",
    "row_gram",
    "row_norm",
    "simple_tensor_sum",
    "stacked_embedding",
]
