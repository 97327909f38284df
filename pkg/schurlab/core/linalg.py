"""Dense complex linear algebra: singular spectra, PSD roots, Schatten norms."""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, InvalidExponentError, NotPSDError

ComplexMatrix = npt.NDArray[np.complex128]

TOL_SVD = 1e-10  # relative to the operator norm


def psd_tolerance(A: npt.ArrayLike) -> float:
    """Tolerance used to decide positivity: 1e-8 * (1 + ||A||_inf)."""
    arr = np.asarray(A)
    if arr.size == 0:
        return 1e-8
    return 1e-8 * (1.0 + float(np.linalg.norm(arr, 2)))


def as_matrix(A: npt.ArrayLike, name: str = "matrix") -> ComplexMatrix:
    """Coerce input to a finite 2-D complex array."""
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    return arr


def adjoint(A: npt.ArrayLike) -> ComplexMatrix:
    """Conjugate transpose."""
    return as_matrix(A).conj().T


def check_exponent(p: float, lower: float = 1.0, strict: bool = False) -> float:
    """Validate a Schatten exponent; math.inf is a distinguished value."""
    p = float(p)
    if math.isnan(p) or p < lower or (strict and (p == lower or math.isinf(p))):
        bound = f"({lower}, inf)" if strict else f"[{lower}, inf]"
        raise InvalidExponentError(f"exponent p={p} outside {bound}", {"p": p})
    return p


def conjugate_exponent(p: float) -> float:
    """Hölder conjugate p' = p/(p-1), with 1 <-> inf."""
    p = check_exponent(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values (nonincreasing) with left and right singular vectors."""

    values: npt.NDArray[np.float64]
    left: ComplexMatrix
    right: ComplexMatrix  # columns are right singular vectors (V, not V*)

    def reconstruct(self) -> ComplexMatrix:
        return (self.left * self.values) @ self.right.conj().T

    @property
    def top(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0


def singular_spectrum(A: npt.ArrayLike) -> SingularSpectrum:
    """Thin SVD of A."""
    arr = as_matrix(A)
    if arr.size == 0:
        m, n = arr.shape
        return SingularSpectrum(
            np.zeros(0), np.zeros((m, 0), np.complex128), np.zeros((n, 0), np.complex128)
        )
    U, s, Vh = np.linalg.svd(arr, full_matrices=False)
    return SingularSpectrum(values=s, left=U, right=Vh.conj().T)


def schatten_from_values(values: npt.NDArray[np.float64], p: float) -> float:
    """l_p norm of a vector of singular values (or eigenvalues of |A|)."""
    p = check_exponent(p)
    s = np.abs(np.asarray(values, dtype=np.float64))
    if s.size == 0:
        return 0.0
    top = float(s.max())
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    # scale by the top value to keep s**p in range
    return top * float(np.sum((s / top) ** p) ** (1.0 / p))


def schatten_norm(A: npt.ArrayLike, p: float) -> float:
    """Schatten p-norm (sum sigma_i^p)^(1/p), max sigma_i for p = inf."""
    p = check_exponent(p)
    arr = as_matrix(A)
    if arr.size == 0:
        return 0.0
    return schatten_from_values(np.linalg.svd(arr, compute_uv=False), p)


def psd_sqrt(A: npt.ArrayLike) -> ComplexMatrix:
    """Hermitian PSD square root; eigenvalues within -tol_psd are clamped to 0."""
    arr = as_matrix(A)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"psd_sqrt needs a square matrix, got {arr.shape}")
    if arr.size == 0:
        return arr.copy()
    tol = psd_tolerance(arr)
    if np.max(np.abs(arr - arr.conj().T)) > tol:
        raise NotPSDError("matrix is not Hermitian", {"tol": tol})
    herm = 0.5 * (arr + arr.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    if evals[0] < -tol:
        raise NotPSDError(
            f"smallest eigenvalue {evals[0]:.3e} below -{tol:.1e}",
            {"min_eigenvalue": float(evals[0]), "tol": tol},
        )
    root = np.sqrt(np.clip(evals, 0.0, None))
    result: ComplexMatrix = (evecs * root) @ evecs.conj().T
    return result


def psd_schatten_root(G: npt.ArrayLike, p: float) -> float:
    """||G^(1/2)||_p for a PSD G, read off its eigenvalues."""
    arr = as_matrix(G)
    if arr.size == 0:
        return 0.0
    tol = psd_tolerance(arr)
    evals = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
    if evals[0] < -tol:
        raise NotPSDError(f"smallest eigenvalue {evals[0]:.3e} below -{tol:.1e}")
    return schatten_from_values(np.sqrt(np.clip(evals, 0.0, None)), p)


def trace_pairing(A: npt.ArrayLike, B: npt.ArrayLike) -> complex:
    """tr(AB) for A m x n and B n x m."""
    a = as_matrix(A, "A")
    b = as_matrix(B, "B")
    if a.shape[1] != b.shape[0] or a.shape[0] != b.shape[1]:
        raise DimensionError(f"trace pairing needs m x n and n x m, got {a.shape} and {b.shape}")
    return complex(np.einsum("ij,ji->", a, b))


def dual_norming(A: npt.ArrayLike, p: float, tie_tol: float = 1e-12) -> ComplexMatrix:
    """Matrix D with tr(A D) = ||A||_p and ||D||_{p'} = 1 (zero for A = 0).

    At p = inf the top singular subspace is averaged; at p = 1 the partial
    isometry on the support of A is returned.
    """
    p = check_exponent(p)
    spec = singular_spectrum(A)
    s = spec.values
    m, n = np.shape(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, m), dtype=np.complex128)
    V, U = spec.right, spec.left
    if math.isinf(p):
        top = s >= s[0] * (1.0 - tie_tol)
        k = int(np.count_nonzero(top))
        result: ComplexMatrix = (V[:, top] @ U[:, top].conj().T) / k
        return result
    if p == 1.0:
        keep = s > s[0] * TOL_SVD
        result = V[:, keep] @ U[:, keep].conj().T
        return result
    norm = schatten_from_values(s, p)
    weights = (s / norm) ** (p - 1.0)
    result = (V * weights) @ U.conj().T
    return result


def random_unitary(n: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar unitary via QR of a complex Ginibre matrix with phase correction."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    result: ComplexMatrix = Q * phases
    return result


def random_complex_matrix(shape: tuple[int, ...], rng: np.random.Generator) -> ComplexMatrix:
    """Complex gaussian array with unit-variance entries."""
    result: ComplexMatrix = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return result
